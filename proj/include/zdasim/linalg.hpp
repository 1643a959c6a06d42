#pragma once

#include <complex>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace zdasim::lin {

/// Singular-value cutoff used by every rank/kernel decision in the library.
/// A singular value sigma counts toward the rank iff
/// sigma > max(rel_tol * sigma_max, abs_tol).
struct RankPolicy {
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;

    double threshold(double sigma_max) const;
};

/// Orthonormal-basis representation of a linear subspace of R^d.
/// An empty basis is the zero subspace. Bases are re-orthonormalized by
/// every operation that produces a Subspace, so tolerance drift does not
/// accumulate across recursions.
class Subspace {
public:
    Subspace() = default;
    explicit Subspace(int ambient_dim);

    /// Orthonormal span of the given columns (rank-revealing; near-dependent
    /// columns are dropped per policy).
    static Subspace span_of(const Eigen::MatrixXd& columns, const RankPolicy& policy = {});
    static Subspace zero(int ambient_dim);

    int ambient_dim() const { return ambient_dim_; }
    int dim() const { return static_cast<int>(basis_.cols()); }
    const Eigen::MatrixXd& basis() const { return basis_; }

    /// Relative membership test: ||v - P v|| <= tol * ||v||.
    bool contains(const Eigen::VectorXd& v, double tol = 1e-8) const;

    Eigen::MatrixXd projector() const;
    bool is_orthonormal(double tol = 1e-10) const;

private:
    int ambient_dim_ = 0;
    Eigen::MatrixXd basis_;  // ambient_dim_ x dim, orthonormal columns

    friend Subspace nullspace_basis(const Eigen::MatrixXd&, const RankPolicy&);
};

/// Orthonormal basis of ker(M).
Subspace nullspace_basis(const Eigen::MatrixXd& M, const RankPolicy& policy = {});

/// U cap W, both subspaces of the same ambient space.
Subspace subspace_intersection(const Subspace& U, const Subspace& W, const RankPolicy& policy = {});

/// Image T * S of a subspace under a linear map, re-orthonormalized.
Subspace map_subspace(const Eigen::MatrixXd& T, const Subspace& S, const RankPolicy& policy = {});

/// Spectral-norm distance between orthogonal projectors, in [0, 1].
/// Subspaces of different dimension are at distance 1.
double subspace_distance(const Subspace& U, const Subspace& W);

/// e^{M t}.
Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& M, double t);

/// One invariant zero of the system pencil [[eta I - A, B], [-C, D]]
/// with a kernel witness [state_dir; input_dir]. The attack signal that
/// realizes the zero is g = -input_dir.
struct PencilZero {
    std::complex<double> eta;
    Eigen::VectorXcd state_dir;
    Eigen::VectorXcd input_dir;
};

struct PencilZeroResult {
    /// Finite eta where rank P(eta) drops below the pencil's normal rank,
    /// each with a verified kernel witness. Complex-conjugate pairs are
    /// both reported.
    std::vector<PencilZero> zeros;
    /// True when the pencil kernel is nontrivial for every eta (normal
    /// column-rank deficiency); use pencil_kernel_at to extract witnesses
    /// at any requested rate.
    bool degenerate = false;
    /// A rank decision fell within the 10x band around the cutoff.
    bool uncertain = false;
    int normal_rank = 0;
};

/// Finite invariant zeros of (A, B, C, D). Candidates come from the QZ
/// eigenvalues of the (row-compressed when non-square) square pencil and
/// the eigenvalues of A; every candidate is verified by a rank test at
/// that eta before it is reported.
PencilZeroResult pencil_zeros(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                              const Eigen::MatrixXd& C, const Eigen::MatrixXd& D,
                              const RankPolicy& policy = {});

/// Kernel basis of the pencil at a fixed eta, split into (state, input)
/// parts. Empty when the kernel is trivial.
std::vector<std::pair<Eigen::VectorXcd, Eigen::VectorXcd>>
pencil_kernel_at(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                 const Eigen::MatrixXd& C, const Eigen::MatrixXd& D,
                 std::complex<double> eta, const RankPolicy& policy = {});

}  // namespace zdasim::lin
