#include "zdasim/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

namespace zdasim::lin {

namespace {

void require_finite(const Eigen::MatrixXd& M, const char* what) {
    if (!M.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite entries");
}

}  // namespace

double RankPolicy::threshold(double sigma_max) const {
    return std::max(rel_tol * sigma_max, abs_tol);
}

Subspace::Subspace(int ambient_dim) : ambient_dim_(ambient_dim) {
    if (ambient_dim <= 0) throw std::invalid_argument("Subspace: ambient dimension must be positive");
    basis_.resize(ambient_dim, 0);
}

Subspace Subspace::zero(int ambient_dim) { return Subspace(ambient_dim); }

Subspace Subspace::span_of(const Eigen::MatrixXd& columns, const RankPolicy& policy) {
    require_finite(columns, "span_of");
    Subspace s(static_cast<int>(columns.rows()));
    if (columns.cols() == 0) return s;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(columns, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    const double cut = policy.threshold(sv.size() ? sv(0) : 0.0);
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > cut) ++rank;
    s.basis_ = svd.matrixU().leftCols(rank);
    return s;
}

bool Subspace::contains(const Eigen::VectorXd& v, double tol) const {
    if (v.size() != ambient_dim_) throw std::invalid_argument("Subspace::contains: dimension mismatch");
    const double nv = v.norm();
    if (nv == 0.0) return true;
    Eigen::VectorXd residual = v - basis_ * (basis_.transpose() * v);
    return residual.norm() <= tol * nv;
}

Eigen::MatrixXd Subspace::projector() const { return basis_ * basis_.transpose(); }

bool Subspace::is_orthonormal(double tol) const {
    if (basis_.cols() == 0) return true;
    Eigen::MatrixXd G = basis_.transpose() * basis_;
    return (G - Eigen::MatrixXd::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff() <= tol;
}

Subspace nullspace_basis(const Eigen::MatrixXd& M, const RankPolicy& policy) {
    require_finite(M, "nullspace_basis");
    if (M.rows() < 1 || M.cols() < 1)
        throw std::invalid_argument("nullspace_basis: matrix must be nonempty");
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double cut = policy.threshold(sv.size() ? sv(0) : 0.0);
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > cut) ++rank;
    Subspace s(static_cast<int>(M.cols()));
    s.basis_ = svd.matrixV().rightCols(M.cols() - rank);
    return s;
}

Subspace subspace_intersection(const Subspace& U, const Subspace& W, const RankPolicy& policy) {
    if (U.ambient_dim() != W.ambient_dim())
        throw std::invalid_argument("subspace_intersection: ambient dimensions differ");
    if (U.dim() == 0 || W.dim() == 0) return Subspace::zero(U.ambient_dim());

    // Kernel vectors [a; b] of [U  -W] satisfy U a = W b, the common vectors.
    Eigen::MatrixXd stacked(U.ambient_dim(), U.dim() + W.dim());
    stacked << U.basis(), -W.basis();
    Subspace k = nullspace_basis(stacked, policy);
    if (k.dim() == 0) return Subspace::zero(U.ambient_dim());
    Eigen::MatrixXd common = U.basis() * k.basis().topRows(U.dim());
    return Subspace::span_of(common, policy);
}

Subspace map_subspace(const Eigen::MatrixXd& T, const Subspace& S, const RankPolicy& policy) {
    require_finite(T, "map_subspace");
    if (T.cols() != S.ambient_dim())
        throw std::invalid_argument("map_subspace: dimension mismatch");
    if (S.dim() == 0) return Subspace::zero(static_cast<int>(T.rows()));
    return Subspace::span_of(T * S.basis(), policy);
}

double subspace_distance(const Subspace& U, const Subspace& W) {
    if (U.ambient_dim() != W.ambient_dim())
        throw std::invalid_argument("subspace_distance: ambient dimensions differ");
    if (U.dim() != W.dim()) return 1.0;
    if (U.dim() == 0) return 0.0;
    Eigen::MatrixXd diff = U.projector() - W.projector();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(diff);
    return svd.singularValues()(0);
}

Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& M, double t) {
    require_finite(M, "matrix_exponential");
    if (M.rows() != M.cols()) throw std::invalid_argument("matrix_exponential: matrix must be square");
    if (!std::isfinite(t)) throw std::invalid_argument("matrix_exponential: non-finite time");
    if (t == 0.0) return Eigen::MatrixXd::Identity(M.rows(), M.cols());
    return (M * t).exp();
}

namespace {

Eigen::MatrixXcd pencil_at(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                           const Eigen::MatrixXd& C, const Eigen::MatrixXd& D,
                           std::complex<double> eta) {
    const int n = static_cast<int>(A.rows());
    const int m = static_cast<int>(B.cols());
    const int p = static_cast<int>(C.rows());
    Eigen::MatrixXcd P(n + p, n + m);
    P.topLeftCorner(n, n) = -A.cast<std::complex<double>>();
    P.topLeftCorner(n, n).diagonal().array() += eta;
    P.topRightCorner(n, m) = B.cast<std::complex<double>>();
    if (p > 0) {
        P.bottomLeftCorner(p, n) = -C.cast<std::complex<double>>();
        P.bottomRightCorner(p, m) = D.cast<std::complex<double>>();
    }
    return P;
}

struct RankReport {
    int rank = 0;
    double sigma_max = 0.0;
    bool borderline = false;
};

RankReport complex_rank(const Eigen::MatrixXcd& M, const RankPolicy& policy) {
    RankReport r;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(M);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0) return r;
    r.sigma_max = sv(0);
    const double cut = policy.threshold(r.sigma_max);
    for (int i = 0; i < sv.size(); ++i) {
        if (sv(i) > cut) ++r.rank;
        if (sv(i) > cut / 10.0 && sv(i) < cut * 10.0) r.borderline = true;
    }
    return r;
}

// Deterministic pseudo-random doubles in (-1, 1) for the row compression
// and rank probes; fixed seed keeps every run byte-identical.
class SplitMix {
public:
    explicit SplitMix(std::uint64_t seed) : state_(seed) {}
    double next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        z ^= z >> 31;
        return 2.0 * (static_cast<double>(z >> 11) / 9007199254740992.0) - 1.0;
    }

private:
    std::uint64_t state_;
};

}  // namespace

std::vector<std::pair<Eigen::VectorXcd, Eigen::VectorXcd>>
pencil_kernel_at(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                 const Eigen::MatrixXd& C, const Eigen::MatrixXd& D,
                 std::complex<double> eta, const RankPolicy& policy) {
    const int n = static_cast<int>(A.rows());
    const int m = static_cast<int>(B.cols());
    std::vector<std::pair<Eigen::VectorXcd, Eigen::VectorXcd>> out;

    Eigen::MatrixXcd P = pencil_at(A, B, C, D, eta);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(P, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double cut = policy.threshold(sv.size() ? sv(0) : 0.0);
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > cut) ++rank;
    const int kdim = n + m - rank;
    for (int k = 0; k < kdim; ++k) {
        Eigen::VectorXcd v = svd.matrixV().col(n + m - 1 - k);
        out.emplace_back(v.head(n), v.tail(m));
    }
    return out;
}

PencilZeroResult pencil_zeros(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                              const Eigen::MatrixXd& C, const Eigen::MatrixXd& D,
                              const RankPolicy& policy) {
    require_finite(A, "pencil_zeros(A)");
    require_finite(B, "pencil_zeros(B)");
    require_finite(C, "pencil_zeros(C)");
    require_finite(D, "pencil_zeros(D)");
    const int n = static_cast<int>(A.rows());
    const int m = static_cast<int>(B.cols());
    const int p = static_cast<int>(C.rows());
    if (A.cols() != n || B.rows() != n || (p > 0 && C.cols() != n) ||
        D.rows() != p || (p > 0 && m > 0 && D.cols() != m))
        throw std::invalid_argument("pencil_zeros: inconsistent dimensions");

    PencilZeroResult result;
    const double scale = 1.0 + A.norm() + B.norm() + C.norm() + D.norm();

    // Normal rank from probes at generic complex eta.
    SplitMix rng(0x7a5a5e2d1u);
    for (int probe = 0; probe < 3; ++probe) {
        std::complex<double> eta(rng.next() * scale, (0.25 + 0.5 * std::abs(rng.next())) * scale);
        RankReport r = complex_rank(pencil_at(A, B, C, D, eta), policy);
        result.normal_rank = std::max(result.normal_rank, r.rank);
    }
    result.degenerate = result.normal_rank < n + m;

    // Candidate etas: eigenvalues of A plus the finite QZ eigenvalues of the
    // square (or randomly row-compressed) pencil.
    std::vector<std::complex<double>> candidates;
    {
        Eigen::EigenSolver<Eigen::MatrixXd> es(A);
        for (int i = 0; i < n; ++i) candidates.push_back(es.eigenvalues()(i));
    }
    if (n + m >= 1) {
        Eigen::MatrixXd Mfull(n + p, n + m), Nfull = Eigen::MatrixXd::Zero(n + p, n + m);
        Mfull.topLeftCorner(n, n) = A;
        Mfull.topRightCorner(n, m) = B;
        if (p > 0) {
            Mfull.bottomLeftCorner(p, n) = C;
            Mfull.bottomRightCorner(p, m) = D;
        }
        Nfull.topLeftCorner(n, n).setIdentity();

        Eigen::MatrixXd Msq, Nsq;
        if (p == m) {
            Msq = Mfull;
            Nsq = Nfull;
        } else {
            // Two-sided deterministic compression to a square pencil; true
            // zeros survive (a column/row kernel stays a kernel), spurious
            // eigenvalues are removed by the rank verification below.
            Eigen::MatrixXd W(n + m, n + p);
            for (int i = 0; i < W.rows(); ++i)
                for (int j = 0; j < W.cols(); ++j) W(i, j) = rng.next();
            if (p > m) {
                Msq = W * Mfull;
                Nsq = W * Nfull;
            } else {
                Msq = Mfull * W.transpose();
                Nsq = Nfull * W.transpose();
            }
        }
        Eigen::GeneralizedEigenSolver<Eigen::MatrixXd> ges;
        ges.compute(Msq, Nsq, false);
        const auto& alphas = ges.alphas();
        const auto& betas = ges.betas();
        for (int i = 0; i < alphas.size(); ++i) {
            if (std::abs(betas(i)) > 1e-12 * (1.0 + std::abs(alphas(i))))
                candidates.push_back(alphas(i) / betas(i));
        }
    }

    // Verify: a zero is where the rank drops below the normal rank.
    std::vector<std::complex<double>> accepted;
    for (std::complex<double> eta : candidates) {
        if (!std::isfinite(eta.real()) || !std::isfinite(eta.imag())) continue;
        if (std::abs(eta.imag()) <= 1e-8 * (1.0 + std::abs(eta.real()))) eta.imag(0.0);
        bool duplicate = false;
        for (const auto& seen : accepted)
            if (std::abs(eta - seen) <= 1e-7 * (1.0 + std::abs(seen))) duplicate = true;
        if (duplicate) continue;

        Eigen::MatrixXcd P = pencil_at(A, B, C, D, eta);
        RankReport r = complex_rank(P, policy);
        result.uncertain = result.uncertain || r.borderline;
        if (r.rank >= result.normal_rank) continue;

        // Kernel witness with a nonzero state part.
        auto kernel = pencil_kernel_at(A, B, C, D, eta, policy);
        const Eigen::VectorXcd* best = nullptr;
        const Eigen::VectorXcd* best_input = nullptr;
        double best_norm = 1e-8;
        for (const auto& [z, w] : kernel) {
            const double zn = z.norm() / std::max(1e-300, std::hypot(z.norm(), w.norm()));
            if (zn > best_norm) {
                best_norm = zn;
                best = &z;
                best_input = &w;
            }
        }
        if (!best) continue;
        accepted.push_back(eta);
        result.zeros.push_back(PencilZero{eta, *best, *best_input});
    }

    std::sort(result.zeros.begin(), result.zeros.end(), [](const PencilZero& a, const PencilZero& b) {
        if (a.eta.real() != b.eta.real()) return a.eta.real() < b.eta.real();
        return a.eta.imag() < b.eta.imag();
    });
    return result;
}

}  // namespace zdasim::lin
