#include "inls/operator.hpp"

#include <lapacke.h>

#include <cmath>
#include <string>

namespace inls {

KOperator::KOperator(int s, double lambda, GridPtr grid) : s_(s), lambda_(s == 1 ? lambda : 0.0), grid_(std::move(grid)) {
    if (s_ != 1 && s_ != 2) throw std::invalid_argument("dispersion order must be 1 or 2");
    potential_ = lambda_ * grid_->r.array().square().inverse();
    unit_shift_ = banded_factor(1.0);
}

Eigen::VectorXcd KOperator::apply(const Eigen::VectorXcd& f) const {
    if (s_ == 1) {
        Eigen::VectorXcd out = -laplacian<std::complex<double>>(*grid_, f);
        if (lambda_ != 0.0) out.array() += potential_.array() * f.array();
        return out;
    }
    return laplacian<std::complex<double>>(*grid_, laplacian<std::complex<double>>(*grid_, f));
}

Eigen::VectorXd KOperator::apply(const Eigen::VectorXd& f) const {
    if (s_ == 1) {
        Eigen::VectorXd out = -laplacian<double>(*grid_, f);
        if (lambda_ != 0.0) out.array() += potential_.array() * f.array();
        return out;
    }
    return laplacian<double>(*grid_, laplacian<double>(*grid_, f));
}

double KOperator::form(const Eigen::VectorXcd& f) const {
    const Grid& g = *grid_;
    if (s_ == 2) {
        const Eigen::VectorXcd lf = laplacian<std::complex<double>>(g, f);
        return (g.w.array() * lf.array().abs2()).sum();
    }
    double value = gradient_norm_sq(g, f);
    if (lambda_ != 0.0) value += (g.w.array() * potential_.array() * f.array().abs2()).sum();
    return value;
}

void KOperator::symmetric_tridiagonal(Eigen::VectorXd& diag, Eigen::VectorXd& off, bool with_potential) const {
    const Grid& g = *grid_;
    const int M = g.M;
    const double k = g.sphere_area / g.dr;
    diag.resize(M);
    off.resize(M - 1);
    for (int j = 0; j < M; ++j) {
        double t = g.face[j] + g.face[j + 1];
        if (j == M - 1) t += g.face[M];
        diag[j] = k * t / g.w[j];
        if (with_potential) diag[j] += potential_[j];
        if (j + 1 < M) off[j] = -k * g.face[j + 1] / std::sqrt(g.w[j] * g.w[j + 1]);
    }
}

template <class Real>
std::vector<Real> assemble_shifted_band(const Grid& g, int s, double lambda, double shift) {
    const int M = g.M;
    const Real k = static_cast<Real>(g.sphere_area) / static_cast<Real>(g.dr);
    const double lam = s == 1 ? lambda : 0.0;

    // T = D (-L): symmetric tridiagonal.
    std::vector<Real> td(M), to(M, Real(0));
    for (int j = 0; j < M; ++j) {
        Real t = static_cast<Real>(g.face[j]) + static_cast<Real>(g.face[j + 1]);
        if (j == M - 1) t += static_cast<Real>(g.face[M]);
        td[j] = k * t;
        if (j + 1 < M) to[j] = -k * static_cast<Real>(g.face[j + 1]);
    }

    const int kd = s == 1 ? 1 : 2, ld = kd + 1;
    std::vector<Real> ab(static_cast<size_t>(ld) * M, Real(0));
    auto at = [&](int i, int j) -> Real& { return ab[static_cast<size_t>(kd + i - j) + static_cast<size_t>(j) * ld]; };
    if (s == 1) {
        for (int j = 0; j < M; ++j) {
            const Real r = static_cast<Real>(g.r[j]);
            at(j, j) = td[j] + static_cast<Real>(g.w[j]) * (static_cast<Real>(lam) / (r * r) + static_cast<Real>(shift));
            if (j > 0) at(j - 1, j) = to[j - 1];
        }
    } else {
        // D L^2 = T D^{-1} T.
        auto iw = [&](int j) { return Real(1) / static_cast<Real>(g.w[j]); };
        for (int j = 0; j < M; ++j) {
            Real d = td[j] * td[j] * iw(j) + static_cast<Real>(shift) * static_cast<Real>(g.w[j]);
            if (j > 0) d += to[j - 1] * to[j - 1] * iw(j - 1);
            if (j + 1 < M) d += to[j] * to[j] * iw(j + 1);
            at(j, j) = d;
            if (j > 0) at(j - 1, j) = to[j - 1] * (td[j - 1] * iw(j - 1) + td[j] * iw(j));
            if (j > 1) at(j - 2, j) = to[j - 2] * to[j - 1] * iw(j - 1);
        }
    }
    return ab;
}

template <class Real>
BandCholesky<Real>::BandCholesky(std::vector<Real> band, int n, int kd) : u_(std::move(band)), n_(n), kd_(kd) {
    using std::sqrt;
    for (int j = 0; j < n_; ++j) {
        Real d = at(j, j);
        for (int k = std::max(0, j - kd_); k < j; ++k) d -= at(k, j) * at(k, j);
        if (!(d > Real(0))) throw FactorizationFailure("band Cholesky: matrix not positive definite");
        at(j, j) = sqrt(d);
        for (int i = j + 1; i <= std::min(n_ - 1, j + kd_); ++i) {
            Real v = at(j, i);
            for (int k = std::max(0, i - kd_); k < j; ++k) v -= at(k, j) * at(k, i);
            at(j, i) = v / at(j, j);
        }
    }
}

template <class Real>
void BandCholesky<Real>::solve(Real* b) const {
    // U^T y = b, then U x = y.
    for (int i = 0; i < n_; ++i) {
        Real v = b[i];
        for (int k = std::max(0, i - kd_); k < i; ++k) v -= at(k, i) * b[k];
        b[i] = v / at(i, i);
    }
    for (int i = n_ - 1; i >= 0; --i) {
        Real v = b[i];
        for (int k = i + 1; k <= std::min(n_ - 1, i + kd_); ++k) v -= at(i, k) * b[k];
        b[i] = v / at(i, i);
    }
}

template std::vector<double> assemble_shifted_band<double>(const Grid&, int, double, double);
template std::vector<long double> assemble_shifted_band<long double>(const Grid&, int, double, double);
template class BandCholesky<double>;
template class BandCholesky<long double>;

std::shared_ptr<const KOperator::Banded> KOperator::banded_factor(double shift) const {
    if (unit_shift_ && unit_shift_->shift == shift) return unit_shift_;
    auto b = std::make_shared<Banded>();
    b->shift = shift;
    b->kd = s_ == 1 ? 1 : 2;
    b->ab = assemble_shifted_band<double>(*grid_, s_, lambda_, shift);
    const lapack_int info = LAPACKE_dpbtrf(LAPACK_COL_MAJOR, 'U', grid_->M, b->kd, b->ab.data(), b->kd + 1);
    if (info != 0) throw FactorizationFailure("banded Cholesky failed, info = " + std::to_string(info));
    return b;
}

Eigen::VectorXd KOperator::solve_shifted(const Eigen::VectorXd& rhs, double shift) const {
    const auto b = banded_factor(shift);
    Eigen::VectorXd x = grid_->w.cwiseProduct(rhs);
    const lapack_int info =
        LAPACKE_dpbtrs(LAPACK_COL_MAJOR, 'U', grid_->M, b->kd, 1, b->ab.data(), b->kd + 1, x.data(), grid_->M);
    if (info != 0) throw FactorizationFailure("banded solve failed, info = " + std::to_string(info));
    return x;
}

Eigen::MatrixXd OperatorFactorization::weighted_eigenvectors() const {
    return sqrt_w.cwiseInverse().asDiagonal() * Eigen::MatrixXd(Q);
}

void OperatorFactorization::propagate(Eigen::VectorXcd& u, double t, kernels::Exec exec) const {
    kernels::spectral_propagate(Q, Qt, eigenvalues, sqrt_w, t, u, exec);
}

OperatorFactorization factorize_K(const KOperator& op) {
    const Grid& g = *op.grid();
    const int M = g.M;
    Eigen::VectorXd d, e;
    op.symmetric_tridiagonal(d, e, op.order() == 1);
    const Eigen::VectorXd d0 = d, e0 = e;

    Eigen::MatrixXd z(M, M);
    const lapack_int info = LAPACKE_dstevd(LAPACK_COL_MAJOR, 'V', M, d.data(), e.data(), z.data(), M);
    if (info != 0) throw FactorizationFailure("tridiagonal eigensolver failed, info = " + std::to_string(info));

    OperatorFactorization f;
    f.eigenvalues = d;
    if (op.order() == 2) f.eigenvalues = d.array().square();
    f.Q = z;
    f.Qt = z.transpose();
    f.sqrt_w = g.w.cwiseSqrt();

    // Residual of S Q = Q Lambda with S applied through its tridiagonal factor.
    auto tri = [&](const Eigen::MatrixXd& X) {
        Eigen::MatrixXd Y(M, X.cols());
        for (int j = 0; j < M; ++j) {
            Y.row(j) = d0[j] * X.row(j);
            if (j > 0) Y.row(j) += e0[j - 1] * X.row(j - 1);
            if (j + 1 < M) Y.row(j) += e0[j] * X.row(j + 1);
        }
        return Y;
    };
    Eigen::MatrixXd SQ = tri(z);
    double s_norm_sq = d0.squaredNorm() + 2.0 * e0.squaredNorm();
    if (op.order() == 2) {
        SQ = tri(SQ);
        Eigen::MatrixXd I = Eigen::MatrixXd::Identity(M, M);
        s_norm_sq = tri(tri(I)).squaredNorm();
    }
    SQ -= z * f.eigenvalues.asDiagonal();
    f.residual = std::sqrt(SQ.squaredNorm() / s_norm_sq);

    // Sorted ascending by construction of dstevd (and squaring preserves order
    // for the positive s = 1, lambda = 0 spectrum).
    return f;
}

OperatorFactorization factorize_K(const ProblemSpec& spec, GridPtr grid) {
    return factorize_K(KOperator(spec.s, spec.effective_lambda(), std::move(grid)));
}

}  // namespace inls
