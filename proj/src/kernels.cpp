#include "inls/kernels.hpp"

#include <omp.h>

#include <cmath>

namespace inls::kernels {

namespace {

inline double row_dot(const double* a, const double* x, Eigen::Index n) {
    double acc = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) acc += a[k] * x[k];
    return acc;
}

inline void row_dot2(const double* a, const double* xr, const double* xi, Eigen::Index n, double& outr,
                     double& outi) {
    double ar = 0.0, ai = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
        ar += a[k] * xr[k];
        ai += a[k] * xi[k];
    }
    outr = ar;
    outi = ai;
}

}  // namespace

int max_threads() { return omp_get_max_threads(); }

void matvec(const RowMatrix& A, const Eigen::VectorXd& x, Eigen::VectorXd& y, Exec exec) {
    const Eigen::Index n = A.rows(), m = A.cols();
    y.resize(n);
    const double* xp = x.data();
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
        for (Eigen::Index i = 0; i < n; ++i) y[i] = row_dot(A.data() + i * m, xp, m);
    } else {
        for (Eigen::Index i = 0; i < n; ++i) y[i] = row_dot(A.data() + i * m, xp, m);
    }
}

void matvec_extended(const RowMatrix& A, const long double* x, long double* y, Exec exec) {
    const Eigen::Index n = A.rows(), m = A.cols();
    auto row = [&](Eigen::Index i) {
        const double* a = A.data() + i * m;
        long double acc = 0.0L;
        for (Eigen::Index k = 0; k < m; ++k) acc += static_cast<long double>(a[k]) * x[k];
        y[i] = acc;
    };
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
        for (Eigen::Index i = 0; i < n; ++i) row(i);
    } else {
        for (Eigen::Index i = 0; i < n; ++i) row(i);
    }
}

void matvec_complex(const RowMatrix& A, const Eigen::VectorXd& xr, const Eigen::VectorXd& xi, Eigen::VectorXd& yr,
                    Eigen::VectorXd& yi, Exec exec) {
    const Eigen::Index n = A.rows(), m = A.cols();
    yr.resize(n);
    yi.resize(n);
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
        for (Eigen::Index i = 0; i < n; ++i) row_dot2(A.data() + i * m, xr.data(), xi.data(), m, yr[i], yi[i]);
    } else {
        for (Eigen::Index i = 0; i < n; ++i) row_dot2(A.data() + i * m, xr.data(), xi.data(), m, yr[i], yi[i]);
    }
}

void fill_symmetric(RowMatrix& A, const std::function<double(int, int)>& entry, Exec exec) {
    const int n = static_cast<int>(A.rows());
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 4)
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) A(i, j) = entry(i, j);
    } else {
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) A(i, j) = entry(i, j);
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < i; ++j) A(i, j) = A(j, i);
}

void spectral_propagate(const RowMatrix& Q, const RowMatrix& Qt, const Eigen::VectorXd& eigenvalues,
                        const Eigen::VectorXd& sqrt_w, double t, Eigen::VectorXcd& u, Exec exec) {
    const Eigen::Index n = u.size();
    Eigen::VectorXd xr(n), xi(n), cr, ci;
    for (Eigen::Index j = 0; j < n; ++j) {
        xr[j] = sqrt_w[j] * u[j].real();
        xi[j] = sqrt_w[j] * u[j].imag();
    }
    matvec_complex(Qt, xr, xi, cr, ci, exec);
    for (Eigen::Index k = 0; k < n; ++k) {
        const double c = std::cos(t * eigenvalues[k]);
        const double s = -std::sin(t * eigenvalues[k]);
        const double re = cr[k] * c - ci[k] * s;
        const double im = cr[k] * s + ci[k] * c;
        cr[k] = re;
        ci[k] = im;
    }
    matvec_complex(Q, cr, ci, xr, xi, exec);
    for (Eigen::Index j = 0; j < n; ++j) u[j] = std::complex<double>(xr[j], xi[j]) / sqrt_w[j];
}

}  // namespace inls::kernels
