#pragma once

#include <Eigen/Dense>

#include <functional>

// Dense kernels shared by the Riesz convolution and the spectral propagator.
// Every routine comes in a serial and an OpenMP flavour. Both flavours run the
// same per-row loop body, so their results agree bit for bit; the serial one is
// kept as the reference the tests and the benchmark compare against.

namespace inls::kernels {

enum class Exec { Serial, Parallel };

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// y = A x.
void matvec(const RowMatrix& A, const Eigen::VectorXd& x, Eigen::VectorXd& y, Exec exec);

/// y = A x with the accumulation carried out in long double.
void matvec_extended(const RowMatrix& A, const long double* x, long double* y, Exec exec);

/// (yr, yi) = A (xr, xi), a real matrix acting on a complex vector stored as
/// two real arrays.
void matvec_complex(const RowMatrix& A, const Eigen::VectorXd& xr, const Eigen::VectorXd& xi, Eigen::VectorXd& yr,
                    Eigen::VectorXd& yi, Exec exec);

/// A(i, j) = entry(i, j) for j >= i, mirrored below the diagonal.
void fill_symmetric(RowMatrix& A, const std::function<double(int, int)>& entry, Exec exec);

/// u <- D^{-1/2} Q diag(exp(-i t lambda)) Q^T D^{1/2} u, given Q and Q^T in
/// row-major storage and sqrt_w = D^{1/2}.
void spectral_propagate(const RowMatrix& Q, const RowMatrix& Qt, const Eigen::VectorXd& eigenvalues,
                        const Eigen::VectorXd& sqrt_w, double t, Eigen::VectorXcd& u, Exec exec);

int max_threads();

}  // namespace inls::kernels
