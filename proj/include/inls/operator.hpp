#pragma once

#include "inls/grid.hpp"
#include "inls/kernels.hpp"
#include "inls/problem.hpp"

#include <Eigen/Dense>

#include <memory>
#include <stdexcept>
#include <vector>

namespace inls {

class FactorizationFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Upper band (LAPACK 'U' layout, leading dimension kd + 1) of D (K + shift),
/// with kd = s. Entries are formed in Real arithmetic.
template <class Real>
std::vector<Real> assemble_shifted_band(const Grid& g, int s, double lambda, double shift);

/// Band Cholesky factorization for small bandwidths in any floating type.
template <class Real>
class BandCholesky {
public:
    BandCholesky(std::vector<Real> band, int n, int kd);
    /// Solves A x = b in place.
    void solve(Real* b) const;

private:
    std::vector<Real> u_;
    int n_, kd_;
    Real& at(int i, int j) { return u_[static_cast<size_t>(kd_ + i - j) + static_cast<size_t>(j) * (kd_ + 1)]; }
    const Real& at(int i, int j) const {
        return u_[static_cast<size_t>(kd_ + i - j) + static_cast<size_t>(j) * (kd_ + 1)];
    }
};

/// Discrete K_{s,lambda}: -L + lambda/r^2 for s = 1, L^2 for s = 2, where L is
/// the grid Laplacian. Self-adjoint in the weighted inner product.
class KOperator {
public:
    KOperator(int s, double lambda, GridPtr grid);

    int order() const { return s_; }
    double lambda() const { return lambda_; }
    const GridPtr& grid() const { return grid_; }
    const Eigen::VectorXd& potential() const { return potential_; }

    Eigen::VectorXcd apply(const Eigen::VectorXcd& f) const;
    Eigen::VectorXd apply(const Eigen::VectorXd& f) const;

    /// <K f, f>_w. For s = 2 evaluated as ||L f||_w^2, for s = 1 as the face
    /// gradient sum plus the potential term, so it is never negative for lambda >= 0.
    double form(const Eigen::VectorXcd& f) const;

    /// Solves (K + shift) x = b through a banded Cholesky factorization of
    /// D (K + shift), which is symmetric positive definite for shift > 0.
    Eigen::VectorXd solve_shifted(const Eigen::VectorXd& b, double shift) const;

    /// Diagonal and off-diagonal of D^{1/2} (-L) D^{-1/2} (+ lambda / r^2 on the diagonal).
    void symmetric_tridiagonal(Eigen::VectorXd& diag, Eigen::VectorXd& off, bool with_potential) const;

private:
    struct Banded {
        double shift = 0.0;
        int kd = 0;
        std::vector<double> ab;
    };
    std::shared_ptr<const Banded> banded_factor(double shift) const;

    int s_;
    double lambda_;
    GridPtr grid_;
    Eigen::VectorXd potential_;  // lambda / r^2
    std::shared_ptr<const Banded> unit_shift_;
};

/// Eigendecomposition K_h = D^{-1/2} Q diag(eigenvalues) Q^T D^{1/2}, Q orthogonal.
struct OperatorFactorization {
    Eigen::VectorXd eigenvalues;  ///< ascending
    kernels::RowMatrix Q;
    kernels::RowMatrix Qt;
    Eigen::VectorXd sqrt_w;
    double residual = 0.0;  ///< ||S Q - Q Lambda||_F / ||S||_F for the symmetrized S

    /// Eigenvectors D^{-1/2} Q, orthonormal in <.,.>_w.
    Eigen::MatrixXd weighted_eigenvectors() const;

    /// u <- exp(-i t K_h) u.
    void propagate(Eigen::VectorXcd& u, double t, kernels::Exec exec = kernels::Exec::Parallel) const;
};

OperatorFactorization factorize_K(const KOperator& op);
OperatorFactorization factorize_K(const ProblemSpec& spec, GridPtr grid);

}  // namespace inls
