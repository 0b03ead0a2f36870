#pragma once

#include "inls/grid.hpp"
#include "inls/kernels.hpp"

#include <stdexcept>

namespace inls {

class AlphaOutOfRange : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// c_{N,alpha} = Gamma((N-alpha)/2) / (Gamma(alpha/2) pi^{N/2} 2^alpha).
double riesz_constant(int N, double alpha);

/// Average of |x - y|^{beta} over the sphere |y| = rho, for |x| = r.
double angular_average(int N, double beta, double r, double rho);

/// Dense discretization of g -> J_alpha * g on radial profiles:
/// (J_alpha * g)(r_i) ~ sum_j G(i, j) g(r_j).
class RieszKernel {
public:
    RieszKernel(GridPtr grid, double alpha, kernels::Exec exec = kernels::Exec::Parallel);

    double alpha() const { return alpha_; }
    const kernels::RowMatrix& matrix() const { return G_; }
    const GridPtr& grid() const { return grid_; }

    Eigen::VectorXd apply(const Eigen::VectorXd& g, kernels::Exec exec = kernels::Exec::Parallel) const;

private:
    GridPtr grid_;
    double alpha_;
    kernels::RowMatrix G_;
};

}  // namespace inls
