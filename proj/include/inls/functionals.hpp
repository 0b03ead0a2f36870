#pragma once

#include "inls/grid.hpp"
#include "inls/kernels.hpp"
#include "inls/operator.hpp"
#include "inls/problem.hpp"
#include "inls/riesz.hpp"

#include <memory>

namespace inls {

/// Everything needed to evaluate functionals of one problem on one grid.
struct Model {
    Validation validation;
    ProblemSpec spec;
    DerivedExponents exps;
    GridPtr grid;
    std::shared_ptr<const KOperator> op;
    std::shared_ptr<const RieszKernel> kernel;  ///< null for the local source
    Eigen::VectorXd weight_tau;                 ///< r^{-tau}
    Eigen::VectorXd weight_2tau;                ///< r^{-2 tau}
    kernels::Exec exec = kernels::Exec::Parallel;

    double power() const { return exps.power; }
    bool choquard() const { return spec.choquard(); }
};

/// Validates the spec (either tier) and assembles operator and kernel.
Model make_model(const ProblemSpec& spec, GridPtr grid, kernels::Exec exec = kernels::Exec::Parallel);

/// Same assembly without validation, for test hooks such as tau = 0.
Model make_model_unchecked(const ProblemSpec& spec, GridPtr grid, kernels::Exec exec = kernels::Exec::Parallel);

double mass(const Grid& g, const Eigen::VectorXcd& u);
double mass(const RadialField& u);
double kinetic(const Model& m, const Eigen::VectorXcd& u);

/// V(|u|) with F(x, u) = V u: the Choquard source gives
/// r^{-tau} |u|^{p-2} J_alpha * (r^{-tau} |u|^p), the local one r^{-2tau} |u|^{2q-2}.
Eigen::VectorXd nonlinear_potential(const Model& m, const Eigen::VectorXcd& u);

double potential_choquard(const Model& m, const Eigen::VectorXcd& u);
double potential_local(const Model& m, const Eigen::VectorXcd& u);
/// P[u] or Q[u] depending on the source.
double potential(const Model& m, const Eigen::VectorXcd& u);

double energy_from(const Model& m, double kin, double pot);
double virial_from(const Model& m, double kin, double pot);

class InvalidRadius : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Truncated virial weight xi_R(r) = R^2 xi(r / R) with xi(rho) = rho^2 on
/// [0, 1]. On (1, rho_star) xi'(rho) = rho h(rho) where h falls from 2 to 0 along
/// a quintic smoothstep, and xi is constant beyond rho_star.
class MorawetzWeight {
public:
    static constexpr double kRhoStar = 10.0;

    explicit MorawetzWeight(double R);

    double R() const { return R_; }
    double xi(double r) const;
    double xi_prime(double r) const;
    double xi_second(double r) const;

private:
    double xi_blend(double r) const;

    double R_;
    double plateau_;
};

/// 2 Im sum_j w_j conj(u_j) xi_R'(r_j) (d_r u)_j.
double morawetz(const Grid& g, const Eigen::VectorXcd& u, const MorawetzWeight& weight);

struct Diagnostics {
    double time = 0.0;
    double mass = 0.0;
    double kinetic = 0.0;
    double potential = 0.0;
    double energy = 0.0;
    double virial = 0.0;
    double action = 0.0;
    double sup_norm = 0.0;
    double morawetz = 0.0;
    double dt = 0.0;
};

Diagnostics diagnostics(const Model& m, const Eigen::VectorXcd& u, const MorawetzWeight* weight = nullptr,
                        double time = 0.0, double dt = 0.0);

/// Root-mean-square radius sqrt(int r^2 |u|^2 / int |u|^2).
double rms_radius(const Grid& g, const Eigen::VectorXcd& u);

}  // namespace inls
