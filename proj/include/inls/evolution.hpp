#pragma once

#include "inls/functionals.hpp"
#include "inls/operator.hpp"

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace inls {

class InsufficientSamples : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct EvolveControls {
    double t_end = 1.0;
    double dt0 = 1e-3;
    double dt_min = 1e-10;
    double cfl_c = 0.1;
    int snapshot_stride = 100;
    double grad_blowup_factor = 1e4;
    double conservation_tol = 1e-4;
    double R = 0.0;            ///< Morawetz radius; 0 selects 20 x the RMS radius of the datum
    bool nonlinearity = true;  ///< test hook: false runs the linear flow only
    long max_steps = 5'000'000;

    void validate() const;
};

enum class Verdict { ReachedHorizon, BlowupDetected, ResolutionFailure };
std::string to_string(Verdict v);

struct Trajectory {
    std::vector<Diagnostics> series;
    std::vector<std::pair<double, RadialField>> snapshots;
    std::vector<double> f_series;  ///< int_0^t kinetic ds, aligned with series
    Verdict verdict = Verdict::ReachedHorizon;
    double t_star_estimate = 0.0;  ///< blow-up runs only
    double failure_time = 0.0;     ///< resolution failures only
    double R = 0.0;
    double mass_drift = 0.0;
    double energy_drift = 0.0;
    long steps = 0;
};

/// Strang splitting i u_t = K u - V(|u|) u. Holds the factorization of K.
class Propagator {
public:
    Propagator(const Model& model, bool nonlinearity = true);
    Propagator(const Model& model, OperatorFactorization factorization, bool nonlinearity = true);

    const Model& model() const { return model_; }
    const OperatorFactorization& factorization() const { return fact_; }
    bool nonlinear() const { return nonlinearity_; }

    /// One Strang step. The nonlinear substep u <- u exp(i dt V(|u|)) is exact:
    /// |u| and hence V are constant along it, so the potential frozen at the
    /// midpoint is the one computed at the start of the substep.
    void step(Eigen::VectorXcd& u, double dt) const;

private:
    const Model& model_;
    OperatorFactorization fact_;
    bool nonlinearity_;
};

RadialField step(const Propagator& prop, const RadialField& state, double dt);

Trajectory evolve(const Propagator& prop, const RadialField& u0, const EvolveControls& controls);

/// Convenience: validates the evolution tier and factorizes K.
Trajectory evolve(const Model& model, const RadialField& u0, const EvolveControls& controls);

struct MorawetzReport {
    double R = 0.0;
    double kappa = 0.0;
    double tail_constant = 1.0;
    std::vector<double> times;
    std::vector<double> rate;    ///< dM_R/dt by central differences
    std::vector<double> bound;   ///< kappa I + C_tail
    std::vector<double> margin;  ///< bound - rate
    double violation_fraction = 0.0;
    double final_slope = 0.0;    ///< least-squares slope of M_R on the final third
    bool eventually_decreasing = false;
};

/// C_tail(R) = c (R^{-a} kin^{e/2} + R^{-2}) [+ c R^{-2} kin for s = 2], with
/// (a, e) = (tau, B - tau), (tau, B - tau/2), (2tau, B' - 2tau), (2tau, B' - tau)
/// for s = 1 / 2 and the Choquard / local source.
double tail_bound(const Model& model, double R, double kinetic, double c = 1.0);

MorawetzReport morawetz_rate_check(const Trajectory& traj, const Model& model, double R, double c = 1.0);

}  // namespace inls
