#include "inls/evolution.hpp"

#include "inls/criteria.hpp"

#include <algorithm>
#include <cmath>

namespace inls {

void EvolveControls::validate() const {
    auto positive = [](double x) { return x > 0.0 && std::isfinite(x); };
    if (!positive(t_end) || !positive(dt0) || !positive(dt_min) || !positive(cfl_c) || !positive(grad_blowup_factor) ||
        !positive(conservation_tol) || snapshot_stride <= 0 || R < 0.0 || max_steps <= 0)
        throw std::invalid_argument("evolution controls must be positive");
    if (!(dt_min < dt0)) throw std::invalid_argument("dt_min must be smaller than dt0");
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::ReachedHorizon: return "ReachedHorizon";
        case Verdict::BlowupDetected: return "BlowupDetected";
        case Verdict::ResolutionFailure: return "ResolutionFailure";
    }
    return "?";
}

Propagator::Propagator(const Model& model, bool nonlinearity)
    : Propagator(model, factorize_K(*model.op), nonlinearity) {}

Propagator::Propagator(const Model& model, OperatorFactorization factorization, bool nonlinearity)
    : model_(model), fact_(std::move(factorization)), nonlinearity_(nonlinearity) {}

void Propagator::step(Eigen::VectorXcd& u, double dt) const {
    fact_.propagate(u, 0.5 * dt, model_.exec);
    if (nonlinearity_) {
        const Eigen::VectorXd V = nonlinear_potential(model_, u);
        for (Eigen::Index j = 0; j < u.size(); ++j) u[j] *= std::polar(1.0, dt * V[j]);
    }
    fact_.propagate(u, 0.5 * dt, model_.exec);
}

RadialField step(const Propagator& prop, const RadialField& state, double dt) {
    Eigen::VectorXcd u = state.values;
    prop.step(u, dt);
    return RadialField(state.grid, std::move(u));
}

Trajectory evolve(const Propagator& prop, const RadialField& u0, const EvolveControls& c) {
    c.validate();
    const Model& model = prop.model();
    const Grid& g = *model.grid;

    Trajectory traj;
    traj.R = c.R > 0.0 ? c.R : 20.0 * rms_radius(g, u0.values);
    const MorawetzWeight weight(traj.R);

    Eigen::VectorXcd u = u0.values;
    double t = 0.0;
    auto sample = [&](double dt) {
        Diagnostics d = diagnostics(model, u, &weight, t, dt);
        if (!prop.nonlinear()) {
            d.potential = 0.0;
            d.energy = d.kinetic;
            d.virial = d.kinetic;
            d.action = d.energy + d.mass;
        }
        return d;
    };

    traj.series.push_back(sample(0.0));
    traj.f_series.push_back(0.0);
    traj.snapshots.emplace_back(0.0, u0);
    const Diagnostics first = traj.series.front();

    bool blowup = false;
    bool broken = false;
    while (t < c.t_end && traj.steps < c.max_steps) {
        double vmax = 0.0;
        if (prop.nonlinear()) vmax = nonlinear_potential(model, u).cwiseAbs().maxCoeff();
        double dt = std::clamp(c.cfl_c / (1.0 + vmax), c.dt_min, c.dt0);
        const bool at_floor = c.cfl_c / (1.0 + vmax) <= c.dt_min;
        dt = std::min(dt, c.t_end - t);

        prop.step(u, dt);
        t += dt;
        ++traj.steps;

        if (!u.allFinite()) {
            broken = true;
            break;
        }
        const Diagnostics d = sample(dt);
        const Diagnostics& prev = traj.series.back();
        traj.f_series.push_back(traj.f_series.back() + 0.5 * dt * (prev.kinetic + d.kinetic));
        traj.series.push_back(d);
        if (traj.steps % c.snapshot_stride == 0) traj.snapshots.emplace_back(t, RadialField(u0.grid, u));

        if (d.kinetic >= c.grad_blowup_factor * first.kinetic || at_floor) {
            blowup = true;
            break;
        }
    }
    if (traj.snapshots.back().first != t) traj.snapshots.emplace_back(t, RadialField(u0.grid, u));

    const Diagnostics& last = traj.series.back();
    traj.mass_drift = std::abs(last.mass - first.mass) / first.mass;
    traj.energy_drift = std::abs(last.energy - first.energy) / std::max(std::abs(first.energy), 1e-300);

    if (blowup) {
        traj.verdict = Verdict::BlowupDetected;
        try {
            traj.t_star_estimate = odi_fit(traj, model.spec).t_star_bound;
        } catch (const std::exception&) {
            traj.t_star_estimate = t;
        }
    } else if (broken || traj.mass_drift > c.conservation_tol || traj.energy_drift > c.conservation_tol ||
               t < c.t_end) {
        traj.verdict = Verdict::ResolutionFailure;
        traj.failure_time = t;
    } else {
        traj.verdict = Verdict::ReachedHorizon;
    }
    return traj;
}

Trajectory evolve(const Model& model, const RadialField& u0, const EvolveControls& controls) {
    require_evolution_tier(model.validation);
    const Propagator prop(model, controls.nonlinearity);
    return evolve(prop, u0, controls);
}

double tail_bound(const Model& model, double R, double kinetic, double c) {
    const double tau = model.spec.tau.value();
    const double B = model.exps.B;
    double a = 0.0, e = 0.0;
    if (model.spec.s == 1) {
        a = model.choquard() ? tau : 2.0 * tau;
        e = model.choquard() ? B - tau : B - 2.0 * tau;
    } else {
        a = model.choquard() ? tau : 2.0 * tau;
        e = model.choquard() ? B - 0.5 * tau : B - tau;
    }
    double value = std::pow(R, -a) * std::pow(kinetic, 0.5 * e) + std::pow(R, -2.0);
    if (model.spec.s == 2) value += std::pow(R, -2.0) * kinetic;
    return c * value;
}

MorawetzReport morawetz_rate_check(const Trajectory& traj, const Model& model, double R, double c) {
    std::vector<double> t, mr, vir, kin;
    if (R == traj.R) {
        for (const auto& d : traj.series) {
            t.push_back(d.time);
            mr.push_back(d.morawetz);
            vir.push_back(d.virial);
            kin.push_back(d.kinetic);
        }
    } else {
        const MorawetzWeight weight(R);
        for (const auto& [time, field] : traj.snapshots) {
            const Diagnostics d = diagnostics(model, field.values, &weight, time);
            t.push_back(time);
            mr.push_back(d.morawetz);
            vir.push_back(d.virial);
            kin.push_back(d.kinetic);
        }
    }
    if (t.size() < 100) throw InsufficientSamples("Morawetz rate check needs at least 100 samples");

    MorawetzReport rep;
    rep.R = R;
    rep.kappa = model.spec.s == 1 ? 8.0 : 16.0;
    rep.tail_constant = c;
    const size_t n = t.size();
    size_t violations = 0;
    for (size_t k = 1; k + 1 < n; ++k) {
        const double rate = (mr[k + 1] - mr[k - 1]) / (t[k + 1] - t[k - 1]);
        const double bound = rep.kappa * vir[k] + tail_bound(model, R, kin[k], c);
        rep.times.push_back(t[k]);
        rep.rate.push_back(rate);
        rep.bound.push_back(bound);
        rep.margin.push_back(bound - rate);
        if (rate > bound) ++violations;
    }
    rep.violation_fraction = static_cast<double>(violations) / static_cast<double>(rep.rate.size());

    // Least-squares slope of M_R against t on the final third.
    const size_t start = n - n / 3;
    double st = 0, sm = 0, stt = 0, stm = 0;
    const double cnt = static_cast<double>(n - start);
    for (size_t k = start; k < n; ++k) {
        st += t[k];
        sm += mr[k];
        stt += t[k] * t[k];
        stm += t[k] * mr[k];
    }
    const double denom = cnt * stt - st * st;
    rep.final_slope = denom > 0 ? (cnt * stm - st * sm) / denom : 0.0;
    rep.eventually_decreasing = rep.final_slope < 0.0 && mr.back() < mr[start];
    return rep;
}

}  // namespace inls
