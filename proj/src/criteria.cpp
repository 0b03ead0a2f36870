#include "inls/criteria.hpp"

#include "inls/io.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace inls {

namespace {

// Relative band inside which I, MG - 1 and ME - 1 count as zero.
constexpr double kSignTol = 1e-9;

bool same_spec(const ProblemSpec& a, const ProblemSpec& b) {
    return a.s == b.s && a.N == b.N && a.kind == b.kind && a.tau.value() == b.tau.value() &&
           a.power.value() == b.power.value() && (!a.choquard() || a.alpha.value() == b.alpha.value()) &&
           a.effective_lambda() == b.effective_lambda();
}

bool same_grid(const Grid& a, const Grid& b) { return a.M == b.M && a.N == b.N && a.r_max == b.r_max; }

int sign_with_tol(double x, double scale) {
    if (std::abs(x) <= kSignTol * std::abs(scale)) return 0;
    return x < 0 ? -1 : 1;
}

}  // namespace

std::string to_string(Prediction p) { return p == Prediction::BlowUp ? "BlowUp" : "NoPrediction"; }

double scale_invariant_gradient(const GroundState& gs, double mass, double kinetic) {
    return std::pow(mass / gs.grid.mass, 0.5 * gs.exps.alpha_c) * std::sqrt(kinetic / gs.grid.kinetic);
}

double scale_invariant_energy(const GroundState& gs, double mass, double energy) {
    return std::pow(mass / gs.grid.mass, gs.exps.alpha_c) * (energy / gs.grid.energy);
}

Classification classify(const Model& model, const Eigen::VectorXcd& u0, const GroundState& gs) {
    if (!same_spec(model.spec, gs.spec)) throw SpecMismatch("ground state belongs to a different problem");
    const Diagnostics d = diagnostics(model, u0);
    Classification c;
    c.virial = d.virial;
    c.virial_sign = sign_with_tol(d.virial, d.kinetic);
    c.action = d.action;
    c.m_hat = threshold_m(gs);
    c.action_vs_m = d.action - c.m_hat;
    c.in_A_minus = c.virial_sign < 0 && sign_with_tol(c.action_vs_m, c.m_hat) < 0;
    c.MG = scale_invariant_gradient(gs, d.mass, d.kinetic);
    c.ME = scale_invariant_energy(gs, d.mass, d.energy);
    c.condition_ss = c.in_A_minus;
    c.condition_t13 = c.MG > 1.0 + kSignTol && c.ME < 1.0 - kSignTol;
    c.predicted = c.condition_ss || c.condition_t13 ? Prediction::BlowUp : Prediction::NoPrediction;
    if (c.condition_ss) c.note = "condition (ss) is conditional on m = S[phi]";
    if (!model.choquard()) c.note += c.note.empty() ? "primed (local) variants" : "; primed (local) variants";
    return c;
}

double kinetic_lower_bound(const DerivedExponents& e, double C, double mass) {
    const double p = e.power;
    return std::pow(2.0 * p / (e.B * C * std::pow(mass, 0.5 * e.A)), 2.0 / (e.B - 2.0));
}

CoercivityReport coercivity_monitor(const Model& model, const Trajectory& traj, const GroundState& gs) {
    if (traj.series.size() < 2) throw InsufficientSamples("coercivity monitor needs at least two samples");
    if (traj.snapshots.empty()) throw InsufficientSamples("trajectory carries no initial snapshot");
    const Classification c0 = classify(model, traj.snapshots.front().second.values, gs);

    CoercivityReport rep;
    rep.ss_data = c0.condition_ss;
    rep.t13_data = c0.condition_t13;
    rep.samples = traj.series.size();

    const double m_hat = threshold_m(gs);
    const double B = model.exps.B;
    const double C = gs.sharp_constant > 0 ? gs.sharp_constant : sharp_constant(gs);
    rep.min_kinetic_ratio = std::numeric_limits<double>::infinity();
    for (const auto& d : traj.series) {
        const bool in_a = d.virial < 0 && d.action < m_hat;
        if (!in_a) ++rep.a_minus_violations;
        if (rep.ss_data && d.virial > -(B / 4.0) * (m_hat - d.action) + 1e-6 * m_hat) ++rep.ss_inequality_violations;
        if (rep.t13_data && !(scale_invariant_gradient(gs, d.mass, d.kinetic) > 1.0)) ++rep.mg_violations;
        if (d.virial < 0) {
            const double lower = kinetic_lower_bound(model.exps, C, d.mass);
            rep.min_kinetic_ratio = std::min(rep.min_kinetic_ratio, d.kinetic / lower);
            if (d.kinetic < (1.0 - 1e-3) * lower) ++rep.kinetic_lower_violations;
        }
    }

    auto holds = [&](double eps) {
        return std::all_of(traj.series.begin(), traj.series.end(),
                           [&](const Diagnostics& d) { return d.virial + eps * d.kinetic <= 0.0; });
    };
    double lo = 0.0, hi = 1.0;
    if (holds(hi)) {
        lo = hi;
    } else {
        for (int k = 0; k < 40; ++k) {
            const double mid = 0.5 * (lo + hi);
            (holds(mid) ? lo : hi) = mid;
        }
    }
    // Below the bisection resolution nothing separates eps* from zero.
    rep.epsilon_star = lo > 1e-8 ? lo : 0.0;
    rep.boundary_case = rep.epsilon_star == 0.0;
    rep.message = rep.boundary_case ? "boundary case, no certificate" : "coercive";
    if (rep.ss_data) rep.message += " (conditional on m = S[phi])";
    return rep;
}

OdiReport odi_fit(const std::vector<double>& t, const std::vector<double>& f, std::vector<double> fprime,
                  double kappa) {
    const size_t n = t.size();
    if (n < 6 || f.size() != n || (!fprime.empty() && fprime.size() != n))
        throw InsufficientSamples("ODI fit needs at least six aligned samples");
    if (fprime.empty()) {
        fprime.resize(n);
        for (size_t k = 1; k + 1 < n; ++k) {
            const double h0 = t[k] - t[k - 1], h1 = t[k + 1] - t[k];
            fprime[k] = (-h1 / (h0 * (h0 + h1))) * f[k - 1] + ((h1 - h0) / (h0 * h1)) * f[k] +
                        (h0 / (h1 * (h0 + h1))) * f[k + 1];
        }
        fprime[0] = (f[1] - f[0]) / (t[1] - t[0]);
        fprime[n - 1] = (f[n - 1] - f[n - 2]) / (t[n - 1] - t[n - 2]);
    }

    OdiReport rep;
    rep.kappa = kappa;
    const size_t start = n - n / 3;
    rep.window_start = t[start];
    rep.window_end = t[n - 1];
    std::vector<double> ratio;
    for (size_t k = start; k < n; ++k) {
        if (!(f[k] > 0.0)) throw DegenerateFit("f must be positive on the fitting window");
        ratio.push_back(fprime[k] / std::pow(f[k], kappa));
    }
    rep.c_lower = *std::min_element(ratio.begin(), ratio.end());
    if (!(rep.c_lower > 0.0)) throw DegenerateFit("c_lower <= 0");
    rep.monotone_fraction =
        static_cast<double>(std::count_if(ratio.begin(), ratio.end(), [&](double x) { return x >= rep.c_lower; })) /
        static_cast<double>(ratio.size());
    rep.t_star_bound = t[n - 1] + std::pow(f[n - 1], 1.0 - kappa) / ((kappa - 1.0) * rep.c_lower);
    return rep;
}

OdiReport odi_fit(const Trajectory& traj, const ProblemSpec& spec) {
    if (traj.verdict != Verdict::BlowupDetected) throw NoBlowupVerdict("ODI fit requires a BlowupDetected run");
    std::vector<double> t, fp;
    t.reserve(traj.series.size());
    fp.reserve(traj.series.size());
    for (const auto& d : traj.series) {
        t.push_back(d.time);
        fp.push_back(d.kinetic);
    }
    OdiReport rep = odi_fit(t, traj.f_series, std::move(fp), spec.s == 1 ? 2.0 : 4.0);
    rep.kappa_inferred = spec.s == 2 && !spec.choquard();
    return rep;
}

GaussianMixture GaussianMixture::random(std::mt19937_64& rng, int terms, double min_rate, double max_rate) {
    std::uniform_real_distribution<double> amp(0.2, 1.0);
    std::uniform_real_distribution<double> log_rate(std::log(min_rate), std::log(max_rate));
    GaussianMixture g;
    for (int k = 0; k < terms; ++k) {
        g.amplitude.push_back(amp(rng));
        g.rate.push_back(std::exp(log_rate(rng)));
    }
    return g;
}

Eigen::VectorXcd GaussianMixture::sample(const Grid& g) const {
    return inls::sample(g, [&](double r) {
        double v = 0.0;
        for (size_t k = 0; k < amplitude.size(); ++k) v += amplitude[k] * std::exp(-rate[k] * r * r);
        return v;
    });
}

GaussianMixture GaussianMixture::scaled(double rho, int N) const {
    GaussianMixture out = *this;
    const double factor = std::pow(rho, 0.5 * N);
    for (size_t k = 0; k < amplitude.size(); ++k) {
        out.amplitude[k] *= factor;
        out.rate[k] *= rho * rho;
    }
    return out;
}

DatumKind datum_kind_from_string(const std::string& name) {
    if (name == "scaled_ground_state") return DatumKind::ScaledGroundState;
    if (name == "nehari_rescaled") return DatumKind::NehariRescaled;
    if (name == "custom") return DatumKind::Custom;
    throw std::invalid_argument("unknown datum kind '" + name + "'");
}

RadialField nehari_rescale(const Model& model, const RadialField& u) {
    const double kin = kinetic(model, u.values);
    const double pot = potential(model, u.values);
    if (!(pot > 0.0) || !(kin > 0.0)) throw RescaleFailure("field has P[u] = 0; no Nehari amplitude exists");
    const double p = model.power();
    const double a = std::pow(2.0 * p * kin / (model.exps.B * pot), 1.0 / (2.0 * p - 2.0));
    return RadialField(u.grid, a * u.values);
}

RadialField build_datum(const DatumSpec& datum, const Model& model, const GroundState* gs) {
    switch (datum.kind) {
        case DatumKind::ScaledGroundState: {
            if (!gs) throw std::invalid_argument("scaled ground-state datum needs a ground state");
            if (!same_grid(*gs->field.grid, *model.grid))
                throw SpecMismatch("ground state was computed on a different grid");
            return RadialField(model.grid, datum.c * gs->field.values);
        }
        case DatumKind::NehariRescaled: {
            std::mt19937_64 rng(datum.seed);
            const GaussianMixture mix = GaussianMixture::random(rng);
            return nehari_rescale(model, RadialField(model.grid, mix.sample(*model.grid)));
        }
        case DatumKind::Custom: {
            const bool csv = datum.file.size() >= 4 && datum.file.substr(datum.file.size() - 4) == ".csv";
            RadialField f = csv ? io::read_field_csv(datum.file, model.grid->N) : io::read_snapshot(datum.file);
            if (!same_grid(*f.grid, *model.grid)) throw io::FileFormat("datum grid does not match the run grid");
            return RadialField(model.grid, f.values);
        }
    }
    throw std::invalid_argument("bad datum kind");
}

}  // namespace inls
