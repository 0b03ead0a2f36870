#include "inls/ground_state.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace inls {

CertificateValues certificate_values(const DerivedExponents& e, double mass, double kinetic, double potential) {
    CertificateValues c;
    c.mass = mass;
    c.kinetic = kinetic;
    c.potential = potential;
    c.energy = kinetic - potential / e.power;
    c.action = c.energy + mass;
    c.pohozaev_defect_1 = std::abs(potential - 2.0 * e.power / e.A * mass) / potential;
    c.pohozaev_defect_2 = std::abs(potential - 2.0 * e.power / e.B * kinetic) / potential;
    c.nehari_defect = std::abs(kinetic + mass - potential) / potential;
    return c;
}

double GroundState::pohozaev_defect_1() const {
    return extrapolated ? extrapolated->pohozaev_defect_1 : grid.pohozaev_defect_1;
}

double GroundState::pohozaev_defect_2() const {
    return extrapolated ? extrapolated->pohozaev_defect_2 : grid.pohozaev_defect_2;
}

double GroundState::reference_mass() const { return extrapolated ? extrapolated->mass : grid.mass; }

std::string GroundState::status() const { return structural_ok ? "certified" : "excited/unverified"; }

std::vector<double> error_exponents(const ProblemSpec& spec) {
    const int N = spec.N;
    const double tau = spec.tau.value();
    std::vector<double> q = {2.0, 4.0};
    q.push_back(spec.choquard() ? N - tau : N - 2.0 * tau);
    const double lam = spec.effective_lambda();
    if (lam > 0.0) {
        const double gamma = 0.5 * (-(N - 2.0) + std::sqrt((N - 2.0) * (N - 2.0) + 4.0 * lam));
        q.push_back(N - 2.0 + 2.0 * gamma);
    }
    std::sort(q.begin(), q.end());
    q.erase(std::unique(q.begin(), q.end(), [](double a, double b) { return std::abs(a - b) < 1e-9; }), q.end());
    return q;
}

namespace {

template <class Real>
using Vec = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

// K, NL and (K + 1)^{-1} evaluated in Real arithmetic. Grid data and the Riesz
// matrix stay in double; they define the discrete problem being solved.
template <class Real>
class Arithmetic {
public:
    explicit Arithmetic(const Model& m)
        : m_(m), w_(m.grid->w.cast<Real>()), solver_(make_solver(m)) {}

    Real dot(const Vec<Real>& a, const Vec<Real>& b) const { return (w_.array() * a.array() * b.array()).sum(); }

    Vec<Real> applyK(const Vec<Real>& v) const {
        const Grid& g = *m_.grid;
        if (m_.spec.s == 2) return laplacian<Real>(g, laplacian<Real>(g, v));
        Vec<Real> out = -laplacian<Real>(g, v);
        if (m_.op->lambda() != 0.0) out.array() += m_.op->potential().cast<Real>().array() * v.array();
        return out;
    }

    Vec<Real> nl(const Vec<Real>& v) const {
        using std::abs;
        using std::pow;
        const Eigen::Index n = v.size();
        const Real p = static_cast<Real>(m_.power());
        Vec<Real> out(n);
        if (m_.choquard()) {
            Vec<Real> source(n), conv(n);
            for (Eigen::Index j = 0; j < n; ++j) source[j] = static_cast<Real>(m_.weight_tau[j]) * pow(abs(v[j]), p);
            convolve(source, conv);
            for (Eigen::Index j = 0; j < n; ++j)
                out[j] = static_cast<Real>(m_.weight_tau[j]) * pow(abs(v[j]), p - 2) * conv[j] * v[j];
        } else {
            for (Eigen::Index j = 0; j < n; ++j)
                out[j] = static_cast<Real>(m_.weight_2tau[j]) * pow(abs(v[j]), 2 * p - 2) * v[j];
        }
        return out;
    }

    Vec<Real> solve(const Vec<Real>& b) const {
        Vec<Real> x = w_.cwiseProduct(b);
        solver_.solve(x.data());
        return x;
    }

private:
    static BandCholesky<Real> make_solver(const Model& m) {
        return BandCholesky<Real>(assemble_shifted_band<Real>(*m.grid, m.spec.s, m.op->lambda(), 1.0), m.grid->M,
                                  m.spec.s == 1 ? 1 : 2);
    }

    void convolve(const Vec<Real>& x, Vec<Real>& y) const {
        if constexpr (std::is_same_v<Real, double>) {
            Eigen::VectorXd out;
            kernels::matvec(m_.kernel->matrix(), x, out, m_.exec);
            y = out;
        } else {
            kernels::matvec_extended(m_.kernel->matrix(), x.data(), y.data(), m_.exec);
        }
    }

    const Model& m_;
    Vec<Real> w_;
    BandCholesky<Real> solver_;
};

template <class Real>
struct PetviashviliResult {
    Vec<Real> phi;
    double residual = 0.0;
    int iterations = 0;
    bool relaxed = false;
};

std::string sci(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", x);
    return buf;
}

template <class Real>
PetviashviliResult<Real> petviashvili(const Model& model, Vec<Real> v, const GroundStateOptions& opt) {
    using std::pow;
    using std::sqrt;
    const Arithmetic<Real> ar(model);
    const Real sigma = 2 * static_cast<Real>(model.power()) - 1;
    const Real theta = sigma / (sigma - 1);

    PetviashviliResult<Real> out;
    Real relax = 1;
    double prev_res = INFINITY, best = INFINITY;
    int rises = 0, since_best = 0;

    auto finish = [&](double res, int it, bool at_floor) {
        if (at_floor && res > opt.accept_tol)
            throw NonConvergence("Petviashvili residual stalled at " + sci(res) + " above " + sci(opt.accept_tol));
        out.phi = v;
        out.residual = res;
        out.iterations = it;
        out.relaxed = relax < 1;
        return out;
    };

    for (int it = 0; it < opt.max_iter; ++it) {
        const Real norm = sqrt(ar.dot(v, v));
        if (!(norm > 1e-12) || norm > 1e12 || !v.allFinite())
            throw Degenerate("Petviashvili iterate collapsed or diverged (norm " + sci(static_cast<double>(norm)) + ")");

        const Vec<Real> nl = ar.nl(v);
        const Vec<Real> lhs = ar.applyK(v) + v;
        const Vec<Real> r = lhs - nl;
        const double res = static_cast<double>(sqrt(ar.dot(r, r)) / norm);
        if (res <= opt.tol) return finish(res, it, false);

        rises = res > prev_res ? rises + 1 : 0;
        if (rises >= 3 && relax == 1) relax = static_cast<Real>(opt.relaxation);
        prev_res = res;

        const Real gamma = ar.dot(lhs, v) / ar.dot(nl, v);
        const Vec<Real> next = pow(gamma, theta) * ar.solve(nl);
        const Vec<Real> d = next - v;
        const double step = static_cast<double>(sqrt(ar.dot(d, d)) / norm);
        v = relax == 1 ? next : Vec<Real>(relax * next + (1 - relax) * v);

        // The update has reached rounding level: nothing more to gain.
        if (step <= 64 * std::numeric_limits<Real>::epsilon()) return finish(res, it, true);
        if (res < best * (1.0 - 1e-3)) {
            best = res;
            since_best = 0;
        } else if (++since_best > 500) {
            return finish(res, it, true);
        }
    }
    throw NonConvergence("Petviashvili did not reach tolerance in " + std::to_string(opt.max_iter) + " iterations");
}

// Linear interpolation of a cell-centred profile onto another grid over the same radius.
Eigen::VectorXd resample(const Grid& from, const Grid& to, const Eigen::VectorXd& f) {
    Eigen::VectorXd out(to.M);
    for (int j = 0; j < to.M; ++j) {
        const double x = to.r[j] / from.dr - 0.5;
        if (x <= 0.0) {
            out[j] = f[0];
            continue;
        }
        const int k = std::min(static_cast<int>(x), from.M - 2);
        const double t = x - k;
        out[j] = (1.0 - t) * f[k] + t * f[k + 1];
    }
    return out;
}

template <class Real>
CertificateValues evaluate(const Model& model, const Vec<Real>& phi) {
    const Arithmetic<Real> ar(model);
    const Real m = ar.dot(phi, phi);
    const Real k = ar.dot(ar.applyK(phi), phi);
    const Real p = ar.dot(ar.nl(phi), phi);
    return certificate_values(model.exps, static_cast<double>(m), static_cast<double>(k), static_cast<double>(p));
}

// X_k = X + sum_i c_i h_k^{q_i}, solved exactly through the available levels.
double extrapolate(const std::vector<double>& h, const std::vector<double>& x, const std::vector<double>& q) {
    const int n = static_cast<int>(x.size());
    Eigen::MatrixXd A(n, n);
    Eigen::VectorXd b(n);
    for (int k = 0; k < n; ++k) {
        A(k, 0) = 1.0;
        for (int i = 1; i < n; ++i) A(k, i) = std::pow(h[k] / h[0], q[i - 1]);
        b[k] = x[k];
    }
    return A.fullPivLu().solve(b)[0];
}

}  // namespace

double ground_state_residual(const Model& model, const Eigen::VectorXd& phi) {
    const Arithmetic<double> ar(model);
    const Eigen::VectorXd r = ar.applyK(phi) + phi - ar.nl(phi);
    return std::sqrt(ar.dot(r, r) / ar.dot(phi, phi));
}

GroundState solve_ground_state(const Model& model, const std::optional<RadialField>& init,
                               const GroundStateOptions& options) {
    const Grid& g = *model.grid;
    Eigen::VectorXd v0(g.M);
    if (init) {
        if (init->values.size() != g.M) throw std::invalid_argument("initial guess does not match the grid");
        v0 = init->values.real().cwiseAbs();
    } else {
        v0 = (-0.5 * g.r.array().square()).exp().matrix();
    }

    GroundState gs;
    gs.spec = model.spec;
    gs.exps = model.exps;

    Eigen::VectorXd phi;
    if (options.extended) {
        const auto run = petviashvili<long double>(model, v0.cast<long double>(), options);
        phi = run.phi.cast<double>();
        gs.residual = run.residual;
        gs.iterations = run.iterations;
        gs.relaxed = run.relaxed;
        gs.grid = evaluate<long double>(model, run.phi);
    } else {
        const auto run = petviashvili<double>(model, v0, options);
        phi = run.phi;
        gs.residual = run.residual;
        gs.iterations = run.iterations;
        gs.relaxed = run.relaxed;
        gs.grid = evaluate<double>(model, run.phi);
    }
    gs.field = RadialField(model.grid, phi.cast<std::complex<double>>());
    gs.residual_double = ground_state_residual(model, phi);

    // Structure: positive and unimodal. For lambda = 0 the maximum sits in the
    // first cell, which makes this radial monotonicity; for lambda > 0 the
    // profile vanishes at the origin like r^gamma and rises to its maximum first.
    bool ok = phi.minCoeff() > 0.0;
    Eigen::Index peak = 0;
    phi.maxCoeff(&peak);
    if (model.spec.effective_lambda() == 0.0 && peak != 0) ok = false;
    for (Eigen::Index j = 1; j <= peak && ok; ++j) ok = phi[j] >= phi[j - 1];
    for (Eigen::Index j = peak + 1; j < g.M && ok; ++j) ok = phi[j] <= phi[j - 1];
    gs.structural_ok = ok;
    if (!ok) {
        const Eigen::Index first_neg = [&] {
            for (Eigen::Index j = 0; j < g.M; ++j)
                if (phi[j] <= 0.0) return j;
            return Eigen::Index(-1);
        }();
        gs.note = first_neg >= 0 ? "profile changes sign near r = " + std::to_string(g.r[first_neg]) +
                                       "; positivity check failed"
                                 : "profile is not unimodal";
    }

    gs.level_M.push_back(g.M);
    gs.level_values.push_back(gs.grid);
    gs.level_residuals.push_back(gs.residual);
    if (options.levels > 1) {
        GroundStateOptions fine_opt = options;
        fine_opt.accept_tol = 1e-3;  // companions only feed functionals into the extrapolation
        Eigen::VectorXd guess = phi;
        GridPtr prev = model.grid;
        for (int level = 1; level < options.levels; ++level) {
            const GridPtr fine = make_grid(g.M << level, g.r_max, g.N);
            const Model fine_model = make_model_unchecked(model.spec, fine, model.exec);
            const Eigen::VectorXd start = resample(*prev, *fine, guess);
            if (options.extended) {
                const auto run = petviashvili<long double>(fine_model, start.cast<long double>(), fine_opt);
                gs.level_values.push_back(evaluate<long double>(fine_model, run.phi));
                gs.level_residuals.push_back(run.residual);
                guess = run.phi.cast<double>();
            } else {
                const auto run = petviashvili<double>(fine_model, start, fine_opt);
                gs.level_values.push_back(evaluate<double>(fine_model, run.phi));
                gs.level_residuals.push_back(run.residual);
                guess = run.phi;
            }
            gs.level_M.push_back(fine->M);
            prev = fine;
        }
        const std::vector<double> all = error_exponents(model.spec);
        gs.exponents.assign(all.begin(), all.begin() + std::min<size_t>(all.size(), options.levels - 1));
        std::vector<double> h, mv, kv, pv;
        for (size_t k = 0; k < gs.level_M.size(); ++k) {
            h.push_back(g.r_max / gs.level_M[k]);
            mv.push_back(gs.level_values[k].mass);
            kv.push_back(gs.level_values[k].kinetic);
            pv.push_back(gs.level_values[k].potential);
        }
        gs.extrapolated = certificate_values(model.exps, extrapolate(h, mv, gs.exponents),
                                             extrapolate(h, kv, gs.exponents), extrapolate(h, pv, gs.exponents));
    }
    gs.sharp_constant = sharp_constant(gs);
    return gs;
}

double sharp_constant(const DerivedExponents& e, double mass) {
    const double p = e.power;
    return (2.0 * p / e.A) * std::pow(e.A / e.B, e.B / 2.0) * std::pow(mass, -(p - 1.0));
}

double sharp_constant(const GroundState& gs) { return sharp_constant(gs.exps, gs.reference_mass()); }

double threshold_m(const GroundState& gs) { return gs.grid.action; }

double weinstein_quotient(const Model& model, const Eigen::VectorXcd& u) {
    const double m = mass(*model.grid, u);
    const double k = kinetic(model, u);
    const double p = potential(model, u);
    return p / (std::pow(m, model.exps.A / 2.0) * std::pow(k, model.exps.B / 2.0));
}

double weinstein_ascent(const Model& model, Eigen::VectorXd v, int iterations) {
    const Eigen::VectorXd& w = model.grid->w;
    const double p2 = 2.0 * model.power();
    auto quotient = [&](const Eigen::VectorXd& x) { return weinstein_quotient(model, x.cast<std::complex<double>>()); };
    auto wnorm = [&](const Eigen::VectorXd& x) { return std::sqrt((w.array() * x.array().square()).sum()); };

    double best = quotient(v);
    double step = 0.25;
    for (int it = 0; it < iterations; ++it) {
        const Eigen::VectorXcd vc = v.cast<std::complex<double>>();
        const Eigen::VectorXd nl = nonlinear_potential(model, vc).cwiseProduct(v);
        const Eigen::VectorXd kv = model.op->apply(v);
        const double m = (w.array() * v.array().square()).sum();
        const double k = (w.array() * kv.array() * v.array()).sum();
        const double P = (w.array() * nl.array() * v.array()).sum();
        // Gradient of log W in <.,.>_w, preconditioned by (K + 1)^{-1}.
        const Eigen::VectorXd grad = p2 * nl / P - model.exps.A * v / m - model.exps.B * kv / k;
        const Eigen::VectorXd dir = model.op->solve_shifted(grad, 1.0);
        const double scale = std::sqrt(m) / wnorm(dir);

        bool moved = false;
        for (int tries = 0; tries < 40; ++tries) {
            const Eigen::VectorXd trial = v + step * scale * dir;
            const double q = quotient(trial);
            if (std::isfinite(q) && q > best) {
                v = trial;
                best = q;
                step = std::min(step * 1.5, 1.0);
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!moved) break;
        v *= std::sqrt(m) / wnorm(v);  // the quotient is scale invariant; keep the iterate O(1)
    }
    return best;
}

}  // namespace inls
