#include "inls/functionals.hpp"

#include <cassert>
#include <cmath>

namespace inls {

Model make_model_unchecked(const ProblemSpec& spec, GridPtr grid, kernels::Exec exec) {
    if (grid->N != spec.N) throw std::invalid_argument("grid dimension does not match the problem");
    Model m;
    m.spec = spec;
    m.validation.spec = spec;
    m.exps = derive_exponents(spec);
    m.grid = grid;
    m.exec = exec;
    m.op = std::make_shared<KOperator>(spec.s, spec.effective_lambda(), grid);
    if (spec.choquard()) m.kernel = std::make_shared<RieszKernel>(grid, spec.alpha.value(), exec);
    const double tau = spec.tau.value();
    m.weight_tau = grid->r.array().pow(-tau);
    m.weight_2tau = grid->r.array().pow(-2.0 * tau);
    return m;
}

Model make_model(const ProblemSpec& spec, GridPtr grid, kernels::Exec exec) {
    Validation v = validate_spec(spec);
    Model m = make_model_unchecked(v.spec, std::move(grid), exec);
    m.validation = std::move(v);
    return m;
}

double mass(const Grid& g, const Eigen::VectorXcd& u) { return (g.w.array() * u.array().abs2()).sum(); }

double mass(const RadialField& u) { return mass(*u.grid, u.values); }

double kinetic(const Model& m, const Eigen::VectorXcd& u) { return m.op->form(u); }

Eigen::VectorXd nonlinear_potential(const Model& m, const Eigen::VectorXcd& u) {
    const Eigen::ArrayXd mod = u.array().abs();
    const double p = m.power();
    if (m.choquard()) {
        const Eigen::VectorXd source = (m.weight_tau.array() * mod.pow(p)).matrix();
        const Eigen::VectorXd conv = m.kernel->apply(source, m.exec);
        return (m.weight_tau.array() * mod.pow(p - 2.0) * conv.array()).matrix();
    }
    return (m.weight_2tau.array() * mod.pow(2.0 * p - 2.0)).matrix();
}

double potential_choquard(const Model& m, const Eigen::VectorXcd& u) {
    if (!m.choquard()) throw std::logic_error("Choquard potential requested for a local source");
    const Eigen::VectorXd V = nonlinear_potential(m, u);
    return (m.grid->w.array() * V.array() * u.array().abs2()).sum();
}

double potential_local(const Model& m, const Eigen::VectorXcd& u) {
    if (m.choquard()) throw std::logic_error("local potential requested for a Choquard source");
    const Eigen::ArrayXd mod2 = u.array().abs2();
    return (m.grid->w.array() * m.weight_2tau.array() * mod2.pow(m.power())).sum();
}

double potential(const Model& m, const Eigen::VectorXcd& u) {
    return m.choquard() ? potential_choquard(m, u) : potential_local(m, u);
}

double energy_from(const Model& m, double kin, double pot) { return kin - pot / m.power(); }

double virial_from(const Model& m, double kin, double pot) { return kin - m.exps.B / (2.0 * m.power()) * pot; }

namespace {
double smoothstep5(double x) { return x * x * x * (x * (6.0 * x - 15.0) + 10.0); }
double smoothstep5_prime(double x) { return 30.0 * x * x * (x - 1.0) * (x - 1.0); }

constexpr double kNodes[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                              0.9061798459386640};
constexpr double kWeights[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
                                0.2369268850561891};
}  // namespace

MorawetzWeight::MorawetzWeight(double R) : R_(R) {
    if (!(R > 0.0) || !std::isfinite(R)) throw InvalidRadius("Morawetz radius must be positive");
    plateau_ = xi_blend(kRhoStar * R_);
}

// R^2 + int_R^r xi'(s) ds; the integrand is a polynomial in s on each panel
// (degree 7), so 5-point Gauss-Legendre is exact up to rounding.
double MorawetzWeight::xi_blend(double r) const {
    const int panels = 4;
    const double width = (r - R_) / panels;
    double acc = 0.0;
    for (int k = 0; k < panels; ++k) {
        const double mid = R_ + (k + 0.5) * width;
        for (int q = 0; q < 5; ++q) acc += 0.5 * width * kWeights[q] * xi_prime(mid + 0.5 * width * kNodes[q]);
    }
    return R_ * R_ + acc;
}

double MorawetzWeight::xi(double r) const {
    const double rho = r / R_;
    if (rho <= 1.0) return r * r;
    if (rho >= kRhoStar) return plateau_;
    return xi_blend(r);
}

double MorawetzWeight::xi_prime(double r) const {
    const double rho = r / R_;
    if (rho <= 1.0) return 2.0 * r;
    if (rho >= kRhoStar) return 0.0;
    const double x = (rho - 1.0) / (kRhoStar - 1.0);
    return r * 2.0 * (1.0 - smoothstep5(x));
}

double MorawetzWeight::xi_second(double r) const {
    const double rho = r / R_;
    if (rho <= 1.0) return 2.0;
    if (rho >= kRhoStar) return 0.0;
    const double x = (rho - 1.0) / (kRhoStar - 1.0);
    const double h = 2.0 * (1.0 - smoothstep5(x));
    const double dh = -2.0 * smoothstep5_prime(x) / (kRhoStar - 1.0);
    return h + rho * dh;
}

double morawetz(const Grid& g, const Eigen::VectorXcd& u, const MorawetzWeight& weight) {
    const Eigen::VectorXcd du = radial_derivative<std::complex<double>>(g, u);
    double acc = 0.0;
    for (int j = 0; j < g.M; ++j) acc += g.w[j] * weight.xi_prime(g.r[j]) * (std::conj(u[j]) * du[j]).imag();
    return 2.0 * acc;
}

Diagnostics diagnostics(const Model& m, const Eigen::VectorXcd& u, const MorawetzWeight* weight, double time,
                        double dt) {
    Diagnostics d;
    d.time = time;
    d.dt = dt;
    d.mass = mass(*m.grid, u);
    d.kinetic = kinetic(m, u);
    d.potential = potential(m, u);
    d.energy = energy_from(m, d.kinetic, d.potential);
    d.virial = virial_from(m, d.kinetic, d.potential);
    d.action = d.energy + d.mass;
    d.sup_norm = u.cwiseAbs().maxCoeff();
    d.morawetz = weight ? morawetz(*m.grid, u, *weight) : 0.0;
    assert(std::abs(d.action - (d.kinetic - d.potential / m.power() + d.mass)) <=
           1e-12 * (std::abs(d.kinetic) + std::abs(d.potential) + d.mass));
    return d;
}

double rms_radius(const Grid& g, const Eigen::VectorXcd& u) {
    const Eigen::ArrayXd a2 = u.array().abs2();
    return std::sqrt((g.w.array() * g.r.array().square() * a2).sum() / (g.w.array() * a2).sum());
}

}  // namespace inls
