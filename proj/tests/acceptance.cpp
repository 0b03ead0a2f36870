#include "inls/criteria.hpp"
#include "inls/operator.hpp"
#include "inls/riesz.hpp"

#include <CLI11.hpp>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

using namespace inls;

namespace {

struct Case {
    std::string name;
    ProblemSpec spec;
    int gs_M = 1024;
    double gs_r_max = 15.0;
    // subthreshold run, t in [0, 1]
    int sub_M = 0;
    double sub_r_max = 0.0;
    double sub_dt0 = 0.0;
    // blow-up run
    int blow_M = 0;
    double blow_r_max = 0.0;
    double blow_cfl = 0.0;
};

std::vector<Case> cases() {
    std::vector<Case> out;
    {
        Case c;
        c.name = "s=1 lambda=0 Choquard";
        c.spec.s = 1;
        c.spec.N = 3;
        c.spec.alpha = Decimal("2");
        c.spec.tau = Decimal("0.5");
        c.spec.power = Decimal("2.1");
        c.sub_M = 512, c.sub_r_max = 12.0, c.sub_dt0 = 2e-4;
        c.blow_M = 4096, c.blow_r_max = 10.0, c.blow_cfl = 0.03;
        out.push_back(c);
        c.name = "s=1 lambda=1 Choquard";
        c.spec.lambda = Decimal("1");
        c.sub_M = 512, c.sub_r_max = 12.5, c.sub_dt0 = 1e-3;
        c.blow_M = 4096, c.blow_r_max = 12.5, c.blow_cfl = 0.1;
        out.push_back(c);
    }
    {
        Case c;
        c.name = "s=2 N=5 Choquard";
        c.spec.s = 2;
        c.spec.N = 5;
        c.spec.alpha = Decimal("3");
        c.spec.tau = Decimal("0.5");
        c.spec.power = Decimal("2.25");
        c.sub_M = 256, c.sub_r_max = 17.0, c.sub_dt0 = 3e-5;
        c.blow_M = 512, c.blow_r_max = 17.0, c.blow_cfl = 1e-3;
        out.push_back(c);
    }
    {
        Case c;
        c.name = "s=2 N=5 local";
        c.spec.s = 2;
        c.spec.N = 5;
        c.spec.kind = Nonlinearity::Local;
        c.spec.tau = Decimal("0.5");
        c.spec.power = Decimal("1.7");
        c.sub_M = 384, c.sub_r_max = 15.0, c.sub_dt0 = 2e-6;
        c.blow_M = 256, c.blow_r_max = 15.0, c.blow_cfl = 1e-3;
        out.push_back(c);
    }
    return out;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Verdict {
    bool pass = true;
    std::ostringstream detail;
    std::vector<std::string> failed;
    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            failed.push_back(what);
        }
    }
    std::string summary() const {
        std::string out = detail.str();
        for (size_t k = 0; k < failed.size(); ++k) out += (k ? ", " : "; failed: ") + failed[k];
        return out;
    }
};

struct Acceptance {
    std::vector<Case> specs = cases();
    std::map<int, Verdict> verdicts;

    // Evolution results shared by criteria 3 to 7.
    struct Runs {
        std::unique_ptr<Model> sub_model, blow_model;
        GroundState sub_gs, blow_gs;
        Trajectory sub, blow;
        Classification blow_class;
        double sub_kin_ratio = 0.0, blow_kin_ratio = 0.0;
        double sub_wall = 0.0, blow_wall = 0.0;
    };
    std::vector<Runs> runs;

    static void line(const char* fmt, auto... args) {
        std::printf(fmt, args...);
        std::printf("\n");
        std::fflush(stdout);
    }

    void criterion_1() {
        Verdict& v = verdicts[1];
        for (const Case& c : specs) {
            const auto t0 = std::chrono::steady_clock::now();
            const Model m = make_model(c.spec, make_grid(c.gs_M, c.gs_r_max, c.spec.N));
            const GroundState gs = solve_ground_state(m);
            const double wall = seconds_since(t0);
            line("  [1] %-22s M=%d r_max=%g residual %.2e defects %.2e %.2e status %s (%.1fs)", c.name.c_str(),
                 c.gs_M, c.gs_r_max, gs.residual, gs.pohozaev_defect_1(), gs.pohozaev_defect_2(),
                 gs.status().c_str(), wall);
            v.require(gs.residual <= 1e-8, c.name + " residual");
            v.require(gs.pohozaev_defect_1() <= 1e-6 && gs.pohozaev_defect_2() <= 1e-6, c.name + " Pohozaev defects");
            v.require(wall < 120.0, c.name + " wall time");
        }
        v.detail << specs.size() << " specs at M=1024, r_max=15";
    }

    void criterion_2() {
        Verdict& v = verdicts[2];
        for (const Case& c : specs) {
            const Model m = make_model(c.spec, make_grid(c.gs_M, c.gs_r_max, c.spec.N));
            const GroundState gs = solve_ground_state(m);
            std::mt19937_64 rng(2024);
            double worst = 0.0;
            int violations = 0;
            for (int k = 0; k < 2000; ++k) {
                const double q = weinstein_quotient(m, GaussianMixture::random(rng).sample(*m.grid)) / gs.sharp_constant;
                worst = std::max(worst, q);
                if (q > 1.0 + 1e-6) ++violations;
            }
            Eigen::VectorXd start(m.grid->M);
            for (int j = 0; j < m.grid->M; ++j) start[j] = std::exp(-0.5 * m.grid->r[j] * m.grid->r[j]);
            const double ascent = weinstein_ascent(m, start, 400) / gs.sharp_constant;
            line("  [2] %-22s C=%.10g max quotient/C %.8f violations %d ascent/C %.8f", c.name.c_str(),
                 gs.sharp_constant, worst, violations, ascent);
            v.require(violations == 0, c.name + " GN bound");
            v.require(std::abs(ascent - 1.0) <= 1e-3, c.name + " ascent");
        }
        v.detail << "2000 random mixtures per spec, 400 ascent iterations";
    }

    static double kinetic_ratio(const Trajectory& t) {
        double k = 0.0;
        for (const auto& d : t.series) k = std::max(k, d.kinetic);
        return k / t.series.front().kinetic;
    }

    void evolve_all() {
        runs.resize(specs.size());
        for (size_t i = 0; i < specs.size(); ++i) {
            const Case& c = specs[i];
            Runs& r = runs[i];
            GroundStateOptions gso;
            gso.levels = 1;

            auto t0 = std::chrono::steady_clock::now();
            r.sub_model = std::make_unique<Model>(make_model(c.spec, make_grid(c.sub_M, c.sub_r_max, c.spec.N)));
            r.sub_gs = solve_ground_state(*r.sub_model, std::nullopt, gso);
            EvolveControls sc;
            sc.t_end = 1.0;
            sc.dt0 = c.sub_dt0;
            sc.dt_min = c.sub_dt0 / 100;
            sc.snapshot_stride = 1000;
            DatumSpec half;
            half.c = 0.5;
            r.sub = evolve(*r.sub_model, build_datum(half, *r.sub_model, &r.sub_gs), sc);
            r.sub_kin_ratio = kinetic_ratio(r.sub);
            r.sub_wall = seconds_since(t0);
            line("  [evolve] %-22s 0.5 phi M=%d dt0=%g: %s, %ld steps, mass drift %.2e, energy drift %.2e, "
                 "kinetic ratio %.3f (%.1fs)",
                 c.name.c_str(), c.sub_M, c.sub_dt0, to_string(r.sub.verdict).c_str(), r.sub.steps, r.sub.mass_drift,
                 r.sub.energy_drift, r.sub_kin_ratio, r.sub_wall);

            t0 = std::chrono::steady_clock::now();
            r.blow_model = std::make_unique<Model>(make_model(c.spec, make_grid(c.blow_M, c.blow_r_max, c.spec.N)));
            r.blow_gs = solve_ground_state(*r.blow_model, std::nullopt, gso);
            DatumSpec big;
            big.c = 1.5;
            const RadialField u0 = build_datum(big, *r.blow_model, &r.blow_gs);
            r.blow_class = classify(*r.blow_model, u0.values, r.blow_gs);
            EvolveControls bc;
            bc.t_end = 5.0;
            bc.cfl_c = c.blow_cfl;
            bc.max_steps = 20'000'000;
            bc.snapshot_stride = 10000;
            r.blow = evolve(*r.blow_model, u0, bc);
            r.blow_kin_ratio = kinetic_ratio(r.blow);
            r.blow_wall = seconds_since(t0);
            line("  [evolve] %-22s 1.5 phi M=%d cfl=%g: I %.4g MG %.4g ME %.4g; %s at t=%.6f, %ld steps, "
                 "kinetic ratio %.4g (%.1fs)",
                 c.name.c_str(), c.blow_M, c.blow_cfl, r.blow_class.virial, r.blow_class.MG, r.blow_class.ME,
                 to_string(r.blow.verdict).c_str(), r.blow.series.back().time, r.blow.steps, r.blow_kin_ratio,
                 r.blow_wall);
        }
    }

    void criterion_3() {
        Verdict& v = verdicts[3];
        double worst_mass = 0.0, worst_energy = 0.0;
        for (size_t i = 0; i < specs.size(); ++i) {
            const Runs& r = runs[i];
            worst_mass = std::max(worst_mass, r.sub.mass_drift);
            worst_energy = std::max(worst_energy, r.sub.energy_drift);
            v.require(r.sub.verdict == inls::Verdict::ReachedHorizon, specs[i].name + " horizon");
            v.require(r.sub.mass_drift <= 1e-8, specs[i].name + " mass drift");
            v.require(r.sub.energy_drift <= 1e-6, specs[i].name + " energy drift");
        }
        v.detail << "worst mass drift " << worst_mass << ", worst energy drift " << worst_energy;
    }

    void criterion_4() {
        Verdict& v = verdicts[4];
        for (size_t i = 0; i < specs.size(); ++i) {
            const Runs& r = runs[i];
            const std::string& n = specs[i].name;
            v.require(r.blow_class.virial_sign < 0 && r.blow_class.MG > 1.0 && r.blow_class.ME < 1.0,
                      n + " 1.5 phi hypotheses");
            v.require(r.blow.verdict == inls::Verdict::BlowupDetected, n + " blow-up verdict");
            v.require(r.blow_kin_ratio >= 1e4, n + " kinetic growth");
            v.require(r.sub.verdict == inls::Verdict::ReachedHorizon && r.sub_kin_ratio <= 3.0, n + " subthreshold");
            v.detail << (i ? "; " : "") << n << " growth " << r.blow_kin_ratio;
        }
    }

    void criterion_5() {
        Verdict& v = verdicts[5];
        for (size_t i = 0; i < specs.size(); ++i) {
            const Runs& r = runs[i];
            const CoercivityReport rep = coercivity_monitor(*r.blow_model, r.blow, r.blow_gs);
            line("  [5] %-22s samples %zu A- violations %zu eps* %.4g kinetic lower violations %zu (min ratio %.4g)",
                 specs[i].name.c_str(), rep.samples, rep.a_minus_violations, rep.epsilon_star,
                 rep.kinetic_lower_violations, rep.min_kinetic_ratio);
            v.require(rep.a_minus_violations == 0, specs[i].name + " A- stability");
            if (rep.t13_data) v.require(rep.epsilon_star > 0.0, specs[i].name + " coercivity");
            v.require(rep.kinetic_lower_violations == 0, specs[i].name + " kinetic lower bound");
        }
        v.detail << "monitors on " << specs.size() << " blow-up runs";
    }

    void criterion_6() {
        Verdict& v = verdicts[6];
        for (size_t i = 0; i < specs.size(); ++i) {
            const Runs& r = runs[i];
            const MorawetzReport sub = morawetz_rate_check(r.sub, *r.sub_model, r.sub.R);
            const MorawetzReport blow = morawetz_rate_check(r.blow, *r.blow_model, r.blow.R);
            line("  [6] %-22s R %.4g/%.4g violation fraction %.5f (sub) %.5f (blow-up), final slope %.4g, "
                 "eventually decreasing %d",
                 specs[i].name.c_str(), sub.R, blow.R, sub.violation_fraction, blow.violation_fraction,
                 blow.final_slope, static_cast<int>(blow.eventually_decreasing));
            v.require(sub.violation_fraction <= 0.01, specs[i].name + " subthreshold rate check");
            v.require(blow.violation_fraction <= 0.01, specs[i].name + " blow-up rate check");
            v.require(blow.eventually_decreasing && blow.final_slope < 0.0, specs[i].name + " decay");
        }
        v.detail << "R = 20 x RMS radius of the datum";
    }

    void criterion_7() {
        Verdict& v = verdicts[7];
        // f' = f^kappa has f = ((kappa-1)(1 - t))^{-1/(kappa-1)}, blowing up at T* = 1.
        for (double kappa : {2.0, 4.0}) {
            std::vector<double> t, f, fp;
            for (int k = 0; k <= 600; ++k) {
                t.push_back(0.9 * k / 600);
                f.push_back(std::pow((kappa - 1) * (1 - t.back()), -1 / (kappa - 1)));
                fp.push_back(std::pow(f.back(), kappa));
            }
            const OdiReport rep = odi_fit(t, f, fp, kappa);
            const double err = std::max(std::abs(rep.c_lower - 1.0), std::abs(rep.t_star_bound - 1.0));
            line("  [7] synthetic kappa=%g: c_lower %.15f t_star %.15f", kappa, rep.c_lower, rep.t_star_bound);
            v.require(err < 1e-10, "synthetic kappa " + std::to_string(static_cast<int>(kappa)));
        }
        for (size_t i = 0; i < specs.size(); ++i) {
            const Runs& r = runs[i];
            if (r.blow.verdict != inls::Verdict::BlowupDetected) {
                v.require(false, specs[i].name + " has no blow-up run");
                continue;
            }
            const OdiReport rep = odi_fit(r.blow, specs[i].spec);
            const double collapse = r.blow.series.back().time;
            const double rel = std::abs(rep.t_star_bound / collapse - 1.0);
            line("  [7] %-22s kappa %g c_lower %.4g t_star_bound %.6f collapse %.6f (rel %.4f)", specs[i].name.c_str(),
                 rep.kappa, rep.c_lower, rep.t_star_bound, collapse, rel);
            v.require(rep.c_lower > 0.0, specs[i].name + " c_lower");
            v.require(rel <= 0.2, specs[i].name + " t_star");
        }
        v.detail << "exact synthetic families and " << specs.size() << " blow-up runs";
    }

    void criterion_8() {
        Verdict& v = verdicts[8];
        double em = 0, ek = 0, ep = 0;
        for (const Case& c : specs) {
            const Model m = make_model(c.spec, make_grid(c.gs_M, c.gs_r_max, c.spec.N));
            const Grid& g = *m.grid;
            const GridPtr fine = make_grid(4096, c.gs_r_max, c.spec.N);
            const KOperator fine_op(c.spec.s, c.spec.effective_lambda(), fine);
            std::mt19937_64 rng(8);
            for (int k = 0; k < 20; ++k) {
                const GaussianMixture mix = GaussianMixture::random(rng);
                const auto u = mix.sample(g);
                const double m0 = mass(g, u), p0 = potential(m, u), k0 = fine_op.form(mix.sample(*fine));
                for (double rho : {0.5, 2.0}) {
                    const GaussianMixture sc = mix.scaled(rho, c.spec.N);
                    const auto w = sc.sample(g);
                    em = std::max(em, std::abs(mass(g, w) / m0 - 1.0));
                    ek = std::max(ek, std::abs(fine_op.form(sc.sample(*fine)) /
                                                   (k0 * std::pow(rho, 2 * c.spec.s)) - 1.0));
                    ep = std::max(ep, std::abs(potential(m, w) / (p0 * std::pow(rho, c.spec.s * m.exps.B)) - 1.0));
                }
            }
        }
        v.require(em <= 1e-8, "mass");
        v.require(ek <= 1e-4, "kinetic");
        v.require(ep <= 1e-3, "potential");
        v.detail << "mass " << em << ", kinetic " << ek << ", P " << ep << " (20 mixtures per spec, rho 0.5 and 2)";
    }

    static double weighted_error(const Grid& g, const Eigen::VectorXd& got, const std::function<double(double)>& f) {
        double acc = 0.0;
        for (int j = 0; j < g.M; ++j) acc += g.w[j] * std::pow(got[j] - f(g.r[j]), 2);
        return std::sqrt(acc);
    }

    void criterion_9() {
        Verdict& v = verdicts[9];
        using Apply = std::function<Eigen::VectorXd(const GridPtr&)>;
        auto gauss = [](double r) { return std::exp(-0.5 * r * r); };
        auto sample_real = [](const Grid& g, const std::function<double(double)>& f) {
            Eigen::VectorXd x(g.M);
            for (int j = 0; j < g.M; ++j) x[j] = f(g.r[j]);
            return x;
        };
        auto order_check = [&](const std::string& name, int N, double r_max, const std::function<double(double)>& exact,
                               const Apply& apply) {
            std::array<double, 3> e{};
            int k = 0;
            for (int M : {256, 512, 1024}) {
                const GridPtr g = make_grid(M, r_max, N);
                e[k++] = weighted_error(*g, apply(g), exact);
            }
            const double o1 = std::log2(e[0] / e[1]), o2 = std::log2(e[1] / e[2]);
            line("  [9] %-32s errors %.3e %.3e %.3e orders %.3f %.3f", name.c_str(), e[0], e[1], e[2], o1, o2);
            v.require(std::min(o1, o2) >= 1.9, name);
        };
        auto r2g = [&](double r) { return r * r * gauss(r); };

        order_check("-Laplacian (N=3)", 3, 12.0, [&](double r) { return (3 - r * r) * gauss(r); },
                    [&](const GridPtr& g) {
                        return KOperator(1, 0.0, g).apply(sample_real(*g, gauss));
                    });
        order_check("K with lambda=1 (N=3)", 3, 12.0,
                    [&](double r) { return (3 - r * r) * gauss(r) + gauss(r) / (r * r); },
                    [&](const GridPtr& g) { return KOperator(1, 1.0, g).apply(sample_real(*g, gauss)); });
        order_check("bi-Laplacian (N=5)", 5, 12.0,
                    [&](double r) {
                        const double q = r * r;
                        return (q * q * q - 22 * q * q + 119 * q - 140) * gauss(r);
                    },
                    [&](const GridPtr& g) { return KOperator(2, 0.0, g).apply(sample_real(*g, r2g)); });
        order_check("bi-Laplacian (N=3)", 3, 12.0,
                    [&](double r) {
                        const double q = r * r;
                        return (q * q * q - 18 * q * q + 75 * q - 60) * gauss(r);
                    },
                    [&](const GridPtr& g) { return KOperator(2, 0.0, g).apply(sample_real(*g, r2g)); });
        // J_2 * e^{-r^2} = sqrt(pi) erf(r) / (4 r) in three dimensions.
        auto coulomb = [](double r) { return std::sqrt(std::numbers::pi) * std::erf(r) / (4 * r); };
        order_check("Riesz potential (N=3, alpha=2)", 3, 10.0, coulomb, [](const GridPtr& g) {
            Eigen::VectorXd f(g->M);
            for (int j = 0; j < g->M; ++j) f[j] = std::exp(-g->r[j] * g->r[j]);
            return RieszKernel(g, 2.0).apply(f);
        });
        {
            const double exact = 1.5 * std::pow(std::numbers::pi, 1.5);
            std::array<double, 3> e{};
            int k = 0;
            for (int M : {256, 512, 1024}) {
                const GridPtr g = make_grid(M, 12.0, 3);
                e[k++] = std::abs(gradient_norm_sq(*g, sample_real(*g, gauss).cast<std::complex<double>>()) - exact);
            }
            const double o1 = std::log2(e[0] / e[1]), o2 = std::log2(e[1] / e[2]);
            line("  [9] %-32s errors %.3e %.3e %.3e orders %.3f %.3f", "gradient norm (N=3)", e[0], e[1], e[2], o1, o2);
            v.require(std::min(o1, o2) >= 1.9, "gradient norm");
        }
        {
            const GridPtr g = make_grid(1024, 10.0, 3);
            Eigen::VectorXd f(g->M);
            for (int j = 0; j < g->M; ++j) f[j] = std::exp(-g->r[j] * g->r[j]);
            const Eigen::VectorXd got = RieszKernel(g, 2.0).apply(f);
            double worst = 0.0;
            for (int j = 0; j < g->M; ++j) worst = std::max(worst, std::abs(got[j] / coulomb(g->r[j]) - 1.0));
            line("  [9] Coulomb oracle at M=1024: worst relative error %.3e", worst);
            v.require(worst <= 1e-4, "Coulomb oracle");
            v.detail << "Coulomb relative error " << worst;
        }
    }
};

const char* kTitles[10] = {"",
                           "Pohozaev certificates",
                           "sharp GN constant",
                           "conservation",
                           "blow-up dichotomy",
                           "along-flow monitors",
                           "Morawetz machinery",
                           "ODI estimator",
                           "scaling laws",
                           "discretization quality"};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance suite: one pass/fail line per criterion"};
    std::vector<int> only;
    app.add_option("--only", only, "run a subset of the criteria (1-9)")->check(CLI::Range(1, 9));
    CLI11_PARSE(app, argc, argv);
    std::set<int> chosen(only.begin(), only.end());
    if (chosen.empty())
        for (int k = 1; k <= 9; ++k) chosen.insert(k);

    Acceptance a;
    const auto t0 = std::chrono::steady_clock::now();
    auto run = [&](int k, auto&& body) {
        if (!chosen.count(k)) return;
        try {
            body();
        } catch (const std::exception& e) {
            a.verdicts[k].require(false, std::string("exception: ") + e.what());
        }
    };
    run(1, [&] { a.criterion_1(); });
    run(2, [&] { a.criterion_2(); });
    if (chosen.count(3) || chosen.count(4) || chosen.count(5) || chosen.count(6) || chosen.count(7)) {
        try {
            a.evolve_all();
        } catch (const std::exception& e) {
            for (int k = 3; k <= 7; ++k) a.verdicts[k].require(false, std::string("evolution: ") + e.what());
            for (int k = 3; k <= 7; ++k) chosen.erase(k);
        }
    }
    run(3, [&] { a.criterion_3(); });
    run(4, [&] { a.criterion_4(); });
    run(5, [&] { a.criterion_5(); });
    run(6, [&] { a.criterion_6(); });
    run(7, [&] { a.criterion_7(); });
    run(8, [&] { a.criterion_8(); });
    run(9, [&] { a.criterion_9(); });

    bool all = true;
    std::printf("\n");
    for (auto& [k, v] : a.verdicts) {
        all = all && v.pass;
        std::printf("criterion %d (%s): %s  %s\n", k, kTitles[k], v.pass ? "PASS" : "FAIL", v.summary().c_str());
    }
    std::printf("total wall time %.1fs\n", seconds_since(t0));
    return all ? 0 : 1;
}
