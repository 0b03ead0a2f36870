#include "inls/criteria.hpp"
#include "inls/io.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

using namespace inls;
namespace fs = std::filesystem;

namespace {

struct Fixture {
    Model model;
    GroundState gs;
};

const Fixture& fixture() {
    static const Fixture f = [] {
        Model m = make_model(ProblemSpec{}, make_grid(192, 12.0, 3));
        GroundStateOptions o;
        o.levels = 1;
        GroundState gs = solve_ground_state(m, std::nullopt, o);
        return Fixture{std::move(m), std::move(gs)};
    }();
    return f;
}

Classification classify_scaled(double c) {
    const auto& [m, gs] = fixture();
    return classify(m, c * gs.field.values, gs);
}

}  // namespace

TEST_CASE("classification of the ground state itself") {
    const auto& [m, gs] = fixture();
    const Classification c = classify(m, gs.field.values, gs);
    CHECK(std::abs(c.virial) <= 1e-2 * gs.grid.kinetic);
    CHECK(c.MG == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(c.ME == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(c.action_vs_m) <= 1e-12 * c.m_hat);
    CHECK_FALSE(c.in_A_minus);
    CHECK_FALSE(c.condition_t13);
    CHECK(c.predicted == Prediction::NoPrediction);
}

TEST_CASE("classification of c phi follows the closed forms") {
    const auto& [m, gs] = fixture();
    const double p = m.power(), B = m.exps.B, ac = m.exps.alpha_c;
    const double kin = gs.grid.kinetic, P = gs.grid.potential;
    for (double c : {1.1, 1.5, 2.0}) {
        const Classification r = classify_scaled(c);
        CHECK(r.MG == doctest::Approx(std::pow(c, 1 + ac)).epsilon(1e-12));
        const double energy = c * c * kin - std::pow(c, 2 * p) * P / p;
        CHECK(r.ME == doctest::Approx(std::pow(c, 2 * ac) * energy / gs.grid.energy).epsilon(1e-12));
        // With the Pohozaev identities substituted, up to the grid defect.
        CHECK(r.ME == doctest::Approx(std::pow(c, 2 * ac) * (c * c - 2 * std::pow(c, 2 * p) / B) / (1 - 2 / B)).epsilon(2e-2));
        CHECK(r.virial < 0.0);
        CHECK(r.MG > 1.0);
        if (r.ME < 1.0) {
            CHECK(r.condition_t13);
            CHECK(r.predicted == Prediction::BlowUp);
        }
    }
    const Classification big = classify_scaled(1.5);
    CHECK(big.ME < 1.0);
    CHECK(big.condition_t13);
    CHECK(big.in_A_minus);
    CHECK(big.note.find("conditional on m = S[phi]") != std::string::npos);
}

TEST_CASE("threshold algebra over 50 amplitudes") {
    const double p = fixture().model.power();
    for (int k = 0; k < 50; ++k) {
        const double c = 0.1 + 2.9 * (k + 0.5) / 50;
        const Classification r = classify_scaled(c);
        const int expected = 1 - std::pow(c, 2 * p - 2) > 0 ? 1 : -1;
        CHECK_MESSAGE(r.virial_sign == expected, "c = " << c);
        if (r.in_A_minus) {
            CHECK(r.virial_sign < 0);
            CHECK(r.action_vs_m < 0.0);
        }
        if (r.condition_t13) CHECK(r.predicted == Prediction::BlowUp);
        if (c < 1.0) CHECK_FALSE(r.in_A_minus);
    }
}

TEST_CASE("classification rejects a ground state of another problem") {
    const auto& [m, gs] = fixture();
    ProblemSpec other;
    other.power = "2.05";
    const Model m2 = make_model(other, m.grid);
    CHECK_THROWS_AS(classify(m2, gs.field.values, gs), SpecMismatch);
}

TEST_CASE("local specs are labelled as primed variants") {
    ProblemSpec sp;
    sp.kind = Nonlinearity::Local;
    sp.power = "1.5";
    const Model m = make_model(sp, make_grid(128, 12.0, 3));
    GroundStateOptions o;
    o.levels = 1;
    const GroundState gs = solve_ground_state(m, std::nullopt, o);
    CHECK(classify(m, 0.5 * gs.field.values, gs).note.find("primed") != std::string::npos);
}

TEST_CASE("ODI estimator is exact on f' = f^2") {
    const double T = 1.3;
    std::vector<double> t, f, fp;
    for (int k = 0; k < 300; ++k) {
        const double tk = 1.2 * k / 299;
        t.push_back(tk);
        f.push_back(1 / (T - tk));
        fp.push_back(1 / ((T - tk) * (T - tk)));
    }
    const OdiReport r = odi_fit(t, f, fp, 2.0);
    CHECK(std::abs(r.c_lower - 1.0) < 1e-10);
    CHECK(std::abs(r.t_star_bound - T) < 1e-10);
    CHECK(r.monotone_fraction >= 0.9);
    CHECK(r.window_start == doctest::Approx(t[200]));
}

TEST_CASE("ODI estimator is exact on f' = f^4") {
    const double T = 0.7;
    std::vector<double> t, f, fp;
    for (int k = 0; k < 300; ++k) {
        const double tk = 0.69 * k / 299;
        t.push_back(tk);
        f.push_back(std::pow(3 * (T - tk), -1.0 / 3));
        fp.push_back(std::pow(3 * (T - tk), -4.0 / 3));
    }
    const OdiReport r = odi_fit(t, f, fp, 4.0);
    CHECK(std::abs(r.c_lower - 1.0) < 1e-10);
    CHECK(std::abs(r.t_star_bound - T) < 1e-10);
}

TEST_CASE("ODI estimator with differenced derivative on a nonuniform grid") {
    const double T = 1.0;
    std::vector<double> t, f;
    for (int k = 0; k < 2000; ++k) {
        const double tk = 0.9 * std::sqrt(k / 1999.0);
        t.push_back(tk);
        f.push_back(1 / (T - tk));
    }
    const OdiReport r = odi_fit(t, f, {}, 2.0);
    // the last sample uses a one-sided difference
    CHECK(r.c_lower == doctest::Approx(1.0).epsilon(1e-2));
    CHECK(r.t_star_bound == doctest::Approx(T).epsilon(1e-3));
}

TEST_CASE("ODI estimator errors") {
    CHECK_THROWS_AS(odi_fit({0, 1, 2}, {1, 2, 3}, {}, 2.0), InsufficientSamples);
    std::vector<double> t{0, 1, 2, 3, 4, 5, 6, 7, 8}, falling{9, 8, 7, 6, 5, 4, 3, 2, 1};
    CHECK_THROWS_AS(odi_fit(t, falling, {}, 2.0), DegenerateFit);
    Trajectory tr;
    tr.verdict = Verdict::ReachedHorizon;
    CHECK_THROWS_AS(odi_fit(tr, ProblemSpec{}), NoBlowupVerdict);
}

TEST_CASE("coercivity on the threshold datum is a boundary case") {
    const auto& [m, gs] = fixture();
    EvolveControls c;
    c.t_end = 0.05;
    const Trajectory tr = evolve(m, gs.field, c);
    const CoercivityReport rep = coercivity_monitor(m, tr, gs);
    CHECK(rep.epsilon_star == 0.0);
    CHECK(rep.boundary_case);
    CHECK(rep.message.find("boundary case, no certificate") != std::string::npos);
    CHECK_FALSE(rep.t13_data);
}

TEST_CASE("coercivity along a supercritical run") {
    const auto& [m, gs] = fixture();
    EvolveControls c;
    c.t_end = 2.0;
    c.grad_blowup_factor = 20.0;
    const Trajectory tr = evolve(m, RadialField(m.grid, 1.5 * gs.field.values), c);
    REQUIRE(tr.verdict == Verdict::BlowupDetected);
    const CoercivityReport rep = coercivity_monitor(m, tr, gs);
    CHECK(rep.t13_data);
    CHECK(rep.ss_data);
    CHECK(rep.epsilon_star > 0.0);
    CHECK(rep.a_minus_violations == 0);
    CHECK(rep.mg_violations == 0);
    CHECK(rep.ss_inequality_violations == 0);
    CHECK(rep.kinetic_lower_violations == 0);
    CHECK(rep.min_kinetic_ratio >= 1.0 - 1e-3);

    const OdiReport odi = odi_fit(tr, m.spec);
    CHECK(odi.kappa == 2.0);
    CHECK(odi.c_lower > 0.0);
    CHECK_FALSE(odi.kappa_inferred);
}

TEST_CASE("kinetic lower bound closed form") {
    const auto& [m, gs] = fixture();
    const DerivedExponents& e = m.exps;
    const double C = gs.sharp_constant, M = gs.grid.mass;
    const double lower = kinetic_lower_bound(e, C, M);
    CHECK(std::pow(lower, 0.5 * e.B - 1) == doctest::Approx(2 * e.power / (e.B * C * std::pow(M, 0.5 * e.A))).epsilon(1e-12));
    // For the sharp constant of the ground state the bound is its own kinetic energy.
    const double at_phi = kinetic_lower_bound(e, sharp_constant(e, gs.grid.mass), gs.grid.mass);
    CHECK(at_phi == doctest::Approx(gs.grid.kinetic).epsilon(2e-2));
}

TEST_CASE("Nehari rescaling") {
    const auto& [m, gs] = fixture();
    std::mt19937_64 rng(11);
    for (int k = 0; k < 20; ++k) {
        const RadialField v = nehari_rescale(m, RadialField(m.grid, GaussianMixture::random(rng).sample(*m.grid)));
        const double kin = kinetic(m, v.values);
        CHECK(std::abs(virial_from(m, kin, potential(m, v.values))) <= 1e-10 * kin);
    }
    CHECK_THROWS_AS(nehari_rescale(m, RadialField::zeros(m.grid)), RescaleFailure);
}

TEST_CASE("mixture scaling preserves mass") {
    auto g = make_grid(1024, 20.0, 5);
    std::mt19937_64 rng(5);
    for (int k = 0; k < 10; ++k) {
        const GaussianMixture mix = GaussianMixture::random(rng);
        const double m0 = mass(*g, mix.sample(*g));
        CHECK(mass(*g, mix.scaled(2.0, 5).sample(*g)) == doctest::Approx(m0).epsilon(1e-8));
        CHECK(mass(*g, mix.scaled(0.5, 5).sample(*g)) == doctest::Approx(m0).epsilon(1e-8));
    }
}

TEST_CASE("rho -> I[u_rho] changes sign exactly once on (0, 1]") {
    ProblemSpec sp;
    sp.kind = Nonlinearity::Local;
    sp.power = "1.5";
    const Model m = make_model(sp, make_grid(2048, 40.0, 3));
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 5; ++trial) {
        GaussianMixture mix = GaussianMixture::random(rng);
        // amplify until the virial is negative
        auto virial_of = [&](const GaussianMixture& g) {
            const Eigen::VectorXcd u = g.sample(*m.grid);
            return virial_from(m, kinetic(m, u), potential(m, u));
        };
        while (virial_of(mix) >= 0)
            for (double& a : mix.amplitude) a *= 1.5;
        int changes = 0;
        double prev = virial_of(mix.scaled(0.2, 3));
        CHECK(prev > 0.0);
        for (int k = 1; k <= 200; ++k) {
            const double rho = 0.2 + 0.8 * k / 200;
            const double cur = virial_of(mix.scaled(rho, 3));
            if ((cur < 0) != (prev < 0)) ++changes;
            prev = cur;
        }
        CHECK(changes == 1);
    }
}

TEST_CASE("datum construction") {
    const auto& [m, gs] = fixture();
    DatumSpec d;
    d.c = 1.0;
    const RadialField phi = build_datum(d, m, &gs);
    CHECK((phi.values.array() == gs.field.values.array()).all());
    CHECK_THROWS(build_datum(d, m, nullptr));

    d.kind = DatumKind::NehariRescaled;
    d.seed = 42;
    const RadialField a = build_datum(d, m, nullptr);
    const RadialField b = build_datum(d, m, nullptr);
    CHECK((a.values.array() == b.values.array()).all());
    const double kin = kinetic(m, a.values);
    CHECK(std::abs(virial_from(m, kin, potential(m, a.values))) <= 1e-10 * kin);

    const fs::path dir = fs::temp_directory_path() / "inls_test_datum";
    fs::create_directories(dir);
    io::write_field_csv(dir / "u.csv", a);
    io::write_snapshot(dir / "u.bin", a);
    d.kind = DatumKind::Custom;
    d.file = (dir / "u.csv").string();
    CHECK((build_datum(d, m, nullptr).values.array() == a.values.array()).all());
    d.file = (dir / "u.bin").string();
    CHECK((build_datum(d, m, nullptr).values.array() == a.values.array()).all());

    const Model coarse = make_model(ProblemSpec{}, make_grid(64, 12.0, 3));
    CHECK_THROWS_AS(build_datum(d, coarse, nullptr), io::FileFormat);
    fs::remove_all(dir);

    CHECK(datum_kind_from_string("scaled_ground_state") == DatumKind::ScaledGroundState);
    CHECK(datum_kind_from_string("nehari_rescaled") == DatumKind::NehariRescaled);
    CHECK(datum_kind_from_string("custom") == DatumKind::Custom);
    CHECK_THROWS(datum_kind_from_string("other"));
}
