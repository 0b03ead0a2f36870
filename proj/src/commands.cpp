#include "inls/commands.hpp"

#include "inls/io.hpp"
#include "inls/riesz.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>
#include <unistd.h>

namespace inls {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string utc_now() {
    const std::time_t t = std::time(nullptr);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Doubles go into JSON as numbers; non-finite values become strings.
json num(double x) {
    if (std::isfinite(x)) return x;
    return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
}

json to_json(const CertificateValues& c) {
    return {{"mass", num(c.mass)},
            {"kinetic", num(c.kinetic)},
            {"potential", num(c.potential)},
            {"energy", num(c.energy)},
            {"action", num(c.action)},
            {"pohozaev_defect_1", num(c.pohozaev_defect_1)},
            {"pohozaev_defect_2", num(c.pohozaev_defect_2)},
            {"nehari_defect", num(c.nehari_defect)}};
}

json to_json(const Validation& v) {
    return {{"tier", to_string(v.tier)},
            {"b_upper_theorem", num(v.b_upper_theorem)},
            {"b_upper_section", num(v.b_upper_section)},
            {"bound_discrepancy", v.bound_discrepancy},
            {"warnings", v.warnings}};
}

json to_json(const DerivedExponents& e) {
    return {{"B", num(e.B)},         {"A", num(e.A)},         {"crit_low", num(e.crit_low)},
            {"crit_high", num(e.crit_high)}, {"s_c", num(e.s_c)}, {"alpha_c", num(e.alpha_c)}};
}

json to_json(const GroundState& gs) {
    json j;
    j["status"] = gs.status();
    if (!gs.note.empty()) j["note"] = gs.note;
    j["residual"] = num(gs.residual);
    j["residual_double"] = num(gs.residual_double);
    j["iterations"] = gs.iterations;
    j["relaxed"] = gs.relaxed;
    j["structural_ok"] = gs.structural_ok;
    j["grid_values"] = to_json(gs.grid);
    if (gs.extrapolated) j["extrapolated_values"] = to_json(*gs.extrapolated);
    j["pohozaev_defect_1"] = num(gs.pohozaev_defect_1());
    j["pohozaev_defect_2"] = num(gs.pohozaev_defect_2());
    j["levels"] = json::array();
    for (std::size_t k = 0; k < gs.level_M.size(); ++k)
        j["levels"].push_back({{"M", gs.level_M[k]}, {"residual", num(gs.level_residuals[k])},
                               {"values", to_json(gs.level_values[k])}});
    j["error_exponents"] = gs.exponents;
    j["sharp_constant"] = num(gs.sharp_constant);
    j["m_hat"] = num(threshold_m(gs));
    j["m_hat_note"] = "m is replaced by m_hat = S[phi] on the solve grid";
    return j;
}

json to_json(const Classification& c) {
    return {{"virial", num(c.virial)},
            {"virial_sign", c.virial_sign},
            {"action", num(c.action)},
            {"m_hat", num(c.m_hat)},
            {"action_vs_m", num(c.action_vs_m)},
            {"in_A_minus", c.in_A_minus},
            {"MG", num(c.MG)},
            {"ME", num(c.ME)},
            {"condition_ss", c.condition_ss},
            {"condition_t13", c.condition_t13},
            {"predicted", to_string(c.predicted)},
            {"note", c.note}};
}

json to_json(const OdiReport& r) {
    return {{"window_start", num(r.window_start)},
            {"window_end", num(r.window_end)},
            {"kappa", num(r.kappa)},
            {"kappa_inferred", r.kappa_inferred},
            {"c_lower", num(r.c_lower)},
            {"t_star_bound", num(r.t_star_bound)},
            {"monotone_fraction", num(r.monotone_fraction)}};
}

json to_json(const CoercivityReport& r) {
    return {{"epsilon_star", num(r.epsilon_star)},
            {"boundary_case", r.boundary_case},
            {"message", r.message},
            {"ss_data", r.ss_data},
            {"t13_data", r.t13_data},
            {"samples", r.samples},
            {"a_minus_violations", r.a_minus_violations},
            {"ss_inequality_violations", r.ss_inequality_violations},
            {"mg_violations", r.mg_violations},
            {"kinetic_lower_violations", r.kinetic_lower_violations},
            {"min_kinetic_ratio", num(r.min_kinetic_ratio)}};
}

struct RunDir {
    fs::path final_dir;
    fs::path scratch;
    std::string hash;
    bool complete = false;
};

RunDir open_run_dir(const std::string& command, const RunConfig& config) {
    ensure_writable_dir(config.outputs);
    RunDir d;
    d.hash = run_hash(command, config);
    d.final_dir = config.outputs / (command + "-" + d.hash.substr(0, 16));
    d.complete = fs::is_regular_file(d.final_dir / "manifest.json");
    if (!d.complete) {
        static std::atomic<unsigned> counter{0};
        d.scratch = config.outputs / (".tmp-" + d.hash.substr(0, 16) + "-" + std::to_string(::getpid()) + "-" +
                                      std::to_string(counter++));
        fs::remove_all(d.scratch);
        fs::create_directories(d.scratch);
    }
    return d;
}

json read_manifest(const fs::path& dir) {
    std::ifstream in(dir / "manifest.json");
    return json::parse(in);
}

void commit(RunDir& d, const std::string& command, const RunConfig& config, const Validation& validation,
            const json& result, const std::string& started) {
    json manifest;
    manifest["command"] = command;
    manifest["hash"] = d.hash;
    manifest["config"] = canonical(config);
    manifest["validation"] = to_json(validation);
    manifest["radial_only"] = true;
    manifest["result"] = result;
    io::write_text_atomic(d.scratch / "manifest.json", manifest.dump(2) + "\n");
    const json stamps = {{"started", started}, {"finished", utc_now()}};
    io::write_text_atomic(d.scratch / "timestamps.json", stamps.dump(2) + "\n");
    std::error_code ec;
    if (fs::exists(d.final_dir) && !fs::is_regular_file(d.final_dir / "manifest.json")) fs::remove_all(d.final_dir, ec);
    fs::rename(d.scratch, d.final_dir, ec);
    if (ec) {
        // Another process completed the same run first; its result is identical.
        fs::remove_all(d.scratch);
        if (!fs::is_regular_file(d.final_dir / "manifest.json")) throw std::runtime_error("cannot commit run directory");
    }
}

Model build_model(const RunConfig& config, std::ostream& log) {
    const Model m = make_model(config.spec, make_grid(config.grid.M, config.grid.r_max.value(), config.spec.N));
    for (const auto& w : m.validation.warnings) log << "warning: " << w << "\n";
    return m;
}

GroundState solve(const Model& model, const RunConfig& config, int default_levels, std::ostream& log) {
    GroundStateOptions opt;
    opt.levels = config.gs_levels.value_or(default_levels);
    GroundState gs = solve_ground_state(model, std::nullopt, opt);
    log << "ground state: " << gs.status() << ", residual " << gs.residual << ", defects " << gs.pohozaev_defect_1()
        << " / " << gs.pohozaev_defect_2() << "\n";
    if (!gs.note.empty()) log << "note: " << gs.note << "\n";
    return gs;
}

bool datum_needs_ground_state(const DatumSpec& d) { return d.kind == DatumKind::ScaledGroundState; }

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const SpecError*>(&e) ||
        dynamic_cast<const io::FileFormat*>(&e) || dynamic_cast<const SpecMismatch*>(&e) ||
        dynamic_cast<const std::invalid_argument*>(&e) || dynamic_cast<const fs::filesystem_error*>(&e))
        return kExitConfig;
    return kExitNumerics;
}

// Runs `body` inside a run directory and maps exceptions to exit codes.
template <class Body>
CommandResult guarded(const std::string& command, const RunConfig& config, std::ostream& log, Body&& body) {
    CommandResult out;
    RunDir dir;
    try {
        dir = open_run_dir(command, config);
        out.run_dir = dir.final_dir;
        if (dir.complete) {
            out.reused = true;
            out.result = read_manifest(dir.final_dir)["result"];
            out.exit_code = out.result.value("exit_code", 0);
            log << command << ": reusing " << dir.final_dir.string() << "\n";
            return out;
        }
        const std::string started = utc_now();
        const Model model = build_model(config, log);
        out.result = body(model, dir.scratch);
        out.exit_code = out.result.value("exit_code", 0);
        commit(dir, command, config, model.validation, out.result, started);
        log << command << ": wrote " << dir.final_dir.string() << "\n";
    } catch (const std::exception& e) {
        out.exit_code = exit_code_for(e);
        out.result = {{"status", "error"}, {"error", e.what()}, {"exit_code", out.exit_code}};
        log << "error: " << e.what() << "\n";
        if (!dir.scratch.empty()) {
            std::error_code ec;
            fs::remove_all(dir.scratch, ec);
        }
    }
    return out;
}

void write_json(const fs::path& path, const json& j) { io::write_text_atomic(path, j.dump(2) + "\n"); }

}  // namespace

CommandResult cmd_ground_state(const RunConfig& config, std::ostream& log) {
    return guarded("ground-state", config, log, [&](const Model& model, const fs::path& dir) {
        const GroundState gs = solve(model, config, 3, log);
        io::write_snapshot(dir / "phi.bin", gs.field);
        io::write_field_csv(dir / "phi.csv", gs.field);
        json cert = to_json(gs);
        cert["exponents"] = to_json(gs.exps);
        const bool pass = gs.residual <= 1e-8 && gs.pohozaev_defect_1() <= 1e-6 && gs.pohozaev_defect_2() <= 1e-6;
        cert["certificate_pass"] = pass;
        write_json(dir / "certificate.json", cert);
        return json{{"status", "ok"},
                    {"exit_code", kExitOk},
                    {"ground_state", gs.status()},
                    {"residual", num(gs.residual)},
                    {"pohozaev_defect_1", num(gs.pohozaev_defect_1())},
                    {"pohozaev_defect_2", num(gs.pohozaev_defect_2())},
                    {"certificate_pass", pass}};
    });
}

CommandResult cmd_classify(const RunConfig& config, std::ostream& log) {
    return guarded("classify", config, log, [&](const Model& model, const fs::path& dir) {
        const GroundState gs = solve(model, config, 1, log);
        const RadialField u0 = build_datum(config.datum, model, &gs);
        const Classification c = classify(model, u0.values, gs);
        json j = to_json(c);
        if (config.datum.kind == DatumKind::ScaledGroundState) {
            // Closed forms in c from the Pohozaev relations, as a cross-check.
            const double cc = config.datum.c, p = model.power(), B = model.exps.B, ac = model.exps.alpha_c;
            j["closed_form"] = {{"virial", num(cc * cc * (1.0 - std::pow(cc, 2 * p - 2)) * gs.grid.kinetic)},
                                {"MG", num(std::pow(cc, 1.0 + ac))},
                                {"ME", num(std::pow(cc, 2 * ac) * (cc * cc - 2 * std::pow(cc, 2 * p) / B) /
                                           (1.0 - 2.0 / B))}};
        }
        write_json(dir / "classification.json", j);
        return json{{"status", "ok"},
                    {"exit_code", kExitOk},
                    {"predicted", to_string(c.predicted)},
                    {"condition_ss", c.condition_ss},
                    {"condition_t13", c.condition_t13},
                    {"MG", num(c.MG)},
                    {"ME", num(c.ME)},
                    {"virial_sign", c.virial_sign}};
    });
}

CommandResult cmd_evolve(const RunConfig& config, std::ostream& log) {
    return guarded("evolve", config, log, [&](const Model& model, const fs::path& dir) {
        require_evolution_tier(model.validation);
        std::optional<GroundState> gs;
        try {
            gs = solve(model, config, 1, log);
        } catch (const std::exception& e) {
            if (datum_needs_ground_state(config.datum)) throw;
            log << "ground state unavailable (" << e.what() << "); classification skipped\n";
        }
        const RadialField u0 = build_datum(config.datum, model, gs ? &*gs : nullptr);
        const Trajectory traj = evolve(model, u0, config.controls);

        io::write_series_csv(dir / "series.csv", traj);
        fs::create_directories(dir / "snapshots");
        for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
            char name[32];
            std::snprintf(name, sizeof name, "snap_%06zu.bin", k);
            io::write_snapshot(dir / "snapshots" / name, traj.snapshots[k].second);
        }
        {
            std::ostringstream idx;
            idx << "index,t\n";
            for (std::size_t k = 0; k < traj.snapshots.size(); ++k)
                idx << k << ',' << io::fmt(traj.snapshots[k].first) << '\n';
            io::write_text_atomic(dir / "snapshots" / "index.csv", idx.str());
        }

        double kmin = traj.series.front().kinetic, kmax = kmin;
        for (const auto& d : traj.series) {
            kmin = std::min(kmin, d.kinetic);
            kmax = std::max(kmax, d.kinetic);
        }
        json v;
        v["verdict"] = to_string(traj.verdict);
        v["steps"] = traj.steps;
        v["t_final"] = num(traj.series.back().time);
        v["R"] = num(traj.R);
        v["mass_drift"] = num(traj.mass_drift);
        v["energy_drift"] = num(traj.energy_drift);
        v["kinetic_growth"] = num(traj.series.back().kinetic / traj.series.front().kinetic);
        v["kinetic_max_over_min"] = num(kmax / kmin);
        if (traj.verdict == Verdict::BlowupDetected) v["t_star_estimate"] = num(traj.t_star_estimate);
        if (traj.verdict == Verdict::ResolutionFailure) v["failure_time"] = num(traj.failure_time);
        if (gs) {
            v["classification"] = to_json(classify(model, u0.values, *gs));
            if (traj.verdict == Verdict::BlowupDetected) {
                try {
                    v["coercivity"] = to_json(coercivity_monitor(model, traj, *gs));
                } catch (const std::exception& e) {
                    v["coercivity_error"] = e.what();
                }
            }
        }
        if (traj.verdict == Verdict::BlowupDetected) {
            try {
                v["odi"] = to_json(odi_fit(traj, model.spec));
            } catch (const std::exception& e) {
                v["odi_error"] = e.what();
            }
        }
        try {
            const MorawetzReport mr = morawetz_rate_check(traj, model, traj.R);
            v["morawetz"] = {{"R", num(mr.R)},
                             {"kappa", num(mr.kappa)},
                             {"tail_constant", num(mr.tail_constant)},
                             {"violation_fraction", num(mr.violation_fraction)},
                             {"final_slope", num(mr.final_slope)},
                             {"eventually_decreasing", mr.eventually_decreasing}};
            std::ostringstream csv;
            csv << "t,rate,bound,margin\n";
            for (std::size_t k = 0; k < mr.times.size(); ++k)
                csv << io::fmt(mr.times[k]) << ',' << io::fmt(mr.rate[k]) << ',' << io::fmt(mr.bound[k]) << ','
                    << io::fmt(mr.margin[k]) << '\n';
            io::write_text_atomic(dir / "morawetz.csv", csv.str());
        } catch (const InsufficientSamples& e) {
            v["morawetz_error"] = e.what();
        }
        write_json(dir / "verdict.json", v);
        log << "verdict: " << v["verdict"].get<std::string>() << " after " << traj.steps << " steps\n";

        json r = {{"status", "ok"},
                  {"exit_code", kExitOk},
                  {"verdict", v["verdict"]},
                  {"kinetic_growth", v["kinetic_growth"]},
                  {"t_final", v["t_final"]}};
        if (v.contains("t_star_estimate")) r["t_star_estimate"] = v["t_star_estimate"];
        return r;
    });
}

json identity_suite(const RunConfig& config, std::ostream& log) {
    const Model model = build_model(config, log);
    const Grid& g = *model.grid;
    const int s = model.spec.s, N = model.spec.N;
    json out;
    bool all = true;
    auto record = [&](const char* name, json j) {
        all = all && j.value("pass", false);
        log << name << ": " << (j.value("pass", false) ? "pass" : "FAIL") << "\n";
        out[name] = std::move(j);
    };

    GroundStateOptions opt;
    opt.levels = config.gs_levels.value_or(3);
    const GroundState gs = solve_ground_state(model, std::nullopt, opt);
    record("pohozaev", {{"residual", num(gs.residual)},
                        {"pohozaev_defect_1", num(gs.pohozaev_defect_1())},
                        {"pohozaev_defect_2", num(gs.pohozaev_defect_2())},
                        {"status", gs.status()},
                        {"pass", gs.residual <= 1e-8 && gs.pohozaev_defect_1() <= 1e-6 &&
                                     gs.pohozaev_defect_2() <= 1e-6}});

    std::mt19937_64 rng(config.seed);
    {
        const double C = gs.sharp_constant;
        double worst = 0.0;
        int violations = 0;
        for (int k = 0; k < config.samples; ++k) {
            const auto u = GaussianMixture::random(rng).sample(g);
            const double ratio = weinstein_quotient(model, u) / C;
            worst = std::max(worst, ratio);
            if (ratio > 1.0 + 1e-6) ++violations;
        }
        record("gn_bound", {{"samples", config.samples},
                            {"sharp_constant", num(C)},
                            {"max_quotient_over_C", num(worst)},
                            {"violations", violations},
                            {"pass", violations == 0}});
    }
    {
        // Kinetic values of strongly rescaled mixtures need a finer stencil than
        // the run grid; mass and P are measured on the run grid itself.
        const GridPtr fine = make_grid(std::max(g.M, 4096), g.r_max, N);
        const KOperator fine_op(s, model.spec.effective_lambda(), fine);
        double em = 0, ek = 0, ep = 0;
        const int trials = std::min(config.samples, 20);
        for (int k = 0; k < trials; ++k) {
            const GaussianMixture mix = GaussianMixture::random(rng);
            const auto u = mix.sample(g);
            const double m0 = mass(g, u), p0 = potential(model, u), k0 = fine_op.form(mix.sample(*fine));
            for (double rho : {0.5, 2.0}) {
                const GaussianMixture scaled = mix.scaled(rho, N);
                const auto v = scaled.sample(g);
                em = std::max(em, std::abs(mass(g, v) / m0 - 1.0));
                ek = std::max(ek, std::abs(fine_op.form(scaled.sample(*fine)) / (k0 * std::pow(rho, 2 * s)) - 1.0));
                ep = std::max(ep, std::abs(potential(model, v) / (p0 * std::pow(rho, s * model.exps.B)) - 1.0));
            }
        }
        record("scaling", {{"trials", trials},
                           {"kinetic_grid_M", fine->M},
                           {"mass_error", num(em)},
                           {"kinetic_error", num(ek)},
                           {"potential_error", num(ep)},
                           {"pass", em <= 1e-8 && ek <= 1e-4 && ep <= 1e-3}});
    }
    {
        const double hardy = (N - 2.0) * (N - 2.0) / 4.0;
        double worst = 0.0;
        int violations = 0;
        for (int k = 0; k < config.samples; ++k) {
            const Eigen::VectorXcd f = GaussianMixture::random(rng).sample(g);
            const double lhs = hardy * (g.w.array() * f.array().abs2() / g.r.array().square()).sum();
            const double rhs = gradient_norm_sq(g, f);
            worst = std::max(worst, lhs / rhs);
            if (lhs > rhs * (1.0 + 5e-2)) ++violations;
        }
        record("hardy", {{"samples", config.samples},
                         {"max_ratio", num(worst)},
                         {"violations", violations},
                         {"pass", violations == 0}});
    }
    if (model.validation.tier == Tier::Full) {
        EvolveControls c = config.controls;
        c.t_end = std::min(c.t_end, 0.1);
        c.R = 0.0;
        const Trajectory traj = evolve(model, RadialField(model.grid, 0.5 * gs.field.values), c);
        record("conservation", {{"t_end", num(c.t_end)},
                                {"verdict", to_string(traj.verdict)},
                                {"mass_drift", num(traj.mass_drift)},
                                {"energy_drift", num(traj.energy_drift)},
                                {"pass", traj.verdict == Verdict::ReachedHorizon && traj.mass_drift <= 1e-8 &&
                                             traj.energy_drift <= 1e-6}});
    }
    out["pass"] = all;
    return out;
}

CommandResult cmd_check_identities(const RunConfig& config, std::ostream& log) {
    return guarded("check-identities", config, log, [&](const Model&, const fs::path& dir) {
        json suite = identity_suite(config, log);
        write_json(dir / "identities.json", suite);
        const bool pass = suite["pass"].get<bool>();
        return json{{"status", pass ? "ok" : "suite-failure"},
                    {"exit_code", pass ? kExitOk : kExitSuiteFailure},
                    {"pass", pass}};
    });
}

CommandResult run_command(const std::string& command, const RunConfig& config, std::ostream& log) {
    if (command == "ground-state") return cmd_ground_state(config, log);
    if (command == "classify") return cmd_classify(config, log);
    if (command == "evolve") return cmd_evolve(config, log);
    if (command == "check-identities") return cmd_check_identities(config, log);
    throw ConfigError("unknown command '" + command + "'");
}

SweepResult cmd_sweep(const SweepManifest& manifest, int workers, std::ostream& log) {
    SweepResult out;
    const std::size_t n = sweep_size(manifest);
    json ident = {{"base", manifest.base}, {"command", manifest.command}, {"axes", json::array()}};
    for (const auto& a : manifest.axes) ident["axes"].push_back({{"path", a.path}, {"values", a.values}});
    const std::string hash = sha256_hex(ident.dump());

    std::vector<RunConfig> configs(n);
    std::vector<std::vector<std::string>> labels(n);
    for (std::size_t i = 0; i < n; ++i) configs[i] = parse_run_config(sweep_point(manifest, i, &labels[i]), manifest.base_dir);
    const fs::path outputs = configs.empty() ? manifest.base_dir / "runs" : configs.front().outputs;
    ensure_writable_dir(outputs);
    const fs::path sweep_dir = outputs / ("sweep-" + hash.substr(0, 16));
    fs::create_directories(sweep_dir);
    out.summary = sweep_dir / "summary.csv";

    std::vector<std::optional<std::string>> rows(n);
    std::mutex mu;
    auto write_summary = [&] {
        std::ostringstream csv;
        csv << "index";
        for (const auto& a : manifest.axes) csv << ',' << a.path;
        csv << ",hash,status,exit_code,verdict,kinetic_growth,t_star_estimate,error\n";
        for (std::size_t i = 0; i < n; ++i)
            if (rows[i]) csv << *rows[i] << '\n';
        io::write_text_atomic(out.summary, csv.str());
    };

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            std::ostringstream runlog;
            const CommandResult r = run_command(manifest.command, configs[i], runlog);
            const json& res = r.result;
            auto field = [&](const char* key) -> std::string {
                if (!res.contains(key)) return "";
                const json& v = res[key];
                if (v.is_number_float()) return io::fmt(v.get<double>());
                return v.is_string() ? v.get<std::string>() : v.dump();
            };
            std::string err = field("error");
            std::replace(err.begin(), err.end(), ',', ';');
            std::replace(err.begin(), err.end(), '\n', ' ');
            std::ostringstream row;
            row << i;
            for (const auto& l : labels[i]) row << ',' << l;
            row << ',' << run_hash(manifest.command, configs[i]).substr(0, 16) << ',' << field("status") << ','
                << r.exit_code << ',' << field("verdict") << ',' << field("kinetic_growth") << ','
                << field("t_star_estimate") << ',' << err;
            std::lock_guard<std::mutex> lock(mu);
            rows[i] = row.str();
            (r.reused ? out.reused : out.computed)++;
            if (r.exit_code != kExitOk) ++out.failed;
            log << "[" << i + 1 << "/" << n << "] " << runlog.str();
            write_summary();
        }
    };
    const int threads = std::max(1, std::min(workers > 0 ? workers : manifest.max_parallel, manifest.max_parallel));
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    write_summary();
    log << "sweep: " << out.computed << " computed, " << out.reused << " reused, " << out.failed << " failed; summary "
        << out.summary.string() << "\n";
    return out;
}

}  // namespace inls
