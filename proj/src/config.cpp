#include "inls/config.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <iomanip>
#include <sstream>

namespace inls {

using nlohmann::json;

namespace {

const json* find(const json& obj, const char* key) {
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

Decimal decimal_field(const json& obj, const char* key, const char* fallback) {
    const json* v = find(obj, key);
    if (!v) return Decimal(fallback);
    if (!v->is_string()) throw ConfigError(std::string("'") + key + "' must be a decimal string");
    try {
        return Decimal(v->get<std::string>());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("'") + key + "': " + e.what());
    }
}

template <class Int>
Int int_field(const json& obj, const char* key, Int fallback) {
    const json* v = find(obj, key);
    if (!v) return fallback;
    if (!v->is_number_integer()) throw ConfigError(std::string("'") + key + "' must be an integer");
    return v->get<Int>();
}

json object_field(const json& obj, const char* key) {
    const json* v = find(obj, key);
    if (!v) return json::object();
    if (!v->is_object()) throw ConfigError(std::string("'") + key + "' must be an object");
    return *v;
}

void reject_unknown(const json& obj, std::initializer_list<const char*> known, const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : known) ok = ok || it.key() == k;
        if (!ok) throw ConfigError("unknown key '" + it.key() + "' in " + where);
    }
}

std::string datum_kind_name(DatumKind k) {
    switch (k) {
        case DatumKind::ScaledGroundState: return "scaled_ground_state";
        case DatumKind::NehariRescaled: return "nehari_rescaled";
        case DatumKind::Custom: return "custom";
    }
    return "?";
}

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("invalid JSON in " + path.string() + ": " + e.what());
    }
}

}  // namespace

RunConfig parse_run_config(const json& doc, const std::filesystem::path& base_dir) {
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    reject_unknown(doc, {"spec", "grid", "controls", "datum", "ground_state", "outputs", "seed", "samples"}, "config");
    RunConfig c;

    const json spec = object_field(doc, "spec");
    reject_unknown(spec, {"s", "N", "lambda", "tau", "nonlinearity", "alpha", "power"}, "spec");
    c.spec.s = int_field(spec, "s", 1);
    c.spec.N = int_field(spec, "N", 3);
    c.spec.lambda = decimal_field(spec, "lambda", "0");
    c.spec.tau = decimal_field(spec, "tau", "0.5");
    c.spec.alpha = decimal_field(spec, "alpha", "2");
    c.spec.power = decimal_field(spec, "power", "2.1");
    if (const json* k = find(spec, "nonlinearity")) {
        try {
            c.spec.kind = nonlinearity_from_string(k->get<std::string>());
        } catch (const std::exception& e) {
            throw ConfigError(std::string("spec.nonlinearity: ") + e.what());
        }
    }

    const json grid = object_field(doc, "grid");
    reject_unknown(grid, {"M", "r_max"}, "grid");
    c.grid.M = int_field(grid, "M", 1024);
    c.grid.r_max = decimal_field(grid, "r_max", "15");

    const json ctl = object_field(doc, "controls");
    reject_unknown(ctl,
                   {"t_end", "dt0", "dt_min", "cfl_c", "snapshot_stride", "grad_blowup_factor", "conservation_tol", "R",
                    "max_steps"},
                   "controls");
    EvolveControls& e = c.controls;
    e.t_end = decimal_field(ctl, "t_end", "1").value();
    e.dt0 = decimal_field(ctl, "dt0", "1e-3").value();
    e.dt_min = decimal_field(ctl, "dt_min", "1e-10").value();
    e.cfl_c = decimal_field(ctl, "cfl_c", "0.1").value();
    e.grad_blowup_factor = decimal_field(ctl, "grad_blowup_factor", "1e4").value();
    e.conservation_tol = decimal_field(ctl, "conservation_tol", "1e-4").value();
    e.R = decimal_field(ctl, "R", "0").value();
    e.snapshot_stride = int_field(ctl, "snapshot_stride", 100);
    e.max_steps = int_field<long>(ctl, "max_steps", 5'000'000);
    try {
        e.validate();
    } catch (const std::invalid_argument& err) {
        throw ConfigError(std::string("controls: ") + err.what());
    }

    const json datum = object_field(doc, "datum");
    reject_unknown(datum, {"kind", "c", "seed", "file"}, "datum");
    if (const json* k = find(datum, "kind")) {
        try {
            c.datum.kind = datum_kind_from_string(k->get<std::string>());
        } catch (const std::exception& err) {
            throw ConfigError(std::string("datum.kind: ") + err.what());
        }
    }
    c.datum.c = decimal_field(datum, "c", "1").value();
    c.datum.seed = int_field<std::uint64_t>(datum, "seed", 0);
    if (const json* f = find(datum, "file")) {
        std::filesystem::path p = f->get<std::string>();
        if (p.is_relative()) p = (base_dir / p).lexically_normal();
        c.datum.file = p.string();
    }
    if (c.datum.kind == DatumKind::Custom) {
        if (c.datum.file.empty()) throw ConfigError("datum.file is required for a custom datum");
        if (!std::filesystem::is_regular_file(c.datum.file)) throw ConfigError("datum file not found: " + c.datum.file);
    }

    const json gs = object_field(doc, "ground_state");
    reject_unknown(gs, {"levels"}, "ground_state");
    if (find(gs, "levels")) {
        c.gs_levels = int_field(gs, "levels", 1);
        if (*c.gs_levels < 1 || *c.gs_levels > 4) throw ConfigError("ground_state.levels must be in 1..4");
    }

    if (const json* o = find(doc, "outputs")) {
        std::filesystem::path p = o->get<std::string>();
        c.outputs = p.is_relative() ? (base_dir / p).lexically_normal() : p;
    } else {
        c.outputs = (base_dir / "runs").lexically_normal();
    }
    c.seed = int_field<std::uint64_t>(doc, "seed", 0);
    c.samples = int_field(doc, "samples", 200);
    if (c.samples < 1) throw ConfigError("samples must be positive");
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    return parse_run_config(read_json(path), path.parent_path().empty() ? "." : path.parent_path());
}

json canonical(const RunConfig& c) {
    json j;
    j["spec"] = {{"s", c.spec.s},
                 {"N", c.spec.N},
                 {"lambda", c.spec.lambda.text()},
                 {"tau", c.spec.tau.text()},
                 {"nonlinearity", to_string(c.spec.kind)},
                 {"power", c.spec.power.text()}};
    if (c.spec.choquard()) j["spec"]["alpha"] = c.spec.alpha.text();
    j["grid"] = {{"M", c.grid.M}, {"r_max", c.grid.r_max.text()}};
    auto d = [](double x) { return Decimal::from_double(x).text(); };
    const EvolveControls& e = c.controls;
    j["controls"] = {{"t_end", d(e.t_end)},
                     {"dt0", d(e.dt0)},
                     {"dt_min", d(e.dt_min)},
                     {"cfl_c", d(e.cfl_c)},
                     {"snapshot_stride", e.snapshot_stride},
                     {"grad_blowup_factor", d(e.grad_blowup_factor)},
                     {"conservation_tol", d(e.conservation_tol)},
                     {"R", d(e.R)},
                     {"max_steps", e.max_steps}};
    j["datum"] = {{"kind", datum_kind_name(c.datum.kind)}, {"c", d(c.datum.c)}, {"seed", c.datum.seed}};
    if (c.datum.kind == DatumKind::Custom) j["datum"]["file"] = c.datum.file;
    if (c.gs_levels) j["ground_state"] = {{"levels", *c.gs_levels}};
    j["seed"] = c.seed;
    j["samples"] = c.samples;
    return j;
}

std::string sha256_hex(const std::string& text) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 failed");
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
    return hex.str();
}

std::string run_hash(const std::string& command, const RunConfig& config) {
    return sha256_hex(command + "\n" + canonical(config).dump());
}

void ensure_writable_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) throw ConfigError("cannot create output directory " + dir.string());
    const auto probe = dir / ".write-probe";
    {
        std::ofstream out(probe);
        if (!out) throw ConfigError("output directory is not writable: " + dir.string());
    }
    std::filesystem::remove(probe, ec);
}

SweepManifest parse_sweep_manifest(const json& doc, const std::filesystem::path& base_dir) {
    if (!doc.is_object()) throw ConfigError("sweep manifest must be a JSON object");
    reject_unknown(doc, {"base", "command", "axes", "max_parallel"}, "sweep manifest");
    SweepManifest m;
    m.base_dir = base_dir;
    m.base = object_field(doc, "base");
    if (const json* c = find(doc, "command")) m.command = c->get<std::string>();
    if (m.command != "evolve" && m.command != "classify" && m.command != "ground-state")
        throw ConfigError("sweep command must be evolve, classify or ground-state");
    m.max_parallel = int_field(doc, "max_parallel", 1);
    if (m.max_parallel < 1) throw ConfigError("max_parallel must be positive");
    const json* axes = find(doc, "axes");
    if (axes) {
        if (!axes->is_array()) throw ConfigError("axes must be an array");
        for (const json& a : *axes) {
            SweepAxis axis;
            axis.path = a.at("path").get<std::string>();
            const json& vals = a.at("values");
            if (!vals.is_array() || vals.empty()) throw ConfigError("axis '" + axis.path + "' needs a non-empty list");
            axis.values.assign(vals.begin(), vals.end());
            m.axes.push_back(std::move(axis));
        }
    }
    sweep_size(m);
    for (std::size_t i = 0; i < std::min<std::size_t>(sweep_size(m), 1); ++i) parse_run_config(sweep_point(m, i), base_dir);
    return m;
}

SweepManifest load_sweep_manifest(const std::filesystem::path& path) {
    return parse_sweep_manifest(read_json(path), path.parent_path().empty() ? "." : path.parent_path());
}

std::size_t sweep_size(const SweepManifest& m) {
    std::size_t n = 1;
    for (const auto& a : m.axes) {
        n *= a.values.size();
        if (n > kMaxSweepSize) throw ConfigError("sweep exceeds " + std::to_string(kMaxSweepSize) + " points");
    }
    return n;
}

json sweep_point(const SweepManifest& m, std::size_t index, std::vector<std::string>* labels) {
    json doc = m.base;
    std::vector<std::size_t> pick(m.axes.size());
    for (std::size_t k = m.axes.size(); k-- > 0;) {
        pick[k] = index % m.axes[k].values.size();
        index /= m.axes[k].values.size();
    }
    for (std::size_t k = 0; k < m.axes.size(); ++k) {
        const json& value = m.axes[k].values[pick[k]];
        json* node = &doc;
        std::stringstream path(m.axes[k].path);
        std::string part;
        std::vector<std::string> parts;
        while (std::getline(path, part, '.')) parts.push_back(part);
        if (parts.empty()) throw ConfigError("empty axis path");
        for (std::size_t i = 0; i + 1 < parts.size(); ++i) node = &(*node)[parts[i]];
        (*node)[parts.back()] = value;
        if (labels) labels->push_back(value.is_string() ? value.get<std::string>() : value.dump());
    }
    return doc;
}

}  // namespace inls
