#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "pathsens/errors.hpp"
#include "pathsens/units.hpp"

namespace pathsens {

// One perturbation request, e.g. "sigma:+5%" or "rcut:-60%".
struct PerturbSpec {
    std::string parameter;
    double relative = 0.0;  // signed fraction, +0.05 for +5%
};

enum class Normalization { none, per_particle, per_molecule, per_interaction };

// Flat, dotted-key experiment configuration. Every key is listed in the
// README; unknown keys are rejected so typos cannot silently change runs.
struct ExperimentConfig {
    std::string model = "lj-fluid";  // lj-fluid | methane | ou-oracle | free-particle
    std::string preset;

    // system
    std::int64_t n_atoms = 0;      // lj-fluid / oracle models
    std::int64_t n_molecules = 0;  // methane
    double box_length = 0.0;       // 0 -> derive from density
    double density = 0.0;          // number density of atoms (lj) / molecules (methane)
    double temperature = 0.0;      // T* (lj, oracle) or Kelvin (methane)

    // dynamics
    double dt = 1e-3;
    std::int64_t n_steps = 0;
    std::int64_t n_equil = 0;
    double gamma = 1.0;
    bool gamma_per_mass = false;  // gamma_i = gamma * m_i (methane friction in 1/ps)
    std::uint64_t seed = 1;
    double alpha = 0.0;

    // parameter overrides by name
    std::map<std::string, double> param_overrides;

    // sensitivity
    std::vector<PerturbSpec> perturbations;
    std::int64_t sens_stride = 10;
    bool fim = false;
    bool discrete = false;
    std::int64_t discrete_stride = 1;
    Normalization normalization = Normalization::per_particle;

    // observables
    bool obs_rdf = false;
    double rdf_bin_width = 0.0;  // 0 -> model default
    double rdf_r_max = 0.0;      // 0 -> box/2
    std::int64_t rdf_stride = 10;
    bool obs_msd = false;
    std::int64_t msd_stride = 10;
    std::int64_t msd_origin_stride = 10;
    std::int64_t msd_max_lags = 200;
    double msd_fit_lo = 0.5;
    bool obs_pressure = false;
    std::int64_t pressure_stride = 10;
    std::string obs_mode = "auto";  // atomic | molecular | auto

    // cutoff study
    std::vector<double> cutoff_candidates;
    std::int64_t cutoff_stride = 50;

    // run control / output
    std::string out_dir = ".";
    std::int64_t trajectory_stride = 0;  // 0 = no trajectory output
    int threads = 1;                     // worker threads for multi-seed replicas
    bool deterministic = true;
    std::int64_t seeds = 1;              // replica count (seed, seed+1, ...)
};

namespace cfg_detail {

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

inline double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("field '" + key + "': expected a number, got '" + v + "'");
    }
}

inline std::int64_t parse_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const long long x = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("field '" + key + "': expected an integer, got '" + v + "'");
    }
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "on" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "off" || v == "0" || v == "no") return false;
    throw ConfigError("field '" + key + "': expected a boolean, got '" + v + "'");
}

// "name:+5%" or "name:-0.05"
inline PerturbSpec parse_perturb(const std::string& raw) {
    const auto colon = raw.find(':');
    if (colon == std::string::npos)
        throw ConfigError("field 'perturb': expected name:+X% , got '" + raw + "'");
    PerturbSpec p;
    p.parameter = trim(raw.substr(0, colon));
    std::string mag = trim(raw.substr(colon + 1));
    bool percent = false;
    if (!mag.empty() && mag.back() == '%') {
        percent = true;
        mag.pop_back();
    }
    p.relative = parse_double("perturb", mag);
    if (percent) p.relative /= 100.0;
    if (p.parameter.empty()) throw ConfigError("field 'perturb': empty parameter name");
    if (p.relative <= -1.0)
        throw ConfigError("field 'perturb': magnitude must exceed -100%");
    return p;
}

inline std::vector<double> parse_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(parse_double(key, item));
    }
    if (out.empty()) throw ConfigError("field '" + key + "': empty list");
    return out;
}

} // namespace cfg_detail

// Apply one key = value assignment. Unknown keys are configuration errors.
inline void apply_config_key(ExperimentConfig& c, const std::string& key,
                             const std::string& value) {
    using namespace cfg_detail;
    if (key == "model") c.model = value;
    else if (key == "system.n_atoms") c.n_atoms = parse_int(key, value);
    else if (key == "system.n_molecules") c.n_molecules = parse_int(key, value);
    else if (key == "system.box_length") c.box_length = parse_double(key, value);
    else if (key == "system.density") c.density = parse_double(key, value);
    else if (key == "system.temperature") c.temperature = parse_double(key, value);
    else if (key == "dynamics.dt") c.dt = parse_double(key, value);
    else if (key == "dynamics.n_steps") c.n_steps = parse_int(key, value);
    else if (key == "dynamics.n_equil") c.n_equil = parse_int(key, value);
    else if (key == "dynamics.gamma") c.gamma = parse_double(key, value);
    else if (key == "dynamics.gamma_per_mass") c.gamma_per_mass = parse_bool(key, value);
    else if (key == "dynamics.seed") c.seed = static_cast<std::uint64_t>(parse_int(key, value));
    else if (key == "dynamics.alpha") c.alpha = parse_double(key, value);
    else if (key.rfind("parameters.", 0) == 0)
        c.param_overrides[key.substr(11)] = parse_double(key, value);
    else if (key == "perturb") c.perturbations.push_back(parse_perturb(value));
    else if (key == "sensitivity.stride") c.sens_stride = parse_int(key, value);
    else if (key == "sensitivity.fim") c.fim = parse_bool(key, value);
    else if (key == "sensitivity.discrete") c.discrete = parse_bool(key, value);
    else if (key == "sensitivity.discrete_stride") c.discrete_stride = parse_int(key, value);
    else if (key == "sensitivity.normalization") {
        if (value == "none") c.normalization = Normalization::none;
        else if (value == "particle") c.normalization = Normalization::per_particle;
        else if (value == "molecule") c.normalization = Normalization::per_molecule;
        else if (value == "interaction") c.normalization = Normalization::per_interaction;
        else throw ConfigError("field 'sensitivity.normalization': unknown mode '" + value + "'");
    }
    else if (key == "observables.rdf") c.obs_rdf = parse_bool(key, value);
    else if (key == "observables.rdf.bin_width") c.rdf_bin_width = parse_double(key, value);
    else if (key == "observables.rdf.r_max") c.rdf_r_max = parse_double(key, value);
    else if (key == "observables.rdf.stride") c.rdf_stride = parse_int(key, value);
    else if (key == "observables.msd") c.obs_msd = parse_bool(key, value);
    else if (key == "observables.msd.stride") c.msd_stride = parse_int(key, value);
    else if (key == "observables.msd.origin_stride") c.msd_origin_stride = parse_int(key, value);
    else if (key == "observables.msd.max_lags") c.msd_max_lags = parse_int(key, value);
    else if (key == "observables.msd.fit_lo") c.msd_fit_lo = parse_double(key, value);
    else if (key == "observables.pressure") c.obs_pressure = parse_bool(key, value);
    else if (key == "observables.pressure.stride") c.pressure_stride = parse_int(key, value);
    else if (key == "observables.mode") c.obs_mode = value;
    else if (key == "cutoff.candidates") c.cutoff_candidates = parse_list(key, value);
    else if (key == "cutoff.stride") c.cutoff_stride = parse_int(key, value);
    else if (key == "output.dir") c.out_dir = value;
    else if (key == "output.trajectory_stride") c.trajectory_stride = parse_int(key, value);
    else if (key == "threads") c.threads = static_cast<int>(parse_int(key, value));
    else if (key == "deterministic") c.deterministic = parse_bool(key, value);
    else if (key == "seeds") c.seeds = parse_int(key, value);
    else throw ConfigError("unknown configuration key '" + key + "'");
}

// Parse "key = value" lines; '#' starts a comment; blank lines ignored.
inline void apply_config_text(ExperimentConfig& c, const std::string& text) {
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = cfg_detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        apply_config_key(c, cfg_detail::trim(line.substr(0, eq)),
                         cfg_detail::trim(line.substr(eq + 1)));
    }
}

inline void apply_config_file(ExperimentConfig& c, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    apply_config_text(c, ss.str());
}

// --- presets -----------------------------------------------------------------

inline ExperimentConfig preset_lj_paper() {
    ExperimentConfig c;
    c.model = "lj-fluid";
    c.preset = "lj-paper";
    c.n_atoms = 2048;
    c.box_length = 14.3;
    c.temperature = 0.85;
    c.dt = 1e-3;
    c.n_steps = 100000;
    c.n_equil = 10000;
    c.gamma = 0.5;
    c.rdf_bin_width = 0.02;
    return c;
}

inline ExperimentConfig preset_lj_desk() {
    ExperimentConfig c;
    c.model = "lj-fluid";
    c.preset = "lj-desk";
    c.n_atoms = 512;
    c.density = 0.7;
    c.temperature = 0.85;
    c.dt = 1e-3;
    c.n_steps = 20000;
    c.n_equil = 4000;
    c.gamma = 0.5;
    c.rdf_bin_width = 0.02;
    return c;
}

inline ExperimentConfig preset_methane_paper() {
    ExperimentConfig c;
    c.model = "methane";
    c.preset = "methane-paper";
    c.n_molecules = 512;
    c.box_length = 32.9;
    c.temperature = 100.0;               // Kelvin
    c.dt = 1.0 / units::akma_time_fs;    // 1 fs
    c.n_steps = 100000;
    c.n_equil = 10000;
    c.gamma = 0.5 / units::akma_per_ps;  // 0.5/ps as mass-proportional friction
    c.gamma_per_mass = true;
    c.normalization = Normalization::per_interaction;
    c.rdf_bin_width = 0.05;
    c.obs_mode = "molecular";
    return c;
}

inline ExperimentConfig preset_methane_desk() {
    ExperimentConfig c = preset_methane_paper();
    c.preset = "methane-desk";
    c.n_steps = 6000;
    c.n_equil = 3000;
    return c;
}

inline ExperimentConfig preset_ou_oracle() {
    ExperimentConfig c;
    c.model = "ou-oracle";
    c.preset = "ou-oracle";
    c.n_atoms = 100;
    c.temperature = 1.0;
    c.dt = 0.01;
    c.n_steps = 20000;
    c.n_equil = 1000;
    c.gamma = 1.0;
    c.normalization = Normalization::none;
    return c;
}

inline ExperimentConfig preset_free_particle() {
    ExperimentConfig c;
    c.model = "free-particle";
    c.preset = "free-particle";
    c.n_atoms = 1000;
    c.temperature = 1.0;
    c.dt = 0.01;
    c.n_steps = 20000;
    c.n_equil = 0;
    c.gamma = 1.0;
    c.obs_msd = true;
    c.msd_stride = 5;
    c.msd_origin_stride = 20;
    c.msd_max_lags = 100;
    c.normalization = Normalization::none;
    return c;
}

inline ExperimentConfig preset_by_name(const std::string& name) {
    if (name == "lj-paper") return preset_lj_paper();
    if (name == "lj-desk") return preset_lj_desk();
    if (name == "methane-paper") return preset_methane_paper();
    if (name == "methane-desk") return preset_methane_desk();
    if (name == "ou-oracle") return preset_ou_oracle();
    if (name == "free-particle") return preset_free_particle();
    throw ConfigError("unknown preset '" + name + "'");
}

// Canonical serialization: every field in fixed order. Used for provenance
// hashing and reproducibility checks.
inline std::string canonical_text(const ExperimentConfig& c) {
    std::ostringstream o;
    o.precision(17);
    o << "model=" << c.model << "\n";
    o << "system.n_atoms=" << c.n_atoms << "\n";
    o << "system.n_molecules=" << c.n_molecules << "\n";
    o << "system.box_length=" << c.box_length << "\n";
    o << "system.density=" << c.density << "\n";
    o << "system.temperature=" << c.temperature << "\n";
    o << "dynamics.dt=" << c.dt << "\n";
    o << "dynamics.n_steps=" << c.n_steps << "\n";
    o << "dynamics.n_equil=" << c.n_equil << "\n";
    o << "dynamics.gamma=" << c.gamma << "\n";
    o << "dynamics.gamma_per_mass=" << c.gamma_per_mass << "\n";
    o << "dynamics.seed=" << c.seed << "\n";
    o << "dynamics.alpha=" << c.alpha << "\n";
    for (const auto& [k, v] : c.param_overrides) o << "parameters." << k << "=" << v << "\n";
    for (const auto& p : c.perturbations) o << "perturb=" << p.parameter << ":" << p.relative << "\n";
    o << "sensitivity.stride=" << c.sens_stride << "\n";
    o << "sensitivity.fim=" << c.fim << "\n";
    o << "sensitivity.discrete=" << c.discrete << "\n";
    o << "sensitivity.discrete_stride=" << c.discrete_stride << "\n";
    o << "sensitivity.normalization=" << static_cast<int>(c.normalization) << "\n";
    o << "observables.rdf=" << c.obs_rdf << "\n";
    o << "observables.rdf.bin_width=" << c.rdf_bin_width << "\n";
    o << "observables.rdf.r_max=" << c.rdf_r_max << "\n";
    o << "observables.rdf.stride=" << c.rdf_stride << "\n";
    o << "observables.msd=" << c.obs_msd << "\n";
    o << "observables.msd.stride=" << c.msd_stride << "\n";
    o << "observables.msd.origin_stride=" << c.msd_origin_stride << "\n";
    o << "observables.msd.max_lags=" << c.msd_max_lags << "\n";
    o << "observables.msd.fit_lo=" << c.msd_fit_lo << "\n";
    o << "observables.pressure=" << c.obs_pressure << "\n";
    o << "observables.pressure.stride=" << c.pressure_stride << "\n";
    o << "observables.mode=" << c.obs_mode << "\n";
    o << "cutoff.candidates=";
    for (std::size_t i = 0; i < c.cutoff_candidates.size(); ++i)
        o << (i ? "," : "") << c.cutoff_candidates[i];
    o << "\n";
    o << "cutoff.stride=" << c.cutoff_stride << "\n";
    o << "output.trajectory_stride=" << c.trajectory_stride << "\n";
    o << "deterministic=" << c.deterministic << "\n";
    o << "seeds=" << c.seeds << "\n";
    return o.str();
}

// FNV-1a over the canonical serialization.
inline std::uint64_t config_hash(const ExperimentConfig& c) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : canonical_text(c)) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

// Structural validation shared by all entry points.
inline void validate_config(const ExperimentConfig& c) {
    if (c.model != "lj-fluid" && c.model != "methane" && c.model != "ou-oracle" &&
        c.model != "free-particle")
        throw ConfigError("field 'model': unknown model '" + c.model + "'");
    if (c.model == "methane") {
        if (c.n_molecules <= 0) throw ConfigError("field 'system.n_molecules': required for methane");
    } else {
        if (c.n_atoms <= 0) throw ConfigError("field 'system.n_atoms': required");
    }
    if (!(c.temperature > 0.0)) throw ConfigError("field 'system.temperature': must be positive");
    if (c.model == "lj-fluid" || c.model == "methane") {
        if (c.box_length <= 0.0 && c.density <= 0.0)
            throw ConfigError("field 'system.box_length' or 'system.density': one is required");
    }
    if (!(c.dt > 0.0)) throw ConfigError("field 'dynamics.dt': must be positive");
    if (c.n_steps < 0 || c.n_equil < 0)
        throw ConfigError("field 'dynamics.n_steps'/'n_equil': must be non-negative");
    if (c.gamma < 0.0) throw ConfigError("field 'dynamics.gamma': must be non-negative");
    if (c.sens_stride < 1) throw ConfigError("field 'sensitivity.stride': must be >= 1");
    if (c.seeds < 1) throw ConfigError("field 'seeds': must be >= 1");
    if (c.threads < 1) throw ConfigError("field 'threads': must be >= 1");
    if (c.msd_fit_lo < 0.0 || c.msd_fit_lo >= 1.0)
        throw ConfigError("field 'observables.msd.fit_lo': must lie in [0,1)");
    if (c.obs_mode != "auto" && c.obs_mode != "atomic" && c.obs_mode != "molecular")
        throw ConfigError("field 'observables.mode': atomic, molecular or auto");
}

} // namespace pathsens
