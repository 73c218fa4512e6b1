#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "pathsens/config.hpp"
#include "pathsens/csv.hpp"
#include "pathsens/errors.hpp"
#include "pathsens/langevin.hpp"
#include "pathsens/observables.hpp"
#include "pathsens/sensitivity.hpp"
#include "pathsens/topology.hpp"
#include "pathsens/units.hpp"
#include "pathsens/version.hpp"

namespace pathsens {

// --- model construction -------------------------------------------------------

struct BuiltSystem {
    ModelSystem model;
    double beta = 1.0;
    double box = 0.0;
    LangevinConfig lcfg;  // beta/gamma/dt/steps resolved; seed set per replica
};

inline BuiltSystem build_system(const ExperimentConfig& cfg) {
    validate_config(cfg);
    BuiltSystem b;
    if (cfg.model == "lj-fluid") {
        b.model = make_lj_fluid(static_cast<std::int32_t>(cfg.n_atoms));
        b.beta = 1.0 / cfg.temperature;
        b.box = cfg.box_length > 0.0 ? cfg.box_length
                                     : std::cbrt(cfg.n_atoms / cfg.density);
    } else if (cfg.model == "methane") {
        b.model = make_methane(static_cast<std::int32_t>(cfg.n_molecules));
        b.beta = 1.0 / (units::kB_kcal_mol_K * cfg.temperature);
        b.box = cfg.box_length > 0.0 ? cfg.box_length
                                     : std::cbrt(cfg.n_molecules / cfg.density);
    } else if (cfg.model == "ou-oracle") {
        b.model = make_harmonic(static_cast<std::int32_t>(cfg.n_atoms));
        b.beta = 1.0 / cfg.temperature;
        b.box = 0.0;
    } else {
        b.model = make_free(static_cast<std::int32_t>(cfg.n_atoms));
        b.beta = 1.0 / cfg.temperature;
        b.box = 0.0;
    }
    for (const auto& [name, value] : cfg.param_overrides) {
        if (!b.model.parameters.has(name))
            throw ConfigError("field 'parameters." + name + "': not a parameter of model " +
                              cfg.model);
        b.model.parameters.set(name, value);
    }
    b.lcfg.beta = b.beta;
    b.lcfg.dt = cfg.dt;
    b.lcfg.n_steps = cfg.n_steps;
    b.lcfg.n_equil = cfg.n_equil;
    b.lcfg.alpha = cfg.alpha;
    b.lcfg.seed = cfg.seed;
    if (cfg.gamma_per_mass) {
        b.lcfg.gamma.resize(b.model.topology.n_atoms);
        for (std::int32_t i = 0; i < b.model.topology.n_atoms; ++i)
            b.lcfg.gamma[i] = cfg.gamma * b.model.topology.masses[i];
    } else {
        b.lcfg.gamma = {cfg.gamma};
    }
    const double max_rc = [&] {
        if (b.model.topology.kind != ModelKind::lj_pairs) return 0.0;
        double m = 0.0;
        for (const auto& c : b.model.topology.lj_classes)
            m = std::max(m, b.model.parameters.value(c.rcut));
        return m;
    }();
    if (b.box > 0.0 && max_rc > 0.5 * b.box)
        throw ConfigError("field 'parameters.rcut': cutoff exceeds box/2");
    return b;
}

// Verlet skin compatible with the minimum-image constraint rc + skin <= L/2.
inline double pick_skin(const BuiltSystem& b) {
    if (b.model.topology.kind != ModelKind::lj_pairs) return 0.0;
    double max_rc = 0.0;
    for (const auto& c : b.model.topology.lj_classes)
        max_rc = std::max(max_rc, b.model.parameters.value(c.rcut));
    double skin = 0.1 * max_rc;
    if (b.box > 0.0) skin = std::min(skin, 0.9 * (0.5 * b.box - max_rc));
    return std::max(skin, 1e-3 * max_rc);
}

inline ForceEngine make_engine(const BuiltSystem& b) {
    return ForceEngine(b.model.topology, b.model.parameters, pick_skin(b));
}

inline SystemState make_initial_state(const BuiltSystem& b, std::uint64_t seed) {
    const Topology& topo = b.model.topology;
    switch (topo.kind) {
    case ModelKind::lj_pairs:
        if (topo.bonds.empty()) return init_lattice_lj(topo, b.box, b.beta, seed);
        return init_grid_methane(topo, b.box, b.beta,
                                 b.model.parameters.value(topo.bond_r0_slot), seed);
    case ModelKind::harmonic_well:
        return init_harmonic_gibbs(topo, b.model.parameters.value(topo.spring_k_slot), b.beta,
                                   seed);
    case ModelKind::free_particle:
        return init_free(topo, b.beta, seed);
    }
    throw ConfigError("unreachable model kind");
}

// Reporting divisor for "per particle / per molecule / per interaction".
inline double normalization_divisor(const ExperimentConfig& cfg, const Topology& topo,
                                    const std::string& param_name) {
    switch (cfg.normalization) {
    case Normalization::none:
        return 1.0;
    case Normalization::per_particle:
        return topo.n_atoms;
    case Normalization::per_molecule:
        return topo.n_molecules;
    case Normalization::per_interaction: {
        const double nm = topo.n_molecules;
        if (param_name == "eps_cc" || param_name == "sigma_cc") return nm;
        if (param_name == "eps_ch" || param_name == "sigma_ch") return 8.0 * nm;
        if (param_name == "eps_hh" || param_name == "sigma_hh") return 16.0 * nm;
        if (param_name == "kb" || param_name == "r0")
            return static_cast<double>(topo.bonds.size());
        if (param_name == "ktheta" || param_name == "theta0")
            return static_cast<double>(topo.angles.size());
        return topo.n_atoms;
    }
    }
    return 1.0;
}

// --- multi-seed execution -------------------------------------------------------

inline std::vector<std::uint64_t> replica_seeds(const ExperimentConfig& cfg) {
    std::vector<std::uint64_t> s(cfg.seeds);
    for (std::int64_t i = 0; i < cfg.seeds; ++i) s[i] = cfg.seed + static_cast<std::uint64_t>(i);
    return s;
}

// Runs fn(i) for each replica index on up to `threads` workers. Replicas are
// independent; each writes only to its own result slot.
inline void parallel_replicas(int threads, std::size_t count,
                              const std::function<void(std::size_t)>& fn) {
    if (threads <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(count);
    const std::size_t workers = std::min<std::size_t>(threads, count);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i; (i = next.fetch_add(1)) < count;) {
                try {
                    fn(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

inline void mean_and_se(const std::vector<double>& v, double& mean, double& se) {
    mean = 0.0;
    se = 0.0;
    if (v.empty()) return;
    for (double x : v) mean += x;
    mean /= v.size();
    if (v.size() < 2) return;
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var /= (v.size() - 1);
    se = std::sqrt(var / v.size());
}

// --- trajectory output ----------------------------------------------------------

// Plain-text frames: atom count, box edge, then one line per atom with
// species, position and momentum.
class TrajectorySink : public Sink {
public:
    TrajectorySink(const std::string& path, const Topology& topo, std::int64_t stride)
        : topo_(&topo), stride_(std::max<std::int64_t>(1, stride)) {
        out_.open(path);
        if (!out_) throw ConfigError("cannot open trajectory file '" + path + "'");
        out_.precision(10);
    }

    void on_step(const StepContext& ctx) override {
        if (ctx.step % stride_ != 0) return;
        out_ << ctx.state.n() << "\n" << ctx.state.box << "\n";
        for (std::int32_t i = 0; i < ctx.state.n(); ++i) {
            out_ << topo_->species_names[topo_->species[i]] << " " << ctx.state.q[i].x << " "
                 << ctx.state.q[i].y << " " << ctx.state.q[i].z << " " << ctx.state.p[i].x << " "
                 << ctx.state.p[i].y << " " << ctx.state.p[i].z << "\n";
        }
    }

private:
    const Topology* topo_;
    std::int64_t stride_;
    std::ofstream out_;
};

// --- sensitivity sweep ------------------------------------------------------------

struct DirectionResult {
    std::string parameter;
    double relative = 0.0;
    double delta = 0.0;
    EstimateWithError rer;        // total-system RER estimate
    double normalized = 0.0;      // rer.mean / divisor
    double divisor = 1.0;
};

struct SweepResult {
    std::uint64_t hash = 0;
    std::vector<std::uint64_t> seeds;
    std::vector<DirectionResult> directions;           // force-field perturbations
    std::vector<DirectionResult> cutoff_directions;    // rcut perturbations (RER only)
    std::optional<FimReport> fim;
    std::vector<double> theta_diff;                    // differentiable parameter values
    std::vector<std::string> names_diff;
    std::int64_t trajectory_steps = 0;
    std::int64_t force_evals = 0;
    std::int64_t perturbed_evals = 0;
    // per-seed RER means per direction (seed-level statistics)
    std::vector<std::vector<double>> per_seed_rer;
    std::vector<std::vector<double>> per_seed_cutoff_rer;
};

// One reference trajectory per seed; every requested direction is accumulated
// on it. Cutoff (rcut) perturbations go through the shell-sum path and are
// rejected when the FIM is requested for them.
inline SweepResult run_sensitivity(const ExperimentConfig& cfg) {
    const BuiltSystem base = build_system(cfg);
    if (cfg.perturbations.empty())
        throw ConfigError("sensitivity requires at least one 'perturb' entry");

    std::vector<PerturbSpec> ff_perturbs, rcut_perturbs;
    for (const auto& p : cfg.perturbations) {
        const std::size_t idx = base.model.parameters.index_of(p.parameter);
        if (base.model.parameters[idx].kind == ParamKind::lj_rcut) {
            if (cfg.fim)
                throw ConfigError(
                    "FIM for '" + p.parameter +
                    "' rejected: the potential is not differentiable in the cutoff radius; "
                    "request RER without --fim instead");
            rcut_perturbs.push_back(p);
        } else {
            ff_perturbs.push_back(p);
        }
    }

    const auto seeds = replica_seeds(cfg);
    struct PerSeed {
        std::unique_ptr<SensitivitySink> sens;
        std::unique_ptr<CutoffSink> cut;
        RunSummary summary;
    };
    std::vector<PerSeed> runs(seeds.size());

    parallel_replicas(cfg.threads, seeds.size(), [&](std::size_t si) {
        BuiltSystem b = base;  // copy: engines and sinks stay replica-local
        b.lcfg.seed = seeds[si];
        SystemState state = make_initial_state(b, seeds[si]);
        ForceEngine engine = make_engine(b);
        engine.set_molecular_virial(false);
        const InverseDiffusion inv =
            InverseDiffusion::from(b.beta, b.lcfg, b.model.topology.n_atoms);

        std::vector<PerturbationDirection> dirs;
        for (const auto& p : ff_perturbs)
            dirs.push_back(make_direction(b.model.parameters, p.parameter, p.relative,
                                          b.model.topology));
        auto sens = std::make_unique<SensitivitySink>(dirs, inv, cfg.sens_stride, cfg.fim);
        std::unique_ptr<CutoffSink> cut;
        if (!rcut_perturbs.empty()) {
            std::vector<double> cands;
            for (const auto& p : rcut_perturbs) {
                const std::size_t idx = b.model.parameters.index_of(p.parameter);
                cands.push_back(b.model.parameters.value(idx) * (1.0 + p.relative));
            }
            cut = std::make_unique<CutoffSink>(cands, inv, cfg.cutoff_stride);
        }
        std::vector<Sink*> sinks{sens.get()};
        if (cut) sinks.push_back(cut.get());
        runs[si].summary = run_trajectory(state, engine, b.lcfg, sinks);
        runs[si].sens = std::move(sens);
        runs[si].cut = std::move(cut);
    });

    // merge across replicas
    SweepResult out;
    out.hash = config_hash(cfg);
    out.seeds = seeds;
    SensitivitySink& merged = *runs[0].sens;
    for (std::size_t si = 1; si < runs.size(); ++si) merged.merge(*runs[si].sens);

    const Topology& topo = base.model.topology;
    out.per_seed_rer.resize(ff_perturbs.size());
    for (std::size_t d = 0; d < ff_perturbs.size(); ++d) {
        DirectionResult r;
        r.parameter = ff_perturbs[d].parameter;
        r.relative = ff_perturbs[d].relative;
        r.delta = merged.directions()[d].delta;
        r.rer = merged.rer_estimate(d);
        r.divisor = normalization_divisor(cfg, topo, r.parameter);
        r.normalized = r.rer.mean / r.divisor;
        out.directions.push_back(r);
        for (auto& run : runs) out.per_seed_rer[d].push_back(run.sens->rer_estimate(d).mean);
    }
    if (runs[0].cut) {
        CutoffSink& mcut = *runs[0].cut;
        for (std::size_t si = 1; si < runs.size(); ++si) mcut.merge(*runs[si].cut);
        out.per_seed_cutoff_rer.resize(rcut_perturbs.size());
        for (std::size_t c = 0; c < rcut_perturbs.size(); ++c) {
            DirectionResult r;
            r.parameter = rcut_perturbs[c].parameter;
            r.relative = rcut_perturbs[c].relative;
            r.delta = mcut.candidates()[c] -
                      base.model.parameters.value(
                          base.model.parameters.index_of(rcut_perturbs[c].parameter));
            r.rer = mcut.rer_estimate(c);
            r.divisor = normalization_divisor(cfg, topo, r.parameter);
            r.normalized = r.rer.mean / r.divisor;
            out.cutoff_directions.push_back(r);
            for (auto& run : runs)
                out.per_seed_cutoff_rer[c].push_back(run.cut->rer_estimate(c).mean);
        }
    }
    if (cfg.fim && merged.fim().dim() > 0) {
        for (std::size_t slot : base.model.parameters.differentiable_indices()) {
            out.theta_diff.push_back(base.model.parameters.value(slot));
            out.names_diff.push_back(base.model.parameters[slot].name);
        }
        out.fim = make_fim_report(merged.fim(), out.names_diff, out.theta_diff);
    }
    for (const auto& run : runs) {
        out.trajectory_steps += run.summary.production_steps;
        out.force_evals += run.summary.force_evals;
        out.perturbed_evals += run.summary.perturbed_evals;
    }
    return out;
}

// Column index of a parameter in the differentiable set of a report.
inline std::size_t fim_column(const FimReport& rep, const std::string& name) {
    for (std::size_t i = 0; i < rep.names.size(); ++i)
        if (rep.names[i] == name) return i;
    throw ContractError("parameter '" + name + "' not in FIM report");
}

// FIM-quadratic RER prediction for a single-parameter relative perturbation.
inline double fim_quadratic_for(const FimReport& rep, const std::vector<double>& theta,
                                const std::string& name, double relative) {
    std::vector<double> eps0(rep.k, 0.0);
    const std::size_t c = fim_column(rep, name);
    eps0[c] = theta[c] * relative;
    return fim_quadratic_rer(rep.fim, rep.k, eps0);
}

// --- CSV emission ------------------------------------------------------------------

inline std::string provenance_extra(const SweepResult& res) {
    std::ostringstream o;
    o << "pathsens=" << version << " seeds=";
    for (std::size_t i = 0; i < res.seeds.size(); ++i) o << (i ? "," : "") << res.seeds[i];
    return o.str();
}

inline void write_rer_csv(const std::string& path, const SweepResult& res) {
    CsvWriter w(path, res.hash, provenance_extra(res));
    w.header("parameter,direction,epsilon,rer,rer_per_particle_or_interaction,stderr,n_samples");
    auto row = [&](const DirectionResult& r) {
        w.field(r.parameter)
            .field(std::string(r.relative >= 0 ? "+" : "-"))
            .field(std::abs(r.relative))
            .field(r.rer.mean)
            .field(r.normalized)
            .field(r.rer.se)
            .field(r.rer.n);
        w.endrow();
    };
    for (const auto& r : res.directions) row(r);
    for (const auto& r : res.cutoff_directions) row(r);
}

inline void write_fim_csv(const std::string& path, const SweepResult& res) {
    if (!res.fim) throw ContractError("write_fim_csv: no FIM in sweep result");
    const FimReport& rep = *res.fim;
    CsvWriter w(path, res.hash, provenance_extra(res));
    std::string hdr;
    for (std::size_t i = 0; i < rep.names.size(); ++i)
        hdr += (i ? "," : "") + rep.names[i];
    w.header(hdr);
    for (std::size_t r = 0; r < rep.k; ++r) {
        for (std::size_t c = 0; c < rep.k; ++c) w.field(rep.fim[r * rep.k + c]);
        w.endrow();
    }
}

inline void write_fim_eig_csv(const std::string& path, const SweepResult& res) {
    if (!res.fim) throw ContractError("write_fim_eig_csv: no FIM in sweep result");
    const FimReport& rep = *res.fim;
    CsvWriter w(path, res.hash, provenance_extra(res));
    std::string hdr = "eigenvalue";
    for (const auto& n : rep.names) hdr += ",v_" + n;
    w.header(hdr);
    for (std::size_t c = 0; c < rep.k; ++c) {
        w.field(rep.eigen.values[c]);
        for (std::size_t r = 0; r < rep.k; ++r) w.field(rep.eigen.vectors[r * rep.k + c]);
        w.endrow();
    }
}

inline void write_asymmetry_csv(const std::string& path, const SweepResult& res) {
    if (!res.fim) return;
    CsvWriter w(path, res.hash, provenance_extra(res));
    w.header("parameter,epsilon,rer_plus,rer_minus,fim_quadratic,odd,odd_stderr,even_residual,"
             "significant");
    for (std::size_t a = 0; a < res.directions.size(); ++a) {
        for (std::size_t b = 0; b < res.directions.size(); ++b) {
            const auto& rp = res.directions[a];
            const auto& rm = res.directions[b];
            if (rp.parameter != rm.parameter) continue;
            if (!(rp.relative > 0.0 && std::abs(rp.relative + rm.relative) < 1e-12)) continue;
            const double quad =
                fim_quadratic_for(*res.fim, res.theta_diff, rp.parameter, rp.relative);
            const AsymmetryReport rep = asymmetry_diagnostic(rp.rer, rm.rer, quad);
            w.field(rp.parameter)
                .field(rp.relative)
                .field(rp.rer.mean)
                .field(rm.rer.mean)
                .field(quad)
                .field(rep.odd)
                .field(rep.odd_se)
                .field(rep.even_residual)
                .field(std::int64_t(rep.significant ? 1 : 0));
            w.endrow();
        }
    }
}

inline void write_rdf_csv(const std::string& path, std::uint64_t hash, const RdfTable& t) {
    CsvWriter w(path, hash);
    w.header("r_center,g_r");
    for (std::size_t b = 0; b < t.g.size(); ++b) {
        w.field(t.r_center[b]).field(t.g[b]);
        w.endrow();
    }
}

inline void write_msd_csv(const std::string& path, std::uint64_t hash, const MsdSeries& s) {
    CsvWriter w(path, hash);
    w.header("lag,msd");
    for (std::size_t i = 0; i < s.msd.size(); ++i) {
        w.field(s.lag_times[i]).field(s.msd[i]);
        w.endrow();
    }
}

inline void write_pressure_csv(const std::string& path, std::uint64_t hash,
                               const PressureSeries& s) {
    CsvWriter w(path, hash);
    w.header("step,P");
    for (std::size_t i = 0; i < s.p.size(); ++i) {
        w.field(s.steps[i]).field(s.p[i]);
        w.endrow();
    }
    std::ostringstream foot;
    foot.precision(10);
    foot << "mean=" << s.mean() << " std=" << s.std_dev();
    w.comment(foot.str());
}

// --- simulate / observables --------------------------------------------------------

struct SimulateResult {
    std::uint64_t hash = 0;
    RunSummary summary;
    std::optional<RdfTable> rdf;
    std::optional<MsdSeries> msd;
    std::optional<DiffusionFit> diffusion;
    PressureSeries pressure;
    double mean_potential = 0.0;
    double mean_kinetic = 0.0;
    SystemState final_state;
};

inline ObservableOptions observable_options(const ExperimentConfig& cfg, const BuiltSystem& b) {
    ObservableOptions o;
    o.rdf = cfg.obs_rdf;
    o.rdf_bin_width = cfg.rdf_bin_width > 0.0
                          ? cfg.rdf_bin_width
                          : (cfg.model == "methane" ? 0.05 : 0.02);
    o.rdf_r_max = cfg.rdf_r_max > 0.0 ? cfg.rdf_r_max : 0.5 * b.box;
    o.rdf_stride = cfg.rdf_stride;
    o.msd = cfg.obs_msd;
    o.msd_stride = cfg.msd_stride;
    o.msd_origin_stride = cfg.msd_origin_stride;
    o.msd_max_lags = cfg.msd_max_lags;
    o.msd_fit_lo = cfg.msd_fit_lo;
    o.pressure = cfg.obs_pressure;
    o.pressure_stride = cfg.pressure_stride;
    if (cfg.obs_mode == "molecular" || (cfg.obs_mode == "auto" && cfg.model == "methane"))
        o.mode = ObservableMode::molecular;
    return o;
}

// Mean potential/kinetic energy tracker, used by equipartition checks.
class EnergySink : public Sink {
public:
    explicit EnergySink(std::int64_t stride = 10) : stride_(std::max<std::int64_t>(1, stride)) {}
    void on_step(const StepContext& ctx) override {
        if (ctx.step % stride_ != 0) return;
        pot_.add(ctx.engine.current().potential_energy);
        kin_.add(ctx.state.kinetic_energy());
    }
    double mean_potential() const { return pot_.mean(); }
    double mean_kinetic() const { return kin_.mean(); }
    EstimateWithError kinetic_estimate() const {
        return {kin_.mean(), kin_.stderr_blocked(), kin_.count()};
    }

private:
    std::int64_t stride_;
    ScalarAccumulator pot_, kin_;
};

inline SimulateResult run_simulate(const ExperimentConfig& cfg, bool write_files = true) {
    const BuiltSystem base = build_system(cfg);
    BuiltSystem b = base;
    SystemState state = make_initial_state(b, cfg.seed);
    ForceEngine engine = make_engine(b);

    ObservableOptions oopt = observable_options(cfg, b);
    ObservableSink obs(b.model.topology, b.box, b.beta, cfg.dt, oopt);
    EnergySink energy;
    std::unique_ptr<TrajectorySink> traj;
    std::vector<Sink*> sinks{&obs, &energy};
    if (cfg.trajectory_stride > 0 && write_files) {
        std::filesystem::create_directories(cfg.out_dir);
        traj = std::make_unique<TrajectorySink>(cfg.out_dir + "/trajectory.txt",
                                                b.model.topology, cfg.trajectory_stride);
        sinks.push_back(traj.get());
    }

    SimulateResult res;
    res.hash = config_hash(cfg);
    res.summary = run_trajectory(state, engine, b.lcfg, sinks);
    if (oopt.rdf) res.rdf = obs.rdf_table(b.box);
    if (oopt.msd) {
        res.msd = obs.msd_series();
        if (res.msd->msd.size() >= 4)
            res.diffusion = diffusion_coefficient(*res.msd, oopt.msd_fit_lo);
    }
    res.pressure = obs.pressure();
    res.mean_potential = energy.mean_potential();
    res.mean_kinetic = energy.mean_kinetic();
    res.final_state = std::move(state);

    if (write_files) {
        std::filesystem::create_directories(cfg.out_dir);
        if (res.rdf) write_rdf_csv(cfg.out_dir + "/rdf.csv", res.hash, *res.rdf);
        if (res.msd) write_msd_csv(cfg.out_dir + "/msd.csv", res.hash, *res.msd);
        if (cfg.obs_pressure)
            write_pressure_csv(cfg.out_dir + "/pressure.csv", res.hash, res.pressure);
    }
    return res;
}

// Observable cross-validation: a reference simulation plus one independent
// simulation per perturbation, compared through RDF L2, pressure and
// diffusion. This is the one place perturbed trajectories are generated.
struct CompareRow {
    std::string metric;
    double value = 0.0;
};

struct CompareResult {
    std::uint64_t hash = 0;
    SimulateResult reference;
    std::vector<std::pair<std::string, SimulateResult>> perturbed;
    std::vector<CompareRow> rows;
};

inline CompareResult run_observable_compare(const ExperimentConfig& cfg,
                                            bool write_files = true) {
    ExperimentConfig ref_cfg = cfg;
    ref_cfg.obs_rdf = true;
    ref_cfg.obs_pressure = true;
    CompareResult out;
    out.hash = config_hash(cfg);
    out.reference = run_simulate(ref_cfg, false);

    const BuiltSystem base = build_system(cfg);
    for (const auto& p : cfg.perturbations) {
        ExperimentConfig pcfg = ref_cfg;
        const std::size_t idx = base.model.parameters.index_of(p.parameter);
        const double value = base.model.parameters.value(idx) * (1.0 + p.relative);
        pcfg.param_overrides[p.parameter] = value;
        std::ostringstream label;
        label << p.parameter << (p.relative >= 0 ? "+" : "") << p.relative * 100.0 << "%";
        out.perturbed.emplace_back(label.str(), run_simulate(pcfg, false));
    }

    for (const auto& [label, res] : out.perturbed) {
        if (out.reference.rdf && res.rdf) {
            const RdfComparison c = rdf_l2_diff(*out.reference.rdf, *res.rdf);
            out.rows.push_back({"rdf_l2_diff:" + label, c.l2});
            out.rows.push_back({"rdf_rel_area:" + label, c.rel_area});
        }
        out.rows.push_back({"pressure_mean:" + label, res.pressure.mean()});
        out.rows.push_back(
            {"pressure_change:" + label, res.pressure.mean() - out.reference.pressure.mean()});
        if (out.reference.diffusion && res.diffusion && out.reference.diffusion->d != 0.0)
            out.rows.push_back({"diffusion_ratio:" + label,
                                res.diffusion->d / out.reference.diffusion->d});
    }
    out.rows.push_back({"pressure_mean:reference", out.reference.pressure.mean()});
    out.rows.push_back({"pressure_std:reference", out.reference.pressure.std_dev()});
    if (out.reference.diffusion) {
        out.rows.push_back({"diffusion:reference", out.reference.diffusion->d});
        out.rows.push_back({"diffusion_fit_t_lo:reference", out.reference.diffusion->t_lo});
        out.rows.push_back({"diffusion_fit_t_hi:reference", out.reference.diffusion->t_hi});
    }

    if (write_files) {
        std::filesystem::create_directories(cfg.out_dir);
        CsvWriter w(cfg.out_dir + "/compare.csv", out.hash);
        w.header("metric,value");
        for (const auto& row : out.rows) {
            w.field(row.metric).field(row.value);
            w.endrow();
        }
        if (out.reference.rdf)
            write_rdf_csv(cfg.out_dir + "/rdf_reference.csv", out.hash, *out.reference.rdf);
        for (const auto& [label, res] : out.perturbed)
            if (res.rdf) write_rdf_csv(cfg.out_dir + "/rdf_" + label + ".csv", out.hash, *res.rdf);
    }
    return out;
}

// --- cutoff study ---------------------------------------------------------------

struct CutoffStudyRow {
    double rcut = 0.0;
    EstimateWithError rer;
    double per_particle = 0.0;
};

struct CutoffStudyResult {
    std::uint64_t hash = 0;
    double reference_rcut = 0.0;
    std::vector<CutoffStudyRow> rows;
    std::vector<std::vector<double>> per_seed;  // [candidate][seed]
};

inline CutoffStudyResult run_cutoff_study(const ExperimentConfig& cfg, bool write_files = true) {
    if (cfg.cutoff_candidates.empty())
        throw ConfigError("field 'cutoff.candidates': required for the cutoff study");
    const BuiltSystem base = build_system(cfg);
    if (base.model.topology.kind != ModelKind::lj_pairs)
        throw ConfigError("cutoff study requires an LJ model");

    const auto seeds = replica_seeds(cfg);
    std::vector<std::unique_ptr<CutoffSink>> sinks_per_seed(seeds.size());
    parallel_replicas(cfg.threads, seeds.size(), [&](std::size_t si) {
        BuiltSystem b = base;
        b.lcfg.seed = seeds[si];
        SystemState state = make_initial_state(b, seeds[si]);
        ForceEngine engine = make_engine(b);
        engine.set_molecular_virial(false);
        const InverseDiffusion inv =
            InverseDiffusion::from(b.beta, b.lcfg, b.model.topology.n_atoms);
        auto cut = std::make_unique<CutoffSink>(cfg.cutoff_candidates, inv, cfg.cutoff_stride);
        std::vector<Sink*> sinks{cut.get()};
        run_trajectory(state, engine, b.lcfg, sinks);
        sinks_per_seed[si] = std::move(cut);
    });

    CutoffStudyResult out;
    out.hash = config_hash(cfg);
    out.reference_rcut =
        base.model.parameters.value(base.model.parameters.index_of("rcut"));
    CutoffSink& merged = *sinks_per_seed[0];
    for (std::size_t si = 1; si < seeds.size(); ++si) merged.merge(*sinks_per_seed[si]);
    out.per_seed.resize(cfg.cutoff_candidates.size());
    for (std::size_t c = 0; c < cfg.cutoff_candidates.size(); ++c) {
        CutoffStudyRow row;
        row.rcut = cfg.cutoff_candidates[c];
        row.rer = merged.rer_estimate(c);
        row.per_particle = row.rer.mean / base.model.topology.n_atoms;
        out.rows.push_back(row);
        for (auto& s : sinks_per_seed) out.per_seed[c].push_back(s->rer_estimate(c).mean);
    }
    if (write_files) {
        std::filesystem::create_directories(cfg.out_dir);
        CsvWriter w(cfg.out_dir + "/cutoff_rer.csv", out.hash);
        w.header("rcut,rer,rer_per_particle,stderr,n_samples");
        for (const auto& row : out.rows) {
            w.field(row.rcut)
                .field(row.rer.mean)
                .field(row.per_particle)
                .field(row.rer.se)
                .field(row.rer.n);
            w.endrow();
        }
    }
    return out;
}

// --- analytic oracle suite --------------------------------------------------------

struct OracleCheck {
    std::string name;
    double measured = 0.0;
    double target = 0.0;
    double tolerance = 0.0;  // pass when |measured - target| <= tolerance
    bool pass = false;
};

struct OracleReport {
    std::vector<OracleCheck> checks;
    bool all_pass = true;

    void add(const std::string& name, double measured, double target, double tol) {
        OracleCheck c{name, measured, target, tol, std::abs(measured - target) <= tol};
        all_pass = all_pass && c.pass;
        checks.push_back(c);
    }
};

// OU well: RER and FIM against delta^2/(4 gamma k) and 1/(2 gamma k) per
// degree of freedom; inverse-temperature closed forms; free-particle
// diffusion against 1/(beta gamma).
inline OracleReport run_oracle_suite(std::uint64_t seed = 1) {
    OracleReport rep;

    for (const double k : {1.0, 2.0}) {
        for (const double gamma : {0.5, 1.0}) {
            ExperimentConfig cfg = preset_ou_oracle();
            cfg.seed = seed;
            cfg.n_atoms = 64;
            cfg.n_steps = 30000;
            cfg.n_equil = 500;
            cfg.dt = 0.01;
            cfg.gamma = gamma;
            cfg.param_overrides["k"] = k;
            cfg.perturbations = {{"k", 0.10}};
            cfg.fim = true;
            cfg.sens_stride = 5;
            SweepResult res = run_sensitivity(cfg);
            const double dof = 3.0 * cfg.n_atoms;
            const double delta = 0.10 * k;
            const double rer = res.directions[0].rer.mean / dof;
            const double rer_se = res.directions[0].rer.se / dof;
            const double rer_target = delta * delta / (4.0 * gamma * k);
            std::ostringstream nm;
            nm << "ou_rer(k=" << k << ",gamma=" << gamma << ")";
            rep.add(nm.str(), rer, rer_target, 3.0 * rer_se + 0.02 * rer_target);
            const double fim = res.fim->fim[0] / dof;
            const double fim_target = 1.0 / (2.0 * gamma * k);
            std::ostringstream nf;
            nf << "ou_fim(k=" << k << ",gamma=" << gamma << ")";
            rep.add(nf.str(), fim, fim_target, 3.0 * res.fim->stderr_m[0] / dof +
                                                     0.02 * fim_target);
        }
    }

    {
        // Gibbs momenta, no dynamics: the momentum estimator against the
        // closed form eps^2 sigma^2 d N / (8 beta m).
        const double beta = 1.0, gamma = 1.0, mass = 1.0, eps_b = 0.1;
        const int n_atoms = 2;
        const double sigma2 = 2.0 * gamma / beta;
        const std::int64_t n_samples = 400000;
        std::vector<double> masses(n_atoms, mass), s2(n_atoms, sigma2);
        double acc = 0.0;
        std::vector<Vec3> p(n_atoms);
        for (std::int64_t s = 0; s < n_samples; ++s) {
            for (int i = 0; i < n_atoms; ++i)
                p[i] = rng::gaussian3(seed, s + 1, i, rng::stream_init_momentum) *
                       std::sqrt(mass / beta);
            acc += inverse_temp_momentum_sample(p, masses, s2);
        }
        const double momentum_avg = acc / n_samples;
        const double rer = inverse_temp_rer(eps_b, momentum_avg);
        const double target = inverse_temp_rer_closed(eps_b, sigma2, 3, n_atoms, beta, mass);
        rep.add("inverse_temp_rer", rer, target, 0.01 * target);
        // log-beta FIM: beta^2 * (1/4) E[p^T M^-1 S M^-1 p] == gamma d N / (2 m)
        const double fim_log = beta * beta * 0.25 * momentum_avg;
        const double fim_target = log_beta_fim_closed(gamma, mass, 3, n_atoms);
        rep.add("inverse_temp_log_fim", fim_log, fim_target, 0.01 * fim_target);
    }

    {
        ExperimentConfig cfg = preset_free_particle();
        cfg.seed = seed;
        SimulateResult res = run_simulate(cfg, false);
        const double beta = 1.0 / cfg.temperature;
        const double target = 1.0 / (beta * cfg.gamma);
        if (!res.diffusion) throw EstimationError("free-particle oracle: no diffusion fit");
        rep.add("free_particle_diffusion", res.diffusion->d, target, 0.05 * target);
    }

    return rep;
}

} // namespace pathsens
