// pathsens: stochastic molecular dynamics with path-space parameter
// sensitivities (relative entropy rate and pathwise Fisher information).
//
// Subcommands: simulate, sensitivity, cutoff-study, observables, oracle.
// Exit codes: 0 ok, 2 configuration error, 3 numerical divergence,
// 4 oracle failure.

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pathsens/experiment.hpp"

using namespace pathsens;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string preset;
    std::int64_t seed = -1;
    int threads = 0;
    bool deterministic = false;
    std::string out_dir;
    std::vector<std::string> perturb;
    std::vector<std::string> set;  // key=value overrides
};

void add_common(CLI::App* cmd, CommonArgs& a) {
    cmd->add_option("--config", a.config_path, "configuration file (key = value lines)");
    cmd->add_option("--preset", a.preset,
                    "preset name: lj-paper, lj-desk, methane-paper, methane-desk, ou-oracle, "
                    "free-particle");
    cmd->add_option("--seed", a.seed, "base RNG seed");
    cmd->add_option("--threads", a.threads, "worker threads for multi-seed replicas");
    cmd->add_flag("--deterministic", a.deterministic,
                  "single-threaded replicas, byte-stable outputs");
    cmd->add_option("--out", a.out_dir, "output directory");
    cmd->add_option("--set", a.set, "extra config assignments key=value")->take_all();
}

ExperimentConfig resolve_config(const CommonArgs& a) {
    ExperimentConfig cfg;
    if (!a.preset.empty()) cfg = preset_by_name(a.preset);
    if (!a.config_path.empty()) apply_config_file(cfg, a.config_path);
    for (const auto& kv : a.set) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got " + kv);
        apply_config_key(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (a.seed >= 0) cfg.seed = static_cast<std::uint64_t>(a.seed);
    if (a.threads > 0) cfg.threads = a.threads;
    if (a.deterministic) {
        cfg.deterministic = true;
        cfg.threads = 1;
    }
    if (!a.out_dir.empty()) cfg.out_dir = a.out_dir;
    for (const auto& p : a.perturb) cfg.perturbations.push_back(cfg_detail::parse_perturb(p));
    validate_config(cfg);
    return cfg;
}

void print_direction_table(const SweepResult& res) {
    std::printf("%-12s %10s %14s %14s %12s %10s\n", "parameter", "direction", "rer",
                "rer_normalized", "stderr", "samples");
    auto row = [](const DirectionResult& r) {
        std::printf("%-12s %+9.4g%% %14.6g %14.6g %12.3g %10lld\n", r.parameter.c_str(),
                    r.relative * 100.0, r.rer.mean, r.normalized, r.rer.se,
                    static_cast<long long>(r.rer.n));
    };
    for (const auto& r : res.directions) row(r);
    for (const auto& r : res.cutoff_directions) row(r);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"path-space sensitivity analysis for Langevin molecular dynamics"};
    app.require_subcommand(1);

    CommonArgs sim_args, sens_args, cut_args, obs_args, orc_args;

    auto* sim = app.add_subcommand("simulate", "run dynamics and write observables");
    add_common(sim, sim_args);

    auto* sens = app.add_subcommand(
        "sensitivity", "RER/FIM estimation along one reference trajectory");
    add_common(sens, sens_args);
    bool sens_fim = false;
    sens->add_option("--perturb", sens_args.perturb,
                     "perturbation direction name:+X% (repeatable)")
        ->take_all();
    sens->add_flag("--fim", sens_fim, "accumulate the pathwise Fisher information matrix");

    auto* cut = app.add_subcommand("cutoff-study",
                                   "RER of candidate cutoff radii against the reference");
    add_common(cut, cut_args);
    std::string rcut_list;
    cut->add_option("--rcut-list", rcut_list, "comma-separated candidate cutoffs");

    auto* obs = app.add_subcommand(
        "observables", "reference vs perturbed simulations compared through observables");
    add_common(obs, obs_args);
    obs->add_option("--perturb", obs_args.perturb,
                    "perturbation direction name:+X% (repeatable)")
        ->take_all();

    auto* orc = app.add_subcommand("oracle", "analytic self-checks (OU well, inverse "
                                             "temperature, free-particle diffusion)");
    add_common(orc, orc_args);

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) {
            ExperimentConfig cfg = resolve_config(sim_args);
            SimulateResult res = run_simulate(cfg);
            std::printf("simulate: %lld production steps, %lld force evaluations\n",
                        static_cast<long long>(res.summary.production_steps),
                        static_cast<long long>(res.summary.force_evals));
            std::printf("mean potential %.6g, mean kinetic %.6g\n", res.mean_potential,
                        res.mean_kinetic);
            if (!res.pressure.p.empty())
                std::printf("pressure mean %.6g std %.6g\n", res.pressure.mean(),
                            res.pressure.std_dev());
            if (res.diffusion)
                std::printf("diffusion %.6g (fit window %.4g..%.4g)\n", res.diffusion->d,
                            res.diffusion->t_lo, res.diffusion->t_hi);
        } else if (sens->parsed()) {
            ExperimentConfig cfg = resolve_config(sens_args);
            if (sens_fim) cfg.fim = true;
            SweepResult res = run_sensitivity(cfg);
            std::filesystem::create_directories(cfg.out_dir);
            write_rer_csv(cfg.out_dir + "/rer.csv", res);
            if (res.fim) {
                write_fim_csv(cfg.out_dir + "/fim.csv", res);
                write_fim_eig_csv(cfg.out_dir + "/fim_eig.csv", res);
                write_asymmetry_csv(cfg.out_dir + "/asymmetry.csv", res);
            }
            print_direction_table(res);
            std::printf("trajectory steps %lld, force evals %lld, perturbed evals %lld\n",
                        static_cast<long long>(res.trajectory_steps),
                        static_cast<long long>(res.force_evals),
                        static_cast<long long>(res.perturbed_evals));
        } else if (cut->parsed()) {
            ExperimentConfig cfg = resolve_config(cut_args);
            if (!rcut_list.empty())
                cfg.cutoff_candidates = cfg_detail::parse_list("rcut-list", rcut_list);
            CutoffStudyResult res = run_cutoff_study(cfg);
            std::printf("%10s %14s %16s %12s\n", "rcut", "rer", "rer_per_particle", "stderr");
            for (const auto& row : res.rows)
                std::printf("%10.4g %14.6g %16.6g %12.3g\n", row.rcut, row.rer.mean,
                            row.per_particle, row.rer.se);
        } else if (obs->parsed()) {
            ExperimentConfig cfg = resolve_config(obs_args);
            CompareResult res = run_observable_compare(cfg);
            for (const auto& row : res.rows)
                std::printf("%-40s %14.6g\n", row.metric.c_str(), row.value);
        } else if (orc->parsed()) {
            ExperimentConfig cfg;  // oracle ignores model configuration
            if (orc_args.seed >= 0) cfg.seed = static_cast<std::uint64_t>(orc_args.seed);
            OracleReport rep = run_oracle_suite(cfg.seed);
            for (const auto& c : rep.checks)
                std::printf("%-32s measured %12.6g target %12.6g tol %10.3g  %s\n",
                            c.name.c_str(), c.measured, c.target, c.tolerance,
                            c.pass ? "PASS" : "FAIL");
            if (!rep.all_pass) {
                std::fprintf(stderr, "oracle: analytic checks failed\n");
                return exit_oracle_failure;
            }
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return exit_config_error;
    } catch (const DivergenceError& e) {
        std::fprintf(stderr,
                     "numerical divergence: %s (max force %.4g, min pair distance %.4g)\n",
                     e.what(), e.max_force, e.min_pair_distance);
        return exit_divergence;
    }
    return exit_ok;
}
