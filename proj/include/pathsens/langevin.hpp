#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pathsens/errors.hpp"
#include "pathsens/forcefield.hpp"
#include "pathsens/pairlist.hpp"
#include "pathsens/rng.hpp"
#include "pathsens/state.hpp"
#include "pathsens/topology.hpp"

namespace pathsens {

// Noise amplitude from the fluctuation-dissipation relation,
// sigma^2 = 2 gamma / beta (diagonal case).
inline double fluctuation_dissipation(double beta, double gamma) {
    if (!(beta > 0.0)) throw ConfigError("beta must be positive");
    if (gamma < 0.0) throw ConfigError("gamma must be non-negative");
    return std::sqrt(2.0 * gamma / beta);
}

struct LangevinConfig {
    double beta = 1.0;
    std::vector<double> gamma;  // per atom
    double dt = 1e-3;
    std::int64_t n_steps = 0;
    std::int64_t n_equil = 0;
    std::uint64_t seed = 0;
    double alpha = 0.0;         // constant non-gradient force along y, 0 disables
    bool noise = true;          // off gives the deterministic (gamma-damped) flow

    double gamma_of(std::int32_t atom) const {
        return gamma.size() == 1 ? gamma[0] : gamma[atom];
    }
    void validate(std::int32_t n_atoms) const {
        if (!(beta > 0.0)) throw ConfigError("dynamics.beta must be positive");
        if (!(dt > 0.0)) throw ConfigError("dynamics.dt must be positive");
        if (gamma.empty() ||
            (gamma.size() != 1 && gamma.size() != static_cast<std::size_t>(n_atoms)))
            throw ConfigError("dynamics.gamma must be scalar or per-atom");
        for (double g : gamma)
            if (g < 0.0) throw ConfigError("dynamics.gamma must be non-negative");
    }
};

// Owns the force field, the neighbor list and the per-step caches. All
// sensitivity machinery obtains reference forces, perturbed forces and
// Jacobians through this one interface, which also counts evaluations
// (the sweep cost model is asserted against these counters).
class ForceEngine {
public:
    ForceEngine(const Topology& topo, const ParameterVector& params, double skin = 0.0)
        : topo_(&topo), ff_(topo, params), skin_(skin) {
        if (topo.kind == ModelKind::lj_pairs) {
            if (skin_ <= 0.0) skin_ = 0.1 * ff_.max_rcut();
            pairs_.configure(ff_.max_rcut(), skin_);
        }
    }

    const Topology& topology() const { return *topo_; }
    const ForceField& field() const { return ff_; }
    const ParameterVector& parameters() const { return ff_.parameters(); }
    void set_molecular_virial(bool on) { ff_.set_molecular_virial(on); }

    // Recompute forces at the state's positions; rebuilds the pair list when
    // the displacement criterion triggers.
    void refresh(const SystemState& state) {
        if (topo_->kind == ModelKind::lj_pairs && pairs_.needs_rebuild(state.q, state.box))
            pairs_.build(state.q, state.box, *topo_);
        current_ = ff_.evaluate(state.q, state.box, &pairs_);
        jacobian_.reset();
        ++n_full_evals_;
    }

    const ForceEvaluation& current() const { return current_; }

    // Force evaluation with a different parameter vector at the same
    // configuration (reuses the pair list; never advances the trajectory).
    ForceEvaluation perturbed(const ParameterVector& params, const SystemState& state) {
        ForceField ff(*topo_, params);
        ff.set_molecular_virial(false);
        return evaluate_with(ff, state);
    }

    // Same, with a caller-owned (typically cached) force field.
    ForceEvaluation evaluate_with(const ForceField& ff, const SystemState& state) {
        if (topo_->kind == ModelKind::lj_pairs && ff.max_rcut() > pairs_.search_radius())
            throw ConfigError("perturbed cutoff exceeds the pair search radius");
        ++n_perturbed_evals_;
        return ff.evaluate(state.q, state.box, &pairs_);
    }

    const ParamJacobian& jacobian(const SystemState& state) {
        if (!jacobian_) {
            jacobian_ = ff_.evaluate_jacobian(state.q, state.box, &pairs_);
            ++n_jacobian_evals_;
        }
        return *jacobian_;
    }

    std::vector<std::vector<Vec3>> rcut_delta_forces(const SystemState& state,
                                                     const std::vector<double>& candidates) {
        n_perturbed_evals_ += static_cast<std::int64_t>(candidates.size());
        return ff_.rcut_delta_forces(state.q, state.box, candidates);
    }

    std::int64_t full_evals() const { return n_full_evals_; }
    std::int64_t perturbed_evals() const { return n_perturbed_evals_; }
    std::int64_t jacobian_evals() const { return n_jacobian_evals_; }
    std::int64_t pairlist_rebuilds() const { return pairs_.rebuild_count(); }

private:
    const Topology* topo_;
    ForceField ff_;
    double skin_;
    PairList pairs_;
    ForceEvaluation current_;
    std::optional<ParamJacobian> jacobian_;
    std::int64_t n_full_evals_ = 0;
    std::int64_t n_perturbed_evals_ = 0;
    std::int64_t n_jacobian_evals_ = 0;
};

// One BBK step. Explicit friction/noise half-kick, free drift, implicit
// half-kick solved in closed form (friction is diagonal):
//   p1 = (p_half + F(q1) dt/2 + sigma dW2) / (1 + gamma dt / 2m).
// The constant non-gradient force (0, alpha, 0) is applied here, after the
// conservative forces, so force differences seen by the sensitivity
// estimators are untouched by it.
inline void bbk_step(SystemState& state, ForceEngine& engine, const LangevinConfig& cfg,
                     std::int64_t step_index) {
    const std::int32_t n = state.n();
    const double dt = cfg.dt;
    const double half_dt = 0.5 * dt;
    const double noise_scale = cfg.noise ? std::sqrt(half_dt) : 0.0;
    const std::uint64_t noise_step =
        static_cast<std::uint64_t>(step_index) + 1;  // step 0 reserved for init draws

    const std::vector<Vec3>& f0 = engine.current().forces;
    for (std::int32_t i = 0; i < n; ++i) {
        const double m = state.masses[i];
        const double g = cfg.gamma_of(i);
        const double sig = fluctuation_dissipation(cfg.beta, g);
        Vec3 kick = f0[i];
        kick.y += cfg.alpha;
        Vec3 p_half = state.p[i] + kick * half_dt - state.p[i] * (g / m * half_dt);
        if (noise_scale > 0.0 && sig > 0.0) {
            const Vec3 w = rng::gaussian3(cfg.seed, noise_step, i, rng::stream_kick1);
            p_half += w * (sig * noise_scale);
        }
        state.p[i] = p_half;  // holds p_{i+1/2} until the second half-kick
        state.q[i] += p_half * (dt / m);
        state.wrap_atom(i);
    }

    engine.refresh(state);

    const std::vector<Vec3>& f1 = engine.current().forces;
    bool ok = true;
    for (std::int32_t i = 0; i < n; ++i) {
        const double m = state.masses[i];
        const double g = cfg.gamma_of(i);
        const double sig = fluctuation_dissipation(cfg.beta, g);
        Vec3 kick = f1[i];
        kick.y += cfg.alpha;
        Vec3 num = state.p[i] + kick * half_dt;
        if (noise_scale > 0.0 && sig > 0.0) {
            const Vec3 w = rng::gaussian3(cfg.seed, noise_step, i, rng::stream_kick2);
            num += w * (sig * noise_scale);
        }
        state.p[i] = num * (1.0 / (1.0 + g * half_dt / m));
        ok = ok && finite(state.p[i]) && finite(state.q[i]);
    }
    state.t += dt;

    if (!ok) {
        double fmax = 0.0;
        for (const auto& f : f1) fmax = std::max(fmax, norm(f));
        throw DivergenceError("non-finite state at step " + std::to_string(step_index),
                              static_cast<long>(step_index), fmax,
                              std::sqrt(engine.current().min_pair_r2));
    }
}

// Trajectory sinks observe production steps; they must be mergeable across
// trajectory segments for multi-seed runs.
struct StepContext {
    std::int64_t step;  // production step index, 0-based
    SystemState& state;
    ForceEngine& engine;
    const LangevinConfig& cfg;
};

class Sink {
public:
    virtual ~Sink() = default;
    virtual void on_step(const StepContext& ctx) = 0;
};

struct RunSummary {
    std::int64_t equil_steps = 0;
    std::int64_t production_steps = 0;
    std::int64_t force_evals = 0;
    std::int64_t perturbed_evals = 0;
    double final_time = 0.0;
};

// n_equil discarded steps, then n_steps production steps with sinks invoked
// after every step. Divergence aborts with diagnostics.
inline RunSummary run_trajectory(SystemState& state, ForceEngine& engine,
                                 const LangevinConfig& cfg,
                                 const std::vector<Sink*>& sinks) {
    cfg.validate(state.n());
    engine.refresh(state);
    for (std::int64_t s = 0; s < cfg.n_equil; ++s) bbk_step(state, engine, cfg, s);
    for (std::int64_t s = 0; s < cfg.n_steps; ++s) {
        bbk_step(state, engine, cfg, cfg.n_equil + s);
        StepContext ctx{s, state, engine, cfg};
        for (Sink* sink : sinks) sink->on_step(ctx);
    }
    RunSummary sum;
    sum.equil_steps = cfg.n_equil;
    sum.production_steps = cfg.n_steps;
    sum.force_evals = engine.full_evals();
    sum.perturbed_evals = engine.perturbed_evals();
    sum.final_time = state.t;
    return sum;
}

// --- initial conditions ---------------------------------------------------

// Maxwell-Boltzmann momenta at inverse temperature beta, center of mass at
// rest afterwards.
inline void init_momenta(SystemState& state, double beta, std::uint64_t seed) {
    for (std::int32_t i = 0; i < state.n(); ++i) {
        const double sp = std::sqrt(state.masses[i] / beta);
        state.p[i] = rng::gaussian3(seed, 0, i, rng::stream_init_momentum) * sp;
    }
    state.zero_total_momentum();
}

// fcc lattice filled with n_atoms sites (evenly strided subset when 4 M^3
// does not match the atom count exactly), box edge L.
inline SystemState init_lattice_lj(const Topology& topo, double box, double beta,
                                   std::uint64_t seed) {
    if (!(box > 0.0)) throw ConfigError("init: box must be positive");
    const std::int32_t n = topo.n_atoms;
    std::int32_t cells = 1;
    while (4 * cells * cells * cells < n) ++cells;
    const std::int64_t sites = 4LL * cells * cells * cells;

    static const double basis[4][3] = {
        {0.0, 0.0, 0.0}, {0.5, 0.5, 0.0}, {0.5, 0.0, 0.5}, {0.0, 0.5, 0.5}};
    SystemState st;
    st.box = box;
    st.q.resize(n);
    st.p.assign(n, Vec3{});
    st.images.assign(n, {0, 0, 0});
    st.masses = topo.masses;
    const double a = box / cells;
    std::int32_t placed = 0;
    for (std::int64_t s = 0; s < sites && placed < n; ++s) {
        // even stride over the site enumeration keeps vacancies uniform
        if (s * n / sites == (s + 1) * n / sites) continue;
        const std::int64_t c = s / 4;
        const int b = static_cast<int>(s % 4);
        const std::int64_t cz = c % cells, cy = (c / cells) % cells, cx = c / (cells * cells);
        st.q[placed] = {(cx + basis[b][0]) * a, (cy + basis[b][1]) * a, (cz + basis[b][2]) * a};
        st.wrap_atom(placed);
        ++placed;
    }
    if (placed != n) throw ConfigError("init: fcc filling failed (density/box mismatch)");
    init_momenta(st, beta, seed);
    return st;
}

// Methane molecules on a cubic grid with ideal tetrahedral geometry.
inline SystemState init_grid_methane(const Topology& topo, double box, double beta, double r0,
                                     std::uint64_t seed) {
    if (!(box > 0.0)) throw ConfigError("init: box must be positive");
    const std::int32_t nmol = topo.n_molecules;
    std::int32_t cells = 1;
    while (cells * cells * cells < nmol) ++cells;
    const double a = box / cells;
    const double inv_sqrt3 = 1.0 / std::sqrt(3.0);
    static const double tet[4][3] = {
        {1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};

    SystemState st;
    st.box = box;
    st.q.resize(topo.n_atoms);
    st.p.assign(topo.n_atoms, Vec3{});
    st.images.assign(topo.n_atoms, {0, 0, 0});
    st.masses = topo.masses;
    std::int32_t placed = 0;
    for (std::int32_t cx = 0; cx < cells && placed < nmol; ++cx)
        for (std::int32_t cy = 0; cy < cells && placed < nmol; ++cy)
            for (std::int32_t cz = 0; cz < cells && placed < nmol; ++cz) {
                const Vec3 center{(cx + 0.5) * a, (cy + 0.5) * a, (cz + 0.5) * a};
                const std::int32_t c = 5 * placed;
                st.q[c] = center;
                for (int h = 0; h < 4; ++h) {
                    st.q[c + 1 + h] =
                        center + Vec3{tet[h][0], tet[h][1], tet[h][2]} * (r0 * inv_sqrt3);
                }
                for (int k = 0; k < 5; ++k) st.wrap_atom(c + k);
                ++placed;
            }
    if (placed != nmol) throw ConfigError("init: methane grid filling failed");
    init_momenta(st, beta, seed);
    return st;
}

// Exact Gibbs draw for the harmonic-well oracle (free boundaries).
inline SystemState init_harmonic_gibbs(const Topology& topo, double k, double beta,
                                       std::uint64_t seed) {
    SystemState st;
    st.box = 0.0;
    st.q.resize(topo.n_atoms);
    st.p.resize(topo.n_atoms);
    st.images.assign(topo.n_atoms, {0, 0, 0});
    st.masses = topo.masses;
    const double sq = std::sqrt(1.0 / (beta * k));
    for (std::int32_t i = 0; i < topo.n_atoms; ++i) {
        st.q[i] = rng::gaussian3(seed, 0, i, rng::stream_gibbs_position) * sq;
        st.p[i] = rng::gaussian3(seed, 0, i, rng::stream_init_momentum) *
                  std::sqrt(st.masses[i] / beta);
    }
    return st;
}

// Free particles started at the origin with thermal momenta.
inline SystemState init_free(const Topology& topo, double beta, std::uint64_t seed) {
    SystemState st;
    st.box = 0.0;
    st.q.assign(topo.n_atoms, Vec3{});
    st.p.resize(topo.n_atoms);
    st.images.assign(topo.n_atoms, {0, 0, 0});
    st.masses = topo.masses;
    for (std::int32_t i = 0; i < topo.n_atoms; ++i)
        st.p[i] = rng::gaussian3(seed, 0, i, rng::stream_init_momentum) *
                  std::sqrt(st.masses[i] / beta);
    return st;
}

} // namespace pathsens
