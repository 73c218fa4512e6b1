#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pathsens/errors.hpp"
#include "pathsens/forcefield.hpp"
#include "pathsens/jacobi_eigen.hpp"
#include "pathsens/langevin.hpp"
#include "pathsens/params.hpp"
#include "pathsens/vec3.hpp"

namespace pathsens {

// Inverse diffusion (sigma sigma^T)^{-1} restricted to the momentum block;
// diagonal with per-atom entry beta / (2 gamma_i).
struct InverseDiffusion {
    std::vector<double> d;  // per atom

    static InverseDiffusion from(double beta, const LangevinConfig& cfg, std::int32_t n_atoms) {
        InverseDiffusion out;
        out.d.resize(n_atoms);
        for (std::int32_t i = 0; i < n_atoms; ++i) {
            const double g = cfg.gamma_of(i);
            if (!(g > 0.0))
                throw ConfigError("sensitivity estimators require gamma > 0 (invertible noise)");
            out.d[i] = beta / (2.0 * g);
        }
        return out;
    }

    // x^T (sigma sigma^T)^{-1} y over the momentum block
    double quad(const std::vector<Vec3>& x, const std::vector<Vec3>& y) const {
        if (x.size() != d.size() || y.size() != d.size())
            throw ContractError("InverseDiffusion: dimension mismatch");
        double s = 0.0;
        for (std::size_t i = 0; i < d.size(); ++i) s += d[i] * dot(x[i], y[i]);
        return s;
    }
};

// Mean and standard error of a correlated scalar series. The error comes
// from Flyvbjerg-Petersen pairwise blocking, carried to the plateau.
class ScalarAccumulator {
public:
    void add(double x) {
        samples_.push_back(x);
        sum_ += x;
        sq_sum_ += x * x;
    }

    void merge(const ScalarAccumulator& o) {
        samples_.insert(samples_.end(), o.samples_.begin(), o.samples_.end());
        sum_ += o.sum_;
        sq_sum_ += o.sq_sum_;
    }

    std::int64_t count() const { return static_cast<std::int64_t>(samples_.size()); }
    double sum() const { return sum_; }
    double sq_sum() const { return sq_sum_; }
    double mean() const { return samples_.empty() ? 0.0 : sum_ / samples_.size(); }

    double stderr_blocked() const {
        std::vector<double> b = samples_;
        double best = naive_se(b);
        while (b.size() >= 32) {
            std::vector<double> half(b.size() / 2);
            for (std::size_t i = 0; i < half.size(); ++i) half[i] = 0.5 * (b[2 * i] + b[2 * i + 1]);
            b.swap(half);
            best = std::max(best, naive_se(b));
        }
        return best;
    }

private:
    static double naive_se(const std::vector<double>& v) {
        const std::size_t n = v.size();
        if (n < 2) return 0.0;
        double m = 0.0;
        for (double x : v) m += x;
        m /= n;
        double var = 0.0;
        for (double x : v) var += (x - m) * (x - m);
        var /= (n - 1);
        return std::sqrt(var / n);
    }

    std::vector<double> samples_;
    double sum_ = 0.0;
    double sq_sum_ = 0.0;
};

struct EstimateWithError {
    double mean = 0.0;
    double se = 0.0;
    std::int64_t n = 0;
};

// --- continuous-time estimators --------------------------------------------

// One RER sample: (1/2) (F_pert - F_ref)^T (sigma sigma^T)^{-1} (F_pert - F_ref).
inline double rer_sample(const std::vector<Vec3>& f_ref, const std::vector<Vec3>& f_pert,
                         const InverseDiffusion& inv) {
    if (f_ref.size() != f_pert.size()) throw ContractError("rer_sample: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < f_ref.size(); ++i) {
        const Vec3 df = f_pert[i] - f_ref[i];
        s += inv.d[i] * norm2(df);
    }
    return 0.5 * s;
}

inline void rer_accumulate(ScalarAccumulator& acc, const std::vector<Vec3>& f_ref,
                           const std::vector<Vec3>& f_pert, const InverseDiffusion& inv) {
    acc.add(rer_sample(f_ref, f_pert, inv));
}

// Running K x K sum of J^T (sigma sigma^T)^{-1} J.
class FimAccumulator {
public:
    explicit FimAccumulator(std::size_t k = 0) { reset(k); }

    void reset(std::size_t k) {
        k_ = k;
        sum_.assign(k * k, 0.0);
        sq_sum_.assign(k * k, 0.0);
        n_ = 0;
        trace_series_ = ScalarAccumulator{};
    }

    std::size_t dim() const { return k_; }
    std::int64_t count() const { return n_; }

    void add(const ParamJacobian& jac, const InverseDiffusion& inv) {
        if (jac.n_params != k_) throw ContractError("fim_accumulate: dimension mismatch");
        if (static_cast<std::size_t>(jac.n_atoms) != inv.d.size())
            throw ContractError("fim_accumulate: atom count mismatch");
        std::vector<double> g(k_ * k_, 0.0);
        for (std::int32_t atom = 0; atom < jac.n_atoms; ++atom) {
            const double w = inv.d[atom];
            for (int c = 0; c < 3; ++c) {
                const double* row = jac.m.data() + (3 * static_cast<std::size_t>(atom) + c) * k_;
                for (std::size_t a = 0; a < k_; ++a) {
                    if (row[a] == 0.0) continue;
                    const double wa = w * row[a];
                    for (std::size_t b = a; b < k_; ++b) g[a * k_ + b] += wa * row[b];
                }
            }
        }
        double tr = 0.0;
        for (std::size_t a = 0; a < k_; ++a) {
            for (std::size_t b = a; b < k_; ++b) {
                const double v = g[a * k_ + b];
                sum_[a * k_ + b] += v;
                sq_sum_[a * k_ + b] += v * v;
                if (b != a) {
                    sum_[b * k_ + a] += v;
                    sq_sum_[b * k_ + a] += v * v;
                }
            }
            tr += g[a * k_ + a];
        }
        trace_series_.add(tr);
        ++n_;
    }

    void merge(const FimAccumulator& o) {
        if (o.k_ != k_) throw ContractError("FimAccumulator::merge: dimension mismatch");
        for (std::size_t i = 0; i < sum_.size(); ++i) {
            sum_[i] += o.sum_[i];
            sq_sum_[i] += o.sq_sum_[i];
        }
        trace_series_.merge(o.trace_series_);
        n_ += o.n_;
    }

    std::vector<double> mean() const {
        std::vector<double> m(sum_);
        if (n_ > 0)
            for (double& v : m) v /= n_;
        return m;
    }

    // Entrywise standard error, inflated by the trace autocorrelation factor
    // obtained from blocking (samples along one trajectory are correlated).
    std::vector<double> stderr_matrix() const {
        std::vector<double> se(k_ * k_, 0.0);
        if (n_ < 2) return se;
        const double se_naive_tr = trace_naive_se();
        const double infl = se_naive_tr > 0.0 ? trace_series_.stderr_blocked() / se_naive_tr : 1.0;
        for (std::size_t i = 0; i < se.size(); ++i) {
            const double m = sum_[i] / n_;
            const double var = std::max(0.0, sq_sum_[i] / n_ - m * m);
            se[i] = std::sqrt(var / n_) * infl;
        }
        return se;
    }

private:
    double trace_naive_se() const {
        if (n_ < 2) return 0.0;
        const double m = trace_series_.sum() / n_;
        const double var = std::max(0.0, trace_series_.sq_sum() / n_ - m * m);
        return std::sqrt(var / n_);
    }

    std::size_t k_ = 0;
    std::vector<double> sum_, sq_sum_;
    ScalarAccumulator trace_series_;
    std::int64_t n_ = 0;
};

inline void fim_accumulate(FimAccumulator& acc, const ParamJacobian& jac,
                           const InverseDiffusion& inv) {
    acc.add(jac, inv);
}

// RER predicted from the FIM: (1/2) eps0^T F eps0.
inline double fim_quadratic_rer(const std::vector<double>& fim, std::size_t k,
                                const std::vector<double>& eps0) {
    if (fim.size() != k * k || eps0.size() != k)
        throw ContractError("fim_quadratic_rer: dimension mismatch");
    double s = 0.0;
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < k; ++b) s += eps0[a] * fim[a * k + b] * eps0[b];
    return 0.5 * s;
}

// Logarithmic-scale FIM: (F_log)_ij = theta_i theta_j F_ij.
inline std::vector<double> log_scale_fim(const std::vector<double>& fim, std::size_t k,
                                         const std::vector<double>& theta) {
    if (fim.size() != k * k || theta.size() != k)
        throw ContractError("log_scale_fim: dimension mismatch");
    for (double t : theta)
        if (!(t > 0.0)) throw ConfigError("log_scale_fim: theta must be strictly positive");
    std::vector<double> out(k * k);
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = 0; b < k; ++b) out[a * k + b] = theta[a] * theta[b] * fim[a * k + b];
    return out;
}

// --- inverse-temperature perturbation ---------------------------------------

// Momentum-only RER for a beta perturbation:
//   (eps_beta^2 / 8) E[ p^T M^-1 sigma sigma^T M^-1 p ].
// One sample of the expectation from one momentum configuration:
inline double inverse_temp_momentum_sample(const std::vector<Vec3>& p,
                                           const std::vector<double>& masses,
                                           const std::vector<double>& sigma2) {
    if (p.size() != masses.size() || p.size() != sigma2.size())
        throw ContractError("inverse_temp: dimension mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        s += sigma2[i] * norm2(p[i]) / (masses[i] * masses[i]);
    return s;
}

inline double inverse_temp_rer(double eps_beta, double momentum_average) {
    return eps_beta * eps_beta / 8.0 * momentum_average;
}

// Equilibrium closed forms (scalar mass m, scalar sigma):
//   RER = eps_beta^2 sigma^2 d N / (8 beta m),  F_log-beta = gamma d N / (2 m).
inline double inverse_temp_rer_closed(double eps_beta, double sigma2, int dim, int n_atoms,
                                      double beta, double mass) {
    return eps_beta * eps_beta * sigma2 * dim * n_atoms / (8.0 * beta * mass);
}

inline double log_beta_fim_closed(double gamma, double mass, int dim, int n_atoms) {
    return gamma * dim * n_atoms / (2.0 * mass);
}

// --- discrete-time (BBK chain) estimators -----------------------------------

// Per-step relative entropy between BBK transition kernels, by the chain rule
// over the two conditionally Gaussian half-kicks (the implicit-solve factor
// scales mean and noise identically and cancels):
//   (dt/4) [ dF(q_i)^T S^-1 dF(q_i) + dF(q_{i+1})^T S^-1 dF(q_{i+1}) ].
inline void discrete_rer_accumulate(ScalarAccumulator& acc, const std::vector<Vec3>& df_at_qi,
                                    const std::vector<Vec3>& df_at_qip1, double dt,
                                    const InverseDiffusion& inv) {
    if (df_at_qi.size() != df_at_qip1.size())
        throw ContractError("discrete_rer: dimension mismatch");
    const double xi = inv.quad(df_at_qi, df_at_qi);
    const double xj = inv.quad(df_at_qip1, df_at_qip1);
    acc.add(0.25 * dt * (xi + xj));
}

// Discrete-time pathwise FIM increment: both half-kicks contribute
// (dt/2) J^T S^-1 J at their respective configurations. Normalizing the
// accumulated mean by 1/dt recovers the continuous-time estimand as dt -> 0.
inline void discrete_fim_accumulate(FimAccumulator& acc, const ParamJacobian& j_at_qi,
                                    const ParamJacobian& j_at_qip1, double dt,
                                    const InverseDiffusion& inv) {
    ParamJacobian scaled = j_at_qi;
    const double w = std::sqrt(0.5 * dt);  // (dt/2) J^T S J == (w J)^T S (w J)
    for (double& v : scaled.m) v *= w;
    acc.add(scaled, inv);
    scaled = j_at_qip1;
    for (double& v : scaled.m) v *= w;
    acc.add(scaled, inv);
}

// --- bounds and reports ------------------------------------------------------

// Pinsker bound |E'[g] - E[g]| <= g_sup sqrt(2 T rer), linear-in-time term.
inline double pinsker_bound(double rer, double time_window, double g_sup) {
    if (rer < 0.0 || time_window < 0.0 || g_sup < 0.0)
        throw ConfigError("pinsker_bound: inputs must be non-negative");
    return g_sup * std::sqrt(2.0 * time_window * rer);
}

struct FimReport {
    std::size_t k = 0;
    std::vector<std::string> names;
    std::vector<double> fim;       // K x K mean
    std::vector<double> log_fim;   // theta-scaled
    std::vector<double> stderr_m;  // entrywise
    EigenDecomposition eigen;
    std::int64_t n_samples = 0;

    // PSD to tolerance: min eigenvalue >= -1e-8 * max eigenvalue.
    bool positive_semidefinite() const {
        if (eigen.values.empty()) return true;
        return eigen.values.back() >= -1e-8 * std::max(eigen.values.front(), 0.0);
    }
};

inline FimReport make_fim_report(const FimAccumulator& acc, const std::vector<std::string>& names,
                                 const std::vector<double>& theta) {
    FimReport rep;
    rep.k = acc.dim();
    rep.names = names;
    rep.fim = acc.mean();
    rep.log_fim = log_scale_fim(rep.fim, rep.k, theta);
    rep.stderr_m = acc.stderr_matrix();
    rep.eigen = jacobi_eigen(rep.fim, rep.k);
    rep.n_samples = acc.count();
    return rep;
}

// Third-order asymmetry diagnostic for a +/- perturbation pair at equal |eps0|.
struct AsymmetryReport {
    double odd = 0.0;        // (rer+ - rer-)/2, the third-order contribution
    double odd_se = 0.0;
    double even_residual = 0.0;  // (rer+ + rer-)/2 - fim quadratic
    bool significant = false;    // odd term resolved above its standard error
};

inline AsymmetryReport asymmetry_diagnostic(const EstimateWithError& rer_plus,
                                            const EstimateWithError& rer_minus,
                                            double fim_quadratic) {
    AsymmetryReport rep;
    rep.odd = 0.5 * (rer_plus.mean - rer_minus.mean);
    rep.odd_se = 0.5 * std::sqrt(rer_plus.se * rer_plus.se + rer_minus.se * rer_minus.se);
    rep.even_residual = 0.5 * (rer_plus.mean + rer_minus.mean) - fim_quadratic;
    rep.significant = std::abs(rep.odd) > rep.odd_se && rep.odd_se > 0.0;
    return rep;
}

// --- trajectory sinks --------------------------------------------------------

// One perturbation direction: parameter index, absolute delta and the
// perturbed parameter vector it generates.
struct PerturbationDirection {
    std::string label;
    std::size_t param_index = 0;
    double delta = 0.0;          // absolute shift of theta_i
    double relative = 0.0;       // requested relative magnitude (for reporting)
    ParameterVector perturbed;   // theta + eps0
    bool proportional_to_total_force = false;  // dF = (delta/theta_i) F exactly
};

// Per-direction force field built once and reused at every sample.
class DirectionEvaluator {
public:
    DirectionEvaluator(const Topology& topo, const PerturbationDirection& dir)
        : ff_(topo, dir.perturbed) {
        ff_.set_molecular_virial(false);
    }
    const ForceField& field() const { return ff_; }

private:
    ForceField ff_;
};

inline PerturbationDirection make_direction(const ParameterVector& params,
                                            const std::string& name, double relative,
                                            const Topology& topo) {
    PerturbationDirection dir;
    dir.param_index = params.index_of(name);
    dir.relative = relative;
    dir.delta = params.value(dir.param_index) * relative;
    if (dir.delta == 0.0) throw ConfigError("perturbation of " + name + " is zero");
    dir.label = name + (relative >= 0 ? "+" : "") + std::to_string(relative * 100.0) + "%";
    dir.perturbed = params.with_delta(dir.param_index, dir.delta);
    const ParamKind kind = params[dir.param_index].kind;
    // For a single-class pure LJ fluid the epsilon direction rescales the
    // whole force field; same for the oracle spring constant.
    dir.proportional_to_total_force =
        (kind == ParamKind::spring_k) ||
        (kind == ParamKind::lj_epsilon && topo.kind == ModelKind::lj_pairs &&
         topo.lj_classes.size() == 1 && topo.bonds.empty() && topo.angles.empty());
    return dir;
}

// Accumulates RER per direction and optionally the FIM along the reference
// trajectory. Perturbed forces are evaluated at reference configurations
// only; no perturbed trajectory is ever generated.
class SensitivitySink : public Sink {
public:
    SensitivitySink(std::vector<PerturbationDirection> dirs, InverseDiffusion inv,
                    std::int64_t stride, bool with_fim)
        : dirs_(std::move(dirs)), inv_(std::move(inv)), stride_(std::max<std::int64_t>(1, stride)),
          with_fim_(with_fim) {
        rer_.resize(dirs_.size());
    }

    void on_step(const StepContext& ctx) override {
        if (ctx.step % stride_ != 0) return;
        if (eval_.empty())
            for (const auto& dir : dirs_)
                eval_.emplace_back(ctx.engine.topology(), dir);
        const auto& f_ref = ctx.engine.current().forces;
        for (std::size_t d = 0; d < dirs_.size(); ++d) {
            const auto& dir = dirs_[d];
            if (dir.proportional_to_total_force) {
                const double frac =
                    dir.delta / ctx.engine.parameters().value(dir.param_index);
                double s = 0.0;
                for (std::size_t i = 0; i < f_ref.size(); ++i)
                    s += inv_.d[i] * norm2(f_ref[i]);
                rer_[d].add(0.5 * frac * frac * s);
            } else {
                const ForceEvaluation pert = ctx.engine.evaluate_with(eval_[d].field(), ctx.state);
                rer_accumulate(rer_[d], f_ref, pert.forces, inv_);
            }
        }
        if (with_fim_) {
            const ParamJacobian& jac = ctx.engine.jacobian(ctx.state);
            if (fim_.dim() == 0) fim_.reset(jac.n_params);
            fim_accumulate(fim_, jac, inv_);
        }
    }

    const std::vector<PerturbationDirection>& directions() const { return dirs_; }

    EstimateWithError rer_estimate(std::size_t d) const {
        return {rer_[d].mean(), rer_[d].stderr_blocked(), rer_[d].count()};
    }

    const FimAccumulator& fim() const { return fim_; }
    const InverseDiffusion& inverse_diffusion() const { return inv_; }

    void merge(const SensitivitySink& o) {
        if (o.dirs_.size() != dirs_.size()) throw ContractError("SensitivitySink merge mismatch");
        for (std::size_t d = 0; d < rer_.size(); ++d) rer_[d].merge(o.rer_[d]);
        if (with_fim_ && o.fim_.dim() > 0) {
            if (fim_.dim() == 0) fim_.reset(o.fim_.dim());
            fim_.merge(o.fim_);
        }
    }

private:
    std::vector<PerturbationDirection> dirs_;
    InverseDiffusion inv_;
    std::int64_t stride_;
    bool with_fim_;
    std::vector<ScalarAccumulator> rer_;
    std::vector<DirectionEvaluator> eval_;
    FimAccumulator fim_;
};

// Discrete-time estimators along the BBK chain. Samples step pairs
// (q_i, q_{i+1}): at stride boundaries it evaluates the force difference at
// both ends of the step.
class DiscreteSensitivitySink : public Sink {
public:
    DiscreteSensitivitySink(PerturbationDirection dir, InverseDiffusion inv, double dt,
                            std::int64_t stride, bool with_fim)
        : dir_(std::move(dir)), inv_(std::move(inv)), dt_(dt),
          stride_(std::max<std::int64_t>(1, stride)), with_fim_(with_fim) {}

    void on_step(const StepContext& ctx) override {
        const bool open = ctx.step % stride_ == 0;
        const bool close = pending_ && ctx.step == pending_step_ + 1;
        if (!open && !close) return;
        std::vector<Vec3> df = delta_forces(ctx);
        std::optional<ParamJacobian> jac;
        if (with_fim_) jac = ctx.engine.jacobian(ctx.state);
        if (close) {
            discrete_rer_accumulate(rer_, pending_df_, df, dt_, inv_);
            if (with_fim_) {
                if (fim_.dim() == 0) fim_.reset(pending_jac_->n_params);
                discrete_fim_accumulate(fim_, *pending_jac_, *jac, dt_, inv_);
            }
            pending_ = false;
        }
        if (open) {
            pending_df_ = std::move(df);
            pending_jac_ = std::move(jac);
            pending_step_ = ctx.step;
            pending_ = true;
        }
    }

    // Mean per-step KL; divide by dt for the rate.
    EstimateWithError per_step_kl() const {
        return {rer_.mean(), rer_.stderr_blocked(), rer_.count()};
    }
    EstimateWithError rate_estimate() const {
        auto e = per_step_kl();
        return {e.mean / dt_, e.se / dt_, e.n};
    }
    // FIM of the chain normalized by 1/dt (continuous-time units).
    std::vector<double> fim_rate_mean() const {
        std::vector<double> m = fim_.mean();
        for (double& v : m) v *= 2.0 / dt_;  // two half-kick samples per step pair
        return m;
    }
    std::size_t fim_dim() const { return fim_.dim(); }

    void merge(const DiscreteSensitivitySink& o) {
        rer_.merge(o.rer_);
        if (with_fim_ && o.fim_.dim() > 0) {
            if (fim_.dim() == 0) fim_.reset(o.fim_.dim());
            fim_.merge(o.fim_);
        }
    }

private:
    std::vector<Vec3> delta_forces(const StepContext& ctx) {
        const auto& f_ref = ctx.engine.current().forces;
        std::vector<Vec3> df(f_ref.size());
        if (dir_.proportional_to_total_force) {
            const double frac = dir_.delta / ctx.engine.parameters().value(dir_.param_index);
            for (std::size_t i = 0; i < df.size(); ++i) df[i] = f_ref[i] * frac;
        } else {
            if (!eval_) eval_.emplace(ctx.engine.topology(), dir_);
            const ForceEvaluation pert = ctx.engine.evaluate_with(eval_->field(), ctx.state);
            for (std::size_t i = 0; i < df.size(); ++i) df[i] = pert.forces[i] - f_ref[i];
        }
        return df;
    }

    PerturbationDirection dir_;
    InverseDiffusion inv_;
    double dt_;
    std::int64_t stride_;
    bool with_fim_;
    std::optional<DirectionEvaluator> eval_;
    ScalarAccumulator rer_;
    FimAccumulator fim_;
    bool pending_ = false;
    std::int64_t pending_step_ = -1;
    std::vector<Vec3> pending_df_;
    std::optional<ParamJacobian> pending_jac_;
};

// RER of cutoff-radius candidates against the model's reference cutoff,
// evaluated by shell sums over a direct pair search.
class CutoffSink : public Sink {
public:
    CutoffSink(std::vector<double> candidates, InverseDiffusion inv, std::int64_t stride)
        : candidates_(std::move(candidates)), inv_(std::move(inv)),
          stride_(std::max<std::int64_t>(1, stride)) {
        rer_.resize(candidates_.size());
    }

    void on_step(const StepContext& ctx) override {
        if (ctx.step % stride_ != 0) return;
        const auto deltas = ctx.engine.rcut_delta_forces(ctx.state, candidates_);
        for (std::size_t c = 0; c < candidates_.size(); ++c) {
            const double x = inv_.quad(deltas[c], deltas[c]);
            rer_[c].add(0.5 * x);
        }
    }

    const std::vector<double>& candidates() const { return candidates_; }
    EstimateWithError rer_estimate(std::size_t c) const {
        return {rer_[c].mean(), rer_[c].stderr_blocked(), rer_[c].count()};
    }
    void merge(const CutoffSink& o) {
        for (std::size_t c = 0; c < rer_.size(); ++c) rer_[c].merge(o.rer_[c]);
    }

private:
    std::vector<double> candidates_;
    InverseDiffusion inv_;
    std::int64_t stride_;
    std::vector<ScalarAccumulator> rer_;
};

// Momentum-function sink for inverse-temperature sensitivity.
class InverseTempSink : public Sink {
public:
    InverseTempSink(std::vector<double> sigma2, std::int64_t stride)
        : sigma2_(std::move(sigma2)), stride_(std::max<std::int64_t>(1, stride)) {}

    void on_step(const StepContext& ctx) override {
        if (ctx.step % stride_ != 0) return;
        acc_.add(inverse_temp_momentum_sample(ctx.state.p, ctx.state.masses, sigma2_));
    }

    EstimateWithError momentum_average() const {
        return {acc_.mean(), acc_.stderr_blocked(), acc_.count()};
    }
    void merge(const InverseTempSink& o) { acc_.merge(o.acc_); }

private:
    std::vector<double> sigma2_;
    std::int64_t stride_;
    ScalarAccumulator acc_;
};

} // namespace pathsens
