#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "pathsens/errors.hpp"
#include "pathsens/forcefield.hpp"
#include "pathsens/langevin.hpp"
#include "pathsens/pbc.hpp"
#include "pathsens/state.hpp"
#include "pathsens/topology.hpp"

namespace pathsens {

enum class ObservableMode { atomic, molecular };

// --- radial distribution function -------------------------------------------

struct RdfTable {
    double bin_width = 0.0;
    std::vector<double> r_center;
    std::vector<double> g;
};

// Pair-distance histogram normalized against the ideal gas at equal density.
// Molecular mode uses methane centers of mass. r_max may not exceed L/2.
class RdfHistogram {
public:
    RdfHistogram() = default;
    RdfHistogram(double bin_width, double r_max, ObservableMode mode)
        : bin_width_(bin_width), r_max_(r_max), mode_(mode) {
        if (!(bin_width > 0.0) || !(r_max > 0.0))
            throw ConfigError("rdf: bin_width and r_max must be positive");
        counts_.assign(static_cast<std::size_t>(std::ceil(r_max / bin_width)), 0);
    }

    void accumulate(const SystemState& state, const Topology& topo) {
        if (state.box > 0.0 && r_max_ > 0.5 * state.box + 1e-12)
            throw ConfigError("rdf: r_max exceeds box/2 (minimum image invalid)");
        const std::vector<Vec3>* pts = &state.q;
        std::vector<Vec3> com;
        if (mode_ == ObservableMode::molecular) {
            com = detail::molecule_centers(topo, state.q, state.box, state.masses);
            pts = &com;
        }
        const std::int32_t n = static_cast<std::int32_t>(pts->size());
        const double rmax2 = r_max_ * r_max_;
        const double inv_box = state.box > 0.0 ? 1.0 / state.box : 0.0;
        for (std::int32_t i = 0; i < n; ++i)
            for (std::int32_t j = i + 1; j < n; ++j) {
                const double r2 =
                    norm2(minimum_image_fast((*pts)[i] - (*pts)[j], state.box, inv_box));
                if (r2 >= rmax2) continue;
                const auto bin = static_cast<std::size_t>(std::sqrt(r2) / bin_width_);
                if (bin < counts_.size()) {
                    ++counts_[bin];
                    ++pairs_in_range_;
                }
            }
        ++n_frames_;
        n_points_ = n;
    }

    // g(r) with exact spherical-shell volumes; rho is the number density of
    // the counted points (atoms or molecules).
    RdfTable finalize(double rho) const {
        if (n_frames_ == 0) throw EstimationError("rdf: no frames accumulated");
        RdfTable t;
        t.bin_width = bin_width_;
        t.r_center.resize(counts_.size());
        t.g.resize(counts_.size());
        for (std::size_t b = 0; b < counts_.size(); ++b) {
            const double r_lo = b * bin_width_, r_hi = r_lo + bin_width_;
            t.r_center[b] = 0.5 * (r_lo + r_hi);
            const double shell =
                4.0 / 3.0 * std::numbers::pi * (r_hi * r_hi * r_hi - r_lo * r_lo * r_lo);
            const double ideal = 0.5 * n_points_ * rho * shell * n_frames_;
            t.g[b] = ideal > 0.0 ? counts_[b] / ideal : 0.0;
        }
        return t;
    }

    std::uint64_t pairs_in_range() const { return pairs_in_range_; }
    std::uint64_t total_counts() const {
        std::uint64_t s = 0;
        for (auto c : counts_) s += c;
        return s;
    }
    std::int64_t frames() const { return n_frames_; }

    void merge(const RdfHistogram& o) {
        if (o.counts_.size() != counts_.size()) throw ContractError("rdf merge: binning mismatch");
        for (std::size_t b = 0; b < counts_.size(); ++b) counts_[b] += o.counts_[b];
        n_frames_ += o.n_frames_;
        pairs_in_range_ += o.pairs_in_range_;
        n_points_ = o.n_points_ ? o.n_points_ : n_points_;
    }

private:
    double bin_width_ = 0.0;
    double r_max_ = 0.0;
    ObservableMode mode_ = ObservableMode::atomic;
    std::vector<std::uint64_t> counts_;
    std::int64_t n_frames_ = 0;
    std::int32_t n_points_ = 0;
    std::uint64_t pairs_in_range_ = 0;
};

struct RdfComparison {
    double l2 = 0.0;        // || g_ref - g_pert ||_L2, trapezoidal in r
    double rel_area = 0.0;  // (area(g_ref) - area(g_pert)) / area(g_ref)
};

inline RdfComparison rdf_l2_diff(const RdfTable& ref, const RdfTable& pert) {
    if (ref.g.size() != pert.g.size() || std::abs(ref.bin_width - pert.bin_width) > 1e-12)
        throw ContractError("rdf_l2_diff: binning mismatch");
    auto trapz = [&](auto f) {
        double s = 0.0;
        for (std::size_t b = 1; b < ref.g.size(); ++b)
            s += 0.5 * (f(b - 1) + f(b)) * ref.bin_width;
        return s;
    };
    RdfComparison out;
    out.l2 = std::sqrt(trapz([&](std::size_t b) {
        const double d = ref.g[b] - pert.g[b];
        return d * d;
    }));
    const double area_ref = trapz([&](std::size_t b) { return std::abs(ref.g[b]); });
    const double area_pert = trapz([&](std::size_t b) { return std::abs(pert.g[b]); });
    out.rel_area = area_ref > 0.0 ? (area_ref - area_pert) / area_ref : 0.0;
    return out;
}

// --- mean squared displacement ----------------------------------------------

struct MsdSeries {
    std::vector<double> lag_times;
    std::vector<double> msd;
    std::int64_t n_origins = 0;
};

// Multi-origin MSD over unwrapped coordinates (atoms or molecule centers).
// Frames are pushed at a fixed sampling interval; origins are retained every
// origin_stride frames up to max_lags.
class MsdAccumulator {
public:
    MsdAccumulator() = default;
    MsdAccumulator(double frame_dt, std::int64_t origin_stride, std::int64_t max_lags,
                   ObservableMode mode)
        : frame_dt_(frame_dt), origin_stride_(std::max<std::int64_t>(1, origin_stride)),
          max_lags_(max_lags), mode_(mode) {
        sum_.assign(max_lags_ + 1, 0.0);
        cnt_.assign(max_lags_ + 1, 0);
    }

    void push_frame(const SystemState& state, const Topology& topo) {
        std::vector<Vec3> pts;
        if (mode_ == ObservableMode::molecular) {
            std::vector<Vec3> unwrapped(state.n());
            for (std::int32_t i = 0; i < state.n(); ++i) unwrapped[i] = state.unwrapped(i);
            pts = detail::molecule_centers(topo, unwrapped, 0.0, state.masses);
        } else {
            pts.resize(state.n());
            for (std::int32_t i = 0; i < state.n(); ++i) pts[i] = state.unwrapped(i);
        }
        if (frame_index_ % origin_stride_ == 0) {
            // drop origins that can no longer contribute
            while (!origin_frames_.empty() && frame_index_ - origin_frames_.front() > max_lags_) {
                origins_.erase(origins_.begin());
                origin_frames_.erase(origin_frames_.begin());
            }
            origins_.push_back(pts);
            origin_frames_.push_back(frame_index_);
            ++n_origins_total_;
        }
        for (std::size_t o = 0; o < origins_.size(); ++o) {
            const std::int64_t lag = frame_index_ - origin_frames_[o];
            if (lag > max_lags_) continue;
            double s = 0.0;
            for (std::size_t i = 0; i < pts.size(); ++i) s += norm2(pts[i] - origins_[o][i]);
            sum_[lag] += s / pts.size();
            ++cnt_[lag];
        }
        ++frame_index_;
    }

    MsdSeries finalize() const {
        MsdSeries s;
        for (std::int64_t lag = 0; lag <= max_lags_; ++lag) {
            if (cnt_[lag] == 0) continue;
            s.lag_times.push_back(lag * frame_dt_);
            s.msd.push_back(sum_[lag] / cnt_[lag]);
        }
        s.n_origins = n_origins_total_;
        return s;
    }

private:
    double frame_dt_ = 0.0;
    std::int64_t origin_stride_ = 1;
    std::int64_t max_lags_ = 0;
    ObservableMode mode_ = ObservableMode::atomic;
    std::vector<std::vector<Vec3>> origins_;
    std::vector<std::int64_t> origin_frames_;
    std::vector<double> sum_;
    std::vector<std::int64_t> cnt_;
    std::int64_t frame_index_ = 0;
    std::int64_t n_origins_total_ = 0;
};

struct DiffusionFit {
    double d = 0.0;      // diffusion coefficient, slope / (2 dim)
    double slope = 0.0;
    double t_lo = 0.0, t_hi = 0.0;
};

// Least-squares slope of the MSD over [lo_frac, hi_frac] of the lag window;
// Einstein relation D = slope / (2 d) with d = 3.
inline DiffusionFit diffusion_coefficient(const MsdSeries& series, double lo_frac = 0.5,
                                          double hi_frac = 1.0, int dim = 3) {
    const std::size_t n = series.lag_times.size();
    if (n < 4) throw EstimationError("diffusion fit: too few MSD lags");
    const std::size_t lo = static_cast<std::size_t>(lo_frac * (n - 1));
    const std::size_t hi = static_cast<std::size_t>(hi_frac * (n - 1));
    if (hi <= lo + 1) throw EstimationError("diffusion fit: window too short");
    double st = 0, sy = 0, stt = 0, sty = 0;
    const double m = static_cast<double>(hi - lo + 1);
    for (std::size_t i = lo; i <= hi; ++i) {
        st += series.lag_times[i];
        sy += series.msd[i];
        stt += series.lag_times[i] * series.lag_times[i];
        sty += series.lag_times[i] * series.msd[i];
    }
    const double denom = m * stt - st * st;
    if (std::abs(denom) < 1e-300) throw EstimationError("diffusion fit: degenerate window");
    DiffusionFit fit;
    fit.slope = (m * sty - st * sy) / denom;
    fit.d = fit.slope / (2.0 * dim);
    fit.t_lo = series.lag_times[lo];
    fit.t_hi = series.lag_times[hi];
    return fit;
}

// --- pressure -----------------------------------------------------------------

// Instantaneous virial pressure P = rho / beta + vir / Vol.
inline double pressure_sample(double rho, double beta, double virial, double volume) {
    return rho / beta + virial / volume;
}

struct PressureSeries {
    std::vector<std::int64_t> steps;
    std::vector<double> p;

    void add(std::int64_t step, double value) {
        steps.push_back(step);
        p.push_back(value);
    }
    double mean() const {
        double s = 0.0;
        for (double v : p) s += v;
        return p.empty() ? 0.0 : s / p.size();
    }
    double std_dev() const {
        if (p.size() < 2) return 0.0;
        const double m = mean();
        double var = 0.0;
        for (double v : p) var += (v - m) * (v - m);
        return std::sqrt(var / (p.size() - 1));
    }
    void merge(const PressureSeries& o) {
        steps.insert(steps.end(), o.steps.begin(), o.steps.end());
        p.insert(p.end(), o.p.begin(), o.p.end());
    }
};

// --- trajectory sink -----------------------------------------------------------

struct ObservableOptions {
    bool rdf = false;
    double rdf_bin_width = 0.02;
    double rdf_r_max = 0.0;  // 0 -> box/2
    std::int64_t rdf_stride = 10;
    bool msd = false;
    std::int64_t msd_stride = 10;
    std::int64_t msd_origin_stride = 10;
    std::int64_t msd_max_lags = 200;
    double msd_fit_lo = 0.5;
    bool pressure = false;
    std::int64_t pressure_stride = 10;
    ObservableMode mode = ObservableMode::atomic;
};

class ObservableSink : public Sink {
public:
    ObservableSink(const Topology& topo, double box, double beta, double dt,
                   const ObservableOptions& opt)
        : topo_(&topo), beta_(beta), opt_(opt) {
        if (opt.rdf) {
            const double rmax = opt.rdf_r_max > 0.0 ? opt.rdf_r_max : 0.5 * box;
            rdf_ = RdfHistogram(opt.rdf_bin_width, rmax, opt.mode);
        }
        if (opt.msd)
            msd_ = MsdAccumulator(dt * opt.msd_stride, opt.msd_origin_stride, opt.msd_max_lags,
                                  opt.mode);
    }

    void on_step(const StepContext& ctx) override {
        if (opt_.rdf && ctx.step % opt_.rdf_stride == 0) rdf_.accumulate(ctx.state, *topo_);
        if (opt_.msd && ctx.step % opt_.msd_stride == 0) msd_.push_frame(ctx.state, *topo_);
        if (opt_.pressure && ctx.step % opt_.pressure_stride == 0) {
            const double vol = ctx.state.box * ctx.state.box * ctx.state.box;
            const bool molecular = opt_.mode == ObservableMode::molecular;
            const double count = molecular ? topo_->n_molecules : topo_->n_atoms;
            const double vir = molecular ? ctx.engine.current().virial_molecular
                                         : ctx.engine.current().virial;
            pressure_.add(ctx.step, pressure_sample(count / vol, beta_, vir, vol));
        }
    }

    const RdfHistogram& rdf() const { return rdf_; }
    const MsdAccumulator& msd() const { return msd_; }
    const PressureSeries& pressure() const { return pressure_; }

    RdfTable rdf_table(double box) const {
        const bool molecular = opt_.mode == ObservableMode::molecular;
        const double count = molecular ? topo_->n_molecules : topo_->n_atoms;
        return rdf_.finalize(count / (box * box * box));
    }
    MsdSeries msd_series() const { return msd_.finalize(); }

private:
    const Topology* topo_;
    double beta_;
    ObservableOptions opt_;
    RdfHistogram rdf_;
    MsdAccumulator msd_;
    PressureSeries pressure_;
};

} // namespace pathsens
