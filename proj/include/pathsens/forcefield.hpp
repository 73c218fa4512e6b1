#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "pathsens/errors.hpp"
#include "pathsens/pairlist.hpp"
#include "pathsens/params.hpp"
#include "pathsens/pbc.hpp"
#include "pathsens/topology.hpp"
#include "pathsens/vec3.hpp"

namespace pathsens {

// Forces, potential energy and the virial of one evaluation. The virial is
// the pressure convention vir = (1/3) sum_pairs f_ij . r_ij, so that
// P = rho/beta + virial/Vol. For multi-atom molecules virial_molecular uses
// center-of-mass separations of the intermolecular forces (its kinetic term
// then counts molecules, not atoms).
struct ForceEvaluation {
    std::vector<Vec3> forces;
    double potential_energy = 0.0;
    double virial = 0.0;
    double virial_molecular = 0.0;
    double min_pair_r2 = std::numeric_limits<double>::infinity();
};

// Force-vector Jacobian d F_m / d theta_k at one configuration: (3N) rows by
// K_diff columns (differentiable parameters only), row-major.
struct ParamJacobian {
    std::int32_t n_atoms = 0;
    std::size_t n_params = 0;
    std::vector<std::size_t> param_slots;  // column -> ParameterVector index
    std::vector<double> m;

    double at(std::int32_t row, std::size_t col) const { return m[row * n_params + col]; }

    void add(std::int32_t atom, const Vec3& v, std::size_t col) {
        m[(3 * static_cast<std::size_t>(atom) + 0) * n_params + col] += v.x;
        m[(3 * static_cast<std::size_t>(atom) + 1) * n_params + col] += v.y;
        m[(3 * static_cast<std::size_t>(atom) + 2) * n_params + col] += v.z;
    }
};

struct LJPairResult {
    double energy = 0.0;
    double fmag = 0.0;  // radial force magnitude, positive = repulsive
};

// Truncated (not shifted) LJ pair term; identically zero at and beyond rcut.
inline LJPairResult lj_pair(double r, double eps, double sigma, double rcut) {
    if (!(r > 0.0)) throw GeometryError("lj_pair: pair distance must be positive");
    if (r >= rcut) return {0.0, 0.0};
    const double s = sigma / r;
    const double s2 = s * s;
    const double s6 = s2 * s2 * s2;
    const double s12 = s6 * s6;
    return {4.0 * eps * (s12 - s6), 24.0 * eps * (2.0 * s12 - s6) / r};
}

struct BondResult {
    double energy = 0.0;
    Vec3 f_i, f_j;
};

// Harmonic bond V = Kb (r0 - r)^2 / 2 between positions qi, qj.
inline BondResult bond_force(const Vec3& qi, const Vec3& qj, double box, double kb, double r0) {
    const Vec3 d = minimum_image(qi - qj, box);
    const double r2 = norm2(d);
    if (r2 < 1e-24) throw GeometryError("bond_force: coincident atoms");
    const double r = std::sqrt(r2);
    const double dvdr = kb * (r - r0);
    const Vec3 fi = d * (-dvdr / r);
    return {0.5 * kb * (r0 - r) * (r0 - r), fi, -fi};
}

// Angle geometry for the triple j-i-k (i apex): theta and its position
// gradients. Colinear arms are a hard error (singular gradient).
struct AngleGeometry {
    double theta = 0.0;
    Vec3 dth_dqj, dth_dqi, dth_dqk;
};

inline AngleGeometry angle_geometry(const Vec3& qj, const Vec3& qi, const Vec3& qk, double box) {
    const Vec3 u = minimum_image(qj - qi, box);
    const Vec3 v = minimum_image(qk - qi, box);
    const double lu = norm(u), lv = norm(v);
    if (lu < 1e-12 || lv < 1e-12) throw GeometryError("angle: degenerate arm");
    const Vec3 uh = u * (1.0 / lu), vh = v * (1.0 / lv);
    double c = dot(uh, vh);
    c = std::min(1.0, std::max(-1.0, c));
    const double s2 = 1.0 - c * c;
    if (s2 < 1e-16) throw GeometryError("angle: colinear arms (singular angle)");
    const double s = std::sqrt(s2);
    AngleGeometry g;
    g.theta = std::acos(c);
    g.dth_dqj = (uh * c - vh) * (1.0 / (lu * s));
    g.dth_dqk = (vh * c - uh) * (1.0 / (lv * s));
    g.dth_dqi = -(g.dth_dqj + g.dth_dqk);
    return g;
}

struct AngleResult {
    double energy = 0.0;
    Vec3 f_j, f_i, f_k;
    double theta = 0.0;
};

// Harmonic angle V = Ktheta (theta0 - theta)^2 / 2 for the triple j-i-k.
inline AngleResult angle_force(const Vec3& qj, const Vec3& qi, const Vec3& qk, double box,
                               double ktheta, double theta0) {
    const AngleGeometry g = angle_geometry(qj, qi, qk, box);
    const double dvdth = ktheta * (g.theta - theta0);
    AngleResult out;
    out.theta = g.theta;
    out.energy = 0.5 * ktheta * (theta0 - g.theta) * (theta0 - g.theta);
    out.f_j = g.dth_dqj * (-dvdth);
    out.f_i = g.dth_dqi * (-dvdth);
    out.f_k = g.dth_dqk * (-dvdth);
    return out;
}

namespace detail {

// Per-class LJ coefficients resolved from the parameter vector.
struct LJTable {
    struct Entry {
        double eps = 0.0, sigma = 0.0, rcut = 0.0, rcut2 = 0.0;
    };
    std::vector<Entry> cls;
    double max_rcut = 0.0;

    static LJTable build(const Topology& topo, const ParameterVector& p) {
        LJTable t;
        t.cls.resize(topo.lj_classes.size());
        for (std::size_t c = 0; c < topo.lj_classes.size(); ++c) {
            const auto& s = topo.lj_classes[c];
            auto& e = t.cls[c];
            e.eps = p.value(s.eps);
            e.sigma = p.value(s.sigma);
            e.rcut = p.value(s.rcut);
            e.rcut2 = e.rcut * e.rcut;
            if (!(e.rcut > e.sigma))
                throw ConfigError("LJ class " + std::to_string(c) + ": rcut must exceed sigma");
            t.max_rcut = std::max(t.max_rcut, e.rcut);
        }
        return t;
    }
};

// Centers of mass per molecule, assembled from nearest images relative to
// each molecule's first atom so boundary-spanning molecules stay compact.
inline std::vector<Vec3> molecule_centers(const Topology& topo, const std::vector<Vec3>& q,
                                          double box, const std::vector<double>& masses) {
    std::vector<Vec3> com(topo.n_molecules, Vec3{});
    std::vector<double> mtot(topo.n_molecules, 0.0);
    std::vector<std::int32_t> first(topo.n_molecules, -1);
    for (std::int32_t i = 0; i < topo.n_atoms; ++i) {
        const std::int32_t m = topo.molecule_of[i];
        if (first[m] < 0) first[m] = i;
        const Vec3 rel = minimum_image(q[i] - q[first[m]], box);
        com[m] += (q[first[m]] + rel) * masses[i];
        mtot[m] += masses[i];
    }
    for (std::int32_t m = 0; m < topo.n_molecules; ++m) com[m] *= 1.0 / mtot[m];
    return com;
}

} // namespace detail

// Evaluates forces, energy, virials and parameter Jacobians for a fixed
// topology. Pure in (positions, parameters): identical inputs give identical
// results regardless of how the caller partitions work.
class ForceField {
public:
    ForceField(const Topology& topo, const ParameterVector& params)
        : topo_(&topo), params_(params) {
        if (topo.kind == ModelKind::lj_pairs) lj_ = detail::LJTable::build(topo, params);
        diff_slots_ = params.differentiable_indices();
        col_of_slot_.assign(params.size(), SIZE_MAX);
        for (std::size_t c = 0; c < diff_slots_.size(); ++c) col_of_slot_[diff_slots_[c]] = c;
    }

    const Topology& topology() const { return *topo_; }
    const ParameterVector& parameters() const { return params_; }
    double max_rcut() const { return lj_.max_rcut; }
    const std::vector<std::size_t>& jacobian_slots() const { return diff_slots_; }

    // The center-of-mass virial costs an extra pass over molecule lookups;
    // sensitivity paths that never report pressure switch it off.
    void set_molecular_virial(bool on) { molecular_virial_ = on; }

    ForceEvaluation evaluate(const std::vector<Vec3>& q, double box, const PairList* pairs) const {
        ForceEvaluation out;
        out.forces.assign(q.size(), Vec3{});
        switch (topo_->kind) {
        case ModelKind::free_particle:
            break;
        case ModelKind::harmonic_well: {
            const double k = params_.value(topo_->spring_k_slot);
            for (std::size_t i = 0; i < q.size(); ++i) {
                out.forces[i] = q[i] * (-k);
                out.potential_energy += 0.5 * k * norm2(q[i]);
            }
            break;
        }
        case ModelKind::lj_pairs:
            evaluate_lj(q, box, *pairs, out);
            evaluate_bonded(q, box, out);
            break;
        }
        return out;
    }

    // Analytic d F / d theta over the differentiable parameters.
    ParamJacobian evaluate_jacobian(const std::vector<Vec3>& q, double box,
                                    const PairList* pairs) const {
        ParamJacobian jac;
        jac.n_atoms = static_cast<std::int32_t>(q.size());
        jac.n_params = diff_slots_.size();
        jac.param_slots = diff_slots_;
        jac.m.assign(static_cast<std::size_t>(3 * jac.n_atoms) * jac.n_params, 0.0);
        switch (topo_->kind) {
        case ModelKind::free_particle:
            break;
        case ModelKind::harmonic_well: {
            const std::size_t col = col_of(topo_->spring_k_slot);
            for (std::int32_t i = 0; i < jac.n_atoms; ++i) jac.add(i, -q[i], col);
            break;
        }
        case ModelKind::lj_pairs:
            jacobian_lj(q, box, *pairs, jac);
            jacobian_bonded(q, box, jac);
            break;
        }
        return jac;
    }

    // Force difference obtained by replacing every LJ cutoff with a candidate
    // value (candidate minus reference), one output per candidate. Direct
    // pair search up to the largest radius involved.
    std::vector<std::vector<Vec3>> rcut_delta_forces(const std::vector<Vec3>& q, double box,
                                                     const std::vector<double>& candidates) const {
        if (topo_->kind != ModelKind::lj_pairs)
            throw ContractError("rcut_delta_forces: model has no LJ cutoff");
        double rmax = lj_.max_rcut;
        for (double rc : candidates) {
            if (!(rc > 0.0)) throw ConfigError("cutoff candidate must be positive");
            rmax = std::max(rmax, rc);
        }
        if (box > 0.0 && rmax > 0.5 * box)
            throw ConfigError("cutoff candidate exceeds box/2; minimum image invalid");
        const std::int32_t n = static_cast<std::int32_t>(q.size());
        std::vector<std::vector<Vec3>> delta(candidates.size(),
                                             std::vector<Vec3>(q.size(), Vec3{}));
        const double rmax2 = rmax * rmax;
        const double inv_box = box > 0.0 ? 1.0 / box : 0.0;
        for (std::int32_t i = 0; i < n; ++i) {
            for (std::int32_t j = i + 1; j < n; ++j) {
                if (topo_->exclude_same_molecule &&
                    topo_->molecule_of[i] == topo_->molecule_of[j])
                    continue;
                const std::int32_t c = topo_->lj_class_of(topo_->species[i], topo_->species[j]);
                if (c < 0) continue;
                const Vec3 d = minimum_image_fast(q[i] - q[j], box, inv_box);
                const double r2 = norm2(d);
                if (r2 >= rmax2) continue;
                const auto& e = lj_.cls[c];
                const double r = std::sqrt(r2);
                const bool in_ref = r < e.rcut;
                const double s2 = e.sigma * e.sigma / r2;
                const double s6 = s2 * s2 * s2;
                const double s12 = s6 * s6;
                const double f_over_r = 24.0 * e.eps * (2.0 * s12 - s6) / r2;
                const Vec3 f = d * f_over_r;
                for (std::size_t cand = 0; cand < candidates.size(); ++cand) {
                    const bool in_cand = r < candidates[cand];
                    if (in_cand == in_ref) continue;
                    const double sign = in_cand ? 1.0 : -1.0;
                    delta[cand][i] += f * sign;
                    delta[cand][j] -= f * sign;
                }
            }
        }
        return delta;
    }

private:
    std::size_t col_of(std::size_t slot) const { return col_of_slot_[slot]; }

    void evaluate_lj(const std::vector<Vec3>& q, double box, const PairList& pairs,
                     ForceEvaluation& out) const {
        const bool molecular = molecular_virial_ && topo_->n_molecules < topo_->n_atoms;
        std::vector<Vec3> com;
        if (molecular) com = detail::molecule_centers(*topo_, q, box, topo_->masses);
        const std::int32_t n = static_cast<std::int32_t>(q.size());
        const double inv_box = box > 0.0 ? 1.0 / box : 0.0;
        const bool single_class = topo_->n_species == 1;
        const auto& e0 = lj_.cls[0];
        double energy = 0.0, virial3 = 0.0, virial3_mol = 0.0;
        double min_r2 = out.min_pair_r2;
        for (std::int32_t i = 0; i < n; ++i) {
            const std::uint8_t si = topo_->species[i];
            const Vec3 qi = q[i];
            Vec3 fi{};
            for (const std::int32_t* it = pairs.begin(i); it != pairs.end(i); ++it) {
                const std::int32_t j = *it;
                const std::int32_t c = single_class ? 0 : topo_->lj_class_of(si, topo_->species[j]);
                if (c < 0) continue;
                const auto& e = lj_.cls[c];
                const Vec3 d = minimum_image_fast(qi - q[j], box, inv_box);
                const double r2 = norm2(d);
                if (r2 < min_r2) min_r2 = r2;
                if (r2 >= e.rcut2) continue;
                if (r2 < 1e-18)
                    throw GeometryError("compute_forces: overlapping atoms " +
                                        std::to_string(i) + "," + std::to_string(j));
                const double s2 = e.sigma * e.sigma / r2;
                const double s6 = s2 * s2 * s2;
                const double s12 = s6 * s6;
                energy += 4.0 * e.eps * (s12 - s6);
                const double f_over_r = 24.0 * e.eps * (2.0 * s12 - s6) / r2;
                const Vec3 f = d * f_over_r;
                fi += f;
                out.forces[j] -= f;
                virial3 += f_over_r * r2;
                if (molecular) {
                    const Vec3 dcom = minimum_image(
                        com[topo_->molecule_of[i]] - com[topo_->molecule_of[j]], box);
                    virial3_mol += dot(f, dcom);
                }
            }
            out.forces[i] += fi;
        }
        out.min_pair_r2 = min_r2;
        out.potential_energy += energy;
        out.virial += virial3 / 3.0;
        out.virial_molecular += molecular ? virial3_mol / 3.0 : virial3 / 3.0;
    }

    void evaluate_bonded(const std::vector<Vec3>& q, double box, ForceEvaluation& out) const {
        if (!topo_->bonds.empty()) {
            const double kb = params_.value(topo_->bond_k_slot);
            const double r0 = params_.value(topo_->bond_r0_slot);
            for (const auto& b : topo_->bonds) {
                const BondResult r = bond_force(q[b.i], q[b.j], box, kb, r0);
                out.potential_energy += r.energy;
                out.forces[b.i] += r.f_i;
                out.forces[b.j] += r.f_j;
                out.virial += dot(r.f_i, minimum_image(q[b.i] - q[b.j], box)) / 3.0;
            }
        }
        if (!topo_->angles.empty()) {
            const double kt = params_.value(topo_->angle_k_slot);
            const double t0 = params_.value(topo_->angle_theta0_slot);
            for (const auto& a : topo_->angles) {
                const AngleResult r = angle_force(q[a.j], q[a.i], q[a.k], box, kt, t0);
                out.potential_energy += r.energy;
                out.forces[a.j] += r.f_j;
                out.forces[a.i] += r.f_i;
                out.forces[a.k] += r.f_k;
                out.virial += (dot(r.f_j, minimum_image(q[a.j] - q[a.i], box)) +
                               dot(r.f_k, minimum_image(q[a.k] - q[a.i], box))) /
                              3.0;
            }
        }
    }

    void jacobian_lj(const std::vector<Vec3>& q, double box, const PairList& pairs,
                     ParamJacobian& jac) const {
        const std::int32_t n = static_cast<std::int32_t>(q.size());
        const double inv_box = box > 0.0 ? 1.0 / box : 0.0;
        for (std::int32_t i = 0; i < n; ++i) {
            const std::uint8_t si = topo_->species[i];
            for (const std::int32_t* it = pairs.begin(i); it != pairs.end(i); ++it) {
                const std::int32_t j = *it;
                const std::int32_t c = topo_->lj_class_of(si, topo_->species[j]);
                if (c < 0) continue;
                const auto& e = lj_.cls[c];
                const Vec3 d = minimum_image_fast(q[i] - q[j], box, inv_box);
                const double r2 = norm2(d);
                if (r2 >= e.rcut2) continue;
                const double s2 = e.sigma * e.sigma / r2;
                const double s6 = s2 * s2 * s2;
                const double s12 = s6 * s6;
                const Vec3 df_deps = d * (24.0 * (2.0 * s12 - s6) / r2);
                const Vec3 df_dsig =
                    d * (24.0 * e.eps * (24.0 * s12 - 6.0 * s6) / (e.sigma * r2));
                const auto& slots = topo_->lj_classes[c];
                const std::size_t ce = col_of(slots.eps), cs = col_of(slots.sigma);
                jac.add(i, df_deps, ce);
                jac.add(j, -df_deps, ce);
                jac.add(i, df_dsig, cs);
                jac.add(j, -df_dsig, cs);
            }
        }
    }

    void jacobian_bonded(const std::vector<Vec3>& q, double box, ParamJacobian& jac) const {
        if (!topo_->bonds.empty()) {
            const double kb = params_.value(topo_->bond_k_slot);
            const double r0 = params_.value(topo_->bond_r0_slot);
            const std::size_t ck = col_of(topo_->bond_k_slot);
            const std::size_t cr = col_of(topo_->bond_r0_slot);
            for (const auto& b : topo_->bonds) {
                const Vec3 d = minimum_image(q[b.i] - q[b.j], box);
                const double r = norm(d);
                if (r < 1e-12) throw GeometryError("jacobian: coincident bonded atoms");
                const Vec3 uh = d * (1.0 / r);
                const Vec3 dfi_dkb = uh * (-(r - r0));  // f_i / Kb
                const Vec3 dfi_dr0 = uh * kb;
                jac.add(b.i, dfi_dkb, ck);
                jac.add(b.j, -dfi_dkb, ck);
                jac.add(b.i, dfi_dr0, cr);
                jac.add(b.j, -dfi_dr0, cr);
            }
        }
        if (!topo_->angles.empty()) {
            const double kt = params_.value(topo_->angle_k_slot);
            const double t0 = params_.value(topo_->angle_theta0_slot);
            const std::size_t ck = col_of(topo_->angle_k_slot);
            const std::size_t ct = col_of(topo_->angle_theta0_slot);
            for (const auto& a : topo_->angles) {
                const AngleGeometry g = angle_geometry(q[a.j], q[a.i], q[a.k], box);
                // f = -Ktheta (theta - theta0) dtheta/dq
                const double dev = g.theta - t0;
                jac.add(a.j, g.dth_dqj * (-dev), ck);
                jac.add(a.i, g.dth_dqi * (-dev), ck);
                jac.add(a.k, g.dth_dqk * (-dev), ck);
                jac.add(a.j, g.dth_dqj * kt, ct);
                jac.add(a.i, g.dth_dqi * kt, ct);
                jac.add(a.k, g.dth_dqk * kt, ct);
            }
        }
    }

    const Topology* topo_;
    ParameterVector params_;
    detail::LJTable lj_;
    std::vector<std::size_t> diff_slots_;
    std::vector<std::size_t> col_of_slot_;
    bool molecular_virial_ = true;
};

} // namespace pathsens
