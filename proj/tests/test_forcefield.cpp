#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "pathsens/forcefield.hpp"
#include "pathsens/rng.hpp"
#include "pathsens/topology.hpp"

using namespace pathsens;

namespace {

std::vector<Vec3> random_positions(int n, double box, std::uint64_t seed) {
    std::vector<Vec3> q(n);
    for (int i = 0; i < n; ++i)
        q[i] = {box * rng::uniform(seed, i, 0, rng::stream_init_misc, 0),
                box * rng::uniform(seed, i, 1, rng::stream_init_misc, 0),
                box * rng::uniform(seed, i, 2, rng::stream_init_misc, 0)};
    return q;
}

// Methane molecules near ideal geometry with mild distortion.
std::vector<Vec3> methane_positions(const Topology& topo, double box, double r0,
                                    std::uint64_t seed) {
    std::vector<Vec3> q(topo.n_atoms);
    const double inv_sqrt3 = 1.0 / std::sqrt(3.0);
    static const double tet[4][3] = {{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
    int cells = 1;
    while (cells * cells * cells < topo.n_molecules) ++cells;
    const double a = box / cells;
    for (std::int32_t m = 0; m < topo.n_molecules; ++m) {
        const int cx = m / (cells * cells), cy = (m / cells) % cells, cz = m % cells;
        Vec3 center{(cx + 0.5) * a, (cy + 0.5) * a, (cz + 0.5) * a};
        center += rng::gaussian3(seed, m, 0, rng::stream_init_misc) * 0.05;
        q[5 * m] = center + rng::gaussian3(seed, m, 1, rng::stream_init_misc) * 0.02;
        for (int h = 0; h < 4; ++h)
            q[5 * m + 1 + h] = center +
                               Vec3{tet[h][0], tet[h][1], tet[h][2]} * (r0 * inv_sqrt3) +
                               rng::gaussian3(seed, m, 2 + h, rng::stream_init_misc) * 0.03;
    }
    return q;
}

ForceEvaluation eval(const ModelSystem& model, const std::vector<Vec3>& q, double box) {
    ForceField ff(model.topology, model.parameters);
    PairList pl;
    if (model.topology.kind == ModelKind::lj_pairs) {
        pl.configure(ff.max_rcut(), 0.3);
        pl.build(q, box, model.topology);
    }
    return ff.evaluate(q, box, &pl);
}

} // namespace

TEST_CASE("lj_pair analytic landmarks") {
    // zero crossing at r = sigma
    CHECK(lj_pair(1.0, 1.0, 1.0, 4.0).energy == doctest::Approx(0.0).epsilon(1e-12));
    // analytic minimum at r = 2^(1/6) sigma
    const double rmin = std::pow(2.0, 1.0 / 6.0);
    const auto at_min = lj_pair(rmin, 1.0, 1.0, 4.0);
    CHECK(at_min.energy == doctest::Approx(-1.0));
    CHECK(at_min.fmag == doctest::Approx(0.0).epsilon(1e-12));
    // exactly zero at and beyond the cutoff
    CHECK(lj_pair(4.0, 1.0, 1.0, 4.0).energy == 0.0);
    CHECK(lj_pair(4.0 + 1e-9, 1.0, 1.0, 4.0).fmag == 0.0);
    CHECK_THROWS_AS(lj_pair(0.0, 1.0, 1.0, 4.0), GeometryError);
    CHECK_THROWS_AS(lj_pair(-1.0, 1.0, 1.0, 4.0), GeometryError);
    // force magnitude is -dV/dr (finite differences)
    for (double r : {0.95, 1.1, 1.5, 2.2, 3.7}) {
        const double h = 1e-6;
        const double fd = -(lj_pair(r + h, 1.3, 1.05, 4.0).energy -
                            lj_pair(r - h, 1.3, 1.05, 4.0).energy) /
                          (2 * h);
        CHECK(lj_pair(r, 1.3, 1.05, 4.0).fmag == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("bond_force landmarks and gradient consistency") {
    const Vec3 qi{0, 0, 0};
    // equilibrium length: zero energy, zero force
    const auto eq = bond_force(qi, {1.1, 0, 0}, 0.0, 700.0, 1.1);
    CHECK(eq.energy == doctest::Approx(0.0));
    CHECK(norm(eq.f_i) == doctest::Approx(0.0));
    // direct substitution: Kb=700, r0=1.1, r=1.2 -> energy 3.5
    const auto st = bond_force(qi, {1.2, 0, 0}, 0.0, 700.0, 1.1);
    CHECK(st.energy == doctest::Approx(3.5));
    // equal and opposite along the axis
    CHECK(st.f_i.x == doctest::Approx(-st.f_j.x));
    CHECK(st.f_i.y == doctest::Approx(0.0));
    CHECK_THROWS_AS(bond_force(qi, qi, 0.0, 700.0, 1.1), GeometryError);

    // force equals minus the energy gradient, central differences
    const Vec3 qj{0.7, -0.4, 0.9};
    const double h = 1e-6;
    Vec3 fd;
    for (int c = 0; c < 3; ++c) {
        Vec3 qp = qi, qm = qi;
        qp[c] += h;
        qm[c] -= h;
        fd[c] = -(bond_force(qp, qj, 0.0, 700.0, 1.1).energy -
                  bond_force(qm, qj, 0.0, 700.0, 1.1).energy) /
                (2 * h);
    }
    const auto b = bond_force(qi, qj, 0.0, 700.0, 1.1);
    for (int c = 0; c < 3; ++c) CHECK(b.f_i[c] == doctest::Approx(fd[c]).epsilon(1e-6));
}

TEST_CASE("angle_force landmarks, Newton's third law and gradient consistency") {
    const double kt = 100.0, t0 = 1.909;
    // equilibrium angle: zero energy and forces
    const double c0 = std::cos(t0), s0 = std::sin(t0);
    const auto eq = angle_force({1, 0, 0}, {0, 0, 0}, {c0, s0, 0}, 0.0, kt, t0);
    CHECK(eq.energy == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(norm(eq.f_j) == doctest::Approx(0.0).epsilon(1e-9));

    // colinear arms are a hard error
    CHECK_THROWS_AS(angle_force({1, 0, 0}, {0, 0, 0}, {2, 0, 0}, 0.0, kt, t0), GeometryError);
    CHECK_THROWS_AS(angle_force({1, 0, 0}, {0, 0, 0}, {-1, 0, 0}, 0.0, kt, t0), GeometryError);

    for (int trial = 0; trial < 20; ++trial) {
        const Vec3 qj = rng::gaussian3(5, trial, 0, rng::stream_init_misc);
        const Vec3 qi = rng::gaussian3(5, trial, 1, rng::stream_init_misc) * 0.3;
        const Vec3 qk = rng::gaussian3(5, trial, 2, rng::stream_init_misc);
        AngleResult r;
        try {
            r = angle_force(qj, qi, qk, 0.0, kt, t0);
        } catch (const GeometryError&) {
            continue;
        }
        // internal forces sum to zero
        const Vec3 net = r.f_j + r.f_i + r.f_k;
        CHECK(norm(net) < 1e-10 * (norm(r.f_j) + norm(r.f_i) + norm(r.f_k) + 1.0));
        // zero torque about the apex
        const Vec3 torque = cross(qj - qi, r.f_j) + cross(qk - qi, r.f_k);
        CHECK(norm(torque) < 1e-9 * (norm(r.f_j) * norm(qj - qi) + 1.0));
        // gradient vs central differences on every coordinate
        const double h = 1e-6;
        auto energy_at = [&](Vec3 a, Vec3 b, Vec3 c) {
            return angle_force(a, b, c, 0.0, kt, t0).energy;
        };
        for (int c = 0; c < 3; ++c) {
            Vec3 qp = qj, qm = qj;
            qp[c] += h;
            qm[c] -= h;
            const double fd = -(energy_at(qp, qi, qk) - energy_at(qm, qi, qk)) / (2 * h);
            CHECK(r.f_j[c] == doctest::Approx(fd).epsilon(1e-6));
            qp = qi;
            qm = qi;
            qp[c] += h;
            qm[c] -= h;
            const double fdi = -(energy_at(qj, qp, qk) - energy_at(qj, qm, qk)) / (2 * h);
            CHECK(r.f_i[c] == doctest::Approx(fdi).epsilon(1e-6));
        }
    }
}

TEST_CASE("compute_forces: isolated atom and pair minimum") {
    auto single = make_lj_fluid(1);
    const auto r1 = eval(single, {{5, 5, 5}}, 10.0);
    CHECK(r1.potential_energy == 0.0);
    CHECK(norm(r1.forces[0]) == 0.0);

    auto pair = make_lj_fluid(2);
    const double rmin = std::pow(2.0, 1.0 / 6.0);
    const auto r2 = eval(pair, {{1, 1, 1}, {1 + rmin, 1, 1}}, 10.0);
    CHECK(r2.potential_energy == doctest::Approx(-1.0));
    CHECK(norm(r2.forces[0]) == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(norm(r2.forces[0] + r2.forces[1]) == doctest::Approx(0.0));
}

TEST_CASE("methane topology counts: 512 molecules -> 2048 bonds, 3072 angles") {
    auto m = make_methane(512);
    CHECK(m.topology.n_atoms == 2560);
    CHECK(m.topology.bonds.size() == 2048);
    CHECK(m.topology.angles.size() == 3072);
}

TEST_CASE("momentum conservation on random configurations") {
    auto model = make_lj_fluid(64, 1.0, 1.0, 2.5);
    for (std::uint64_t seed = 20; seed < 24; ++seed) {
        const auto q = random_positions(64, 8.0, seed);
        const auto r = eval(model, q, 8.0);
        Vec3 net;
        double mag = 0.0;
        for (const auto& f : r.forces) {
            net += f;
            mag += norm(f);
        }
        CHECK(norm(net) <= 1e-9 * std::max(mag, 1.0));
    }
    auto meth = make_methane(27);
    meth.parameters.set("rcut", 8.0);
    const auto q = methane_positions(meth.topology, 25.0, 1.1, 31);
    const auto r = eval(meth, q, 25.0);
    Vec3 net;
    double mag = 0.0;
    for (const auto& f : r.forces) {
        net += f;
        mag += norm(f);
    }
    CHECK(norm(net) <= 1e-9 * std::max(mag, 1.0));
}

TEST_CASE("overlapping atoms raise invalid geometry") {
    auto pair = make_lj_fluid(2);
    CHECK_THROWS_AS(eval(pair, {{1, 1, 1}, {1 + 5e-10, 1, 1}}, 10.0), GeometryError);
}

TEST_CASE("energy-force consistency by central differences (all families)") {
    auto meth = make_methane(8);
    const double box = 16.0;
    auto q = methane_positions(meth.topology, box, 1.1, 41);
    ForceField ff(meth.topology, meth.parameters);
    PairList pl;
    pl.configure(ff.max_rcut(), 0.5);
    // search radius 15.5 needs box >= 31; evaluate with a shorter test cutoff
    auto params = meth.parameters;
    params.set("rcut", 6.0);
    ForceField ff2(meth.topology, params);
    pl.configure(ff2.max_rcut(), 0.5);
    pl.build(q, box, meth.topology);
    const auto base = ff2.evaluate(q, box, &pl);
    const double h = 1e-6;
    for (int atom : {0, 1, 7, 22, 35}) {
        for (int c = 0; c < 3; ++c) {
            auto qp = q, qm = q;
            qp[atom][c] += h;
            qm[atom][c] -= h;
            const double ep = ff2.evaluate(qp, box, &pl).potential_energy;
            const double em = ff2.evaluate(qm, box, &pl).potential_energy;
            const double fd = -(ep - em) / (2 * h);
            CHECK(base.forces[atom][c] ==
                  doctest::Approx(fd).epsilon(1e-6).scale(std::abs(fd) + 1.0));
        }
    }
}

TEST_CASE("analytic Jacobian matches finite differences in every parameter") {
    auto meth = make_methane(8);
    const double box = 16.0;
    auto q = methane_positions(meth.topology, box, 1.1, 51);
    auto params = meth.parameters;
    params.set("rcut", 6.0);
    ForceField ff(meth.topology, params);
    PairList pl;
    pl.configure(ff.max_rcut(), 0.5);
    pl.build(q, box, meth.topology);
    const ParamJacobian jac = ff.evaluate_jacobian(q, box, &pl);

    for (std::size_t col = 0; col < jac.n_params; ++col) {
        const std::size_t slot = jac.param_slots[col];
        const double theta = params.value(slot);
        const double h = 1e-4 * theta;
        ForceField fp(meth.topology, params.with_delta(slot, h));
        ForceField fm(meth.topology, params.with_delta(slot, -h));
        const auto Fp = fp.evaluate(q, box, &pl);
        const auto Fm = fm.evaluate(q, box, &pl);
        double max_rel = 0.0;
        for (std::int32_t atom = 0; atom < meth.topology.n_atoms; ++atom) {
            for (int c = 0; c < 3; ++c) {
                const double fd = (Fp.forces[atom][c] - Fm.forces[atom][c]) / (2 * h);
                const double an = jac.at(3 * atom + c, col);
                const double scale = std::max({std::abs(fd), std::abs(an), 1e-6});
                max_rel = std::max(max_rel, std::abs(fd - an) / scale);
            }
        }
        INFO("parameter ", params[slot].name);
        CHECK(max_rel < 1e-5);
    }
}

TEST_CASE("epsilon column times epsilon equals the LJ force exactly") {
    auto model = make_lj_fluid(32, 1.7, 1.0, 2.5);
    const double box = 7.0;
    const auto q = random_positions(32, box, 61);
    ForceField ff(model.topology, model.parameters);
    PairList pl;
    pl.configure(ff.max_rcut(), 0.3);
    pl.build(q, box, model.topology);
    const auto base = ff.evaluate(q, box, &pl);
    const ParamJacobian jac = ff.evaluate_jacobian(q, box, &pl);
    const double eps = model.parameters.value(0);
    for (std::int32_t atom = 0; atom < 32; ++atom)
        for (int c = 0; c < 3; ++c)
            CHECK(jac.at(3 * atom + c, 0) * eps ==
                  doctest::Approx(base.forces[atom][c]).epsilon(1e-12));
}

TEST_CASE("bond-parameter Jacobian columns are local to each atom's bonds") {
    auto meth = make_methane(4);
    const double box = 14.0;
    auto q = methane_positions(meth.topology, box, 1.1, 71);
    auto params = meth.parameters;
    params.set("rcut", 5.0);
    ForceField ff(meth.topology, params);
    PairList pl;
    pl.configure(ff.max_rcut(), 0.5);
    pl.build(q, box, meth.topology);
    const ParamJacobian jac = ff.evaluate_jacobian(q, box, &pl);
    const std::size_t ck = 6;  // kb column in differentiable order
    const double kb = params.value(6), r0 = params.value(7);

    // independent reconstruction: column = (sum of this atom's bond forces)/Kb,
    // which involves only the atom's own molecule
    std::vector<Vec3> expect(meth.topology.n_atoms, Vec3{});
    for (const auto& b : meth.topology.bonds) {
        const auto r = bond_force(q[b.i], q[b.j], box, kb, r0);
        expect[b.i] += r.f_i * (1.0 / kb);
        expect[b.j] += r.f_j * (1.0 / kb);
    }
    for (std::int32_t atom = 0; atom < meth.topology.n_atoms; ++atom)
        for (int c = 0; c < 3; ++c)
            CHECK(jac.at(3 * atom + c, ck) ==
                  doctest::Approx(expect[atom][c]).epsilon(1e-12).scale(1.0));
}

TEST_CASE("truncation kills force, energy and Jacobian beyond rcut") {
    auto model = make_lj_fluid(2, 1.0, 1.0, 2.5);
    const double box = 12.0;
    const std::vector<Vec3> q{{1, 1, 1}, {1 + 2.5 + 1e-6, 1, 1}};
    ForceField ff(model.topology, model.parameters);
    PairList pl;
    pl.configure(ff.max_rcut(), 0.5);
    pl.build(q, box, model.topology);
    const auto r = ff.evaluate(q, box, &pl);
    CHECK(r.potential_energy == 0.0);
    CHECK(norm(r.forces[0]) == 0.0);
    const ParamJacobian jac = ff.evaluate_jacobian(q, box, &pl);
    for (std::size_t i = 0; i < jac.m.size(); ++i) CHECK(jac.m[i] == 0.0);
}

TEST_CASE("virial vanishes for an interaction-free system") {
    auto free_model = make_free(16);
    ForceField ff(free_model.topology, free_model.parameters);
    const auto q = random_positions(16, 5.0, 81);
    const auto r = ff.evaluate(q, 5.0, nullptr);
    CHECK(r.virial == 0.0);
    CHECK(r.potential_energy == 0.0);
}
