#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <utility>
#include <vector>

#include "pathsens/pairlist.hpp"
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

std::set<std::pair<int, int>> brute_pairs(const std::vector<Vec3>& q, double box, double rc,
                                          const Topology& topo) {
    std::set<std::pair<int, int>> out;
    for (int i = 0; i < static_cast<int>(q.size()); ++i)
        for (int j = i + 1; j < static_cast<int>(q.size()); ++j) {
            if (topo.exclude_same_molecule && topo.molecule_of[i] == topo.molecule_of[j]) continue;
            if (norm2(minimum_image(q[i] - q[j], box)) < rc * rc) out.insert({i, j});
        }
    return out;
}

std::set<std::pair<int, int>> list_pairs(const PairList& pl, int n) {
    std::set<std::pair<int, int>> out;
    for (int i = 0; i < n; ++i)
        for (const std::int32_t* it = pl.begin(i); it != pl.end(i); ++it)
            out.insert({i, static_cast<int>(*it)});
    return out;
}

} // namespace

TEST_CASE("cell-grid list matches brute force") {
    // box large enough for >= 3 cells per edge
    const double box = 12.0, rcut = 2.5, skin = 0.4;
    const int n = 300;
    auto model = make_lj_fluid(n, 1.0, 1.0, rcut);
    auto q = random_positions(n, box, 11);
    PairList pl;
    pl.configure(rcut, skin);
    pl.build(q, box, model.topology);
    CHECK(list_pairs(pl, n) == brute_pairs(q, box, rcut + skin, model.topology));
}

TEST_CASE("direct list matches brute force in a small box") {
    const double box = 6.0, rcut = 2.5, skin = 0.3;  // < 3 cells per edge
    const int n = 120;
    auto model = make_lj_fluid(n, 1.0, 1.0, rcut);
    auto q = random_positions(n, box, 12);
    PairList pl;
    pl.configure(rcut, skin);
    pl.build(q, box, model.topology);
    CHECK(list_pairs(pl, n) == brute_pairs(q, box, rcut + skin, model.topology));
}

TEST_CASE("same-molecule pairs are excluded") {
    auto model = make_methane(8);
    const double box = 20.0;
    auto q = random_positions(model.topology.n_atoms, box, 13);
    PairList pl;
    pl.configure(6.0, 0.5);
    pl.build(q, box, model.topology);
    const auto pairs = list_pairs(pl, model.topology.n_atoms);
    for (const auto& [i, j] : pairs)
        CHECK(model.topology.molecule_of[i] != model.topology.molecule_of[j]);
    CHECK(pairs == brute_pairs(q, box, 6.5, model.topology));
}

TEST_CASE("rebuild triggers on displacement beyond half skin") {
    const double box = 12.0, rcut = 2.5, skin = 0.4;
    const int n = 50;
    auto model = make_lj_fluid(n, 1.0, 1.0, rcut);
    auto q = random_positions(n, box, 14);
    PairList pl;
    pl.configure(rcut, skin);
    pl.build(q, box, model.topology);
    CHECK_FALSE(pl.needs_rebuild(q, box));
    auto q2 = q;
    q2[7].x += 0.19;  // below skin/2
    CHECK_FALSE(pl.needs_rebuild(q2, box));
    q2[7].x += 0.05;  // beyond skin/2
    CHECK(pl.needs_rebuild(q2, box));
}

TEST_CASE("search radius beyond box/2 is rejected") {
    auto model = make_lj_fluid(10, 1.0, 1.0, 4.0);
    auto q = random_positions(10, 7.0, 15);
    PairList pl;
    pl.configure(4.0, 0.4);  // 4.4 > 3.5
    CHECK_THROWS_AS(pl.build(q, 7.0, model.topology), ConfigError);
}
