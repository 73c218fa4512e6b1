#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "pathsens/pbc.hpp"
#include "pathsens/rng.hpp"

using namespace pathsens;

TEST_CASE("minimum image wraps into [-L/2, L/2)") {
    const double L = 10.0;
    Vec3 w = minimum_image({9.0, 0.0, 0.0}, L);
    CHECK(w.x == doctest::Approx(-1.0));
    CHECK(w.y == doctest::Approx(0.0));
    CHECK(w.z == doctest::Approx(0.0));

    w = minimum_image({0.0, 0.0, 0.0}, L);
    CHECK(w.x == 0.0);

    w = minimum_image({-5.2, 4.9, 5.0}, L);
    CHECK(w.x == doctest::Approx(4.8));
    CHECK(w.y == doctest::Approx(4.9));
    CHECK(w.z == doctest::Approx(-5.0));

    // free boundaries: identity
    w = minimum_image({42.0, -7.0, 3.0}, 0.0);
    CHECK(w.x == 42.0);

    // every component lands in [-L/2, L/2) for arbitrary input
    for (int i = 0; i < 1000; ++i) {
        const double x = -47.0 + 0.097 * i;
        const double m = minimum_image_1d(x, L);
        CHECK(m >= -L / 2);
        CHECK(m < L / 2);
        // wrapped value differs from the input by an integer number of boxes
        CHECK(std::abs(std::remainder(m - x, L)) < 1e-9);
    }
}

TEST_CASE("wrap_coordinate maps into [0, L) and counts crossings") {
    double x = 12.3;
    const int s = wrap_coordinate(x, 10.0);
    CHECK(x == doctest::Approx(2.3));
    CHECK(s == 1);
    double y = -0.1;
    const int sy = wrap_coordinate(y, 10.0);
    CHECK(y == doctest::Approx(9.9));
    CHECK(sy == -1);
}

TEST_CASE("counter rng is deterministic and stream-separated") {
    const Vec3 a = rng::gaussian3(42, 7, 13, rng::stream_kick1);
    const Vec3 b = rng::gaussian3(42, 7, 13, rng::stream_kick1);
    CHECK(a.x == b.x);
    CHECK(a.y == b.y);
    CHECK(a.z == b.z);

    const Vec3 c = rng::gaussian3(42, 7, 13, rng::stream_kick2);
    CHECK(a.x != c.x);
    const Vec3 d = rng::gaussian3(43, 7, 13, rng::stream_kick1);
    CHECK(a.x != d.x);
    const Vec3 e = rng::gaussian3(42, 8, 13, rng::stream_kick1);
    CHECK(a.x != e.x);
}

TEST_CASE("gaussian moments") {
    const int n = 200000;
    double s1 = 0, s2 = 0, s4 = 0;
    for (int i = 0; i < n; ++i) {
        const Vec3 g = rng::gaussian3(1234, i, 0, rng::stream_kick1);
        for (int c = 0; c < 3; ++c) {
            const double x = g[c];
            s1 += x;
            s2 += x * x;
            s4 += x * x * x * x;
        }
    }
    const double m = 3.0 * n;
    CHECK(std::abs(s1 / m) < 4.0 / std::sqrt(m));
    CHECK(s2 / m == doctest::Approx(1.0).epsilon(5e-3));
    CHECK(s4 / m == doctest::Approx(3.0).epsilon(2e-2));
}

TEST_CASE("uniform draws cover (0,1)") {
    double lo = 1.0, hi = 0.0, mean = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double u = rng::uniform(99, i, 0, rng::stream_init_misc);
        lo = std::min(lo, u);
        hi = std::max(hi, u);
        mean += u;
    }
    CHECK(lo > 0.0);
    CHECK(hi < 1.0);
    CHECK(mean / n == doctest::Approx(0.5).epsilon(5e-3));
}
