#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "pathsens/pbc.hpp"
#include "pathsens/vec3.hpp"

namespace pathsens {

// Dynamical state: wrapped positions q in [0,L)^3 (L > 0), momenta p, box
// edge, time and per-atom masses. Image counters track boundary crossings so
// unwrapped coordinates stay available for displacement observables.
struct SystemState {
    std::vector<Vec3> q;
    std::vector<Vec3> p;
    std::vector<double> masses;
    std::vector<std::array<std::int32_t, 3>> images;
    double box = 0.0;  // 0 = free boundaries
    double t = 0.0;

    std::int32_t n() const { return static_cast<std::int32_t>(q.size()); }

    Vec3 unwrapped(std::int32_t i) const {
        if (box <= 0.0) return q[i];
        return {q[i].x + box * images[i][0], q[i].y + box * images[i][1],
                q[i].z + box * images[i][2]};
    }

    void wrap_atom(std::int32_t i) {
        if (box <= 0.0) return;
        images[i][0] += wrap_coordinate(q[i].x, box);
        images[i][1] += wrap_coordinate(q[i].y, box);
        images[i][2] += wrap_coordinate(q[i].z, box);
    }

    double kinetic_energy() const {
        double ke = 0.0;
        for (std::int32_t i = 0; i < n(); ++i) ke += norm2(p[i]) / (2.0 * masses[i]);
        return ke;
    }

    Vec3 total_momentum() const {
        Vec3 s;
        for (const auto& pi : p) s += pi;
        return s;
    }

    // Shift momenta so the center of mass is at rest.
    void zero_total_momentum() {
        double mtot = 0.0;
        for (double m : masses) mtot += m;
        const Vec3 vcm = total_momentum() * (1.0 / mtot);
        for (std::int32_t i = 0; i < n(); ++i) p[i] -= masses[i] * vcm;
    }
};

} // namespace pathsens
