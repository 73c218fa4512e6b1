#pragma once

#include <cmath>

#include "pathsens/vec3.hpp"

namespace pathsens {

// Nearest-image displacement component, mapped into [-L/2, L/2).
// L <= 0 means free boundaries (identity).
inline double minimum_image_1d(double d, double box) {
    if (box <= 0.0) return d;
    return d - box * std::floor(d / box + 0.5);
}

inline Vec3 minimum_image(const Vec3& d, double box) {
    if (box <= 0.0) return d;
    return {minimum_image_1d(d.x, box), minimum_image_1d(d.y, box), minimum_image_1d(d.z, box)};
}

// Hot-loop variant with precomputed 1/L; inv_box = 0 disables wrapping.
// Ties at exactly L/2 round to even rather than down (irrelevant off the
// measure-zero edge, and cheaper than the canonical mapping).
inline Vec3 minimum_image_fast(Vec3 d, double box, double inv_box) {
    d.x -= box * std::nearbyint(d.x * inv_box);
    d.y -= box * std::nearbyint(d.y * inv_box);
    d.z -= box * std::nearbyint(d.z * inv_box);
    return d;
}

// Wrap a coordinate into [0, L); returns the integer image shift applied.
inline int wrap_coordinate(double& x, double box) {
    if (box <= 0.0) return 0;
    const int shift = static_cast<int>(std::floor(x / box));
    if (shift != 0) x -= box * shift;
    return shift;
}

} // namespace pathsens
