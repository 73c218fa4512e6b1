#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "pathsens/errors.hpp"
#include "pathsens/pbc.hpp"
#include "pathsens/topology.hpp"
#include "pathsens/vec3.hpp"

namespace pathsens {

// Half Verlet list (each pair once, j > i) built from a cell grid when the
// box holds at least 3 cells per edge, otherwise by direct search. Rebuild
// is displacement-triggered with the usual skin/2 criterion.
class PairList {
public:
    void configure(double r_search, double skin) {
        r_search_ = r_search;
        skin_ = skin;
    }

    double search_radius() const { return r_search_; }
    std::int64_t rebuild_count() const { return rebuilds_; }

    bool needs_rebuild(const std::vector<Vec3>& q, double box) const {
        if (q_at_build_.size() != q.size()) return true;
        const double limit2 = 0.25 * skin_ * skin_;
        for (std::size_t i = 0; i < q.size(); ++i) {
            if (norm2(minimum_image(q[i] - q_at_build_[i], box)) > limit2) return true;
        }
        return false;
    }

    void build(const std::vector<Vec3>& q, double box, const Topology& topo) {
        const std::int32_t n = static_cast<std::int32_t>(q.size());
        const double rc = r_search_ + skin_;
        if (box > 0.0 && rc > 0.5 * box)
            throw ConfigError("pair search radius exceeds box/2; minimum image invalid");
        offsets_.assign(n + 1, 0);
        neighbors_.clear();
        const double rc2 = rc * rc;

        const int ncell = box > 0.0 ? static_cast<int>(std::floor(box / rc)) : 0;
        if (ncell >= 3) {
            build_cells(q, box, topo, rc2, ncell);
        } else {
            build_direct(q, box, topo, rc2);
        }
        q_at_build_ = q;
        ++rebuilds_;
    }

    // Iteration: for each i, neighbors j in [begin(i), end(i)) with j > i.
    const std::int32_t* begin(std::int32_t i) const { return neighbors_.data() + offsets_[i]; }
    const std::int32_t* end(std::int32_t i) const { return neighbors_.data() + offsets_[i + 1]; }
    std::size_t pair_count() const { return neighbors_.size(); }

private:
    static bool excluded(const Topology& topo, std::int32_t i, std::int32_t j) {
        return topo.exclude_same_molecule && topo.molecule_of[i] == topo.molecule_of[j];
    }

    void build_direct(const std::vector<Vec3>& q, double box, const Topology& topo, double rc2) {
        const std::int32_t n = static_cast<std::int32_t>(q.size());
        const double inv_box = box > 0.0 ? 1.0 / box : 0.0;
        std::vector<std::vector<std::int32_t>> per_atom(n);
        for (std::int32_t i = 0; i < n; ++i) {
            for (std::int32_t j = i + 1; j < n; ++j) {
                if (excluded(topo, i, j)) continue;
                if (norm2(minimum_image_fast(q[i] - q[j], box, inv_box)) < rc2)
                    per_atom[i].push_back(j);
            }
        }
        flatten(per_atom);
    }

    void build_cells(const std::vector<Vec3>& q, double box, const Topology& topo, double rc2,
                     int ncell) {
        const std::int32_t n = static_cast<std::int32_t>(q.size());
        const double inv_edge = ncell / box;
        auto cell_of = [&](const Vec3& r) {
            int cx = std::min(ncell - 1, static_cast<int>(r.x * inv_edge));
            int cy = std::min(ncell - 1, static_cast<int>(r.y * inv_edge));
            int cz = std::min(ncell - 1, static_cast<int>(r.z * inv_edge));
            return (cx * ncell + cy) * ncell + cz;
        };
        const int ncell3 = ncell * ncell * ncell;
        std::vector<std::vector<std::int32_t>> cells(ncell3);
        for (std::int32_t i = 0; i < n; ++i) cells[cell_of(q[i])].push_back(i);

        std::vector<std::vector<std::int32_t>> per_atom(n);
        auto visit = [&](std::int32_t i, const std::vector<std::int32_t>& others, bool same_cell) {
            for (std::int32_t j : others) {
                if (same_cell && j <= i) continue;
                if (excluded(topo, i, j)) continue;
                if (norm2(minimum_image(q[i] - q[j], box)) < rc2) {
                    per_atom[std::min(i, j)].push_back(std::max(i, j));
                }
            }
        };
        // half stencil: 13 forward neighbor cells + self
        static const int stencil[13][3] = {{1, 0, 0},  {0, 1, 0},  {0, 0, 1},  {1, 1, 0},
                                           {1, -1, 0}, {1, 0, 1},  {1, 0, -1}, {0, 1, 1},
                                           {0, 1, -1}, {1, 1, 1},  {1, 1, -1}, {1, -1, 1},
                                           {1, -1, -1}};
        for (int cx = 0; cx < ncell; ++cx)
            for (int cy = 0; cy < ncell; ++cy)
                for (int cz = 0; cz < ncell; ++cz) {
                    const int c = (cx * ncell + cy) * ncell + cz;
                    for (std::int32_t i : cells[c]) visit(i, cells[c], true);
                    for (const auto& s : stencil) {
                        const int ox = (cx + s[0] + ncell) % ncell;
                        const int oy = (cy + s[1] + ncell) % ncell;
                        const int oz = (cz + s[2] + ncell) % ncell;
                        const int o = (ox * ncell + oy) * ncell + oz;
                        for (std::int32_t i : cells[c]) visit(i, cells[o], false);
                    }
                }
        for (auto& lst : per_atom) std::sort(lst.begin(), lst.end());
        flatten(per_atom);
    }

    void flatten(const std::vector<std::vector<std::int32_t>>& per_atom) {
        const std::size_t n = per_atom.size();
        offsets_.assign(n + 1, 0);
        std::size_t total = 0;
        for (std::size_t i = 0; i < n; ++i) {
            offsets_[i] = total;
            total += per_atom[i].size();
        }
        offsets_[n] = total;
        neighbors_.resize(total);
        std::size_t pos = 0;
        for (const auto& lst : per_atom)
            for (std::int32_t j : lst) neighbors_[pos++] = j;
    }

    double r_search_ = 0.0;
    double skin_ = 0.0;
    std::vector<std::size_t> offsets_;
    std::vector<std::int32_t> neighbors_;
    std::vector<Vec3> q_at_build_;
    std::int64_t rebuilds_ = 0;
};

} // namespace pathsens
