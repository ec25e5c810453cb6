#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "hardy/grid.hpp"

namespace hardy {

// Half-open dyadic cube [c*l, (c+1)*l)^n at side l = L*2^{-level}; coord[i]
// ranges over [0, 2^level). The distinguished point u_Q is the lower corner,
// which lies exactly on the sample lattice for every level <= log2(N_g).
struct CubeIndex {
    int level = 0;
    std::array<std::int64_t, 2> coord{0, 0};

    friend bool operator==(const CubeIndex& a, const CubeIndex& b) {
        return a.level == b.level && a.coord == b.coord;
    }
    friend bool operator<(const CubeIndex& a, const CubeIndex& b) {
        if (a.level != b.level) return a.level < b.level;
        return a.coord < b.coord;
    }
};

// cube geometry; valid for any level up to log2(N_g) (single-sample cubes)
double cube_side(const Grid& g, const CubeIndex& q);
double cube_measure(const Grid& g, const CubeIndex& q);
std::array<double, 2> cube_corner(const Grid& g, const CubeIndex& q);
std::int64_t cube_corner_sample(const Grid& g, const CubeIndex& q);
std::int64_t cube_samples_per_axis(const Grid& g, int level);
CubeIndex cube_ancestor(const CubeIndex& q, int level); // level <= q.level
bool cube_contains(const CubeIndex& outer, const CubeIndex& inner);
CubeIndex locate_cube(const Grid& g, std::array<double, 2> x, int level); // wraps onto the torus

// visit flat sample indices inside the cube in row-major order
template <typename Fn>
void for_each_sample(const Grid& g, const CubeIndex& q, Fn&& fn) {
    const std::int64_t per_axis = cube_samples_per_axis(g, q.level);
    const std::int64_t base0 = q.coord[0] * per_axis;
    if (g.dim() == 1) {
        for (std::int64_t a = 0; a < per_axis; ++a) fn(base0 + a);
        return;
    }
    const std::int64_t ng = g.points_per_axis();
    const std::int64_t base1 = q.coord[1] * per_axis;
    for (std::int64_t a = 0; a < per_axis; ++a)
        for (std::int64_t b = 0; b < per_axis; ++b) fn((base0 + a) * ng + base1 + b);
}

// Lattice of analysis cubes. max_level is capped so every cube holds at least
// 4 samples per axis; deeper (down to single-sample) cubes remain addressable
// through the free geometry helpers above.
class DyadicLattice {
public:
    explicit DyadicLattice(const Grid& g);

    const Grid& grid() const { return grid_; }
    int max_level() const { return max_level_; }

    std::vector<CubeIndex> cubes_at_level(int level) const; // 0 <= level <= max_level
    CubeIndex locate(std::array<double, 2> x, int level) const;

private:
    Grid grid_;
    int max_level_;
};

// maximal elements under inclusion; every input cube is contained in exactly
// one output cube; output sorted by (level, coordinates)
std::vector<CubeIndex> maximal_antichain(std::vector<CubeIndex> cubes);

// |Q ∩ E| / |Q| by sample counting; indicator holds one 0/1 entry per sample
double overlap_fraction(const Grid& g, const CubeIndex& q, const std::vector<std::uint8_t>& indicator);

// per-level cube reductions, levels 0..depth inclusive; entry [l] has one
// value per cube at level l, indexed row-major by cube coordinates
std::vector<std::vector<double>> cube_sum_pyramid(const Grid& g, const std::vector<double>& v, int depth);
std::vector<std::vector<double>> cube_max_pyramid(const Grid& g, const std::vector<double>& v, int depth);
std::vector<std::vector<double>> cube_min_pyramid(const Grid& g, const std::vector<double>& v, int depth);

// per-sample max over levels 0..depth of the containing-cube average of v
std::vector<double> cube_average_maximal(const Grid& g, const std::vector<double>& v, int depth);

} // namespace hardy
