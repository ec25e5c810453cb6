#include "hardy/dyadic.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

namespace hardy {

double cube_side(const Grid& g, const CubeIndex& q) {
    return g.length() * std::exp2(-q.level);
}

double cube_measure(const Grid& g, const CubeIndex& q) {
    const double l = cube_side(g, q);
    return g.dim() == 1 ? l : l * l;
}

std::array<double, 2> cube_corner(const Grid& g, const CubeIndex& q) {
    const double l = cube_side(g, q);
    return {static_cast<double>(q.coord[0]) * l, static_cast<double>(q.coord[1]) * l};
}

std::int64_t cube_samples_per_axis(const Grid& g, int level) {
    if (level < 0 || level > g.log2_points())
        throw std::invalid_argument("cube_samples_per_axis: level out of range");
    return g.points_per_axis() >> level;
}

std::int64_t cube_corner_sample(const Grid& g, const CubeIndex& q) {
    const std::int64_t per_axis = cube_samples_per_axis(g, q.level);
    if (g.dim() == 1) return q.coord[0] * per_axis;
    return q.coord[0] * per_axis * g.points_per_axis() + q.coord[1] * per_axis;
}

CubeIndex cube_ancestor(const CubeIndex& q, int level) {
    if (level > q.level) throw std::invalid_argument("cube_ancestor: level must not exceed cube level");
    const int shift = q.level - level;
    return CubeIndex{level, {q.coord[0] >> shift, q.coord[1] >> shift}};
}

bool cube_contains(const CubeIndex& outer, const CubeIndex& inner) {
    if (outer.level > inner.level) return false;
    return cube_ancestor(inner, outer.level) == outer;
}

CubeIndex locate_cube(const Grid& g, std::array<double, 2> x, int level) {
    if (level < 0 || level > g.log2_points())
        throw std::invalid_argument("locate_cube: level out of range");
    const std::int64_t cells = std::int64_t{1} << level;
    const double l = g.length() * std::exp2(-level);
    CubeIndex q;
    q.level = level;
    for (int axis = 0; axis < g.dim(); ++axis) {
        double v = std::fmod(x[static_cast<std::size_t>(axis)], g.length());
        if (v < 0) v += g.length();
        std::int64_t c = static_cast<std::int64_t>(std::floor(v / l));
        if (c >= cells) c = cells - 1; // guard the v == L edge after rounding
        q.coord[static_cast<std::size_t>(axis)] = c;
    }
    return q;
}

DyadicLattice::DyadicLattice(const Grid& g) : grid_(g), max_level_(g.log2_points() - 2) {}

std::vector<CubeIndex> DyadicLattice::cubes_at_level(int level) const {
    if (level < 0 || level > max_level_)
        throw std::invalid_argument("cubes_at_level: level must lie in [0, " +
                                    std::to_string(max_level_) + "]");
    const std::int64_t cells = std::int64_t{1} << level;
    std::vector<CubeIndex> out;
    if (grid_.dim() == 1) {
        out.reserve(static_cast<std::size_t>(cells));
        for (std::int64_t c = 0; c < cells; ++c) out.push_back(CubeIndex{level, {c, 0}});
        return out;
    }
    out.reserve(static_cast<std::size_t>(cells * cells));
    for (std::int64_t a = 0; a < cells; ++a)
        for (std::int64_t b = 0; b < cells; ++b) out.push_back(CubeIndex{level, {a, b}});
    return out;
}

CubeIndex DyadicLattice::locate(std::array<double, 2> x, int level) const {
    if (level < 0 || level > max_level_)
        throw std::invalid_argument("locate: level must lie in [0, " +
                                    std::to_string(max_level_) + "]");
    return locate_cube(grid_, x, level);
}

std::vector<CubeIndex> maximal_antichain(std::vector<CubeIndex> cubes) {
    std::sort(cubes.begin(), cubes.end());
    cubes.erase(std::unique(cubes.begin(), cubes.end()), cubes.end());
    std::set<CubeIndex> present(cubes.begin(), cubes.end());
    std::vector<CubeIndex> out;
    for (const auto& q : cubes) {
        bool dominated = false;
        for (int l = 0; l < q.level && !dominated; ++l)
            dominated = present.count(cube_ancestor(q, l)) > 0;
        if (!dominated) out.push_back(q);
    }
    return out; // already sorted by (level, coordinates)
}

double overlap_fraction(const Grid& g, const CubeIndex& q, const std::vector<std::uint8_t>& indicator) {
    if (indicator.size() != static_cast<std::size_t>(g.size()))
        throw std::invalid_argument("overlap_fraction: indicator size does not match grid");
    std::int64_t inside = 0, total = 0;
    for_each_sample(g, q, [&](std::int64_t i) {
        ++total;
        inside += indicator[static_cast<std::size_t>(i)] ? 1 : 0;
    });
    return static_cast<double>(inside) / static_cast<double>(total);
}

namespace {

template <typename Combine>
std::vector<std::vector<double>> build_pyramid(const Grid& g, const std::vector<double>& v,
                                               int depth, Combine&& combine) {
    if (v.size() != static_cast<std::size_t>(g.size()))
        throw std::invalid_argument("pyramid: value size does not match grid");
    if (depth < 0 || depth > g.log2_points())
        throw std::invalid_argument("pyramid: depth out of range");
    const int full = g.log2_points();
    std::vector<std::vector<double>> levels(static_cast<std::size_t>(depth) + 1);
    // finest requested layer built directly from samples, coarser by merging children
    std::vector<double> cur;
    if (g.dim() == 1) {
        cur = v;
        for (int l = full; l > depth; --l) {
            std::vector<double> next(cur.size() / 2);
            for (std::size_t i = 0; i < next.size(); ++i)
                next[i] = combine(cur[2 * i], cur[2 * i + 1]);
            cur.swap(next);
        }
        levels[static_cast<std::size_t>(depth)] = cur;
        for (int l = depth; l > 0; --l) {
            std::vector<double> next(levels[static_cast<std::size_t>(l)].size() / 2);
            const auto& fine = levels[static_cast<std::size_t>(l)];
            for (std::size_t i = 0; i < next.size(); ++i)
                next[i] = combine(fine[2 * i], fine[2 * i + 1]);
            levels[static_cast<std::size_t>(l - 1)] = std::move(next);
        }
        return levels;
    }
    // 2D: cells at level l form a 2^l x 2^l row-major array
    cur = v;
    std::int64_t side = g.points_per_axis();
    auto merge = [&](const std::vector<double>& fine, std::int64_t fine_side) {
        const std::int64_t cs = fine_side / 2;
        std::vector<double> next(static_cast<std::size_t>(cs * cs));
        for (std::int64_t a = 0; a < cs; ++a)
            for (std::int64_t b = 0; b < cs; ++b) {
                const double q00 = fine[static_cast<std::size_t>((2 * a) * fine_side + 2 * b)];
                const double q01 = fine[static_cast<std::size_t>((2 * a) * fine_side + 2 * b + 1)];
                const double q10 = fine[static_cast<std::size_t>((2 * a + 1) * fine_side + 2 * b)];
                const double q11 = fine[static_cast<std::size_t>((2 * a + 1) * fine_side + 2 * b + 1)];
                next[static_cast<std::size_t>(a * cs + b)] = combine(combine(q00, q01), combine(q10, q11));
            }
        return next;
    };
    for (int l = full; l > depth; --l) {
        cur = merge(cur, side);
        side /= 2;
    }
    levels[static_cast<std::size_t>(depth)] = cur;
    for (int l = depth; l > 0; --l) {
        levels[static_cast<std::size_t>(l - 1)] = merge(levels[static_cast<std::size_t>(l)], side);
        side /= 2;
    }
    return levels;
}

} // namespace

std::vector<std::vector<double>> cube_sum_pyramid(const Grid& g, const std::vector<double>& v, int depth) {
    return build_pyramid(g, v, depth, [](double a, double b) { return a + b; });
}

std::vector<std::vector<double>> cube_max_pyramid(const Grid& g, const std::vector<double>& v, int depth) {
    return build_pyramid(g, v, depth, [](double a, double b) { return a > b ? a : b; });
}

std::vector<std::vector<double>> cube_min_pyramid(const Grid& g, const std::vector<double>& v, int depth) {
    return build_pyramid(g, v, depth, [](double a, double b) { return a < b ? a : b; });
}

std::vector<double> cube_average_maximal(const Grid& g, const std::vector<double>& v, int depth) {
    const auto sums = cube_sum_pyramid(g, v, depth);
    std::vector<double> best(v.size(), 0.0);
    for (int level = 0; level <= depth; ++level) {
        const std::int64_t per_axis = cube_samples_per_axis(g, level);
        const double count = std::pow(static_cast<double>(per_axis), g.dim());
        const std::int64_t cubes_per_axis = std::int64_t{1} << level;
        const auto& row = sums[static_cast<std::size_t>(level)];
        for (std::int64_t c = 0; c < static_cast<std::int64_t>(row.size()); ++c) {
            const double avg = row[static_cast<std::size_t>(c)] / count;
            const CubeIndex q{level, g.dim() == 1 ? std::array<std::int64_t, 2>{c, 0}
                                                  : std::array<std::int64_t, 2>{c / cubes_per_axis,
                                                                                c % cubes_per_axis}};
            for_each_sample(g, q, [&](std::int64_t i) {
                double& b = best[static_cast<std::size_t>(i)];
                if (avg > b) b = avg;
            });
        }
    }
    return best;
}

} // namespace hardy
