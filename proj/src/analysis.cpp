#include "hardy/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace hardy {

namespace {

void check_grids(const SampledFunction& f, const FilterBank& bank) {
    if (f.grid != bank.grid) throw std::invalid_argument("square function: function and bank grids differ");
}

void check_levels(const FilterBank& bank, const DyadicLattice& lat, int N, const char* what) {
    if (N < 0) throw std::invalid_argument(std::string(what) + ": offset N must be non-negative");
    if (bank.j_max + N > lat.max_level())
        throw std::invalid_argument(std::string(what) + ": level overflow, top scale " +
                                    std::to_string(bank.j_max) + " + offset " + std::to_string(N) +
                                    " exceeds lattice max level " + std::to_string(lat.max_level()));
}

SampledFunction finish_sqrt(SampledFunction acc) {
    for (double& v : acc.values) v = std::sqrt(v);
    return acc;
}

} // namespace

SquareFunctionProfile lp_square_function(const SampledFunction& f, const FilterBank& bank) {
    check_grids(f, bank);
    SampledFunction acc(f.grid);
    for (int j = 0; j <= bank.j_max; ++j) {
        const SampledFunction conv = apply_scale(bank, j, f);
        for (std::size_t i = 0; i < acc.values.size(); ++i) acc.values[i] += conv.values[i] * conv.values[i];
    }
    return {finish_sqrt(std::move(acc)), SquareFunctionVariant::g, 0, &bank, nullptr};
}

SquareFunctionProfile discrete_square_function(const SampledFunction& f, const FilterBank& bank,
                                               const DyadicLattice& lat, int N) {
    check_grids(f, bank);
    if (f.grid != lat.grid()) throw std::invalid_argument("discrete_square_function: lattice grid differs");
    check_levels(bank, lat, N, "discrete_square_function");
    const Grid& g = f.grid;
    SampledFunction acc(g);
    for (int j = 0; j <= bank.j_max; ++j) {
        const SampledFunction conv = apply_scale(bank, j, f);
        const int level = j + N;
        for (const CubeIndex& q : lat.cubes_at_level(level)) {
            const double v = conv.values[static_cast<std::size_t>(cube_corner_sample(g, q))];
            const double v2 = v * v;
            for_each_sample(g, q, [&](std::int64_t i) { acc.values[static_cast<std::size_t>(i)] += v2; });
        }
    }
    return {finish_sqrt(std::move(acc)), SquareFunctionVariant::g_d, N, &bank, &lat};
}

OscillationProfile oscillation_square_function(const SampledFunction& f, const FilterBank& bank,
                                               const DyadicLattice& lat, int N, OscMode mode) {
    check_grids(f, bank);
    if (f.grid != lat.grid()) throw std::invalid_argument("oscillation_square_function: lattice grid differs");
    check_levels(bank, lat, N, "oscillation_square_function");
    const Grid& g = f.grid;
    SampledFunction acc0(g), acc1(g);
    for (int j = 0; j <= bank.j_max; ++j) {
        const SampledFunction conv = apply_scale(bank, j, f);
        SampledFunction& acc = j == 0 ? acc0 : acc1;
        for (const CubeIndex& q : lat.cubes_at_level(j + N)) {
            double ext = mode == OscMode::sup ? 0.0 : std::numeric_limits<double>::infinity();
            for_each_sample(g, q, [&](std::int64_t i) {
                const double a = std::abs(conv.values[static_cast<std::size_t>(i)]);
                ext = mode == OscMode::sup ? std::max(ext, a) : std::min(ext, a);
            });
            const double e2 = ext * ext;
            for_each_sample(g, q, [&](std::int64_t i) { acc.values[static_cast<std::size_t>(i)] += e2; });
        }
    }
    return {{finish_sqrt(std::move(acc0)), SquareFunctionVariant::s0, N, &bank, &lat},
            {finish_sqrt(std::move(acc1)), SquareFunctionVariant::s1, N, &bank, &lat}};
}

SampledFunction hl_maximal(const SampledFunction& f, const DyadicLattice& lat) {
    if (f.grid != lat.grid()) throw std::invalid_argument("hl_maximal: lattice grid differs");
    std::vector<double> av(f.values.size());
    for (std::size_t i = 0; i < av.size(); ++i) av[i] = std::abs(f.values[i]);
    SampledFunction out(f.grid);
    out.values = cube_average_maximal(f.grid, av, lat.max_level());
    return out;
}

SampledFunction fractional_maximal(const SampledFunction& f, double alpha, const DyadicLattice& lat) {
    if (f.grid != lat.grid()) throw std::invalid_argument("fractional_maximal: lattice grid differs");
    const Grid& g = lat.grid();
    if (!(alpha >= 0.0) || alpha >= g.dim())
        throw std::invalid_argument("fractional_maximal: alpha must lie in [0, dim)");
    std::vector<double> av(f.values.size());
    for (std::size_t i = 0; i < av.size(); ++i) av[i] = std::abs(f.values[i]);
    const int depth = lat.max_level();
    const auto sums = cube_sum_pyramid(g, av, depth);
    SampledFunction out(g);
    for (int level = 0; level <= depth; ++level) {
        const std::int64_t per_axis = cube_samples_per_axis(g, level);
        const double count = std::pow(static_cast<double>(per_axis), g.dim());
        const double factor = std::pow(cube_measure(g, CubeIndex{level, {0, 0}}), alpha / g.dim());
        int idx = 0;
        for (const CubeIndex& q : lat.cubes_at_level(level)) {
            const double v = factor * sums[static_cast<std::size_t>(level)][static_cast<std::size_t>(idx++)] / count;
            for_each_sample(g, q, [&](std::int64_t i) {
                double& b = out.values[static_cast<std::size_t>(i)];
                if (v > b) b = v;
            });
        }
    }
    return out;
}

SampledFunction grand_maximal(const SampledFunction& f, const SampledFunction& profile) {
    if (f.grid != profile.grid) throw std::invalid_argument("grand_maximal: profile grid differs");
    const Grid& g = f.grid;
    double mean = 0.0, mass = 0.0;
    for (double v : profile.values) {
        mean += v;
        mass += std::abs(v);
    }
    if (std::abs(mean) <= 1e-12 * std::max(mass, 1.0))
        throw std::invalid_argument("grand_maximal: profile has (numerically) zero mean");

    const std::int64_t ng = g.points_per_axis();
    SampledFunction out(g);
    // maps sample index m to the dilated profile sample, treating the profile
    // as zero outside its fundamental domain (the stretched argument x/t must
    // not wrap around the torus); returns -1 for "outside"
    const auto dilated_index = [ng](std::int64_t m, std::int64_t stride) -> std::int64_t {
        const std::int64_t c = m <= ng / 2 ? m : m - ng; // centered index in (-ng/2, ng/2]
        const std::int64_t idx = c * stride;
        if (idx > ng / 2 || idx <= -ng / 2) return -1;
        return ((idx % ng) + ng) % ng;
    };
    for (int j = 0; j + 2 <= g.log2_points(); ++j) {
        // Phi_t with t = 2^{-j}: exact dilation on the grid, sample stride 2^j
        const std::int64_t stride = std::int64_t{1} << j;
        const double scale = std::exp2(static_cast<double>(j * g.dim()));
        SampledFunction phit(g);
        if (g.dim() == 1) {
            for (std::int64_t m = 0; m < ng; ++m) {
                const std::int64_t src = dilated_index(m, stride);
                if (src >= 0)
                    phit.values[static_cast<std::size_t>(m)] = scale * profile.values[static_cast<std::size_t>(src)];
            }
        } else {
            for (std::int64_t a = 0; a < ng; ++a) {
                const std::int64_t sa = dilated_index(a, stride);
                if (sa < 0) continue;
                for (std::int64_t b = 0; b < ng; ++b) {
                    const std::int64_t sb = dilated_index(b, stride);
                    if (sb >= 0)
                        phit.values[static_cast<std::size_t>(a * ng + b)] =
                            scale * profile.values[static_cast<std::size_t>(sa * ng + sb)];
                }
            }
        }
        const SampledFunction conv = convolve(phit, f);
        for (std::size_t i = 0; i < out.values.size(); ++i)
            out.values[i] = std::max(out.values[i], std::abs(conv.values[i]));
    }
    return out;
}

SampledFunction standard_maximal_profile(const Grid& g) {
    const double half = 0.25 * g.length();
    const auto hump = [half](double x) {
        const double u = x / half;
        if (std::abs(u) >= 1.0) return 0.0;
        return std::exp(-1.0 / (1.0 - u * u));
    };
    SampledFunction phi(g);
    double mass = 0.0;
    for (std::int64_t m = 0; m < g.size(); ++m) {
        const auto x = g.point(m);
        double v = hump(g.centered(x[0]));
        if (g.dim() == 2) v *= hump(g.centered(x[1]));
        phi.values[static_cast<std::size_t>(m)] = v;
        mass += v;
    }
    mass *= g.cell_measure();
    for (double& v : phi.values) v /= mass;
    return phi;
}

double local_hardy_norm(const SampledFunction& f, double p, const Weight& w, const FilterBank& bank,
                        const DyadicLattice& lat, int N) {
    return weighted_lp_norm(discrete_square_function(f, bank, lat, N).values, p, w);
}

std::vector<ScaleEnergy> scale_energies(const SampledFunction& f, const FilterBank& bank) {
    check_grids(f, bank);
    std::vector<ScaleEnergy> rows;
    rows.reserve(static_cast<std::size_t>(bank.j_max) + 1);
    for (int j = 0; j <= bank.j_max; ++j) {
        const SampledFunction conv = apply_scale(bank, j, f);
        rows.push_back({j, lp_norm(conv, 2.0), lp_norm(conv, std::numeric_limits<double>::infinity())});
    }
    return rows;
}

} // namespace hardy
