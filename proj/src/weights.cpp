#include "hardy/weights.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hardy {

namespace {

SampledFunction sample_generator(
    const Grid& g, const std::function<double(std::array<double, 2>, const Grid&)>& gen) {
    SampledFunction f{g, std::vector<double>(static_cast<std::size_t>(g.size()))};
    for (std::int64_t i = 0; i < g.size(); ++i) f.values[static_cast<std::size_t>(i)] = gen(g.point(i), g);
    return f;
}

void require_positive(const SampledFunction& f, const std::string& what) {
    for (double v : f.values)
        if (!(v > 0.0) || !std::isfinite(v))
            throw std::invalid_argument(what + ": weight values must be finite and positive");
}

double parse_number(const std::string& s, const std::string& what) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument(what + ": cannot parse number '" + s + "'");
    }
    if (used != s.size()) throw std::invalid_argument(what + ": trailing characters in '" + s + "'");
    return v;
}

// torus distance from x to the domain center, floored at half a mesh cell so
// the singular sample stays positive (and sharpens under refinement)
double regularized_center_distance(const std::array<double, 2>& x, const Grid& g) {
    double r2 = 0.0;
    for (int d = 0; d < g.dim(); ++d) {
        const double dd = g.axis_distance(x[static_cast<std::size_t>(d)], 0.5 * g.length());
        r2 += dd * dd;
    }
    return std::max(std::sqrt(r2), 0.5 * g.mesh());
}

} // namespace

Weight make_weight(const Grid& g, const std::string& preset) {
    using Gen = std::function<double(std::array<double, 2>, const Grid&)>;
    if (preset == "constant") {
        Gen gen = [](std::array<double, 2>, const Grid&) { return 1.0; };
        return Weight{sample_generator(g, gen), gen, preset};
    }
    if (preset.rfind("power:", 0) == 0) {
        const double a = parse_number(preset.substr(6), "make_weight power");
        if (a <= -g.dim())
            throw std::invalid_argument("make_weight: power exponent must exceed -dim for an integrable weight");
        Gen gen = [a](std::array<double, 2> x, const Grid& gg) {
            return std::pow(regularized_center_distance(x, gg), a);
        };
        return Weight{sample_generator(g, gen), gen, preset};
    }
    if (preset.rfind("two-valued:", 0) == 0) {
        const std::string rest = preset.substr(11);
        const auto comma = rest.find(',');
        if (comma == std::string::npos)
            throw std::invalid_argument("make_weight: two-valued preset needs two comma-separated values");
        const double c1 = parse_number(rest.substr(0, comma), "make_weight two-valued");
        const double c2 = parse_number(rest.substr(comma + 1), "make_weight two-valued");
        if (!(c1 > 0.0) || !(c2 > 0.0))
            throw std::invalid_argument("make_weight: two-valued constants must be positive");
        Gen gen = [c1, c2](std::array<double, 2> x, const Grid& gg) {
            return x[0] < 0.5 * gg.length() ? c1 : c2;
        };
        return Weight{sample_generator(g, gen), gen, preset};
    }
    if (preset.rfind("file:", 0) == 0) {
        const std::string path = preset.substr(5);
        SampledFunction vals = (path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0)
                                   ? read_json_function(path)
                                   : read_hlgf(path);
        if (vals.grid != g)
            throw std::invalid_argument("make_weight: file grid does not match the requested grid");
        require_positive(vals, "make_weight");
        return Weight{std::move(vals), std::nullopt, preset};
    }
    throw std::invalid_argument("make_weight: unknown preset '" + preset + "'");
}

Weight resample_weight(const Weight& w, const Grid& g) {
    if (!w.generator)
        throw std::invalid_argument("resample_weight: weight has no analytic generator (file-based weight?)");
    return Weight{sample_generator(g, *w.generator), w.generator, w.description};
}

double cube_mass(const Weight& w, const CubeIndex& q) {
    const Grid& g = w.values.grid;
    double s = 0.0;
    for_each_sample(g, q, [&](std::int64_t i) { s += w.values.values[static_cast<std::size_t>(i)]; });
    return s * g.cell_measure();
}

double total_mass(const Weight& w) {
    double s = 0.0;
    for (double v : w.values.values) s += v;
    return s * w.values.grid.cell_measure();
}

namespace {

std::vector<double> powered(const std::vector<double>& v, double e) {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::pow(v[i], e);
    return out;
}

double samples_per_cube(const Grid& g, int level) {
    return std::pow(static_cast<double>(cube_samples_per_axis(g, level)), g.dim());
}

} // namespace

double ap_constant(const Weight& w, double p, const DyadicLattice& lat) {
    if (w.values.grid != lat.grid()) throw std::invalid_argument("ap_constant: weight and lattice grids differ");
    if (!(p >= 1.0)) throw std::invalid_argument("ap_constant: p must be at least 1");
    const Grid& g = lat.grid();
    const int depth = lat.max_level();
    if (p == 1.0) {
        const auto m = cube_average_maximal(g, w.values.values, depth);
        double best = 0.0;
        for (std::size_t i = 0; i < m.size(); ++i) best = std::max(best, m[i] / w.values.values[i]);
        return best;
    }
    const auto sums_w = cube_sum_pyramid(g, w.values.values, depth);
    const auto sums_s = cube_sum_pyramid(g, powered(w.values.values, -1.0 / (p - 1.0)), depth);
    double best = 0.0;
    for (int level = 0; level <= depth; ++level) {
        const double count = samples_per_cube(g, level);
        const auto& sw = sums_w[static_cast<std::size_t>(level)];
        const auto& ss = sums_s[static_cast<std::size_t>(level)];
        for (std::size_t c = 0; c < sw.size(); ++c)
            best = std::max(best, (sw[c] / count) * std::pow(ss[c] / count, p - 1.0));
    }
    return best;
}

double rh_constant(const Weight& w, double r, const DyadicLattice& lat) {
    if (w.values.grid != lat.grid()) throw std::invalid_argument("rh_constant: weight and lattice grids differ");
    if (!(r > 1.0)) throw std::invalid_argument("rh_constant: r must exceed 1");
    const Grid& g = lat.grid();
    const int depth = lat.max_level();
    const auto sums_w = cube_sum_pyramid(g, w.values.values, depth);
    const auto sums_r = cube_sum_pyramid(g, powered(w.values.values, r), depth);
    double best = 0.0;
    for (int level = 0; level <= depth; ++level) {
        const double count = samples_per_cube(g, level);
        const auto& sw = sums_w[static_cast<std::size_t>(level)];
        const auto& sr = sums_r[static_cast<std::size_t>(level)];
        for (std::size_t c = 0; c < sw.size(); ++c)
            best = std::max(best, std::pow(sr[c] / count, 1.0 / r) / (sw[c] / count));
    }
    return best;
}

double apq_constant(const Weight& w, double p, double q, const DyadicLattice& lat) {
    if (w.values.grid != lat.grid()) throw std::invalid_argument("apq_constant: weight and lattice grids differ");
    if (!(p >= 1.0) || !(q > 0.0)) throw std::invalid_argument("apq_constant: need p >= 1 and q > 0");
    const Grid& g = lat.grid();
    const int depth = lat.max_level();
    const auto sums_q = cube_sum_pyramid(g, powered(w.values.values, q), depth);
    double best = 0.0;
    if (p == 1.0) {
        const auto mins = cube_min_pyramid(g, w.values.values, depth);
        for (int level = 0; level <= depth; ++level) {
            const double count = samples_per_cube(g, level);
            const auto& sq = sums_q[static_cast<std::size_t>(level)];
            const auto& mn = mins[static_cast<std::size_t>(level)];
            for (std::size_t c = 0; c < sq.size(); ++c)
                best = std::max(best, std::pow(sq[c] / count, 1.0 / q) / mn[c]);
        }
        return best;
    }
    const double pprime = p / (p - 1.0);
    const auto sums_s = cube_sum_pyramid(g, powered(w.values.values, -pprime), depth);
    for (int level = 0; level <= depth; ++level) {
        const double count = samples_per_cube(g, level);
        const auto& sq = sums_q[static_cast<std::size_t>(level)];
        const auto& ss = sums_s[static_cast<std::size_t>(level)];
        for (std::size_t c = 0; c < sq.size(); ++c)
            best = std::max(best,
                            std::pow(sq[c] / count, 1.0 / q) * std::pow(ss[c] / count, 1.0 / pprime));
    }
    return best;
}

CriticalIndexResult critical_index(const Weight& w, const DyadicLattice& lat, double blowup_threshold) {
    if (!(blowup_threshold > 1.0))
        throw std::invalid_argument("critical_index: blowup threshold must exceed 1");
    if (!w.generator)
        throw std::invalid_argument("critical_index: weight has no analytic generator to resample on a refined grid");
    const Grid& g = lat.grid();
    const Grid fine(g.dim(), 2 * g.points_per_axis(), g.length());
    const Weight wf = resample_weight(w, fine);
    const DyadicLattice lat_fine(fine);

    // growth of the A_p constant under one refinement; at the critical index
    // the constant grows like a power of log(N) with exponent p-1 (exponent 1
    // at p = 1), so the stability cutoff is scaled accordingly
    const auto ratio = [&](double p) { return ap_constant(wf, p, lat_fine) / ap_constant(w, p, lat); };
    const auto member = [&](double p, double r) {
        const double cutoff = p <= 1.0 ? blowup_threshold
                                       : std::max(std::pow(blowup_threshold, p - 1.0), 1.0 + 1e-9);
        return r <= cutoff;
    };

    double r1 = ratio(1.0);
    if (member(1.0, r1)) return {1.0, blowup_threshold, r1};

    double lo = 1.0, hi = 2.0, rhi = ratio(hi);
    while (!member(hi, rhi)) {
        lo = hi;
        hi *= 2.0;
        if (hi > 64.0)
            throw std::runtime_error("critical_index: no stable exponent up to 64, weight looks outside every A_p");
        rhi = ratio(hi);
    }
    while (hi - lo > 0.05) {
        const double mid = 0.5 * (lo + hi);
        const double rm = ratio(mid);
        if (member(mid, rm)) {
            hi = mid;
            rhi = rm;
        } else {
            lo = mid;
        }
    }
    return {hi, blowup_threshold, rhi};
}

double weighted_lp_norm(const SampledFunction& f, double p, const Weight& w) {
    if (f.grid != w.values.grid) throw std::invalid_argument("weighted_lp_norm: grids differ");
    if (!(p > 0.0)) throw std::invalid_argument("weighted_lp_norm: p must be positive");
    if (std::isinf(p)) {
        double m = 0.0;
        for (double v : f.values) m = std::max(m, std::abs(v));
        return m;
    }
    double s = 0.0;
    for (std::size_t i = 0; i < f.values.size(); ++i)
        s += std::pow(std::abs(f.values[i]), p) * w.values.values[i];
    return std::pow(s * f.grid.cell_measure(), 1.0 / p);
}

} // namespace hardy
