#include "hardy/filters.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace hardy {

namespace {

constexpr double kHalfPi = 1.57079632679489661923;

double window_value(int scale, int j_max, double nu) {
    if (scale == 0) {
        if (nu <= 1.0) return 1.0;
        if (nu >= 2.0) return 0.0;
        return std::cos(kHalfPi * smooth_step(nu - 1.0));
    }
    const double lo = std::exp2(scale - 1);
    const double mid = std::exp2(scale);
    if (nu <= lo) return 0.0;
    if (nu < mid) return std::sin(kHalfPi * smooth_step((nu - lo) / lo));
    if (scale == j_max) return 1.0; // flattened top closes the partition at Nyquist
    if (nu >= 2.0 * mid) return 0.0;
    return std::cos(kHalfPi * smooth_step((nu - mid) / mid));
}

SampledFunction spatial_filter(const Grid& g, const std::vector<double>& window) {
    std::vector<std::complex<double>> spec(window.size());
    for (std::size_t i = 0; i < window.size(); ++i) spec[i] = window[i];
    SampledFunction psi = inverse_spectrum(spec, g);
    const double inv_hn = 1.0 / g.cell_measure();
    for (auto& v : psi.values) v *= inv_hn;
    return psi;
}

} // namespace

namespace {

double bump(double u) {
    const double s = 1.0 - u * u;
    return s > 0.0 ? std::exp(-1.0 / s) : 0.0;
}

// cumulative integral of the bump over [-1, 1], composite Simpson on a fixed
// fine mesh; built once, thread-safe through the magic static
struct BumpIntegralTable {
    static constexpr int kIntervals = 1 << 14;
    std::vector<double> cdf;
    double mesh;
    double total;

    BumpIntegralTable() : cdf(kIntervals + 1, 0.0), mesh(2.0 / kIntervals), total(0.0) {
        for (int i = 0; i < kIntervals; ++i) {
            const double a = -1.0 + i * mesh;
            const double b = a + mesh;
            total += (bump(a) + 4.0 * bump(0.5 * (a + b)) + bump(b)) * mesh / 6.0;
            cdf[static_cast<std::size_t>(i) + 1] = total;
        }
        for (auto& v : cdf) v /= total;
    }

    // cubic Hermite between table nodes; the exact derivative of the
    // normalized cdf is bump(u)/total
    double eval(double u) const {
        if (u <= -1.0) return 0.0;
        if (u >= 1.0) return 1.0;
        const double pos = (u + 1.0) / mesh;
        int i = static_cast<int>(pos);
        if (i >= kIntervals) i = kIntervals - 1;
        const double t = pos - i;
        const double a = -1.0 + i * mesh;
        const double f0 = cdf[static_cast<std::size_t>(i)];
        const double f1 = cdf[static_cast<std::size_t>(i) + 1];
        const double d0 = bump(a) * mesh / total;
        const double d1 = bump(a + mesh) * mesh / total;
        const double t2 = t * t, t3 = t2 * t;
        return (2 * t3 - 3 * t2 + 1) * f0 + (t3 - 2 * t2 + t) * d0 +
               (-2 * t3 + 3 * t2) * f1 + (t3 - t2) * d1;
    }
};

const BumpIntegralTable& bump_table() {
    static const BumpIntegralTable table;
    return table;
}

} // namespace

double smooth_step(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    return bump_table().eval(2.0 * t - 1.0);
}

FilterBank build_filter_bank(const Grid& g, int j_max) {
    const int admissible = g.log2_points() - 2;
    if (j_max < 1)
        throw std::invalid_argument("build_filter_bank: j_max must be at least 1");
    if (j_max > admissible)
        throw std::invalid_argument(
            "build_filter_bank: top band 2^{j_max+1} exceeds the Nyquist frequency; "
            "maximum admissible j_max for this grid is " + std::to_string(admissible));
    FilterBank bank{g, j_max, {}, {}};
    const std::int64_t total = g.size();
    bank.windows.resize(static_cast<std::size_t>(j_max) + 1);
    for (int s = 0; s <= j_max; ++s) {
        auto& w = bank.windows[static_cast<std::size_t>(s)];
        w.resize(static_cast<std::size_t>(total));
        for (std::int64_t k = 0; k < total; ++k)
            w[static_cast<std::size_t>(k)] = window_value(s, j_max, frequency_radius(g, k));
    }
    bank.psi.reserve(bank.windows.size());
    for (const auto& w : bank.windows) bank.psi.push_back(spatial_filter(g, w));
    return bank;
}

FilterBank filter_bank_from_windows(const Grid& g, std::vector<std::vector<double>> windows) {
    if (windows.empty())
        throw std::invalid_argument("filter_bank_from_windows: need at least one window");
    for (const auto& w : windows)
        if (w.size() != static_cast<std::size_t>(g.size()))
            throw std::invalid_argument("filter_bank_from_windows: window size does not match grid");
    FilterBank bank{g, static_cast<int>(windows.size()) - 1, std::move(windows), {}};
    bank.psi.reserve(bank.windows.size());
    for (const auto& w : bank.windows) bank.psi.push_back(spatial_filter(g, w));
    return bank;
}

double calderon_residual(const FilterBank& bank) {
    const std::size_t total = bank.windows.front().size();
    double worst = 0.0;
    for (std::size_t k = 0; k < total; ++k) {
        double sum = 0.0;
        for (const auto& w : bank.windows) sum += w[k] * w[k];
        worst = std::max(worst, std::fabs(1.0 - sum));
    }
    return worst;
}

SampledFunction apply_scale(const FilterBank& bank, int scale, const SampledFunction& f) {
    if (scale < 0 || scale > bank.j_max)
        throw std::invalid_argument("apply_scale: scale out of range");
    if (f.grid != bank.grid)
        throw std::invalid_argument("apply_scale: grid does not match bank");
    return apply_symbol(f, bank.windows[static_cast<std::size_t>(scale)]);
}

namespace {

double monomial_moment(const SampledFunction& psi, int a0, int a1) {
    const Grid& g = psi.grid;
    double acc = 0.0;
    for (std::int64_t i = 0; i < g.size(); ++i) {
        const auto pt = g.point(i);
        double m = 1.0;
        if (a0 > 0) m *= std::pow(g.centered(pt[0]), a0);
        if (a1 > 0) m *= std::pow(g.centered(pt[1]), a1);
        acc += psi[i] * m;
    }
    return acc * g.cell_measure();
}

} // namespace

MomentReport moment_errors(const FilterBank& bank, int s) {
    if (s < 0 || s > 8)
        throw std::invalid_argument("moment_errors: degree must lie in [0, 8]");
    MomentReport rep;
    rep.low_pass_mass = monomial_moment(bank.psi[0], 0, 0);
    rep.by_degree.resize(static_cast<std::size_t>(bank.j_max));
    rep.per_scale_max.assign(static_cast<std::size_t>(bank.j_max), 0.0);
    for (int j = 1; j <= bank.j_max; ++j) {
        auto& row = rep.by_degree[static_cast<std::size_t>(j - 1)];
        row.assign(static_cast<std::size_t>(s) + 1, 0.0);
        for (int deg = 0; deg <= s; ++deg) {
            double worst = 0.0;
            if (bank.grid.dim() == 1) {
                worst = std::fabs(monomial_moment(bank.psi[static_cast<std::size_t>(j)], deg, 0));
            } else {
                for (int a0 = 0; a0 <= deg; ++a0)
                    worst = std::max(worst,
                                     std::fabs(monomial_moment(
                                         bank.psi[static_cast<std::size_t>(j)], a0, deg - a0)));
            }
            row[static_cast<std::size_t>(deg)] = worst;
            rep.per_scale_max[static_cast<std::size_t>(j - 1)] =
                std::max(rep.per_scale_max[static_cast<std::size_t>(j - 1)], worst);
        }
    }
    return rep;
}

std::vector<double> spatial_tail_mass(const FilterBank& bank, double radius_units) {
    if (!(radius_units >= 0.0))
        throw std::invalid_argument("spatial_tail_mass: radius must be nonnegative");
    std::vector<double> out;
    out.reserve(bank.psi.size());
    const Grid& g = bank.grid;
    for (int s = 0; s < static_cast<int>(bank.psi.size()); ++s) {
        const double radius = radius_units * std::exp2(-s) * g.length();
        const auto& psi = bank.psi[static_cast<std::size_t>(s)];
        double total = 0.0, outside = 0.0;
        for (std::int64_t i = 0; i < g.size(); ++i) {
            const auto pt = g.point(i);
            double dist = g.axis_distance(pt[0], 0.0);
            if (g.dim() == 2) dist = std::max(dist, g.axis_distance(pt[1], 0.0));
            const double mass = std::fabs(psi[i]);
            total += mass;
            if (dist > radius) outside += mass;
        }
        out.push_back(total > 0.0 ? outside / total : 0.0);
    }
    return out;
}

} // namespace hardy
