#include "hardy/fixtures.hpp"

#include <cmath>
#include <stdexcept>

#include "hardy/dyadic.hpp"

namespace hardy {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

double hump(double u) { return std::abs(u) < 1.0 ? std::exp(-1.0 / (1.0 - u * u)) : 0.0; }

// dense solve by gaussian elimination with partial pivoting; the systems here
// are small gram matrices (at most 15 unknowns)
std::vector<double> solve_dense(std::vector<std::vector<double>> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        std::swap(a[col], a[piv]);
        std::swap(b[col], b[piv]);
        if (a[col][col] == 0.0) throw std::runtime_error("solve_dense: singular gram matrix");
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            if (f == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t r = n; r-- > 0;) {
        double acc = b[r];
        for (std::size_t c = r + 1; c < n; ++c) acc -= a[r][c] * x[c];
        x[r] = acc / a[r][r];
    }
    return x;
}

// multi-indices of total degree <= s (second entry 0 in 1D)
std::vector<std::array<int, 2>> monomials_up_to(int dim, int s) {
    std::vector<std::array<int, 2>> out;
    for (int d = 0; d <= s; ++d) {
        if (dim == 1) {
            out.push_back({d, 0});
        } else {
            for (int a0 = d; a0 >= 0; --a0) out.push_back({a0, d - a0});
        }
    }
    return out;
}

} // namespace

SampledFunction bump_function(const Grid& g, std::array<double, 2> center, double halfwidth,
                              double amplitude) {
    if (halfwidth <= 0.0) throw std::invalid_argument("bump_function: halfwidth must be positive");
    SampledFunction f(g);
    for (std::int64_t m = 0; m < g.size(); ++m) {
        const auto x = g.point(m);
        double v = hump(g.axis_distance(x[0], center[0]) / halfwidth);
        if (g.dim() == 2) v *= hump(g.axis_distance(x[1], center[1]) / halfwidth);
        f.values[static_cast<std::size_t>(m)] = amplitude * v;
    }
    return f;
}

SampledFunction fourier_mode(const Grid& g, std::array<std::int64_t, 2> k, double phase) {
    SampledFunction f(g);
    const double w = kTwoPi / g.length();
    for (std::int64_t m = 0; m < g.size(); ++m) {
        const auto x = g.point(m);
        double arg = w * static_cast<double>(k[0]) * x[0] + phase;
        if (g.dim() == 2) arg += w * static_cast<double>(k[1]) * x[1];
        f.values[static_cast<std::size_t>(m)] = std::cos(arg);
    }
    return f;
}

SampledFunction white_noise(const Grid& g, Rng& rng) {
    SampledFunction f(g);
    for (double& v : f.values) v = rng.normal();
    return f;
}

SampledFunction band_noise(const Grid& g, int j_lo, int j_hi, Rng& rng) {
    if (j_lo < 0 || j_hi < j_lo) throw std::invalid_argument("band_noise: need 0 <= j_lo <= j_hi");
    const std::int64_t k_lo = std::int64_t{1} << j_lo;
    const std::int64_t k_hi = std::int64_t{1} << j_hi;
    if (2 * k_hi > g.points_per_axis())
        throw std::invalid_argument("band_noise: band reaches past the Nyquist frequency");
    SampledFunction f(g);
    const double w = kTwoPi / g.length();
    const auto add_mode = [&](std::int64_t k0, std::int64_t k1) {
        const double amp = rng.normal();
        const double phase = rng.uniform(0.0, kTwoPi);
        for (std::int64_t m = 0; m < g.size(); ++m) {
            const auto x = g.point(m);
            double arg = w * static_cast<double>(k0) * x[0] + phase;
            if (g.dim() == 2) arg += w * static_cast<double>(k1) * x[1];
            f.values[static_cast<std::size_t>(m)] += amp * std::cos(arg);
        }
    };
    if (g.dim() == 1) {
        for (std::int64_t k = k_lo; k <= k_hi; ++k) add_mode(k, 0);
        return f;
    }
    for (std::int64_t k0 = 0; k0 <= k_hi; ++k0)
        for (std::int64_t k1 = -k_hi; k1 <= k_hi; ++k1) {
            if (k0 == 0 && k1 <= 0) continue; // one representative per +-k pair
            const double r = std::hypot(static_cast<double>(k0), static_cast<double>(k1));
            if (r < static_cast<double>(k_lo) || r > static_cast<double>(k_hi)) continue;
            add_mode(k0, k1);
        }
    return f;
}

std::vector<SampledFunction> random_family(const Grid& g, int count, Rng& rng) {
    const double L = g.length();
    std::vector<SampledFunction> fam;
    fam.reserve(static_cast<std::size_t>(count));
    const auto center = [&] {
        std::array<double, 2> c{rng.uniform(0.0, L), 0.0};
        if (g.dim() == 2) c[1] = rng.uniform(0.0, L);
        return c;
    };
    const auto gaussian = [&](std::array<double, 2> c, double sigma, double amp) {
        SampledFunction f(g);
        for (std::int64_t m = 0; m < g.size(); ++m) {
            const auto x = g.point(m);
            double d2 = std::pow(g.axis_distance(x[0], c[0]), 2);
            if (g.dim() == 2) d2 += std::pow(g.axis_distance(x[1], c[1]), 2);
            f.values[static_cast<std::size_t>(m)] = amp * std::exp(-d2 / (sigma * sigma));
        }
        return f;
    };
    for (int i = 0; i < count; ++i) {
        switch (i % 4) {
        case 0: { // periodized gaussian
            const auto c = center();
            const double sigma = L * std::exp2(rng.uniform(-6.0, -3.0));
            const double amp = rng.uniform(0.5, 2.0) * (rng.bits() & 1 ? 1.0 : -1.0);
            fam.push_back(gaussian(c, sigma, amp));
            break;
        }
        case 1: { // modulated bump
            const auto c = center();
            const double hw = L * rng.uniform(1.0 / 32.0, 1.0 / 8.0);
            const auto k = rng.uniform_int(2, 16);
            const double phase = rng.uniform(0.0, kTwoPi);
            const double amp = rng.uniform(0.5, 2.0);
            SampledFunction f = bump_function(g, c, hw, amp);
            for (std::int64_t m = 0; m < g.size(); ++m)
                f.values[static_cast<std::size_t>(m)] *=
                    std::cos(kTwoPi * static_cast<double>(k) * g.point(m)[0] / L + phase);
            fam.push_back(std::move(f));
            break;
        }
        case 2: { // dyadic step function
            const int level = g.dim() == 1 ? 3 : 2;
            const std::int64_t per_axis = std::int64_t{1} << level;
            std::vector<double> cells(static_cast<std::size_t>(
                g.dim() == 1 ? per_axis : per_axis * per_axis));
            for (double& v : cells) v = rng.uniform(-1.0, 1.0);
            SampledFunction f(g);
            for (std::int64_t m = 0; m < g.size(); ++m) {
                const auto x = g.point(m);
                const auto cell = [&](double t) {
                    auto c = static_cast<std::int64_t>(t / L * static_cast<double>(per_axis));
                    return std::min(c, per_axis - 1);
                };
                const std::int64_t id =
                    g.dim() == 1 ? cell(x[0]) : cell(x[0]) * per_axis + cell(x[1]);
                f.values[static_cast<std::size_t>(m)] = cells[static_cast<std::size_t>(id)];
            }
            fam.push_back(std::move(f));
            break;
        }
        default: { // two-gaussian mixture
            const auto c1 = center(), c2 = center();
            const double s1 = L * std::exp2(rng.uniform(-6.0, -3.0));
            const double s2 = L * std::exp2(rng.uniform(-6.0, -3.0));
            const double a1 = rng.uniform(0.5, 2.0), a2 = -rng.uniform(0.5, 2.0);
            SampledFunction f = gaussian(c1, s1, a1);
            const SampledFunction h = gaussian(c2, s2, a2);
            for (std::size_t m = 0; m < f.values.size(); ++m) f.values[m] += h.values[m];
            fam.push_back(std::move(f));
            break;
        }
        }
    }
    return fam;
}

std::vector<SampledFunction> molecule_family(const Grid& g, int count, Rng& rng) {
    const double L = g.length();
    std::vector<SampledFunction> fam;
    fam.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        const double hw = L * rng.uniform(1.0 / 64.0, 1.0 / 16.0);
        std::array<double, 2> c{rng.uniform(0.0, L), 0.0};
        std::array<double, 2> shift{rng.uniform(0.1, 0.25) * L, 0.0};
        if (g.dim() == 2) {
            c[1] = rng.uniform(0.0, L);
            shift[1] = rng.uniform(0.1, 0.25) * L;
        }
        const double amp = rng.uniform(0.5, 2.0);
        SampledFunction a = bump_function(g, c, hw, amp);
        const SampledFunction b =
            bump_function(g, {c[0] + shift[0], c[1] + shift[1]}, hw, amp);
        for (std::size_t m = 0; m < a.values.size(); ++m) a.values[m] -= b.values[m];
        fam.push_back(std::move(a));
    }
    return fam;
}

CalibrationFamily calibration_family(const Grid& g, Rng& rng) {
    CalibrationFamily fam;
    fam.description = "white-noise:3 bumps:3 modes:3";
    for (int i = 0; i < 3; ++i) fam.members.push_back(white_noise(g, rng));
    const double L = g.length();
    for (int i = 0; i < 3; ++i) {
        std::array<double, 2> c{rng.uniform(0.0, L), 0.0};
        if (g.dim() == 2) c[1] = rng.uniform(0.0, L);
        fam.members.push_back(bump_function(g, c, L * rng.uniform(1.0 / 32.0, 0.25), 1.0));
    }
    const std::int64_t k_max = std::max<std::int64_t>(g.points_per_axis() / 4, 1);
    for (int i = 0; i < 3; ++i) {
        std::array<std::int64_t, 2> k{rng.uniform_int(1, k_max), 0};
        if (g.dim() == 2) k[1] = rng.uniform_int(0, k_max);
        fam.members.push_back(fourier_mode(g, k, rng.uniform(0.0, kTwoPi)));
    }
    return fam;
}

Decomposition synthetic_decomposition(const Grid& g, int atom_count, int block_count, double p,
                                      double q, int s, int N, const Weight& w, Rng& rng) {
    if (p <= 0.0) throw std::invalid_argument("synthetic_decomposition: p must be positive");
    if (q <= 1.0) throw std::invalid_argument("synthetic_decomposition: q must exceed 1");
    if (s < -1) throw std::invalid_argument("synthetic_decomposition: s must be at least -1");
    if (N < 0) throw std::invalid_argument("synthetic_decomposition: N must be non-negative");
    if (N + 4 > g.log2_points() - 2)
        throw std::invalid_argument(
            "synthetic_decomposition: grid too small for atom levels N+1 .. N+4");
    if (w.values.grid != g) throw std::invalid_argument("synthetic_decomposition: weight grid differs");

    Decomposition dec;
    dec.grid = g;
    dec.p = p;
    dec.q = q;
    dec.s = s;
    dec.N = N;
    dec.j_max = g.log2_points() - 2 - N;

    const double hn = g.cell_measure();
    // L^q budget over the masked support region: |R|^{1/q} * w(R)^{-1/p}
    const auto budget_over = [&](const std::vector<std::uint8_t>& mask) {
        double meas = 0.0, wmass = 0.0;
        for (std::size_t m = 0; m < mask.size(); ++m) {
            if (!mask[m]) continue;
            meas += 1.0;
            wmass += w.values.values[m];
        }
        return std::pow(meas * hn, 1.0 / q) * std::pow(wmass * hn, -1.0 / p);
    };
    // window * (offset + oscillation): guaranteed non-polynomial content so
    // the moment projection below never annihilates it
    const auto filled_window = [&](const CubeIndex& base, double halfwidth) {
        const auto corner = cube_corner(g, base);
        const double side = cube_side(g, base);
        std::array<double, 2> c{corner[0] + 0.5 * side, 0.0};
        if (g.dim() == 2) c[1] = corner[1] + 0.5 * side;
        SampledFunction window = bump_function(g, c, halfwidth, 1.0);
        const double c0 = rng.uniform(-1.0, 1.0);
        const double c1 = (rng.bits() & 1 ? 1.0 : -1.0) * rng.uniform(0.5, 1.5);
        const auto freq = rng.uniform_int(3, 8);
        const double phase = rng.uniform(0.0, kTwoPi);
        SampledFunction raw = window;
        for (std::int64_t m = 0; m < g.size(); ++m) {
            const double x0 = g.point(m)[0];
            raw.values[static_cast<std::size_t>(m)] *=
                c0 + c1 * std::sin(kTwoPi * static_cast<double>(freq) * x0 / g.length() + phase);
        }
        return std::pair{std::move(window), std::move(raw)};
    };
    // subtract the window-weighted polynomial that matches all moments of
    // degree <= s, in the same centered and side-scaled coordinates the
    // certificate measures
    const auto project_moments = [&](SampledFunction& raw, const SampledFunction& window,
                                     const CubeIndex& base) {
        if (s < 0) return;
        const auto corner = cube_corner(g, base);
        const double side = cube_side(g, base);
        const auto monos = monomials_up_to(g.dim(), s);
        const std::size_t k = monos.size();
        std::vector<std::vector<double>> basis(k);
        for (std::size_t b = 0; b < k; ++b) {
            basis[b].resize(static_cast<std::size_t>(g.size()));
            for (std::int64_t m = 0; m < g.size(); ++m) {
                const auto x = g.point(m);
                double t = window.values[static_cast<std::size_t>(m)];
                if (t != 0.0) {
                    const double t0 = g.centered(x[0] - (corner[0] + 0.5 * side)) / side;
                    for (int e = 0; e < monos[b][0]; ++e) t *= t0;
                    if (g.dim() == 2) {
                        const double t1 = g.centered(x[1] - (corner[1] + 0.5 * side)) / side;
                        for (int e = 0; e < monos[b][1]; ++e) t *= t1;
                    }
                }
                basis[b][static_cast<std::size_t>(m)] = t;
            }
        }
        // moments of a function against the scaled monomials
        const auto moments_of = [&](const std::vector<double>& v) {
            std::vector<double> out(k, 0.0);
            for (std::size_t b = 0; b < k; ++b) {
                double acc = 0.0;
                for (std::int64_t m = 0; m < g.size(); ++m) {
                    const auto x = g.point(m);
                    double t = v[static_cast<std::size_t>(m)];
                    if (t == 0.0) continue;
                    const double t0 = g.centered(x[0] - (corner[0] + 0.5 * side)) / side;
                    for (int e = 0; e < monos[b][0]; ++e) t *= t0;
                    if (g.dim() == 2) {
                        const double t1 = g.centered(x[1] - (corner[1] + 0.5 * side)) / side;
                        for (int e = 0; e < monos[b][1]; ++e) t *= t1;
                    }
                    acc += t;
                }
                out[b] = acc;
            }
            return out;
        };
        std::vector<std::vector<double>> gram(k, std::vector<double>(k));
        for (std::size_t b = 0; b < k; ++b) {
            const auto col = moments_of(basis[b]);
            for (std::size_t a = 0; a < k; ++a) gram[a][b] = col[a];
        }
        const auto coef = solve_dense(std::move(gram), moments_of(raw.values));
        for (std::size_t b = 0; b < k; ++b)
            for (std::size_t m = 0; m < raw.values.size(); ++m)
                raw.values[m] -= coef[b] * basis[b][m];
    };

    for (int i = 0; i < atom_count; ++i) {
        CubeIndex base{N + 1 + static_cast<int>(rng.uniform_int(0, 3)), {0, 0}};
        const std::int64_t cells = std::int64_t{1} << base.level;
        base.coord[0] = rng.uniform_int(0, cells - 1);
        if (g.dim() == 2) base.coord[1] = rng.uniform_int(0, cells - 1);
        const int factor = 1 << (N + 3);
        const double hw = cube_side(g, base) * static_cast<double>(factor) * rng.uniform(0.2, 0.45);
        auto [window, raw] = filled_window(base, hw);
        project_moments(raw, window, base);
        const double piece_q = lp_norm(raw, q);
        if (piece_q == 0.0) throw std::runtime_error("synthetic_decomposition: degenerate atom draw");
        const double scale = budget_over(enlarged_cube_mask(g, base, factor)) / piece_q;
        for (double& v : raw.values) v *= scale;
        dec.atoms.push_back(Atom{base, factor, std::move(raw), std::exp2(rng.uniform(-2.0, 2.0)), 0,
                                 p, q, s, 0.0});
    }

    for (int i = 0; i < block_count; ++i) {
        CubeIndex base{N, {0, 0}};
        const std::int64_t cells = std::int64_t{1} << N;
        base.coord[0] = rng.uniform_int(0, cells - 1);
        if (g.dim() == 2) base.coord[1] = rng.uniform_int(0, cells - 1);
        const int factor = 1 << (N + 2);
        const double hw = cube_side(g, base) * rng.uniform(0.3, 0.45);
        auto [window, raw] = filled_window(base, hw);
        (void)window;
        const double piece_q = lp_norm(raw, q);
        if (piece_q == 0.0) throw std::runtime_error("synthetic_decomposition: degenerate block draw");
        const double scale = budget_over(enlarged_cube_mask(g, base, factor)) / piece_q;
        for (double& v : raw.values) v *= scale;
        const double mu = std::exp2(rng.uniform(-2.0, 2.0));
        dec.blocks.push_back(Block{base, factor, std::move(raw), mu, mu, 0, p, q});
    }

    dec.coefficient_norm = stacked_coefficient_norm(dec, p, w, 1.0);
    return dec;
}

} // namespace hardy
