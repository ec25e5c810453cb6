#pragma once

// Small oracles shared by the test suites. Everything here is deliberately
// slow and literal: direct sums, exhaustive scans, no FFT, no clever indexing.
// The point is to have an independent reference for the optimized paths.

#include <hardy/fixtures.hpp>
#include <hardy/grid.hpp>

#include <cmath>
#include <cstdint>
#include <vector>

namespace testutil {

inline double rel_err(double got, double want) {
    const double scale = std::abs(want) > 1e-300 ? std::abs(want) : 1.0;
    return std::abs(got - want) / scale;
}

// circular convolution by the defining double sum, O(N_g^{2n})
inline hardy::SampledFunction brute_convolve(const hardy::SampledFunction& f,
                                             const hardy::SampledFunction& g) {
    const hardy::Grid& gr = f.grid;
    const std::int64_t ng = gr.points_per_axis();
    hardy::SampledFunction out(gr);
    for (std::int64_t x = 0; x < gr.size(); ++x) {
        const auto mx = gr.coords(x);
        double acc = 0.0;
        for (std::int64_t y = 0; y < gr.size(); ++y) {
            const auto my = gr.coords(y);
            std::array<std::int64_t, 2> d = {mx[0] - my[0], mx[1] - my[1]};
            for (int a = 0; a < gr.dim(); ++a) d[a] = ((d[a] % ng) + ng) % ng;
            if (gr.dim() == 1) d[1] = 0;
            acc += f.values[static_cast<std::size_t>(y)] *
                   g.values[static_cast<std::size_t>(gr.index(d))];
        }
        out.values[static_cast<std::size_t>(x)] = acc * gr.cell_measure();
    }
    return out;
}

// (h^n sum |f|^p)^{1/p} written as the plain loop it is
inline double brute_lp(const hardy::SampledFunction& f, double p) {
    double acc = 0.0;
    for (double v : f.values) acc += std::pow(std::abs(v), p);
    return std::pow(acc * f.grid.cell_measure(), 1.0 / p);
}

inline double max_abs(const hardy::SampledFunction& f) {
    double m = 0.0;
    for (double v : f.values) m = std::max(m, std::abs(v));
    return m;
}

inline double max_abs_diff(const hardy::SampledFunction& a, const hardy::SampledFunction& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i)
        m = std::max(m, std::abs(a.values[i] - b.values[i]));
    return m;
}

inline double rel_l2_diff(const hardy::SampledFunction& a, const hardy::SampledFunction& b) {
    hardy::SampledFunction d = a;
    for (std::size_t i = 0; i < d.values.size(); ++i) d.values[i] -= b.values[i];
    const double ref = hardy::lp_norm(b, 2.0);
    return hardy::lp_norm(d, 2.0) / (ref > 0.0 ? ref : 1.0);
}

} // namespace testutil
