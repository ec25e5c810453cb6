#include "hardy/operators.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "hardy/parallel.hpp"

namespace hardy {

namespace {

// centered coordinates and euclidean torus distance of a sample
std::array<double, 2> centered_point(const Grid& g, std::int64_t m) {
    auto x = g.point(m);
    x[0] = g.centered(x[0]);
    if (g.dim() == 2) x[1] = g.centered(x[1]);
    return x;
}

double radius(const Grid& g, const std::array<double, 2>& z) {
    return g.dim() == 1 ? std::abs(z[0]) : std::hypot(z[0], z[1]);
}

// min(r^{-n}, r^{-n-delta}): the damped size envelope
double size_envelope(double r, int n, double delta) {
    return std::min(std::pow(r, -static_cast<double>(n)), std::pow(r, -static_cast<double>(n) - delta));
}

// one 3-point (1/4, 1/2, 1/4) smoothing pass along each axis, periodic; the
// neighbor pair is summed first so reflections stay exact in floating point
void mollify(SampledFunction& f) {
    const Grid& g = f.grid;
    const std::int64_t ng = g.points_per_axis();
    if (g.dim() == 1) {
        std::vector<double> out(f.values.size());
        for (std::int64_t m = 0; m < ng; ++m)
            out[static_cast<std::size_t>(m)] =
                0.25 * (f[(m + ng - 1) % ng] + f[(m + 1) % ng]) + 0.5 * f[m];
        f.values = std::move(out);
        return;
    }
    std::vector<double> out(f.values.size());
    for (std::int64_t a = 0; a < ng; ++a)
        for (std::int64_t b = 0; b < ng; ++b)
            out[static_cast<std::size_t>(a * ng + b)] =
                0.25 * (f[a * ng + (b + ng - 1) % ng] + f[a * ng + (b + 1) % ng]) + 0.5 * f[a * ng + b];
    f.values = std::move(out);
    out.assign(f.values.size(), 0.0);
    for (std::int64_t a = 0; a < ng; ++a)
        for (std::int64_t b = 0; b < ng; ++b)
            out[static_cast<std::size_t>(a * ng + b)] =
                0.25 * (f[((a + ng - 1) % ng) * ng + b] + f[((a + 1) % ng) * ng + b]) +
                0.5 * f[a * ng + b];
    f.values = std::move(out);
}

std::string sample_label(const Grid& g, std::int64_t m) {
    const auto z = centered_point(g, m);
    std::ostringstream os;
    os << "sample " << m << " at z = (" << z[0];
    if (g.dim() == 2) os << ", " << z[1];
    os << ")";
    return os.str();
}

// anything past this is a construction bug, not a finite measured constant
constexpr double kConstantBudget = 1e6;

double norm_of(const SampledFunction& f, SpaceTag tag, double p, const Weight& w,
               const NormPipeline& pipe) {
    if (tag == SpaceTag::lpw) return weighted_lp_norm(f, p, w);
    if (pipe.bank == nullptr || pipe.lat == nullptr)
        throw std::invalid_argument("boundedness_experiment: hpw norm needs a filter bank and lattice");
    return local_hardy_norm(f, p, w, *pipe.bank, *pipe.lat, pipe.N);
}

std::string space_label(SpaceTag tag, double p, const Weight& w) {
    std::ostringstream os;
    os << (tag == SpaceTag::lpw ? "lpw" : "hpw") << ":p=" << p << ",w=" << w.description;
    return os.str();
}

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 == 1 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

double domination_ratio(const std::function<SampledFunction(const SampledFunction&)>& op,
                        const SampledFunction& piece, const CubeIndex& base, int moment_order,
                        double alpha, const DyadicLattice& lat) {
    const Grid& g = piece.grid;
    const double n = static_cast<double>(g.dim());
    if (alpha < 0.0 || alpha >= n)
        throw std::invalid_argument("pointwise_domination_check: alpha must lie in [0, n)");
    if (moment_order < -1)
        throw std::invalid_argument("pointwise_domination_check: moment order below -1");
    const double tau = (n + moment_order + 1.0) / n;
    const double alpha_tau = alpha / tau;

    const SampledFunction image = op(piece);
    if (image.grid != g) throw std::invalid_argument("pointwise_domination_check: operator changed the grid");
    const SampledFunction mphi = grand_maximal(image, standard_maximal_profile(g));

    SampledFunction chi(g);
    for_each_sample(g, base, [&](std::int64_t m) { chi[m] = 1.0; });
    const SampledFunction mfrac = fractional_maximal(chi, alpha_tau, lat);

    // smallest integer side multiplier covering 2*sqrt(n)*Q
    const int factor = g.dim() == 1 ? 2 : 3;
    const auto star = enlarged_cube_mask(g, base, factor);

    double worst = 0.0;
    for (std::size_t m = 0; m < star.size(); ++m) {
        if (star[m]) continue;
        const double denom = std::pow(mfrac.values[m], tau);
        worst = std::max(worst, mphi.values[m] / denom);
    }
    return worst;
}

} // namespace

CZKernel build_cz_kernel(const Grid& g, const std::string& preset, double delta, double eps) {
    if (delta <= 0.0) throw std::invalid_argument("build_cz_kernel: delta must be positive");
    if (eps <= 0.0 || eps > 1.0) throw std::invalid_argument("build_cz_kernel: eps must lie in (0, 1]");
    const bool odd = preset == "damped-riesz";
    if (!odd && preset != "damped-pv")
        throw std::invalid_argument("build_cz_kernel: unknown preset " + preset +
                                    " (expected damped-riesz or damped-pv)");

    const int n = g.dim();
    CZKernel kern;
    kern.grid = g;
    kern.profile = SampledFunction(g);
    kern.delta = delta;
    kern.eps = eps;

    for (std::int64_t m = 1; m < g.size(); ++m) {
        const auto z = centered_point(g, m);
        const double r = radius(g, z);
        const double damp = std::min(1.0, std::pow(r, -delta));
        double v;
        if (odd) {
            // sign(z)/|z| in 1D, first Riesz component z_1/|z|^{n+1} in 2D
            v = n == 1 ? (z[0] > 0.0 ? 1.0 : -1.0) / r * damp : z[0] / std::pow(r, 3.0) * damp;
        } else {
            v = std::pow(r, -static_cast<double>(n)) * damp;
        }
        kern.profile[m] = v;
    }
    if (odd) {
        // the z_1 = L/2 slice is its own mirror image, so exact oddness on the
        // torus forces it to zero
        const std::int64_t half = g.points_per_axis() / 2;
        if (n == 1) {
            kern.profile[half] = 0.0;
        } else {
            for (std::int64_t b = 0; b < g.points_per_axis(); ++b)
                kern.profile[half * g.points_per_axis() + b] = 0.0;
        }
    }
    mollify(kern.profile);
    kern.profile[0] = 0.0;

    // size condition at every nonzero sample
    std::int64_t size_arg = 1;
    double c_size = 0.0;
    for (std::int64_t m = 1; m < g.size(); ++m) {
        const double r = radius(g, centered_point(g, m));
        const double c = std::abs(kern.profile[m]) / size_envelope(r, n, delta);
        if (c > c_size) {
            c_size = c;
            size_arg = m;
        }
    }
    if (!std::isfinite(c_size) || c_size > kConstantBudget)
        throw std::runtime_error("build_cz_kernel: size condition fails at " + sample_label(g, size_arg) +
                                 " with constant " + std::to_string(c_size));
    kern.size_constant = c_size;

    // smoothness condition over strided pairs with |z - z'| <= |z|/2
    const std::int64_t stride = 8;
    std::vector<std::int64_t> probes;
    for (std::int64_t m = 0; m < g.size(); ++m) {
        const auto c = g.coords(m);
        if (c[0] % stride == 0 && (n == 1 || c[1] % stride == 0)) probes.push_back(m);
    }
    double c_smooth = 0.0;
    std::pair<std::int64_t, std::int64_t> smooth_arg{0, 0};
    for (const std::int64_t m : probes) {
        if (m == 0) continue;
        const auto z = centered_point(g, m);
        const double r = radius(g, z);
        for (const std::int64_t m2 : probes) {
            if (m2 == m) continue;
            const auto z2 = centered_point(g, m2);
            const double d = n == 1 ? g.axis_distance(z[0], z2[0])
                                    : std::hypot(g.axis_distance(z[0], z2[0]), g.axis_distance(z[1], z2[1]));
            if (d <= 0.0 || d > 0.5 * r) continue;
            const double c = std::abs(kern.profile[m] - kern.profile[m2]) * std::pow(r, n + eps) /
                             std::pow(d, eps);
            if (c > c_smooth) {
                c_smooth = c;
                smooth_arg = {m, m2};
            }
        }
    }
    if (!std::isfinite(c_smooth) || c_smooth > kConstantBudget)
        throw std::runtime_error("build_cz_kernel: smoothness condition fails at pair " +
                                 sample_label(g, smooth_arg.first) + " / " +
                                 sample_label(g, smooth_arg.second) + " with constant " +
                                 std::to_string(c_smooth));
    kern.smooth_constant = c_smooth;

    const auto spec = spectrum(kern.profile);
    const double hn = g.cell_measure();
    double peak = 0.0;
    for (const auto& s : spec) peak = std::max(peak, std::abs(s));
    kern.symbol_max = peak * hn;
    kern.symbol_zero = spec[0].real() * hn;

    std::ostringstream os;
    os << preset << ":delta=" << delta << ",eps=" << eps;
    kern.description = os.str();
    return kern;
}

SampledFunction apply_cz(const CZKernel& kern, const SampledFunction& f) {
    if (f.grid != kern.grid) throw std::invalid_argument("apply_cz: grid mismatch");
    return convolve(kern.profile, f);
}

double cz_moment_check(const CZKernel& kern, const std::vector<Atom>& atoms) {
    double worst = 0.0;
    for (const Atom& a : atoms) {
        const SampledFunction image = apply_cz(kern, a.values);
        double total = 0.0;
        for (double v : image.values) total += v;
        worst = std::max(worst, std::abs(total * kern.grid.cell_measure()));
    }
    return worst;
}

SampledFunction fractional_cutoff(const Grid& g) {
    const double inner = g.length() / 16.0; // half-width of the identically-1 cube
    const auto roll = [&](double t) { return smooth_step((2.0 * inner - std::abs(t)) / inner); };
    SampledFunction phi(g);
    for (std::int64_t m = 0; m < g.size(); ++m) {
        const auto z = centered_point(g, m);
        double v = roll(z[0]);
        if (g.dim() == 2) v *= roll(z[1]);
        phi[m] = v;
    }
    return phi;
}

SampledFunction local_fractional(const SampledFunction& f, double alpha,
                                 const SampledFunction& cutoff) {
    const Grid& g = f.grid;
    const int n = g.dim();
    if (alpha <= 0.0 || alpha >= n)
        throw std::invalid_argument("local_fractional: alpha must lie in (0, n)");
    if (cutoff.grid != g) throw std::invalid_argument("local_fractional: cutoff grid differs");

    const double inner = g.length() / 16.0;
    const double outer = g.length() / 8.0;
    const double tol = 1e-12;
    for (std::int64_t m = 0; m < g.size(); ++m) {
        const auto z = centered_point(g, m);
        const double linf = n == 1 ? std::abs(z[0]) : std::max(std::abs(z[0]), std::abs(z[1]));
        const double v = cutoff[m];
        if (linf <= inner + tol && std::abs(v - 1.0) > tol)
            throw std::invalid_argument("local_fractional: cutoff is not 1 on the inner cube (" +
                                        sample_label(g, m) + ")");
        if (linf > outer + tol && std::abs(v) > tol)
            throw std::invalid_argument("local_fractional: cutoff spills past the double cube (" +
                                        sample_label(g, m) + ")");
    }

    const double h = g.mesh();
    SampledFunction kernel(g);
    for (std::int64_t m = 1; m < g.size(); ++m) {
        if (cutoff[m] == 0.0) continue;
        const double r = radius(g, centered_point(g, m));
        kernel[m] = cutoff[m] * std::pow(r, alpha - n);
    }
    // singular cell: replace the undefined sample by the cell average of the
    // kernel, which keeps its L^1 mass
    double center;
    if (n == 1) {
        center = 2.0 * std::pow(0.5 * h, alpha) / (alpha * h);
    } else {
        const std::int64_t sub = 32;
        const double hs = h / static_cast<double>(sub);
        double acc = 0.0;
        for (std::int64_t a = 0; a < sub; ++a)
            for (std::int64_t b = 0; b < sub; ++b) {
                const double ya = -0.5 * h + (static_cast<double>(a) + 0.5) * hs;
                const double yb = -0.5 * h + (static_cast<double>(b) + 0.5) * hs;
                acc += std::pow(std::hypot(ya, yb), alpha - n);
            }
        center = acc / static_cast<double>(sub * sub);
    }
    kernel[0] = cutoff[0] * center;
    return convolve(kernel, f);
}

OperatorReport boundedness_experiment(const std::string& operator_id,
                                      const std::function<SampledFunction(const SampledFunction&)>& op,
                                      const std::vector<SampledFunction>& family,
                                      const std::string& family_desc, SpaceTag source_tag,
                                      double source_p, const Weight& source_w, SpaceTag target_tag,
                                      double target_p, const Weight& target_w,
                                      const NormPipeline& pipe) {
    OperatorReport rep;
    rep.operator_id = operator_id;
    rep.family = family_desc;
    rep.source = space_label(source_tag, source_p, source_w);
    rep.target = space_label(target_tag, target_p, target_w);

    OperatorRun run;
    if (!family.empty()) run.points_per_axis = family.front().grid.points_per_axis();

    std::vector<double> src(family.size()), dst(family.size());
    parallel_for(0, family.size(), [&](std::size_t i) {
        src[i] = norm_of(family[i], source_tag, source_p, source_w, pipe);
        dst[i] = norm_of(op(family[i]), target_tag, target_p, target_w, pipe);
    });
    for (std::size_t i = 0; i < family.size(); ++i) {
        if (src[i] <= 0.0) continue; // zero members carry no ratio
        run.input_ids.push_back(i);
        run.source_norms.push_back(src[i]);
        run.target_norms.push_back(dst[i]);
        run.ratios.push_back(dst[i] / src[i]);
    }
    for (double r : run.ratios) {
        if (!std::isfinite(r) || r < 0.0)
            throw std::runtime_error("boundedness_experiment: non-finite ratio in " + operator_id);
        run.max_ratio = std::max(run.max_ratio, r);
    }
    run.median_ratio = median_of(run.ratios);

    rep.runs.push_back(std::move(run));
    rep.max_ratio = rep.runs.front().max_ratio;
    rep.drift = 0.0;
    return rep;
}

OperatorReport combine_refinements(OperatorReport coarse, const OperatorReport& finer) {
    if (coarse.operator_id != finer.operator_id || coarse.source != finer.source ||
        coarse.target != finer.target)
        throw std::invalid_argument("combine_refinements: reports describe different experiments");
    for (const OperatorRun& r : finer.runs) coarse.runs.push_back(r);
    coarse.max_ratio = 0.0;
    for (const OperatorRun& r : coarse.runs) coarse.max_ratio = std::max(coarse.max_ratio, r.max_ratio);
    const double first = coarse.runs.front().max_ratio;
    const double last = coarse.runs.back().max_ratio;
    coarse.drift = first > 0.0 ? std::abs(last / first - 1.0) : 0.0;
    return coarse;
}

void write_operator_report_csv(const OperatorReport& rep, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_operator_report_csv: cannot open " + path);
    os << "input_id,source_norm,target_norm,ratio\n";
    os.precision(17);
    for (const OperatorRun& run : rep.runs)
        for (std::size_t i = 0; i < run.ratios.size(); ++i)
            os << "ng" << run.points_per_axis << "/" << run.input_ids[i] << "," << run.source_norms[i]
               << "," << run.target_norms[i] << "," << run.ratios[i] << "\n";
    if (!os) throw std::runtime_error("write_operator_report_csv: short write to " + path);
}

void write_operator_report_json(const OperatorReport& rep, const std::string& path) {
    nlohmann::ordered_json j;
    j["operator"] = rep.operator_id;
    j["family"] = rep.family;
    j["source"] = rep.source;
    j["target"] = rep.target;
    nlohmann::ordered_json adm = nlohmann::ordered_json::array();
    for (const auto& [condition, constant] : rep.admissibility) {
        nlohmann::ordered_json e;
        e["condition"] = condition;
        e["constant"] = constant;
        adm.push_back(std::move(e));
    }
    j["admissibility"] = std::move(adm);
    nlohmann::ordered_json runs = nlohmann::ordered_json::array();
    for (const OperatorRun& run : rep.runs) {
        nlohmann::ordered_json e;
        e["points_per_axis"] = run.points_per_axis;
        e["inputs"] = run.ratios.size();
        e["max_ratio"] = run.max_ratio;
        e["median_ratio"] = run.median_ratio;
        runs.push_back(std::move(e));
    }
    j["runs"] = std::move(runs);
    j["max_ratio"] = rep.max_ratio;
    j["drift"] = rep.drift;
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_operator_report_json: cannot open " + path);
    os << j.dump(2) << "\n";
    if (!os) throw std::runtime_error("write_operator_report_json: short write to " + path);
}

double pointwise_domination_check(const std::function<SampledFunction(const SampledFunction&)>& op,
                                  const Atom& a, double alpha, const DyadicLattice& lat) {
    return domination_ratio(op, a.values, a.base, a.s, alpha, lat);
}

double pointwise_domination_check(const std::function<SampledFunction(const SampledFunction&)>& op,
                                  const Block& b, double alpha, const DyadicLattice& lat,
                                  int moment_order) {
    return domination_ratio(op, b.values, b.base, moment_order, alpha, lat);
}

double fractional_stacking_ratio(const Grid& g, const std::vector<CubeIndex>& cubes,
                                 const std::vector<double>& lambdas, double alpha, double p,
                                 const Weight& wp, double q, const Weight& wq) {
    if (cubes.size() != lambdas.size())
        throw std::invalid_argument("fractional_stacking_ratio: one coefficient per cube required");
    if (alpha < 0.0 || alpha >= g.dim())
        throw std::invalid_argument("fractional_stacking_ratio: alpha must lie in [0, n)");
    SampledFunction num(g), den(g);
    for (std::size_t k = 0; k < cubes.size(); ++k) {
        if (lambdas[k] < 0.0)
            throw std::invalid_argument("fractional_stacking_ratio: negative coefficient");
        const double scaled =
            lambdas[k] * std::pow(cube_measure(g, cubes[k]), alpha / static_cast<double>(g.dim()));
        for_each_sample(g, cubes[k], [&](std::int64_t m) {
            num[m] += scaled;
            den[m] += lambdas[k];
        });
    }
    const double bottom = weighted_lp_norm(den, p, wp);
    if (bottom == 0.0) return 0.0;
    return weighted_lp_norm(num, q, wq) / bottom;
}

} // namespace hardy
