#include "hardy/calderon.hpp"

#include <algorithm>
#include <cmath>

namespace hardy {

int sampling_level(const FilterBank& bank, int N, int j) {
    const int full = bank.grid.log2_points();
    if (j >= bank.j_max) return full;
    return std::min(j + N, full);
}

namespace {

void check_op(const ReproducingOperator& op, const SampledFunction& f) {
    if (f.grid != op.bank->grid || f.grid != op.lat->grid())
        throw std::invalid_argument("reproducing operator: grid mismatch");
}

// scale-j term of T_N: freeze psi_j * f on the corners of level-`level` cubes
// (weight |Q| / h^n = stride^n), then convolve the comb with psi_j
SampledFunction scale_term(const FilterBank& bank, int j, int level, const SampledFunction& f) {
    const Grid& g = bank.grid;
    const SampledFunction conv = apply_scale(bank, j, f);
    const std::int64_t stride = g.points_per_axis() >> level;
    if (stride == 1) return apply_scale(bank, j, conv);
    const double weight = std::pow(static_cast<double>(stride), g.dim());
    SampledFunction comb(g);
    const std::int64_t ng = g.points_per_axis();
    if (g.dim() == 1) {
        for (std::int64_t m = 0; m < ng; m += stride)
            comb.values[static_cast<std::size_t>(m)] = weight * conv.values[static_cast<std::size_t>(m)];
    } else {
        for (std::int64_t a = 0; a < ng; a += stride)
            for (std::int64_t b = 0; b < ng; b += stride)
                comb.values[static_cast<std::size_t>(a * ng + b)] =
                    weight * conv.values[static_cast<std::size_t>(a * ng + b)];
    }
    return convolve(bank.psi[static_cast<std::size_t>(j)], comb);
}

} // namespace

SampledFunction apply_TN(const ReproducingOperator& op, const SampledFunction& f) {
    check_op(op, f);
    const FilterBank& bank = *op.bank;
    SampledFunction out(f.grid);
    for (int j = 0; j <= bank.j_max; ++j) {
        const SampledFunction term = scale_term(bank, j, sampling_level(bank, op.N, j), f);
        for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += term.values[i];
    }
    return out;
}

SampledFunction apply_RN(const ReproducingOperator& op, const SampledFunction& f) {
    SampledFunction out = apply_TN(op, f);
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = f.values[i] - out.values[i];
    return out;
}

double measure_contraction(const FilterBank& bank, const DyadicLattice& lat, int N,
                           const std::vector<SampledFunction>& family) {
    if (N < 0) throw std::invalid_argument("measure_contraction: offset must be non-negative");
    if (family.empty()) throw std::invalid_argument("measure_contraction: empty calibration family");
    ReproducingOperator probe{&bank, &lat, N, 0.0, {}, {}};
    double worst = 0.0;
    for (const SampledFunction& f : family) {
        const double nf = lp_norm(f, 2.0);
        if (nf == 0.0) continue;
        worst = std::max(worst, lp_norm(apply_RN(probe, f), 2.0) / nf);
    }
    return worst;
}

ReproducingOperator make_reproducing_operator(const FilterBank& bank, const DyadicLattice& lat, int N,
                                              const std::vector<SampledFunction>& family) {
    const double c = measure_contraction(bank, lat, N, family);
    if (!(c < 1.0))
        throw std::runtime_error("reproducing operator: offset " + std::to_string(N) +
                                 " is not a contraction (measured " + std::to_string(c) + ")");
    return {&bank, &lat, N, c, {}, {}};
}

ReproducingOperator calibrate_N(const FilterBank& bank, const DyadicLattice& lat,
                                const std::vector<SampledFunction>& family, double target) {
    if (!(target > 0.0) || !(target < 1.0))
        throw std::invalid_argument("calibrate_N: target must lie in (0, 1)");
    std::vector<double> table;
    for (int N = 0; N <= lat.max_level(); ++N) {
        const double c = measure_contraction(bank, lat, N, family);
        table.push_back(c);
        if (c <= target) return {&bank, &lat, N, c, std::move(table), {}};
    }
    std::string msg = "calibrate_N: no offset up to " + std::to_string(lat.max_level()) +
                      " reaches target " + std::to_string(target) + "; best " +
                      std::to_string(*std::min_element(table.begin(), table.end()));
    throw CalibrationError(std::move(msg), std::move(table));
}

InversionResult invert_TN(const ReproducingOperator& op, const SampledFunction& f, double tol,
                          int max_iter) {
    if (!(op.contraction_estimate < 1.0))
        throw std::invalid_argument("invert_TN: operator is not a verified contraction");
    if (!(tol > 0.0) || max_iter < 1) throw std::invalid_argument("invert_TN: need tol > 0 and max_iter >= 1");
    const double nf = lp_norm(f, 2.0);
    if (nf == 0.0) return {SampledFunction(f.grid), 0.0, 1, {0.0}};

    // h_k is the k-term partial Neumann sum and power = R_N^k f its next
    // increment; the residual needs no extra operator apply since
    // R_N h_{k} = h_{k} + power - f
    SampledFunction h = f;
    SampledFunction power = apply_RN(op, f);
    std::vector<double> history;
    for (int k = 1; k <= max_iter; ++k) {
        double res2 = 0.0;
        for (std::size_t i = 0; i < h.values.size(); ++i) {
            const double d = h.values[i] + power.values[i] - f.values[i];
            res2 += d * d;
        }
        const double res = std::sqrt(res2 * f.grid.cell_measure()) / nf;
        history.push_back(res);
        if (res <= tol) return {std::move(h), res, k, std::move(history)};
        for (std::size_t i = 0; i < h.values.size(); ++i) h.values[i] += power.values[i];
        power = apply_RN(op, power);
    }
    // build the message before handing history to the exception: the two
    // constructor arguments are unsequenced, so reading back() inline races
    // the move
    std::string msg = "invert_TN: residual " + std::to_string(history.back()) + " above tol " +
                      std::to_string(tol) + " after " + std::to_string(max_iter) + " iterations";
    throw ConvergenceError(std::move(msg), std::move(history));
}

} // namespace hardy
