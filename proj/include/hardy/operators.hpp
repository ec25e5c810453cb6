#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "hardy/analysis.hpp"
#include "hardy/atomic.hpp"
#include "hardy/dyadic.hpp"
#include "hardy/filters.hpp"
#include "hardy/grid.hpp"
#include "hardy/weights.hpp"

namespace hardy {

// Convolution kernel on the torus with a principal-value cell at the origin.
// The size and smoothness constants are measured by direct scan at
// construction, not assumed: size at every nonzero sample against the
// envelope min(|z|^{-n}, |z|^{-n-delta}), smoothness over strided sample
// pairs (z, z') with |z - z'| <= |z|/2.
struct CZKernel {
    Grid grid{1, 8, 1.0};
    SampledFunction profile{Grid{1, 8, 1.0}}; // K(x - y) sampled, K(0) = 0
    double delta = 1.0;        // extra decay exponent past distance one
    double eps = 1.0;          // Holder exponent of the smoothness condition
    double size_constant = 0.0;
    double smooth_constant = 0.0;
    double symbol_max = 0.0;   // max |K^| over the frequency lattice
    double symbol_zero = 0.0;  // K^(0); zero for odd kernels, the moment obstruction otherwise
    std::string description;
};

// presets: "damped-riesz" (odd: sign(z)/|z| in 1D, z_1/|z|^{n+1} in 2D, both
// damped by min(1, |z|^{-delta})) and "damped-pv" (the even envelope
// 1/|z|^n * min(1, |z|^{-delta}), nonzero mean, kept as the foil for the
// moment-condition experiments). One 3-point mollification pass per axis
// smooths the grid-scale jump before the constants are measured.
CZKernel build_cz_kernel(const Grid& g, const std::string& preset, double delta, double eps);

// K * f through the DFT; the L^2 operator norm is kern.symbol_max
SampledFunction apply_cz(const CZKernel& kern, const SampledFunction& f);

// max over atoms of |h^n sum T(a)|; for convolution kernels this factors as
// |K^(0)| * |integral of a|, so odd kernels annihilate it
double cz_moment_check(const CZKernel& kern, const std::vector<Atom>& atoms);

// cutoff for the local fractional integral: 1 on the centered cube of side
// L/8, supported in the centered cube of side L/4, a smooth-step product in
// between
SampledFunction fractional_cutoff(const Grid& g);

// convolution with cutoff(y) / |y|^{n - alpha}; the singular cell at y = 0
// carries its cell-average value (exact integral in 1D, midpoint quadrature
// on a 32-fold subdivision in 2D). cutoff must be 1 on the side-L/8 cube and
// vanish outside the side-L/4 cube.
SampledFunction local_fractional(const SampledFunction& f, double alpha,
                                 const SampledFunction& cutoff);

// norm tags for the boundedness harness: weighted Lebesgue or local Hardy
enum class SpaceTag { lpw, hpw };

// filter bank, lattice and sampling offset backing the hpw norms; lpw-only
// experiments may leave the pointers null
struct NormPipeline {
    const FilterBank* bank = nullptr;
    const DyadicLattice* lat = nullptr;
    int N = 0;
};

// one grid's worth of ratios; members whose source norm is zero are skipped
// and their input ids do not appear
struct OperatorRun {
    std::int64_t points_per_axis = 0;
    std::vector<std::size_t> input_ids;
    std::vector<double> source_norms;
    std::vector<double> target_norms;
    std::vector<double> ratios;
    double max_ratio = 0.0;
    double median_ratio = 0.0;
};

struct OperatorReport {
    std::string operator_id;
    std::string family;
    std::string source;    // "hpw:p=1,w=constant" style
    std::string target;
    // measured weight constants for whichever hypothesis the caller is
    // exercising; recorded for the report, never enforced
    std::vector<std::pair<std::string, double>> admissibility;
    std::vector<OperatorRun> runs;
    double max_ratio = 0.0; // over all runs
    double drift = 0.0;     // relative change of the per-run max, first to last
};

// ratios ||T f||_target / ||f||_source over the family at one grid size; the
// returned report holds a single run, ready for combine_refinements
OperatorReport boundedness_experiment(const std::string& operator_id,
                                      const std::function<SampledFunction(const SampledFunction&)>& op,
                                      const std::vector<SampledFunction>& family,
                                      const std::string& family_desc, SpaceTag source_tag,
                                      double source_p, const Weight& source_w, SpaceTag target_tag,
                                      double target_p, const Weight& target_w,
                                      const NormPipeline& pipe);

// append the runs of `finer` to `coarse` and refresh max_ratio and drift;
// the reports must describe the same experiment
OperatorReport combine_refinements(OperatorReport coarse, const OperatorReport& finer);

void write_operator_report_csv(const OperatorReport& rep, const std::string& path);
void write_operator_report_json(const OperatorReport& rep, const std::string& path);

// max over samples outside the enlarged cube 2*sqrt(n)*Q (rounded up to the
// next integer side multiplier) of M_Phi(T a)(x) / M_{alpha_tau}(chi_Q)(x)^tau
// with tau = (n + s + 1)/n and alpha_tau = alpha/tau, s being the piece's
// vanishing-moment order (-1 when it has none)
double pointwise_domination_check(const std::function<SampledFunction(const SampledFunction&)>& op,
                                  const Atom& a, double alpha, const DyadicLattice& lat);
double pointwise_domination_check(const std::function<SampledFunction(const SampledFunction&)>& op,
                                  const Block& b, double alpha, const DyadicLattice& lat,
                                  int moment_order = 0);

// || sum_k lambda_k |Q_k|^{alpha/n} chi_{Q_k} ||_{L^q(wq)} over
// || sum_k lambda_k chi_{Q_k} ||_{L^p(wp)}; empty input gives 0
double fractional_stacking_ratio(const Grid& g, const std::vector<CubeIndex>& cubes,
                                 const std::vector<double>& lambdas, double alpha, double p,
                                 const Weight& wp, double q, const Weight& wq);

} // namespace hardy
