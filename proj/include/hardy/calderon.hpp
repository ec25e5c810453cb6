#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "hardy/dyadic.hpp"
#include "hardy/filters.hpp"
#include "hardy/grid.hpp"

namespace hardy {

// Discrete reproducing operator built from a filter bank and a sampling
// offset N: scale j is frozen on the corners of level-sampling_level(j) cubes
// and re-emitted through psi_j. Immutable once calibrated; bank and lattice
// are non-owning and must outlive the operator.
struct ReproducingOperator {
    const FilterBank* bank;
    const DyadicLattice* lat;
    int N;
    double contraction_estimate;          // measured max ||R_N f|| / ||f|| on the calibration family
    std::vector<double> calibration_ratios; // per-offset table from the calibrating sweep (may be empty)
    std::string family_description;
};

// Sampling level for scale j at offset N: j + N clamped to the grid depth.
// The top scale always samples at full grid depth: its window is flat up to
// the Nyquist shell, so any coarser corner sampling folds that energy into
// low frequencies and ruins the contraction of R_N.
int sampling_level(const FilterBank& bank, int N, int j);

// measured max of ||R_N f||_2 / ||f||_2 over the family (zero members skipped)
double measure_contraction(const FilterBank& bank, const DyadicLattice& lat, int N,
                           const std::vector<SampledFunction>& family);

// builds the operator at a fixed offset; fails if the measured contraction
// estimate reaches 1
ReproducingOperator make_reproducing_operator(const FilterBank& bank, const DyadicLattice& lat, int N,
                                              const std::vector<SampledFunction>& family);

// smallest offset (swept 0..lattice max level) whose contraction estimate
// meets the target; throws CalibrationError with the full ratio table if none
ReproducingOperator calibrate_N(const FilterBank& bank, const DyadicLattice& lat,
                                const std::vector<SampledFunction>& family, double target);

class CalibrationError : public std::runtime_error {
public:
    CalibrationError(std::string msg, std::vector<double> table)
        : std::runtime_error(std::move(msg)), ratio_by_offset(std::move(table)) {}
    std::vector<double> ratio_by_offset;
};

// T_N f = sum_j sum_Q |Q| psi_j(x - u_Q) (psi_j * f)(u_Q), corners u_Q of the
// level-sampling_level(j) cubes; evaluated per scale as a weighted corner
// comb re-convolved with psi_j, O(j_max N_g^n log N_g) total
SampledFunction apply_TN(const ReproducingOperator& op, const SampledFunction& f);

// R_N f = f - T_N f
SampledFunction apply_RN(const ReproducingOperator& op, const SampledFunction& f);

struct InversionResult {
    SampledFunction h;
    double residual; // achieved ||T_N h - f||_2 / ||f||_2
    int iterations;
    std::vector<double> history; // residual after each Neumann term
};

class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(std::string msg, std::vector<double> hist)
        : std::runtime_error(std::move(msg)), history(std::move(hist)) {}
    std::vector<double> history;
};

// partial Neumann sums h_k = sum_{m<=k} R_N^m f until the relative residual
// drops to tol; throws ConvergenceError (with history) past max_iter
InversionResult invert_TN(const ReproducingOperator& op, const SampledFunction& f, double tol,
                          int max_iter);

} // namespace hardy
