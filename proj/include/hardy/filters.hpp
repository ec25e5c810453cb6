#pragma once

#include <vector>

#include "hardy/grid.hpp"

namespace hardy {

// Littlewood-Paley bank on the grid's frequency lattice. Scale 0 is the
// low-pass window (1 on |k| <= 1, rolls off to 0 by |k| = 2), scale j >= 1 is
// the dyadic dilate supported in 2^{j-1} <= |k| <= 2^{j+1}. The top scale is
// flattened to 1 above |k| = 2^{j_max} so the squares of all windows sum to 1
// on every lattice point up to the Nyquist corner.
struct FilterBank {
    Grid grid;
    int j_max;
    // windows[s][k]: real frequency window per scale over the flat k-lattice
    std::vector<std::vector<double>> windows;
    // psi[s]: spatial filter; its forward DFT equals windows[s]/h^n, so
    // convolve(psi[s], f) == apply_symbol(f, windows[s])
    std::vector<SampledFunction> psi;
};

// smooth transition used by the windows: 0 for t<=0, 1 for t>=1, and in
// between the normalized integral of the C-infinity bump exp(-1/(1-u^2)),
// so theta(t) + theta(1-t) = 1
double smooth_step(double t);

// requires 2^{j_max+1} <= N_g/2; error names the admissible maximum
FilterBank build_filter_bank(const Grid& g, int j_max);

// rebuild spatial filters from externally supplied windows (experiments and
// perturbation tests; no partition-of-unity guarantee)
FilterBank filter_bank_from_windows(const Grid& g, std::vector<std::vector<double>> windows);

// max over lattice points of |1 - sum_s windows[s](k)^2|
double calderon_residual(const FilterBank& bank);

// psi_scale * f, computed as a frequency multiplier
SampledFunction apply_scale(const FilterBank& bank, int scale, const SampledFunction& f);

struct MomentReport {
    // worst |h^n sum psi_j(x) x^alpha| per band-pass scale (rows: j = 1..j_max)
    // and total degree |alpha| (columns: 0..s); monomials use torus-centered
    // coordinates in (-L/2, L/2]
    std::vector<std::vector<double>> by_degree;
    std::vector<double> per_scale_max;
    double low_pass_mass; // h^n sum psi_0; the bank normalizes this to 1
};

// requires s <= 8 (monomials of higher degree are not resolvable at the
// supported grid sizes)
MomentReport moment_errors(const FilterBank& bank, int s);

// fraction of ||psi_j||_1 outside the sup-norm ball of radius
// radius_units * 2^{-j} * L around the origin, per scale (0..j_max)
std::vector<double> spatial_tail_mass(const FilterBank& bank, double radius_units);

} // namespace hardy
