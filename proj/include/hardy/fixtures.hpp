#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "hardy/atomic.hpp"
#include "hardy/grid.hpp"
#include "hardy/rng.hpp"
#include "hardy/weights.hpp"

namespace hardy {

// Deterministic input generators. Everything is drawn from the caller's
// generator in a fixed order and evaluated analytically, so the same seed
// yields the same continuous function on every grid size; that is what makes
// refinement drift measurable.

// product of one smooth hump per axis: amplitude * exp(-1/(1 - u^2)) with
// u = torus distance to the center over the half-width, zero where |u| >= 1
SampledFunction bump_function(const Grid& g, std::array<double, 2> center, double halfwidth,
                              double amplitude);

// cos(2 pi k.x / L + phase)
SampledFunction fourier_mode(const Grid& g, std::array<std::int64_t, 2> k, double phase);

// iid standard normals per sample (grid-dependent by nature)
SampledFunction white_noise(const Grid& g, Rng& rng);

// random cosine sum over the lattice modes with 2^{j_lo} <= |k| <= 2^{j_hi};
// the mode set is fixed by the band, so the function is grid-independent
SampledFunction band_noise(const Grid& g, int j_lo, int j_hi, Rng& rng);

// mixed test family: cycles periodized gaussians, modulated bumps, dyadic
// step functions and two-gaussian mixtures
std::vector<SampledFunction> random_family(const Grid& g, int count, Rng& rng);

// zero-mean differences of two equal bumps, the localized cancellative inputs
// for operator experiments
std::vector<SampledFunction> molecule_family(const Grid& g, int count, Rng& rng);

struct CalibrationFamily {
    std::vector<SampledFunction> members;
    std::string description;
};

// white noise, bumps and single modes: the mix the reproducing-operator
// calibration sweeps over
CalibrationFamily calibration_family(const Grid& g, Rng& rng);

// Hand-built valid decomposition, independent of the decompose pipeline:
// atoms on random cubes at levels N+1 .. N+4 with moments up to s projected
// out and the L^q size normalized to its budget; blocks on the level-N
// partition. Coefficients are random positive octaves. The cube levels are
// drawn from a grid-independent range so refinements see the same pieces.
Decomposition synthetic_decomposition(const Grid& g, int atom_count, int block_count, double p,
                                      double q, int s, int N, const Weight& w, Rng& rng);

} // namespace hardy
