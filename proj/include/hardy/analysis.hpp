#pragma once

#include "hardy/dyadic.hpp"
#include "hardy/filters.hpp"
#include "hardy/grid.hpp"
#include "hardy/weights.hpp"

namespace hardy {

enum class SquareFunctionVariant { g, g_d, s0, s1 };

struct SquareFunctionProfile {
    SampledFunction values; // non-negative
    SquareFunctionVariant variant;
    int offset; // N in "scale j sampled on level j+N cubes"; 0 for the plain g
    const FilterBank* bank; // non-owning, the inputs that produced the profile
    const DyadicLattice* lattice;
};

// g(f) = (sum over scales |psi_j * f|^2)^{1/2}, evaluated at every sample
SquareFunctionProfile lp_square_function(const SampledFunction& f, const FilterBank& bank);

// g_d(f): the scale-j term is |psi_j * f| frozen at the corner sample of the
// level-(j+N) cube containing x. Requires j_max + N within the lattice range.
SquareFunctionProfile discrete_square_function(const SampledFunction& f, const FilterBank& bank,
                                               const DyadicLattice& lat, int N);

enum class OscMode { sup, inf };

// S^0 keeps only the low-pass scale (per-cube extremum of |psi_0 * f| over
// level-N cubes); S^1 stacks the band-pass scales j >= 1 on level j+N cubes.
struct OscillationProfile {
    SquareFunctionProfile s0;
    SquareFunctionProfile s1;
};

OscillationProfile oscillation_square_function(const SampledFunction& f, const FilterBank& bank,
                                               const DyadicLattice& lat, int N, OscMode mode);

// dyadic Hardy-Littlewood maximal function: max over lattice cubes containing
// x of the cube average of |f|
SampledFunction hl_maximal(const SampledFunction& f, const DyadicLattice& lat);

// dyadic fractional maximal function M_alpha, 0 <= alpha < n; alpha = 0
// reduces to hl_maximal
SampledFunction fractional_maximal(const SampledFunction& f, double alpha, const DyadicLattice& lat);

// max over the dyadic ladder t = 2^{-j}, j = 0..log2(N_g)-2, of |Phi_t * f|
// where Phi_t(x) = t^{-n} Phi(x/t) (dilation is exact on the grid: index
// stride 2^j with wraparound). Phi must have nonzero mean.
SampledFunction grand_maximal(const SampledFunction& f, const SampledFunction& profile);

// default Phi for grand_maximal: positive product bump of unit mass, one
// smooth hump per axis vanishing outside half-width L/4
SampledFunction standard_maximal_profile(const Grid& g);

// ||g_d(f)||_{L^p_w}, the discrete-square-function Hardy norm
double local_hardy_norm(const SampledFunction& f, double p, const Weight& w, const FilterBank& bank,
                        const DyadicLattice& lat, int N);

struct ScaleEnergy {
    int scale;
    double l2;
    double linf;
};

// per-scale energies of psi_j * f, one row per scale 0..j_max
std::vector<ScaleEnergy> scale_energies(const SampledFunction& f, const FilterBank& bank);

} // namespace hardy
