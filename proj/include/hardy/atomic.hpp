#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hardy/analysis.hpp"
#include "hardy/calderon.hpp"
#include "hardy/dyadic.hpp"
#include "hardy/grid.hpp"
#include "hardy/weights.hpp"

namespace hardy {

// Fine-layer piece: the band-pass contributions gathered under the maximal
// cube `base`, divided by lambda so the L^q size budget over the enlarged
// support cube holds with equality. lambda * values restores the raw mass.
struct Atom {
    CubeIndex base;            // maximal selected cube
    int enlargement = 0;       // support cube side multiplier, 2^{N+3}
    SampledFunction values;
    double lambda = 0.0;
    int level_index = 0;       // threshold octave i the member cubes carry
    double p = 1.0;
    double q = 2.0;
    int s = 0;
    // ||{sum over member cubes of corner_value^2 chi_Q}^{1/2}||_{L^q}; kept
    // because the stacking bound tests compare it against 2^i |base|^{1/q}
    double corner_norm = 0.0;
};

// Coarse-layer piece: one low-pass bump per selected cube of the level-N
// partition. The enlarged cube always wraps the whole torus (the multiplier
// exceeds 2^N), so the support check is vacuous and there is no moment
// condition.
struct Block {
    CubeIndex base;            // selected cube of the level-N partition
    int enlargement = 0;       // 2^{N+2}
    SampledFunction values;
    double mu = 0.0;
    double stated_mu = 0.0;    // closed-form normalization, recorded untouched
    int level_index = 0;
    double p = 1.0;
    double q = 2.0;
};

struct PieceReport {
    bool atom = true;
    std::size_t index = 0;     // into the atom or block list
    int level_index = 0;
    double tail_fraction = 0.0; // share of the L^1 mass outside the support cube
    bool support_ok = false;
    double size_excess = 0.0;   // L^q norm over budget, minus one
    bool size_ok = false;
    std::vector<double> moments; // scaled moment per total degree 0..s, atoms only
    double worst_moment = 0.0;   // max of the entries above
    bool moments_ok = false;
    bool split_ok = false;      // base cube on its layer's side of the size threshold
    double stated_coefficient = 0.0; // closed-form normalization for reference
};

struct Certificate {
    std::vector<PieceReport> pieces; // atoms first, then blocks
    double recon_l2_rel = 0.0;
    double recon_lq_rel = 0.0;
    double recon_hardy_rel = 0.0;
    double coefficient_ratio = 0.0;  // coefficient norm over the source norm
    std::size_t dust_pieces = 0;
    double dust_sup = 0.0;
    std::string warning;
    bool valid = false;              // every per-piece check passed
};

struct Decomposition {
    Grid grid{1, 8, 1.0};
    std::vector<Atom> atoms;
    std::vector<Block> blocks;
    double p = 1.0;
    double q = 2.0;
    int s = 0;
    int N = 0;
    int j_max = 0;             // scale count of the producing filter bank
    double source_hardy_norm = 0.0;
    double source_lq_norm = 0.0;
    double coefficient_norm = 0.0;
    int i_min = 0;             // effective threshold octave range
    int i_max = 0;
    std::size_t dust_pieces = 0; // nonzero corner values never selected, dropped
    double dust_sup = 0.0;       // largest dropped corner magnitude
    std::string warning;
    Certificate certificate;
};

struct CertificateTolerances {
    double eps_supp = 1e-3;
    double eps_size = 1e-9;
    double eps_mom = 1e-6;
};

struct DecomposeConfig {
    double invert_tol = 1e-8;
    int invert_max_iter = 80;
    std::optional<std::pair<int, int>> i_range; // chosen from the data when absent
    CertificateTolerances tol;
};

// 0/1 indicators of the super-level set {S > 2^i} and of its maximal-function
// dilation {M(chi) > 10^{-n}}
struct LevelSets {
    SampledFunction inside;
    SampledFunction dilated;
};

LevelSets build_level_sets(const SquareFunctionProfile& s, int i);

// j0 walks the level-N partition; jpos walks every deeper level down to the
// single-sample cubes. A cube is selected when it overlaps omega_i on more
// than half its measure but omega_next on at most half.
enum class SelectionLayer { j0, jpos };

std::vector<CubeIndex> select_cubes(const DyadicLattice& lat, int N, const SampledFunction& omega_i,
                                    const SampledFunction& omega_next, SelectionLayer layer);

// 0/1 sample mask of the concentric cube with side scaled by factor, clipped
// to the torus; membership is decided in half-mesh integer arithmetic so
// boundaries are exact
std::vector<std::uint8_t> enlarged_cube_mask(const Grid& g, const CubeIndex& base, int factor);

// Full pipeline: invert the reproducing operator, take the oscillation square
// functions of the preimage, select cubes per threshold octave, gather the
// fine layer into atoms under maximal cubes and the coarse layer into one
// block per cube, then certify. The certificate is attached to the result.
// Preconditions on (p, q, s) are checked against the critical-index estimate
// when the weight is resampleable, otherwise skipped with a warning.
Decomposition decompose(const SampledFunction& f, double p, double q, int s, const Weight& w,
                        const ReproducingOperator& op, const DecomposeConfig& cfg = {});

// Re-measures every invariant by direct quadrature, sharing only the grid and
// cube helpers with the pipeline above. Reconstruction errors against f are
// recomputed, in the weighted Hardy norm through a freshly built filter bank.
Certificate verify(const Decomposition& dec, const SampledFunction& f, double p, double q, int s,
                   const Weight& w, const CertificateTolerances& tol = {});

// sum of lambda * atom + mu * block in decreasing coefficient order
SampledFunction reconstruct(const Decomposition& dec);

// || { sum over atoms (lambda chi_R / w(R)^{1/p})^eta }^{1/eta} ||_{L^p_w}
// plus the same stack over blocks, R being each piece's support cube
double stacked_coefficient_norm(const Decomposition& dec, double p, const Weight& w, double eta);

// the eta = 1 coefficient norm, an upper bound for the atomic-norm infimum
double achieved_atomic_norm(const Decomposition& dec, double p, const Weight& w);

// JSON document plus sidecar blob of piece values (atoms first, then blocks,
// back-to-back binary records). The JSON stores the blob file name; a relative
// name is resolved against the JSON's directory on read.
void write_decomposition(const Decomposition& dec, const std::string& json_path,
                         const std::string& blob_path);
Decomposition read_decomposition(const std::string& json_path);

} // namespace hardy
