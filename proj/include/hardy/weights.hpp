#pragma once

#include <functional>
#include <optional>
#include <string>

#include "hardy/dyadic.hpp"
#include "hardy/grid.hpp"

namespace hardy {

// Strictly positive weight on the grid. Preset weights keep their analytic
// generator so they can be resampled on refined grids (the critical-index
// classifier needs that); weights loaded from files cannot be refined.
struct Weight {
    SampledFunction values;
    std::optional<std::function<double(std::array<double, 2>, const Grid&)>> generator;
    std::string description;
};

// presets: "constant" | "power:a" (|x - center|^a, torus distance to the
// center of the domain, regularized at half a mesh cell) | "two-valued:c1,c2"
// (first-axis split at L/2) | "file:<path>" (.hlgf or .json by extension)
Weight make_weight(const Grid& g, const std::string& preset);
Weight resample_weight(const Weight& w, const Grid& g); // requires a generator

double cube_mass(const Weight& w, const CubeIndex& q); // h^n * sum over samples
double total_mass(const Weight& w);

// Muckenhoupt A_p constant over all lattice cubes (levels 0..max_level, the
// level-0 cube being the whole torus). p = 1 uses max over samples of
// M_dyadic(w)/w; p > 1 uses sup_Q avg(w) * avg(w^{-1/(p-1)})^{p-1}.
double ap_constant(const Weight& w, double p, const DyadicLattice& lat);

// reverse Holder constant sup_Q avg(w^r)^{1/r} / avg(w), r > 1
double rh_constant(const Weight& w, double r, const DyadicLattice& lat);

// A_{p,q} constant: sup_Q (avg w^q)^{1/q} (avg w^{-p'})^{1/p'} for p > 1,
// and sup_Q (avg w^q)^{1/q} / min_Q w for p = 1
double apq_constant(const Weight& w, double p, double q, const DyadicLattice& lat);

struct CriticalIndexResult {
    double q_omega;          // estimated critical index, resolution 0.05
    double threshold;        // growth threshold used by the classifier
    double ratio_at_estimate; // refinement growth ratio at the returned index
};

// Estimates inf{p : w in A_p} by bisecting a refinement-stability classifier:
// p counts as a member when ap_constant grows by at most
// blowup_threshold^(p-1) under one grid doubling (plain blowup_threshold at
// p = 1). The exponent matches the log-power growth of the constant at the
// critical index, so one scalar calibrates all exponents. Needs a
// resampleable weight. Errors if no p up to 64 is classified as a member.
CriticalIndexResult critical_index(const Weight& w, const DyadicLattice& lat,
                                   double blowup_threshold = 1.1);

// (h^n sum |f|^p w)^{1/p} for 0 < p < inf; max |f| for p = inf
double weighted_lp_norm(const SampledFunction& f, double p, const Weight& w);

} // namespace hardy
