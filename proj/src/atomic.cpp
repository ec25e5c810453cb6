#include "hardy/atomic.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "hardy/filters.hpp"

namespace hardy {

namespace {

SampledFunction threshold_indicator(const SampledFunction& s, double thr) {
    SampledFunction out(s.grid);
    for (std::size_t m = 0; m < s.values.size(); ++m) out.values[m] = s.values[m] > thr ? 1.0 : 0.0;
    return out;
}

// scale carried by a cube of the fine layer, or nothing for levels that only
// exist as grouping geometry (deeper than j_max + N but above the top row)
std::optional<int> scale_for_level(int level, int N, int j_max, int depth) {
    if (level == depth) return j_max;
    if (level > N && level < N + j_max) return level - N;
    return std::nullopt;
}

template <typename Fn>
void for_each_cube_at_level(const Grid& g, int level, Fn&& fn) {
    const std::int64_t cpa = std::int64_t{1} << level;
    if (g.dim() == 1) {
        for (std::int64_t c = 0; c < cpa; ++c) fn(CubeIndex{level, {c, 0}});
        return;
    }
    for (std::int64_t c0 = 0; c0 < cpa; ++c0)
        for (std::int64_t c1 = 0; c1 < cpa; ++c1) fn(CubeIndex{level, {c0, c1}});
}

// acc += weight * profile(. - t), t given as sample coordinates
void splat_translate(SampledFunction& acc, const SampledFunction& profile,
                     std::array<std::int64_t, 2> t, double weight) {
    const std::int64_t ng = acc.grid.points_per_axis();
    if (acc.grid.dim() == 1) {
        for (std::int64_t m = 0; m < ng; ++m)
            acc.values[static_cast<std::size_t>(m)] +=
                weight * profile.values[static_cast<std::size_t>((m - t[0] + ng) % ng)];
        return;
    }
    for (std::int64_t a = 0; a < ng; ++a) {
        const std::int64_t pa = ((a - t[0] + ng) % ng) * ng;
        const std::int64_t fa = a * ng;
        for (std::int64_t b = 0; b < ng; ++b)
            acc.values[static_cast<std::size_t>(fa + b)] +=
                weight * profile.values[static_cast<std::size_t>(pa + (b - t[1] + ng) % ng)];
    }
}

double mask_measure(const Grid& g, const std::vector<std::uint8_t>& mask) {
    std::int64_t cnt = 0;
    for (std::uint8_t b : mask) cnt += b;
    return static_cast<double>(cnt) * g.cell_measure();
}

double mask_weight_mass(const Grid& g, const std::vector<std::uint8_t>& mask, const Weight& w) {
    double acc = 0.0;
    for (std::size_t m = 0; m < mask.size(); ++m)
        if (mask[m]) acc += w.values.values[m];
    return acc * g.cell_measure();
}

// L^q budget of a piece supported on the masked region
double size_budget(const Grid& g, const std::vector<std::uint8_t>& mask, const Weight& w,
                   double p, double q) {
    return std::pow(mask_measure(g, mask), 1.0 / q) * std::pow(mask_weight_mass(g, mask, w), -1.0 / p);
}

std::string join_warnings(const std::vector<std::string>& parts) {
    std::string out;
    for (const std::string& part : parts) {
        if (!out.empty()) out += "; ";
        out += part;
    }
    return out;
}

// max over multi-indices of total degree deg of the scaled moment
// |integral of v times (x - center)^alpha| / (l1 * side^deg), coordinates
// wrapped to the torus-centered representative
double scaled_moment_at_degree(const SampledFunction& v, const CubeIndex& base, int deg,
                               double l1) {
    const Grid& g = v.grid;
    const double side = cube_side(g, base);
    const auto corner = cube_corner(g, base);
    const double denom = l1 * std::pow(side, deg);
    double worst = 0.0;
    const auto moment = [&](int a0, int a1) {
        double acc = 0.0;
        for (std::int64_t m = 0; m < g.size(); ++m) {
            const auto x = g.point(m);
            double term = v.values[static_cast<std::size_t>(m)];
            if (a0 > 0) term *= std::pow(g.centered(x[0] - (corner[0] + side / 2.0)), a0);
            if (a1 > 0) term *= std::pow(g.centered(x[1] - (corner[1] + side / 2.0)), a1);
            acc += term;
        }
        return acc * g.cell_measure();
    };
    if (g.dim() == 1) {
        worst = std::fabs(moment(deg, 0)) / denom;
    } else {
        for (int a0 = 0; a0 <= deg; ++a0)
            worst = std::max(worst, std::fabs(moment(a0, deg - a0)) / denom);
    }
    return worst;
}

} // namespace

LevelSets build_level_sets(const SquareFunctionProfile& s, int i) {
    if (s.lattice == nullptr)
        throw std::invalid_argument("build_level_sets: profile does not carry a lattice");
    SampledFunction inside = threshold_indicator(s.values, std::ldexp(1.0, i));
    const SampledFunction mval = hl_maximal(inside, *s.lattice);
    const double cut = std::pow(10.0, -s.values.grid.dim());
    SampledFunction dilated = threshold_indicator(mval, cut);
    return {std::move(inside), std::move(dilated)};
}

std::vector<CubeIndex> select_cubes(const DyadicLattice& lat, int N, const SampledFunction& omega_i,
                                    const SampledFunction& omega_next, SelectionLayer layer) {
    const Grid& g = lat.grid();
    if (omega_i.grid != g || omega_next.grid != g)
        throw std::invalid_argument("select_cubes: level sets on a different grid");
    if (N < 0 || N > g.log2_points())
        throw std::invalid_argument("select_cubes: N outside the level range");
    std::vector<std::uint8_t> in_i(omega_i.values.size()), in_next(omega_next.values.size());
    for (std::size_t m = 0; m < in_i.size(); ++m) {
        in_i[m] = omega_i.values[m] > 0.5 ? 1 : 0;
        in_next[m] = omega_next.values[m] > 0.5 ? 1 : 0;
    }
    const int depth = g.log2_points();
    const int lo = layer == SelectionLayer::j0 ? N : N + 1;
    const int hi = layer == SelectionLayer::j0 ? N : depth;
    std::vector<CubeIndex> out;
    for (int level = lo; level <= hi; ++level) {
        for_each_cube_at_level(g, level, [&](const CubeIndex& qc) {
            if (overlap_fraction(g, qc, in_i) <= 0.5) return;
            if (overlap_fraction(g, qc, in_next) <= 0.5) out.push_back(qc);
        });
    }
    return out;
}

std::vector<std::uint8_t> enlarged_cube_mask(const Grid& g, const CubeIndex& base, int factor) {
    if (factor < 1) throw std::invalid_argument("enlarged_cube_mask: factor must be positive");
    if (base.level < 0 || base.level > g.log2_points())
        throw std::invalid_argument("enlarged_cube_mask: cube level outside the grid range");
    const std::int64_t ng = g.points_per_axis();
    const std::int64_t two_ng = 2 * ng;
    const std::int64_t spa = cube_samples_per_axis(g, base.level);
    // geometry in half-mesh units keeps every boundary comparison integral
    const std::int64_t width2 = std::min<std::int64_t>(2 * spa * factor, two_ng);
    std::array<std::int64_t, 2> start2{};
    for (int d = 0; d < g.dim(); ++d) {
        const std::int64_t center2 = 2 * base.coord[static_cast<std::size_t>(d)] * spa + spa;
        std::int64_t s2 = (center2 - width2 / 2) % two_ng;
        if (s2 < 0) s2 += two_ng;
        start2[static_cast<std::size_t>(d)] = s2;
    }
    const auto inside = [&](std::int64_t m, int d) {
        std::int64_t off = (2 * m - start2[static_cast<std::size_t>(d)]) % two_ng;
        if (off < 0) off += two_ng;
        return off < width2;
    };
    std::vector<std::uint8_t> mask(static_cast<std::size_t>(g.size()), 0);
    if (g.dim() == 1) {
        for (std::int64_t m = 0; m < ng; ++m) mask[static_cast<std::size_t>(m)] = inside(m, 0) ? 1 : 0;
        return mask;
    }
    for (std::int64_t a = 0; a < ng; ++a) {
        const bool row = inside(a, 0);
        for (std::int64_t b = 0; b < ng; ++b)
            mask[static_cast<std::size_t>(a * ng + b)] = row && inside(b, 1) ? 1 : 0;
    }
    return mask;
}

Decomposition decompose(const SampledFunction& f, double p, double q, int s, const Weight& w,
                        const ReproducingOperator& op, const DecomposeConfig& cfg) {
    const FilterBank& bank = *op.bank;
    const DyadicLattice& lat = *op.lat;
    const Grid& g = bank.grid;
    if (f.grid != g) throw std::invalid_argument("decompose: input grid does not match the operator");
    if (w.values.grid != g) throw std::invalid_argument("decompose: weight grid does not match the operator");
    if (!(p > 0.0) || !std::isfinite(p))
        throw std::invalid_argument("decompose: p must be positive and finite");
    if (!(q > 1.0) || !std::isfinite(q))
        throw std::invalid_argument("decompose: q must lie in (1, inf)");
    if (s < -1) throw std::invalid_argument("decompose: s must be at least -1");

    const int n = g.dim();
    std::vector<std::string> warnings;
    if (w.generator) {
        const CriticalIndexResult ci = critical_index(w, lat);
        if (!(q > ci.q_omega)) {
            std::ostringstream msg;
            msg << "decompose: q > q_omega fails (q = " << q
                << ", critical index estimate = " << ci.q_omega << ")";
            throw std::invalid_argument(msg.str());
        }
        const int s_min = std::max(static_cast<int>(std::floor(n * (ci.q_omega / p - 1.0))), -1);
        if (s < s_min) {
            std::ostringstream msg;
            msg << "decompose: s >= max{floor(n(q_omega/p - 1)), -1} fails (s = " << s
                << ", required " << s_min << " at critical index estimate " << ci.q_omega << ")";
            throw std::invalid_argument(msg.str());
        }
    } else {
        warnings.push_back("critical-index prechecks skipped: weight has no generator");
    }

    const int depth = g.log2_points();
    const int N = op.N;
    const int j_max = bank.j_max;
    const int c1 = 1 << (N + 3);
    const int c0 = 1 << (N + 2);

    Decomposition dec;
    dec.grid = g;
    dec.p = p;
    dec.q = q;
    dec.s = s;
    dec.N = N;
    dec.j_max = j_max;

    const InversionResult inv = invert_TN(op, f, cfg.invert_tol, cfg.invert_max_iter);
    const SampledFunction& h = inv.h;

    // the oscillation profiles also enforce the scale/level budget
    const OscillationProfile osc = oscillation_square_function(h, bank, lat, N, OscMode::sup);

    std::vector<SampledFunction> conv;
    conv.reserve(static_cast<std::size_t>(j_max) + 1);
    for (int j = 0; j <= j_max; ++j) conv.push_back(apply_scale(bank, j, h));

    // threshold octaves, bounded by the extreme corner magnitudes: every cube
    // with a nonzero corner value sits fully inside its own super-level set,
    // so covering the corner range covers every selectable cube
    double max_s = 0.0;
    for (double v : osc.s0.values.values) max_s = std::max(max_s, v);
    for (double v : osc.s1.values.values) max_s = std::max(max_s, v);
    double min_corner = std::numeric_limits<double>::infinity();
    const auto scan_corners = [&](int scale, int level) {
        for_each_cube_at_level(g, level, [&](const CubeIndex& qc) {
            const double v = std::fabs(conv[static_cast<std::size_t>(scale)]
                                           [cube_corner_sample(g, qc)]);
            if (v > 0.0) min_corner = std::min(min_corner, v);
        });
    };
    scan_corners(0, N);
    for (int j = 1; j <= j_max; ++j) scan_corners(j, sampling_level(bank, N, j));

    std::set<CubeIndex> chosen_fine;
    std::set<CubeIndex> chosen_coarse;
    struct AtomSeed {
        CubeIndex root;
        int i;
        std::vector<CubeIndex> members;
    };
    std::vector<AtomSeed> seeds;
    struct BlockSeed {
        CubeIndex cube;
        int i;
    };
    std::vector<BlockSeed> block_seeds;

    if (max_s > 0.0 && std::isfinite(min_corner)) {
        const int auto_hi = static_cast<int>(std::ceil(std::log2(max_s)));
        const int auto_lo =
            std::max(static_cast<int>(std::floor(std::log2(min_corner))) - 1, auto_hi - 60);
        dec.i_min = auto_lo;
        dec.i_max = auto_hi - 1;
        if (cfg.i_range &&
            (cfg.i_range->first > dec.i_min || cfg.i_range->second < dec.i_max)) {
            std::ostringstream msg;
            msg << "threshold range widened to [" << dec.i_min << ", " << dec.i_max
                << "] to cover the observed square-function values";
            warnings.push_back(msg.str());
        }

        SampledFunction om0 = threshold_indicator(osc.s0.values, std::ldexp(1.0, dec.i_min));
        SampledFunction om1 = threshold_indicator(osc.s1.values, std::ldexp(1.0, dec.i_min));
        for (int i = dec.i_min; i <= dec.i_max; ++i) {
            SampledFunction om0_next = threshold_indicator(osc.s0.values, std::ldexp(1.0, i + 1));
            SampledFunction om1_next = threshold_indicator(osc.s1.values, std::ldexp(1.0, i + 1));
            for (const CubeIndex& pc : select_cubes(lat, N, om0, om0_next, SelectionLayer::j0))
                if (chosen_coarse.insert(pc).second) block_seeds.push_back({pc, i});
            std::vector<CubeIndex> fresh;
            for (const CubeIndex& qc : select_cubes(lat, N, om1, om1_next, SelectionLayer::jpos))
                if (chosen_fine.insert(qc).second) fresh.push_back(qc);
            if (!fresh.empty()) {
                const std::vector<CubeIndex> roots = maximal_antichain(fresh);
                const std::set<CubeIndex> root_set(roots.begin(), roots.end());
                std::vector<int> root_levels;
                for (const CubeIndex& r : roots)
                    if (root_levels.empty() || root_levels.back() != r.level)
                        root_levels.push_back(r.level);
                std::map<CubeIndex, std::vector<CubeIndex>> members;
                for (const CubeIndex& qc : fresh) {
                    for (int level : root_levels) {
                        if (level > qc.level) break;
                        const CubeIndex anc = cube_ancestor(qc, level);
                        if (root_set.count(anc)) {
                            members[anc].push_back(qc);
                            break;
                        }
                    }
                }
                for (const CubeIndex& r : roots) seeds.push_back({r, i, std::move(members[r])});
            }
            om0 = std::move(om0_next);
            om1 = std::move(om1_next);
        }
    } else {
        dec.i_min = 0;
        dec.i_max = 0;
    }

    // fine layer: one atom per maximal cube, pieces splatted from the corner
    // values of its members
    for (const AtomSeed& seed : seeds) {
        SampledFunction sum(g);
        std::vector<double> corner_sq(static_cast<std::size_t>(g.size()), 0.0);
        for (const CubeIndex& qc : seed.members) {
            const std::optional<int> scale = scale_for_level(qc.level, N, j_max, depth);
            if (!scale) continue;
            const std::int64_t cs = cube_corner_sample(g, qc);
            const double v = conv[static_cast<std::size_t>(*scale)][cs];
            if (v == 0.0) continue;
            splat_translate(sum, bank.psi[static_cast<std::size_t>(*scale)], g.coords(cs),
                            cube_measure(g, qc) * v);
            for_each_sample(g, qc, [&](std::int64_t m) {
                corner_sq[static_cast<std::size_t>(m)] += v * v;
            });
        }
        const double piece_q = lp_norm(sum, q);
        if (piece_q == 0.0) continue;
        const auto mask = enlarged_cube_mask(g, seed.root, c1);
        const double lambda = piece_q / size_budget(g, mask, w, p, q);
        for (double& v : sum.values) v /= lambda;
        SampledFunction stack(g);
        for (std::size_t m = 0; m < corner_sq.size(); ++m) stack.values[m] = std::sqrt(corner_sq[m]);
        dec.atoms.push_back(
            {seed.root, c1, std::move(sum), lambda, seed.i, p, q, s, lp_norm(stack, q)});
    }

    // coarse layer: one low-pass bump per selected cube of the level-N row
    const double psi0_q = lp_norm(bank.psi[0], q);
    for (const BlockSeed& bs : block_seeds) {
        const std::int64_t cs = cube_corner_sample(g, bs.cube);
        const double v = conv[0][cs];
        if (v == 0.0) continue;
        SampledFunction piece(g);
        splat_translate(piece, bank.psi[0], g.coords(cs), cube_measure(g, bs.cube) * v);
        const double piece_q = lp_norm(piece, q);
        if (piece_q == 0.0) continue;
        const auto mask = enlarged_cube_mask(g, bs.cube, c0);
        const double mu = piece_q / size_budget(g, mask, w, p, q);
        for (double& val : piece.values) val /= mu;
        const double stated = std::pow(2.0, -static_cast<double>(N) * n) *
                              std::pow(cube_mass(w, bs.cube), 1.0 / p) *
                              std::pow(cube_measure(g, bs.cube), -1.0 / q) * psi0_q * std::fabs(v);
        dec.blocks.push_back({bs.cube, c0, std::move(piece), mu, stated, bs.i, p, q});
    }

    // corner values that never made it into a selected cube
    const auto scan_dust = [&](int scale, int level, const std::set<CubeIndex>& chosen) {
        for_each_cube_at_level(g, level, [&](const CubeIndex& qc) {
            const double v = std::fabs(conv[static_cast<std::size_t>(scale)]
                                           [cube_corner_sample(g, qc)]);
            if (v > 0.0 && chosen.count(qc) == 0) {
                ++dec.dust_pieces;
                dec.dust_sup = std::max(dec.dust_sup, v);
            }
        });
    };
    scan_dust(0, N, chosen_coarse);
    for (int j = 1; j <= j_max; ++j) scan_dust(j, sampling_level(bank, N, j), chosen_fine);

    dec.warning = join_warnings(warnings);
    dec.source_hardy_norm = local_hardy_norm(f, p, w, bank, lat, N);
    dec.source_lq_norm = lp_norm(f, q);
    dec.coefficient_norm = stacked_coefficient_norm(dec, p, w, 1.0);
    dec.certificate = verify(dec, f, p, q, s, w, cfg.tol);
    return dec;
}

Certificate verify(const Decomposition& dec, const SampledFunction& f, double p, double q, int s,
                   const Weight& w, const CertificateTolerances& tol) {
    const Grid& g = dec.grid;
    if (f.grid != g) throw std::invalid_argument("verify: input grid does not match the decomposition");
    if (w.values.grid != g) throw std::invalid_argument("verify: weight grid mismatch");
    Certificate cert;
    cert.dust_pieces = dec.dust_pieces;
    cert.dust_sup = dec.dust_sup;
    cert.warning = dec.warning;
    const double cell = g.cell_measure();
    bool all = true;

    const auto check_piece = [&](bool is_atom, std::size_t idx, const CubeIndex& base,
                                 int enlargement, const SampledFunction& values, int level_index,
                                 double stated) {
        PieceReport r;
        r.atom = is_atom;
        r.index = idx;
        r.level_index = level_index;
        const auto mask = enlarged_cube_mask(g, base, enlargement);
        double l1 = 0.0;
        double l1_out = 0.0;
        for (std::size_t m = 0; m < mask.size(); ++m) {
            const double av = std::fabs(values.values[m]);
            l1 += av;
            if (!mask[m]) l1_out += av;
        }
        l1 *= cell;
        l1_out *= cell;
        r.tail_fraction = l1 > 0.0 ? l1_out / l1 : 0.0;
        r.support_ok = r.tail_fraction <= tol.eps_supp;
        r.size_excess = lp_norm(values, q) / size_budget(g, mask, w, p, q) - 1.0;
        r.size_ok = r.size_excess <= tol.eps_size;
        r.moments_ok = true;
        if (is_atom && s >= 0 && l1 > 0.0) {
            for (int deg = 0; deg <= s; ++deg) {
                const double sm = scaled_moment_at_degree(values, base, deg, l1);
                r.moments.push_back(sm);
                r.worst_moment = std::max(r.worst_moment, sm);
            }
            r.moments_ok = r.worst_moment <= tol.eps_mom;
        }
        // atoms live strictly below the level-N row, blocks exactly on it
        r.split_ok = is_atom ? base.level >= dec.N + 1 : base.level == dec.N;
        r.stated_coefficient = stated;
        all = all && r.support_ok && r.size_ok && r.moments_ok && r.split_ok;
        cert.pieces.push_back(std::move(r));
    };

    for (std::size_t idx = 0; idx < dec.atoms.size(); ++idx) {
        const Atom& a = dec.atoms[idx];
        if (a.values.grid != g) throw std::invalid_argument("verify: atom grid mismatch");
        const double stated = std::pow(cube_mass(w, a.base), 1.0 / p) *
                              std::pow(cube_measure(g, a.base), -1.0 / q) * a.corner_norm;
        check_piece(true, idx, a.base, a.enlargement, a.values, a.level_index, stated);
    }
    for (std::size_t idx = 0; idx < dec.blocks.size(); ++idx) {
        const Block& b = dec.blocks[idx];
        if (b.values.grid != g) throw std::invalid_argument("verify: block grid mismatch");
        check_piece(false, idx, b.base, b.enlargement, b.values, b.level_index, b.stated_mu);
    }

    const SampledFunction rec = reconstruct(dec);
    SampledFunction diff(g);
    for (std::size_t m = 0; m < diff.values.size(); ++m)
        diff.values[m] = f.values[m] - rec.values[m];
    const double f_l2 = lp_norm(f, 2.0);
    const double f_lq = lp_norm(f, q);
    cert.recon_l2_rel = f_l2 > 0.0 ? lp_norm(diff, 2.0) / f_l2 : lp_norm(diff, 2.0);
    cert.recon_lq_rel = f_lq > 0.0 ? lp_norm(diff, q) / f_lq : lp_norm(diff, q);

    const FilterBank bank = build_filter_bank(g, dec.j_max);
    const DyadicLattice lat(g);
    const double f_h = local_hardy_norm(f, p, w, bank, lat, dec.N);
    const double d_h = local_hardy_norm(diff, p, w, bank, lat, dec.N);
    cert.recon_hardy_rel = f_h > 0.0 ? d_h / f_h : d_h;
    const double coeff = stacked_coefficient_norm(dec, p, w, 1.0);
    cert.coefficient_ratio = f_h > 0.0 ? coeff / f_h : 0.0;
    cert.valid = all;
    return cert;
}

SampledFunction reconstruct(const Decomposition& dec) {
    SampledFunction out(dec.grid);
    struct Ref {
        double coeff;
        int kind; // atoms sort before blocks on ties
        std::size_t idx;
    };
    std::vector<Ref> order;
    order.reserve(dec.atoms.size() + dec.blocks.size());
    for (std::size_t i = 0; i < dec.atoms.size(); ++i) order.push_back({dec.atoms[i].lambda, 0, i});
    for (std::size_t i = 0; i < dec.blocks.size(); ++i) order.push_back({dec.blocks[i].mu, 1, i});
    std::sort(order.begin(), order.end(), [](const Ref& a, const Ref& b) {
        if (a.coeff != b.coeff) return a.coeff > b.coeff;
        if (a.kind != b.kind) return a.kind < b.kind;
        return a.idx < b.idx;
    });
    for (const Ref& r : order) {
        const SampledFunction& vals = r.kind == 0 ? dec.atoms[r.idx].values : dec.blocks[r.idx].values;
        if (vals.grid != dec.grid)
            throw std::invalid_argument("reconstruct: pieces on different grids");
        for (std::size_t m = 0; m < out.values.size(); ++m)
            out.values[m] += r.coeff * vals.values[m];
    }
    return out;
}

double stacked_coefficient_norm(const Decomposition& dec, double p, const Weight& w, double eta) {
    if (!(p > 0.0)) throw std::invalid_argument("stacked_coefficient_norm: p must be positive");
    if (!(eta > 0.0)) throw std::invalid_argument("stacked_coefficient_norm: eta must be positive");
    const Grid& g = dec.grid;
    if (w.values.grid != g)
        throw std::invalid_argument("stacked_coefficient_norm: weight grid mismatch");
    const double cell = g.cell_measure();
    const auto layer_norm = [&](auto&& each_piece) {
        std::vector<double> acc(static_cast<std::size_t>(g.size()), 0.0);
        each_piece([&](const CubeIndex& base, int enlargement, double coeff) {
            if (coeff == 0.0) return;
            const auto mask = enlarged_cube_mask(g, base, enlargement);
            const double term = std::pow(coeff / std::pow(mask_weight_mass(g, mask, w), 1.0 / p), eta);
            for (std::size_t m = 0; m < mask.size(); ++m)
                if (mask[m]) acc[m] += term;
        });
        double sum = 0.0;
        for (std::size_t m = 0; m < acc.size(); ++m)
            if (acc[m] > 0.0) sum += std::pow(acc[m], p / eta) * w.values.values[m];
        return std::pow(sum * cell, 1.0 / p);
    };
    const double atoms_part = layer_norm([&](auto&& fn) {
        for (const Atom& a : dec.atoms) fn(a.base, a.enlargement, a.lambda);
    });
    const double blocks_part = layer_norm([&](auto&& fn) {
        for (const Block& b : dec.blocks) fn(b.base, b.enlargement, b.mu);
    });
    return atoms_part + blocks_part;
}

double achieved_atomic_norm(const Decomposition& dec, double p, const Weight& w) {
    return stacked_coefficient_norm(dec, p, w, 1.0);
}

namespace {

nlohmann::ordered_json cube_to_json(const CubeIndex& c, int dim) {
    nlohmann::ordered_json j;
    j["level"] = c.level;
    std::vector<std::int64_t> coord(c.coord.begin(), c.coord.begin() + dim);
    j["coord"] = coord;
    return j;
}

CubeIndex cube_from_json(const nlohmann::json& j) {
    CubeIndex c;
    c.level = j.at("level").get<int>();
    const auto coord = j.at("coord").get<std::vector<std::int64_t>>();
    for (std::size_t d = 0; d < coord.size() && d < 2; ++d) c.coord[d] = coord[d];
    return c;
}

nlohmann::ordered_json report_to_json(const PieceReport& r) {
    nlohmann::ordered_json j;
    j["atom"] = r.atom;
    j["index"] = r.index;
    j["level_index"] = r.level_index;
    j["tail_fraction"] = r.tail_fraction;
    j["support_ok"] = r.support_ok;
    j["size_excess"] = r.size_excess;
    j["size_ok"] = r.size_ok;
    j["moments"] = r.moments;
    j["worst_moment"] = r.worst_moment;
    j["moments_ok"] = r.moments_ok;
    j["split_ok"] = r.split_ok;
    j["stated_coefficient"] = r.stated_coefficient;
    return j;
}

PieceReport report_from_json(const nlohmann::json& j) {
    PieceReport r;
    r.atom = j.at("atom").get<bool>();
    r.index = j.at("index").get<std::size_t>();
    r.level_index = j.at("level_index").get<int>();
    r.tail_fraction = j.at("tail_fraction").get<double>();
    r.support_ok = j.at("support_ok").get<bool>();
    r.size_excess = j.at("size_excess").get<double>();
    r.size_ok = j.at("size_ok").get<bool>();
    r.moments = j.at("moments").get<std::vector<double>>();
    r.worst_moment = j.at("worst_moment").get<double>();
    r.moments_ok = j.at("moments_ok").get<bool>();
    r.split_ok = j.at("split_ok").get<bool>();
    r.stated_coefficient = j.at("stated_coefficient").get<double>();
    return r;
}

const PieceReport* find_report(const Certificate& cert, bool atom, std::size_t index) {
    for (const PieceReport& r : cert.pieces)
        if (r.atom == atom && r.index == index) return &r;
    return nullptr;
}

} // namespace

void write_decomposition(const Decomposition& dec, const std::string& json_path,
                         const std::string& blob_path) {
    std::ofstream blob(blob_path, std::ios::binary);
    if (!blob) throw std::runtime_error("write_decomposition: cannot open " + blob_path);
    for (const Atom& a : dec.atoms) write_hlgf_record(a.values, blob);
    for (const Block& b : dec.blocks) write_hlgf_record(b.values, blob);
    blob.close();

    nlohmann::ordered_json j;
    j["params"] = {{"p", dec.p},         {"q", dec.q},
                   {"s", dec.s},         {"N", dec.N},
                   {"j_max", dec.j_max}, {"n", dec.grid.dim()},
                   {"N_g", dec.grid.points_per_axis()}, {"L", dec.grid.length()},
                   {"i_min", dec.i_min}, {"i_max", dec.i_max}};
    j["source_norms"] = {{"hardy", dec.source_hardy_norm}, {"lq", dec.source_lq_norm}};
    j["coefficient_norm"] = dec.coefficient_norm;
    j["dust"] = {{"pieces", dec.dust_pieces}, {"sup", dec.dust_sup}};
    j["warning"] = dec.warning;
    j["blob"] = blob_path;

    std::size_t ref = 0;
    nlohmann::ordered_json atoms = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < dec.atoms.size(); ++i) {
        const Atom& a = dec.atoms[i];
        nlohmann::ordered_json e;
        e["cube"] = cube_to_json(a.base, dec.grid.dim());
        e["scale_factor"] = a.enlargement;
        e["lambda"] = a.lambda;
        e["level_index"] = a.level_index;
        e["corner_norm"] = a.corner_norm;
        e["values_ref"] = ref++;
        if (const PieceReport* r = find_report(dec.certificate, true, i)) {
            e["moments"] = r->moments;
            e["size_slack"] = r->size_excess;
            e["tail_mass"] = r->tail_fraction;
        }
        atoms.push_back(std::move(e));
    }
    j["atoms"] = std::move(atoms);
    nlohmann::ordered_json blocks = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < dec.blocks.size(); ++i) {
        const Block& b = dec.blocks[i];
        nlohmann::ordered_json e;
        e["cube"] = cube_to_json(b.base, dec.grid.dim());
        e["scale_factor"] = b.enlargement;
        e["mu"] = b.mu;
        e["stated_mu"] = b.stated_mu;
        e["level_index"] = b.level_index;
        e["values_ref"] = ref++;
        if (const PieceReport* r = find_report(dec.certificate, false, i)) {
            e["size_slack"] = r->size_excess;
            e["tail_mass"] = r->tail_fraction;
        }
        blocks.push_back(std::move(e));
    }
    j["blocks"] = std::move(blocks);

    nlohmann::ordered_json cert;
    cert["recon_l2_rel"] = dec.certificate.recon_l2_rel;
    cert["recon_lq_rel"] = dec.certificate.recon_lq_rel;
    cert["recon_hardy_rel"] = dec.certificate.recon_hardy_rel;
    cert["coefficient_ratio"] = dec.certificate.coefficient_ratio;
    cert["dust_pieces"] = dec.certificate.dust_pieces;
    cert["dust_sup"] = dec.certificate.dust_sup;
    cert["warning"] = dec.certificate.warning;
    cert["valid"] = dec.certificate.valid;
    nlohmann::ordered_json reports = nlohmann::ordered_json::array();
    for (const PieceReport& r : dec.certificate.pieces) reports.push_back(report_to_json(r));
    cert["pieces"] = std::move(reports);
    j["certificate"] = std::move(cert);

    std::ofstream os(json_path);
    if (!os) throw std::runtime_error("write_decomposition: cannot open " + json_path);
    os << j.dump(2) << "\n";
    if (!os) throw std::runtime_error("write_decomposition: short write to " + json_path);
}

Decomposition read_decomposition(const std::string& json_path) {
    std::ifstream is(json_path);
    if (!is) throw std::runtime_error("read_decomposition: cannot open " + json_path);
    nlohmann::json j;
    is >> j;
    const auto& params = j.at("params");
    Decomposition dec;
    dec.grid = Grid(params.at("n").get<int>(), params.at("N_g").get<std::int64_t>(),
                    params.at("L").get<double>());
    dec.p = params.at("p").get<double>();
    dec.q = params.at("q").get<double>();
    dec.s = params.at("s").get<int>();
    dec.N = params.at("N").get<int>();
    dec.j_max = params.at("j_max").get<int>();
    dec.i_min = params.at("i_min").get<int>();
    dec.i_max = params.at("i_max").get<int>();
    dec.source_hardy_norm = j.at("source_norms").at("hardy").get<double>();
    dec.source_lq_norm = j.at("source_norms").at("lq").get<double>();
    dec.coefficient_norm = j.at("coefficient_norm").get<double>();
    dec.dust_pieces = j.at("dust").at("pieces").get<std::size_t>();
    dec.dust_sup = j.at("dust").at("sup").get<double>();
    dec.warning = j.at("warning").get<std::string>();

    std::filesystem::path blob_path(j.at("blob").get<std::string>());
    if (blob_path.is_relative())
        blob_path = std::filesystem::path(json_path).parent_path() / blob_path;
    std::ifstream blob(blob_path, std::ios::binary);
    if (!blob)
        throw std::runtime_error("read_decomposition: cannot open blob " + blob_path.string());

    for (const auto& e : j.at("atoms")) {
        SampledFunction vals = read_hlgf_record(blob);
        if (vals.grid != dec.grid)
            throw std::runtime_error("read_decomposition: blob record grid mismatch");
        dec.atoms.push_back({cube_from_json(e.at("cube")), e.at("scale_factor").get<int>(),
                             std::move(vals), e.at("lambda").get<double>(),
                             e.at("level_index").get<int>(), dec.p, dec.q, dec.s,
                             e.at("corner_norm").get<double>()});
    }
    for (const auto& e : j.at("blocks")) {
        SampledFunction vals = read_hlgf_record(blob);
        if (vals.grid != dec.grid)
            throw std::runtime_error("read_decomposition: blob record grid mismatch");
        dec.blocks.push_back({cube_from_json(e.at("cube")), e.at("scale_factor").get<int>(),
                              std::move(vals), e.at("mu").get<double>(),
                              e.at("stated_mu").get<double>(), e.at("level_index").get<int>(),
                              dec.p, dec.q});
    }

    const auto& cert = j.at("certificate");
    dec.certificate.recon_l2_rel = cert.at("recon_l2_rel").get<double>();
    dec.certificate.recon_lq_rel = cert.at("recon_lq_rel").get<double>();
    dec.certificate.recon_hardy_rel = cert.at("recon_hardy_rel").get<double>();
    dec.certificate.coefficient_ratio = cert.at("coefficient_ratio").get<double>();
    dec.certificate.dust_pieces = cert.at("dust_pieces").get<std::size_t>();
    dec.certificate.dust_sup = cert.at("dust_sup").get<double>();
    dec.certificate.warning = cert.at("warning").get<std::string>();
    dec.certificate.valid = cert.at("valid").get<bool>();
    for (const auto& e : cert.at("pieces")) dec.certificate.pieces.push_back(report_from_json(e));
    return dec;
}

} // namespace hardy
