#pragma once

// The spectral-cutoff RG endomorphism in both of its forms: vector filtering
// (elements -> elements, zeroing UV eigencoefficients) and operator
// compression (elements -> matrices over the retained modes), plus the
// defect diagnostics, the finite-difference beta step, and fixed-point
// detection. Observables use compression; algebra-level flows use filtering.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "orbifold/algebra.hpp"
#include "orbifold/errors.hpp"
#include "orbifold/linalg.hpp"
#include "orbifold/spectral.hpp"

namespace orbifold {

struct RGState {
    const ModeBasis* basis = nullptr;
    double ell = 0.0;
    double cutoff = 0.0;  // 1/ell, stored exactly as computed
    ScaleSplit split;
};

inline RGState make_rg_state(const ModeBasis& basis, double ell) {
    if (!(ell > 0.0)) throw ValidationError("rg state: scale ell must be positive");
    RGState st;
    st.basis = &basis;
    st.ell = ell;
    st.cutoff = 1.0 / ell;
    st.split = scale_split(basis, st.cutoff);
    return st;
}

namespace detail {

inline void require_basis_shape(const ModeBasis& basis, const AlgebraElement& a, const char* who) {
    if (a.class_count() != basis.sector_count())
        throw ValidationError(std::string(who) + ": element does not match the mode basis (sector count)");
    for (int s = 0; s < basis.sector_count(); ++s)
        if (static_cast<int>(a.comps[s].size()) != static_cast<int>(basis.sectors[s].weight.size()))
            throw ValidationError(std::string(who) + ": element does not match the mode basis (sector " +
                                  std::to_string(s) + ")");
}

}  // namespace detail

/// Vector form of Phi_ell: expand each sector component in its eigenbasis,
/// zero the coefficients of UV clusters, resynthesize. Linear, idempotent at
/// fixed ell, and block-diagonal over sectors.
inline AlgebraElement rg_filter(const RGState& state, const AlgebraElement& a) {
    detail::require_basis_shape(*state.basis, a, "rg_filter");
    AlgebraElement out;
    out.comps.resize(a.class_count());
    for (int s = 0; s < state.basis->sector_count(); ++s) {
        const SectorModes& sm = state.basis->sectors[s];
        const int d = sm.dimension();
        const int keep = state.split.first_uv[s];
        out.comps[s].assign(d, Complex(0.0, 0.0));
        for (int k = 0; k < keep; ++k) {
            const Mode& mode = sm.modes[k];
            Complex coeff(0.0, 0.0);
            for (int p = 0; p < d; ++p) coeff += mode.vec[p] * sm.weight[p] * a.comps[s][p];
            for (int p = 0; p < d; ++p) out.comps[s][p] += coeff * mode.vec[p];
        }
    }
    return out;
}

/// Operator form of Phi_ell: P_{<=Lambda} M_a P_{<=Lambda} where M_a is the
/// block-diagonal multiplication operator, expressed in the retained-mode
/// basis. `modes` records (sector, mode index) per matrix row/column.
struct CompressedOperator {
    CMatrix matrix;
    std::vector<std::pair<int, int>> modes;
};

inline CompressedOperator rg_compress(const RGState& state, const AlgebraElement& a) {
    detail::require_basis_shape(*state.basis, a, "rg_compress");
    CompressedOperator out;
    for (int s = 0; s < state.basis->sector_count(); ++s)
        for (int k = 0; k < state.split.first_uv[s]; ++k) out.modes.emplace_back(s, k);
    const int r = static_cast<int>(out.modes.size());
    out.matrix = CMatrix(r, r);
    for (int row = 0; row < r; ++row) {
        const auto [s, j] = out.modes[row];
        const SectorModes& sm = state.basis->sectors[s];
        const int d = sm.dimension();
        for (int col = row; col < r; ++col) {
            const auto [s2, k] = out.modes[col];
            if (s2 != s) break;  // block-diagonal: modes are sector-contiguous
            Complex acc(0.0, 0.0);
            for (int p = 0; p < d; ++p) acc += sm.modes[j].vec[p] * sm.weight[p] * a.comps[s][p] * sm.modes[k].vec[p];
            out.matrix(row, col) = acc;
            if (col != row) out.matrix(col, row) = acc;  // M_a is symmetric in a W-orthonormal basis
        }
    }
    return out;
}

/// ||Phi_ell(a b) - Phi_ell(a) Phi_ell(b)|| in operator norm, with the
/// diagonal product for a b.
inline double multiplicativity_defect(const RGState& state, const AlgebraElement& a, const AlgebraElement& b) {
    const CompressedOperator ab = rg_compress(state, diagonal_product(a, b));
    const CompressedOperator ca = rg_compress(state, a);
    const CompressedOperator cb = rg_compress(state, b);
    return spectral_norm(ab.matrix - ca.matrix * cb.matrix);
}

/// Finite-difference beta step ell * (Phi_{ell+dell}(a) - Phi_ell(a)) / dell.
/// A step function of ell: nonzero exactly when the window
/// (1/(ell+dell), 1/ell] contains a cluster eigenvalue, where it equals
/// -(ell/dell) times those clusters' components of a.
inline AlgebraElement beta_estimate(const ModeBasis& basis, const AlgebraElement& a, double ell, double dell) {
    if (!(ell > 0.0)) throw ValidationError("beta_estimate: ell must be positive");
    if (!(dell > 0.0)) throw ValidationError("beta_estimate: dell must be positive");
    const AlgebraElement coarse = rg_filter(make_rg_state(basis, ell + dell), a);
    const AlgebraElement fine = rg_filter(make_rg_state(basis, ell), a);
    AlgebraElement out = element_difference(coarse, fine);
    const double scale = ell / dell;
    for (auto& comp : out.comps)
        for (auto& v : comp) v *= scale;
    return out;
}

struct FixedPointVerdict {
    bool fixed = true;
    std::optional<double> witness_ell;  // first grid ell violating the tolerance
    double max_deviation = 0.0;
};

/// a is RG-fixed iff ||Phi_ell(a) - a|| <= tol at every grid ell; in the
/// discrete model this means a is supported on clusters with
/// lambda <= 1/max(grid).
inline FixedPointVerdict is_rg_fixed(const ModeBasis& basis, const AlgebraElement& a,
                                     const std::vector<double>& ell_grid, double tol,
                                     const PairingWeights& weights) {
    if (ell_grid.empty()) throw ValidationError("is_rg_fixed: ell grid must be nonempty");
    FixedPointVerdict v;
    for (double ell : ell_grid) {
        const AlgebraElement filtered = rg_filter(make_rg_state(basis, ell), a);
        const double dev = weighted_norm(element_difference(filtered, a), weights);
        v.max_deviation = std::max(v.max_deviation, dev);
        if (dev > tol && v.fixed) {
            v.fixed = false;
            v.witness_ell = ell;
        }
    }
    return v;
}

/// ||Phi_ell(a *f b) - Phi_ell(a) *f Phi_ell(b)|| in the weighted norm,
/// where *f is the fusion product. A diagnostic; expected to vanish as the
/// cutoff exceeds the full spectrum.
inline double fusion_commutation_defect(const RGState& state, const SectorChart& chart, const AlgebraElement& a,
                                        const AlgebraElement& b) {
    const AlgebraElement lhs = rg_filter(state, fusion_product(chart, a, b));
    const AlgebraElement rhs = fusion_product(chart, rg_filter(state, a), rg_filter(state, b));
    return weighted_norm(element_difference(lhs, rhs), chart.pairing_weights());
}

/// Logarithmic grid from 1/(2 lambda_max) to 2/lambda_min_positive; brackets
/// every cluster crossing. Falls back to [0.5, 2] when the spectrum has no
/// positive eigenvalue.
inline std::vector<double> default_ell_grid(const ModeBasis& basis, int count = 33) {
    if (count < 1) throw ValidationError("default_ell_grid: count must be positive");
    const double lam_max = basis.lambda_max();
    const double lam_min = basis.lambda_min_positive();
    double lo = 0.5, hi = 2.0;
    if (lam_max > 0.0 && lam_min > 0.0) {
        lo = 1.0 / (2.0 * lam_max);
        hi = 2.0 / lam_min;
    }
    std::vector<double> grid(count);
    if (count == 1) {
        grid[0] = lo;
        return grid;
    }
    const double llo = std::log(lo), lhi = std::log(hi);
    for (int i = 0; i < count; ++i)
        grid[i] = std::exp(llo + (lhi - llo) * static_cast<double>(i) / static_cast<double>(count - 1));
    return grid;
}

struct FlowReport {
    std::vector<double> ell_grid;
    struct Row {
        double ell = 0.0;
        double cutoff = 0.0;
        std::vector<int> retained;  // per sector
        double mult_defect = 0.0;
        double idem_defect = 0.0;
    };
    std::vector<Row> rows;
    std::vector<bool> idempotent_fixed;  // per class, across the whole grid
    double fixed_tol = 1e-9;
};

/// Sweep the grid recording retained-mode counts, the multiplicativity
/// defect of the probe pair, the worst idempotent-preservation defect, and
/// per-class fixed-point verdicts.
inline FlowReport flow_sweep(const ModeBasis& basis, const SectorChart& chart, std::vector<double> ell_grid,
                             const AlgebraElement& probe_a, const AlgebraElement& probe_b, double fixed_tol = 1e-9) {
    if (ell_grid.empty()) ell_grid = default_ell_grid(basis);
    FlowReport report;
    report.ell_grid = ell_grid;
    report.fixed_tol = fixed_tol;
    const PairingWeights w = chart.pairing_weights();
    std::vector<AlgebraElement> idems;
    for (int c = 0; c < chart.class_count(); ++c) idems.push_back(idempotent(chart, c));
    for (double ell : ell_grid) {
        const RGState state = make_rg_state(basis, ell);
        FlowReport::Row row;
        row.ell = ell;
        row.cutoff = state.cutoff;
        row.retained = state.split.first_uv;
        row.mult_defect = multiplicativity_defect(state, probe_a, probe_b);
        double idef = 0.0;
        for (const AlgebraElement& e : idems)
            idef = std::max(idef, weighted_norm(element_difference(rg_filter(state, e), e), w));
        row.idem_defect = idef;
        report.rows.push_back(std::move(row));
    }
    for (const AlgebraElement& e : idems)
        report.idempotent_fixed.push_back(is_rg_fixed(basis, e, ell_grid, fixed_tol, w).fixed);
    return report;
}

}  // namespace orbifold
