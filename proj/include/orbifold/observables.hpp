#pragma once

// Observables over the sector spectra: total and sector-resolved partition
// functions, sector correlators via multiplication operators, small-beta
// heat-trace fits, automorphism anomaly defects, and the smooth-limit
// comparison against the plain (single-sector) pipeline.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "orbifold/algebra.hpp"
#include "orbifold/errors.hpp"
#include "orbifold/rgflow.hpp"
#include "orbifold/spectral.hpp"

namespace orbifold {

/// Z(beta) = sum over all sectors and modes of exp(-beta lambda).
inline double partition_function(const ModeBasis& basis, double beta) {
    if (!(beta > 0.0)) throw ValidationError("partition_function: beta must be positive");
    double z = 0.0;
    for (const SectorModes& s : basis.sectors)
        for (const Mode& m : s.modes) z += std::exp(-beta * m.eigenvalue);
    return z;
}

/// The same sum restricted to one sector; the discrete trace of
/// exp(-beta lambda) e_{[g]} Pi_k, which is block-diagonal over sectors.
inline double sector_partition(const ModeBasis& basis, int class_index, double beta) {
    if (!(beta > 0.0)) throw ValidationError("sector_partition: beta must be positive");
    if (class_index < 0 || class_index >= basis.sector_count())
        throw ValidationError("sector_partition: unknown class index " + std::to_string(class_index));
    double z = 0.0;
    for (const Mode& m : basis.sectors[class_index].modes) z += std::exp(-beta * m.eigenvalue);
    return z;
}

struct PartitionTable {
    std::vector<double> beta_grid;
    std::vector<double> total;
    std::vector<std::vector<double>> per_class;  // [class][beta index]
    double lambda_max = 0.0;
    double mode_count = 0.0;
};

inline PartitionTable partition_table(const ModeBasis& basis, const std::vector<double>& betas) {
    PartitionTable t;
    t.beta_grid = betas;
    t.lambda_max = basis.lambda_max();
    t.mode_count = static_cast<double>(basis.total_modes());
    t.per_class.assign(basis.sector_count(), std::vector<double>(betas.size(), 0.0));
    t.total.assign(betas.size(), 0.0);
    for (std::size_t i = 0; i < betas.size(); ++i) {
        t.total[i] = partition_function(basis, betas[i]);
        for (int c = 0; c < basis.sector_count(); ++c) t.per_class[c][i] = sector_partition(basis, c, betas[i]);
    }
    return t;
}

// ---------------------------------------------------------------------------
// Closed-form spectra for analytic spaces (beyond dense eigensolves).

struct AnalyticSpectrum {
    AnalyticTag tag;

    double lambda_max() const {
        const int n = tag.size;
        switch (tag.kind) {
            case AnalyticKind::circle: {
                double m = 0.0;
                for (int j = 0; j < n; ++j) m = std::max(m, circle_lambda(j));
                return m;
            }
            case AnalyticKind::torus: {
                double m = 0.0;
                for (int a = 0; a < n; ++a) m = std::max(m, torus_axis_lambda(a));
                return 2.0 * m;
            }
            case AnalyticKind::sphere:
                return static_cast<double>(n) * (n + 1.0);
        }
        return 0.0;
    }

    double mode_count() const {
        const double n = tag.size;
        switch (tag.kind) {
            case AnalyticKind::circle: return n;
            case AnalyticKind::torus: return n * n;
            case AnalyticKind::sphere: return (n + 1.0) * (n + 1.0);
        }
        return 0.0;
    }

    /// Exact finite sum of exp(-beta lambda) over every mode. The torus uses
    /// the per-axis product form, algebraically identical to the double sum.
    double partition_value(double beta) const {
        if (!(beta > 0.0)) throw ValidationError("partition_value: beta must be positive");
        const int n = tag.size;
        switch (tag.kind) {
            case AnalyticKind::circle: {
                double z = 0.0;
                for (int j = 0; j < n; ++j) z += std::exp(-beta * circle_lambda(j));
                return z;
            }
            case AnalyticKind::torus: {
                double axis = 0.0;
                for (int a = 0; a < n; ++a) axis += std::exp(-beta * torus_axis_lambda(a));
                return axis * axis;
            }
            case AnalyticKind::sphere: {
                double z = 0.0;
                for (int l = 0; l <= n; ++l)
                    z += (2.0 * l + 1.0) * std::exp(-beta * static_cast<double>(l) * (l + 1.0));
                return z;
            }
        }
        return 0.0;
    }

    /// (eigenvalue, multiplicity) rows for export, capped. The torus spectrum
    /// is summarized by its digest instead: enumerating n^2 pairs is not
    /// useful at the sizes this tag is meant for.
    std::vector<std::pair<double, double>> clusters(std::size_t max_rows) const {
        std::vector<std::pair<double, double>> rows;
        const int n = tag.size;
        switch (tag.kind) {
            case AnalyticKind::circle:
                for (int j = 0; j <= n / 2 && rows.size() < max_rows; ++j) {
                    const double mult = (j == 0 || 2 * j == n) ? 1.0 : 2.0;
                    rows.emplace_back(circle_lambda(j), mult);
                }
                break;
            case AnalyticKind::torus:
                break;
            case AnalyticKind::sphere:
                for (int l = 0; l <= n && rows.size() < max_rows; ++l)
                    rows.emplace_back(static_cast<double>(l) * (l + 1.0), 2.0 * l + 1.0);
                break;
        }
        return rows;
    }

private:
    double circle_lambda(int j) const {
        return 2.0 - 2.0 * std::cos(2.0 * kPi * j / static_cast<double>(tag.size));
    }
    double torus_axis_lambda(int a) const {
        const int n = tag.size;
        const double h = 2.0 * kPi / n;
        const double s = std::sin(kPi * a / static_cast<double>(n));
        return 4.0 * s * s / (h * h);
    }
};

inline AnalyticSpectrum analytic_spectrum(const AnalyticTag& tag) { return AnalyticSpectrum{tag}; }

/// Analytic spaces carry a single (untwisted) sector.
inline PartitionTable partition_table(const AnalyticSpectrum& spec, const std::vector<double>& betas) {
    PartitionTable t;
    t.beta_grid = betas;
    t.lambda_max = spec.lambda_max();
    t.mode_count = spec.mode_count();
    t.total.resize(betas.size());
    t.per_class.assign(1, std::vector<double>(betas.size(), 0.0));
    for (std::size_t i = 0; i < betas.size(); ++i) {
        t.total[i] = spec.partition_value(betas[i]);
        t.per_class[0][i] = t.total[i];
    }
    return t;
}

// ---------------------------------------------------------------------------
// Sector correlators.

/// Trace of exp(-beta Delta) M_{F1} ... M_{Fm} e_{[g]} in the full mode
/// basis. The multiplication operators are block-diagonal, so only the
/// named sector contributes: sum_k exp(-beta lambda_k) v_k^T W diag(phi) v_k
/// with phi the pointwise product of the fields' sector components.
inline Complex sector_correlator(const ModeBasis& basis, const std::vector<AlgebraElement>& fields, int class_index,
                                 double beta) {
    if (fields.empty()) throw ValidationError("sector_correlator: at least one field required");
    if (!(beta > 0.0)) throw ValidationError("sector_correlator: beta must be positive");
    if (class_index < 0 || class_index >= basis.sector_count())
        throw ValidationError("sector_correlator: unknown class index " + std::to_string(class_index));
    for (const AlgebraElement& f : fields) detail::require_basis_shape(basis, f, "sector_correlator");
    const SectorModes& sm = basis.sectors[class_index];
    const int d = sm.dimension();
    std::vector<Complex> phi(d, Complex(1.0, 0.0));
    for (const AlgebraElement& f : fields)
        for (int p = 0; p < d; ++p) phi[p] *= f.comps[class_index][p];
    Complex out(0.0, 0.0);
    for (const Mode& m : sm.modes) {
        Complex quad(0.0, 0.0);
        for (int p = 0; p < d; ++p) quad += m.vec[p] * sm.weight[p] * phi[p] * m.vec[p];
        out += std::exp(-beta * m.eigenvalue) * quad;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Heat-trace fit.

struct HeatFit {
    double leading = 0.0;   // coefficient of beta^{-n/2} (volume term)
    double constant = 0.0;  // constant term
    double residual = 0.0;  // rms of fit residuals
    int sample_count = 0;
};

/// Least-squares fit Z(beta) ~ c_{-1} beta^{-n/2} + c_0 over the table's
/// grid. The window must satisfy beta_min * lambda_max >= 25 so spectral
/// truncation is below 1e-8 at the smallest beta; otherwise the fit is
/// rejected as truncation-dominated.
inline HeatFit heat_fit(const PartitionTable& table, int dimension) {
    const std::size_t m = table.beta_grid.size();
    if (m < 4) throw ValidationError("heat_fit: at least 4 beta samples required");
    if (dimension <= 0) throw ValidationError("heat_fit: dimension must be positive");
    double beta_min = table.beta_grid.front();
    for (double b : table.beta_grid) beta_min = std::min(beta_min, b);
    if (!(table.lambda_max > 0.0) || beta_min * table.lambda_max < 25.0)
        throw ValidationError("heat_fit: truncation-dominated window rejected: beta_min * lambda_max = " +
                              std::to_string(beta_min * table.lambda_max) + " < 25 (no power law resolvable)");
    // 2x2 normal equations for Z ~ c * u + d, u = beta^{-n/2}.
    double suu = 0.0, su = 0.0, sz = 0.0, szu = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double u = std::pow(table.beta_grid[i], -0.5 * dimension);
        suu += u * u;
        su += u;
        sz += table.total[i];
        szu += table.total[i] * u;
    }
    const double nn = static_cast<double>(m);
    const double det = suu * nn - su * su;
    if (!(std::abs(det) > 1e-12 * std::max(1.0, suu * nn)))
        throw ValidationError("heat_fit: degenerate fit (basis functions indistinguishable on this window)");
    HeatFit fit;
    fit.leading = (szu * nn - sz * su) / det;
    fit.constant = (suu * sz - su * szu) / det;
    fit.sample_count = static_cast<int>(m);
    double rss = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double u = std::pow(table.beta_grid[i], -0.5 * dimension);
        const double r = table.total[i] - fit.leading * u - fit.constant;
        rss += r * r;
    }
    fit.residual = std::sqrt(rss / nn);
    return fit;
}

// ---------------------------------------------------------------------------
// Anomaly defects.

enum class ObservableKind { trace, pairing_with_fixed, partition_weighted };

/// A symmetry automorphism: a group automorphism pi together with one point
/// bijection per class, mapping the class's locus onto the locus of the
/// image class (positions into positions).
struct AutomorphismSpec {
    std::vector<int> group_map;
    std::vector<std::vector<int>> point_maps;
};

inline ValidationReport validate_automorphism(const SectorChart& chart, const FiniteGroupTable& group,
                                              const AutomorphismSpec& sigma) {
    const int n = group.order();
    if (static_cast<int>(sigma.group_map.size()) != n)
        return {false, "automorphism: group map must have one image per element", {}};
    std::vector<char> seen(n, 0);
    for (int g = 0; g < n; ++g) {
        const int img = sigma.group_map[g];
        if (img < 0 || img >= n || seen[img]) return {false, "automorphism: group map is not a bijection", {g}};
        seen[img] = 1;
    }
    for (int g = 0; g < n; ++g)
        for (int h = 0; h < n; ++h)
            if (sigma.group_map[group.mul(g, h)] != group.mul(sigma.group_map[g], sigma.group_map[h]))
                return {false,
                        "automorphism: group map is not a homomorphism at (g,h)=(" + std::to_string(g) + "," +
                            std::to_string(h) + ")",
                        {g, h}};
    const int k = chart.class_count();
    if (static_cast<int>(sigma.point_maps.size()) != k)
        return {false, "automorphism: expected one point map per class", {}};
    for (int c = 0; c < k; ++c) {
        const int target = chart.conjugacy.class_of[sigma.group_map[chart.sectors[c].representative]];
        const int src_size = chart.sectors[c].locus.size();
        const int dst_size = chart.sectors[target].locus.size();
        if (static_cast<int>(sigma.point_maps[c].size()) != src_size)
            return {false, "automorphism: point map for class " + std::to_string(c) + " has wrong length", {c}};
        if (src_size != dst_size)
            return {false,
                    "automorphism: class " + std::to_string(c) + " locus size differs from its image class " +
                        std::to_string(target),
                    {c, target}};
        std::vector<char> hit(dst_size, 0);
        for (int i = 0; i < src_size; ++i) {
            const int j = sigma.point_maps[c][i];
            if (j < 0 || j >= dst_size || hit[j])
                return {false, "automorphism: point map for class " + std::to_string(c) + " is not a bijection", {c, i}};
            hit[j] = 1;
        }
    }
    return {};
}

/// sigma(a): permute sector components by the induced class map and compose
/// with the point bijections.
inline AlgebraElement apply_automorphism(const SectorChart& chart, const FiniteGroupTable& group,
                                         const AutomorphismSpec& sigma, const AlgebraElement& a) {
    ValidationReport rep = validate_automorphism(chart, group, sigma);
    if (!rep.ok) throw ValidationError("apply_automorphism: " + rep.message);
    detail::require_chart_shape(chart, a, "apply_automorphism");
    AlgebraElement out = zero_element(chart);
    for (int c = 0; c < chart.class_count(); ++c) {
        const int target = chart.conjugacy.class_of[sigma.group_map[chart.sectors[c].representative]];
        for (std::size_t i = 0; i < a.comps[c].size(); ++i) out.comps[target][sigma.point_maps[c][i]] = a.comps[c][i];
    }
    return out;
}

struct AnomalyContext {
    const PairingWeights* weights = nullptr;   // trace / pairing kinds
    const AlgebraElement* fixed_b = nullptr;   // pairing_with_fixed
    const ModeBasis* basis = nullptr;          // partition_weighted
    double beta0 = 1.0;                        // partition_weighted
};

/// O(sigma(a)) - O(a) for the named observable kind.
inline Complex anomaly_defect(ObservableKind kind, const SectorChart& chart, const FiniteGroupTable& group,
                              const AutomorphismSpec& sigma, const AlgebraElement& a, const AnomalyContext& ctx) {
    const AlgebraElement sa = apply_automorphism(chart, group, sigma, a);
    auto evaluate = [&](const AlgebraElement& x) -> Complex {
        switch (kind) {
            case ObservableKind::trace:
                if (!ctx.weights) throw ValidationError("anomaly_defect: trace observable needs pairing weights");
                return algebra_trace(x, *ctx.weights);
            case ObservableKind::pairing_with_fixed:
                if (!ctx.weights || !ctx.fixed_b)
                    throw ValidationError("anomaly_defect: pairing observable needs weights and a fixed element");
                return frobenius_pairing(x, *ctx.fixed_b, *ctx.weights);
            case ObservableKind::partition_weighted: {
                if (!ctx.weights || !ctx.basis)
                    throw ValidationError("anomaly_defect: partition-weighted observable needs weights and modes");
                Complex acc(0.0, 0.0);
                for (int c = 0; c < chart.class_count(); ++c) {
                    const double zc = sector_partition(*ctx.basis, c, ctx.beta0);
                    Complex sect(0.0, 0.0);
                    for (std::size_t p = 0; p < x.comps[c].size(); ++p)
                        sect += ctx.weights->weights[c][p] * x.comps[c][p];
                    acc += zc * sect;
                }
                return acc;
            }
        }
        return Complex(0.0, 0.0);
    };
    return evaluate(sa) - evaluate(a);
}

// ---------------------------------------------------------------------------
// Smooth-limit comparison.

struct SmoothLimitReport {
    std::vector<double> beta_grid;
    std::vector<double> plain;                // ambient-spectrum Z, no sector machinery
    std::vector<double> untwisted;            // Z_{[1]} of the orbifold pipeline (full locus modes)
    std::vector<double> invariant_untwisted;  // group-averaged (C_G-invariant) untwisted trace
    double max_untwisted_diff = 0.0;
    double max_invariant_diff = 0.0;
    bool trivial_group = true;
};

/// Runs the plain single-sector pipeline next to the orbifold pipeline on
/// the same space. For the trivial group the two must agree to 1e-12. For
/// nontrivial groups the full-locus untwisted sector reproduces the plain
/// spectrum by construction; the group-averaged trace (only the
/// G-invariant modes) is recorded alongside as the physically reduced
/// sector, and its deviation is reported, not asserted.
inline SmoothLimitReport smooth_limit_compare(const DiscreteSpace& space, const GroupAction& action,
                                              const FiniteGroupTable& group, const std::vector<double>& betas,
                                              double cluster_tol = kDefaultClusterRelTol) {
    SmoothLimitReport rep;
    rep.beta_grid = betas;
    rep.trivial_group = (group.order() == 1);

    const FiniteGroupTable trivial = group_preset("trivial");
    const GroupAction id_action = trivial_action(space, trivial);
    const SectorChart plain_chart = sector_chart(space, id_action, trivial);
    const ModeBasis plain_basis = decompose_chart(space, plain_chart, cluster_tol);

    const SectorChart chart = sector_chart(space, action, group);
    const ModeBasis basis = decompose_chart(space, chart, cluster_tol);
    const int untw = chart.identity_class();
    const SectorModes& um = basis.sectors[untw];
    const int d = um.dimension();

    // Per-mode weight of the G-invariant projector (1/|G|) sum_g P_g in the
    // W-pairing; summed inside a degenerate cluster this is basis-independent.
    std::vector<double> invariant_weight(d, 0.0);
    const Sector& usec = chart.sectors[untw];
    for (int k = 0; k < d; ++k) {
        double q = 0.0;
        for (int g = 0; g < group.order(); ++g)
            for (int p = 0; p < d; ++p) {
                const int pos = usec.point_pos[action.perms[g][usec.locus.points[p]]];
                q += um.modes[k].vec[p] * um.weight[p] * um.modes[k].vec[pos];
            }
        invariant_weight[k] = q / static_cast<double>(group.order());
    }

    for (double beta : betas) {
        const double zp = partition_function(plain_basis, beta);
        const double zu = sector_partition(basis, untw, beta);
        double zi = 0.0;
        for (int k = 0; k < d; ++k) zi += std::exp(-beta * um.modes[k].eigenvalue) * invariant_weight[k];
        rep.plain.push_back(zp);
        rep.untwisted.push_back(zu);
        rep.invariant_untwisted.push_back(zi);
        rep.max_untwisted_diff = std::max(rep.max_untwisted_diff, std::abs(zu - zp));
        rep.max_invariant_diff = std::max(rep.max_invariant_diff, std::abs(zi - zp));
    }
    return rep;
}

}  // namespace orbifold
