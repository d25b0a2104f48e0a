#pragma once

// The unified orbifold algebra over a sector chart. An element carries one
// complex vector per conjugacy class, indexed by that class's fixed locus.
//
// Two distinct products are exposed on purpose:
//   diagonal_product - per-sector pointwise multiplication; commutative,
//     associative, unital with unit = sum of all sector idempotents. The
//     Frobenius pairing and trace live over this product.
//   fusion_product - sector-mixing multiplication [g] x [h] -> [g h]:
//     restrict both factors to X^g cap X^h, multiply pointwise, extend by
//     zero into the target locus. Its unit is the untwisted idempotent only.

#include <random>
#include <string>
#include <vector>

#include "orbifold/errors.hpp"
#include "orbifold/space.hpp"

namespace orbifold {

struct AlgebraElement {
    std::vector<std::vector<Complex>> comps;  // per class, over that class's locus points

    int class_count() const { return static_cast<int>(comps.size()); }
};

namespace detail {

inline void require_same_shape(const AlgebraElement& a, const AlgebraElement& b, const char* who) {
    if (a.comps.size() != b.comps.size()) throw ValidationError(std::string(who) + ": chart mismatch (sector count)");
    for (std::size_t c = 0; c < a.comps.size(); ++c)
        if (a.comps[c].size() != b.comps[c].size())
            throw ValidationError(std::string(who) + ": chart mismatch (sector " + std::to_string(c) + " length)");
}

inline void require_chart_shape(const SectorChart& chart, const AlgebraElement& a, const char* who) {
    if (a.class_count() != chart.class_count())
        throw ValidationError(std::string(who) + ": element does not match the chart (sector count)");
    for (int c = 0; c < chart.class_count(); ++c)
        if (static_cast<int>(a.comps[c].size()) != chart.sectors[c].locus.size())
            throw ValidationError(std::string(who) + ": element does not match the chart (sector " +
                                  std::to_string(c) + " length)");
}

}  // namespace detail

inline AlgebraElement zero_element(const SectorChart& chart) {
    AlgebraElement a;
    a.comps.resize(chart.class_count());
    for (int c = 0; c < chart.class_count(); ++c)
        a.comps[c].assign(chart.sectors[c].locus.size(), Complex(0.0, 0.0));
    return a;
}

/// e_{[g]}: constant 1 on the class's locus, 0 elsewhere. A class with an
/// empty locus yields a zero-length component (a valid 0-dim sector).
inline AlgebraElement idempotent(const SectorChart& chart, int class_index) {
    if (class_index < 0 || class_index >= chart.class_count())
        throw ValidationError("idempotent: unknown class index " + std::to_string(class_index));
    AlgebraElement a = zero_element(chart);
    for (auto& v : a.comps[class_index]) v = Complex(1.0, 0.0);
    return a;
}

/// The diagonal-product unit 1 = sum over classes of e_{[g]}.
inline AlgebraElement algebra_unit(const SectorChart& chart) {
    AlgebraElement a = zero_element(chart);
    for (auto& comp : a.comps)
        for (auto& v : comp) v = Complex(1.0, 0.0);
    return a;
}

inline AlgebraElement diagonal_product(const AlgebraElement& a, const AlgebraElement& b) {
    detail::require_same_shape(a, b, "diagonal_product");
    AlgebraElement out = a;
    for (std::size_t c = 0; c < out.comps.size(); ++c)
        for (std::size_t p = 0; p < out.comps[c].size(); ++p) out.comps[c][p] = a.comps[c][p] * b.comps[c][p];
    return out;
}

/// Sector-mixing product. For every class pair the factors are restricted to
/// the locus intersection, multiplied pointwise, and accumulated by zero
/// extension into the class of the representative product. Points outside
/// the target representative's locus are dropped; for abelian groups that
/// never happens (the intersection is contained in the target locus).
inline AlgebraElement fusion_product(const SectorChart& chart, const AlgebraElement& a, const AlgebraElement& b) {
    detail::require_chart_shape(chart, a, "fusion_product");
    detail::require_chart_shape(chart, b, "fusion_product");
    AlgebraElement out = zero_element(chart);
    const int k = chart.class_count();
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            const int t = chart.fusion_table[i][j];
            const Sector& si = chart.sectors[i];
            const Sector& sj = chart.sectors[j];
            const Sector& st = chart.sectors[t];
            for (int p : chart.intersections[i][j]) {
                const int pt = st.point_pos[p];
                if (pt < 0) continue;
                out.comps[t][pt] += a.comps[i][si.point_pos[p]] * b.comps[j][sj.point_pos[p]];
            }
        }
    return out;
}

/// Bilinear Frobenius pairing: sum over classes and locus points of
/// weight * a * b. No conjugation.
inline Complex frobenius_pairing(const AlgebraElement& a, const AlgebraElement& b, const PairingWeights& w) {
    detail::require_same_shape(a, b, "frobenius_pairing");
    if (w.weights.size() != a.comps.size()) throw ValidationError("frobenius_pairing: weight shape mismatch");
    Complex sum(0.0, 0.0);
    for (std::size_t c = 0; c < a.comps.size(); ++c) {
        if (w.weights[c].size() != a.comps[c].size())
            throw ValidationError("frobenius_pairing: weight shape mismatch in sector " + std::to_string(c));
        for (std::size_t p = 0; p < a.comps[c].size(); ++p) sum += w.weights[c][p] * a.comps[c][p] * b.comps[c][p];
    }
    return sum;
}

/// tau(a) = <a, 1>: the weighted sum of every component.
inline Complex algebra_trace(const AlgebraElement& a, const PairingWeights& w) {
    if (w.weights.size() != a.comps.size()) throw ValidationError("algebra_trace: weight shape mismatch");
    Complex sum(0.0, 0.0);
    for (std::size_t c = 0; c < a.comps.size(); ++c) {
        if (w.weights[c].size() != a.comps[c].size())
            throw ValidationError("algebra_trace: weight shape mismatch in sector " + std::to_string(c));
        for (std::size_t p = 0; p < a.comps[c].size(); ++p) sum += w.weights[c][p] * a.comps[c][p];
    }
    return sum;
}

inline AlgebraElement sector_project(const AlgebraElement& a, int class_index) {
    if (class_index < 0 || class_index >= a.class_count())
        throw ValidationError("sector_project: unknown class index " + std::to_string(class_index));
    AlgebraElement out = a;
    for (int c = 0; c < out.class_count(); ++c)
        if (c != class_index)
            for (auto& v : out.comps[c]) v = Complex(0.0, 0.0);
    return out;
}

/// Weighted l2 norm sqrt(sum w |a|^2); the norm used by defect diagnostics.
inline double weighted_norm(const AlgebraElement& a, const PairingWeights& w) {
    if (w.weights.size() != a.comps.size()) throw ValidationError("weighted_norm: weight shape mismatch");
    double sum = 0.0;
    for (std::size_t c = 0; c < a.comps.size(); ++c)
        for (std::size_t p = 0; p < a.comps[c].size(); ++p) sum += w.weights[c][p] * std::norm(a.comps[c][p]);
    return std::sqrt(sum);
}

inline AlgebraElement element_difference(const AlgebraElement& a, const AlgebraElement& b) {
    detail::require_same_shape(a, b, "element_difference");
    AlgebraElement out = a;
    for (std::size_t c = 0; c < out.comps.size(); ++c)
        for (std::size_t p = 0; p < out.comps[c].size(); ++p) out.comps[c][p] = a.comps[c][p] - b.comps[c][p];
    return out;
}

/// Portable uniform double in [0,1) from the top 53 bits of the generator.
inline double canonical_unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Random element with independent re/im entries uniform in [-1,1];
/// deterministic for a given generator state.
inline AlgebraElement random_element(const SectorChart& chart, std::mt19937_64& rng) {
    AlgebraElement a = zero_element(chart);
    for (auto& comp : a.comps)
        for (auto& v : comp) {
            const double re = 2.0 * canonical_unit(rng) - 1.0;
            const double im = 2.0 * canonical_unit(rng) - 1.0;
            v = Complex(re, im);
        }
    return a;
}

}  // namespace orbifold
