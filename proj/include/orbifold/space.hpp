#pragma once

// Discretized target spaces: weighted point sets with edge weights standing
// in for X, finite group actions by graph automorphisms, fixed-point loci,
// sector charts indexed by conjugacy classes, and induced locus Laplacians.
//
// The Laplace-Beltrami operator becomes the generalized pair (L, W): the
// stiffness matrix of the induced subgraph together with the quadrature
// weights, self-adjoint in the W-weighted pairing.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "orbifold/errors.hpp"
#include "orbifold/group.hpp"
#include "orbifold/linalg.hpp"

namespace orbifold {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

enum class AnalyticKind { circle, torus, sphere };

/// Marks a space whose spectrum has a closed form:
///   circle(n):  cycle graph, unit weights, lambda_j = 2 - 2 cos(2 pi j / n)
///   torus(n):   n x n periodic grid of the 2 pi-periodic square torus with
///               point weight h^2 (h = 2 pi / n) and unit edges, so the
///               generalized spectrum is (4/h^2)(sin^2(pi a/n) + sin^2(pi b/n))
///   sphere(L):  unit-sphere mode list lambda_l = l(l+1), multiplicity 2l+1,
///               l <= L; purely spectral, no point set
struct AnalyticTag {
    AnalyticKind kind = AnalyticKind::circle;
    int size = 0;  // circle: n, torus: n per axis, sphere: l_max
};

inline std::string analytic_kind_name(AnalyticKind k) {
    switch (k) {
        case AnalyticKind::circle: return "circle";
        case AnalyticKind::torus: return "torus";
        case AnalyticKind::sphere: return "sphere";
    }
    return "?";
}

struct DiscreteSpace {
    struct Edge {
        int a = 0;
        int b = 0;
        double weight = 1.0;
    };

    std::vector<double> weights;  // quadrature weight per point; ids are 0-based indices
    std::vector<Edge> edges;
    std::optional<AnalyticTag> analytic;

    int point_count() const { return static_cast<int>(weights.size()); }
};

/// Torus grids above this per-axis size are kept spectral-only (no points).
inline constexpr int kTorusMaterializeLimit = 256;

inline ValidationReport validate_space(const DiscreteSpace& space) {
    const int n = space.point_count();
    for (int i = 0; i < n; ++i)
        if (!(space.weights[i] > 0.0))
            return {false, "space: point " + std::to_string(i) + " has nonpositive quadrature weight", {i}};
    std::map<std::pair<int, int>, double> seen;
    for (const auto& e : space.edges) {
        if (e.a < 0 || e.a >= n || e.b < 0 || e.b >= n)
            return {false, "space: edge (" + std::to_string(e.a) + "," + std::to_string(e.b) + ") references an unknown point", {e.a, e.b}};
        if (e.a == e.b) return {false, "space: self-loop at point " + std::to_string(e.a), {e.a}};
        if (!(e.weight > 0.0))
            return {false, "space: edge (" + std::to_string(e.a) + "," + std::to_string(e.b) + ") has nonpositive weight", {e.a, e.b}};
        const std::pair<int, int> key = std::minmax(e.a, e.b);
        if (!seen.emplace(key, e.weight).second)
            return {false, "space: duplicate edge (" + std::to_string(e.a) + "," + std::to_string(e.b) + ")", {e.a, e.b}};
    }
    return {};
}

inline DiscreteSpace make_circle(int n) {
    if (n < 3) throw ValidationError("circle: need at least 3 points");
    DiscreteSpace s;
    s.weights.assign(n, 1.0);
    s.edges.reserve(n);
    for (int i = 0; i < n; ++i) s.edges.push_back({i, (i + 1) % n, 1.0});
    s.analytic = AnalyticTag{AnalyticKind::circle, n};
    return s;
}

inline DiscreteSpace make_torus(int n) {
    if (n < 3) throw ValidationError("torus: need at least 3 points per axis");
    DiscreteSpace s;
    s.analytic = AnalyticTag{AnalyticKind::torus, n};
    if (n > kTorusMaterializeLimit) return s;  // spectral-only
    const double h = 2.0 * kPi / n;
    s.weights.assign(static_cast<std::size_t>(n) * n, h * h);
    auto id = [n](int i, int j) { return i * n + j; };
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            s.edges.push_back({id(i, j), id((i + 1) % n, j), 1.0});
            s.edges.push_back({id(i, j), id(i, (j + 1) % n), 1.0});
        }
    return s;
}

inline DiscreteSpace make_sphere(int l_max) {
    if (l_max < 0) throw ValidationError("sphere: l_max must be nonnegative");
    DiscreteSpace s;
    s.analytic = AnalyticTag{AnalyticKind::sphere, l_max};
    return s;
}

// ---------------------------------------------------------------------------
// Group actions.

struct GroupAction {
    std::vector<std::vector<int>> perms;  // perms[g][p] = image of point p under g
};

inline GroupAction trivial_action(const DiscreteSpace& space, const FiniteGroupTable& group) {
    GroupAction a;
    std::vector<int> id(space.point_count());
    for (int p = 0; p < space.point_count(); ++p) id[p] = p;
    a.perms.assign(group.order(), id);
    return a;
}

/// Homomorphism property, weight preservation, and edge preservation; the
/// report carries the first violation found.
inline ValidationReport validate_action(const DiscreteSpace& space, const GroupAction& action,
                                        const FiniteGroupTable& group) {
    const int n = space.point_count();
    if (static_cast<int>(action.perms.size()) != group.order())
        return {false,
                "action: expected " + std::to_string(group.order()) + " permutations, got " +
                    std::to_string(action.perms.size()),
                {}};
    std::vector<char> seen(n);
    for (int g = 0; g < group.order(); ++g) {
        if (static_cast<int>(action.perms[g].size()) != n)
            return {false, "action: element " + std::to_string(g) + " permutation has wrong length", {g}};
        std::fill(seen.begin(), seen.end(), 0);
        for (int p = 0; p < n; ++p) {
            const int q = action.perms[g][p];
            if (q < 0 || q >= n || seen[q])
                return {false, "action: element " + std::to_string(g) + " does not act by a permutation", {g}};
            seen[q] = 1;
        }
    }
    const int e = group.identity();
    for (int p = 0; p < n; ++p)
        if (action.perms[e][p] != p)
            return {false, "action: identity element must act trivially", {e, p}};
    for (int g = 0; g < group.order(); ++g)
        for (int h = 0; h < group.order(); ++h) {
            const int gh = group.mul(g, h);
            for (int p = 0; p < n; ++p)
                if (action.perms[gh][p] != action.perms[g][action.perms[h][p]])
                    return {false,
                            "action: homomorphism fails at (g,h)=(" + std::to_string(g) + "," + std::to_string(h) +
                                ") on point " + std::to_string(p),
                            {g, h, p}};
        }
    auto close = [](double x, double y) { return std::abs(x - y) <= 1e-12 * std::max({1.0, std::abs(x), std::abs(y)}); };
    for (int g = 0; g < group.order(); ++g)
        for (int p = 0; p < n; ++p)
            if (!close(space.weights[p], space.weights[action.perms[g][p]]))
                return {false,
                        "action: element " + std::to_string(g) + " does not preserve the quadrature weight of point " +
                            std::to_string(p),
                        {g, p}};
    std::map<std::pair<int, int>, double> edge_map;
    for (const auto& ed : space.edges) edge_map[std::minmax(ed.a, ed.b)] = ed.weight;
    for (int g = 0; g < group.order(); ++g)
        for (const auto& ed : space.edges) {
            const std::pair<int, int> key = std::minmax(action.perms[g][ed.a], action.perms[g][ed.b]);
            auto it = edge_map.find(key);
            if (it == edge_map.end() || !close(it->second, ed.weight))
                return {false,
                        "action: element " + std::to_string(g) + " does not map edge (" + std::to_string(ed.a) + "," +
                            std::to_string(ed.b) + ") to an edge of equal weight",
                        {g, ed.a, ed.b}};
        }
    return {};
}

// ---------------------------------------------------------------------------
// Fixed loci and sector charts.

struct FixedLocus {
    int element = 0;           // the group element whose fixed points these are
    std::vector<int> points;   // ambient ids, ascending (ambient order)
    std::vector<double> weights;

    int size() const { return static_cast<int>(points.size()); }
};

inline FixedLocus fixed_locus(const DiscreteSpace& space, const GroupAction& action, int g) {
    if (g < 0 || g >= static_cast<int>(action.perms.size()))
        throw ValidationError("fixed_locus: element index out of range");
    FixedLocus out;
    out.element = g;
    for (int p = 0; p < space.point_count(); ++p)
        if (action.perms[g][p] == p) {
            out.points.push_back(p);
            out.weights.push_back(space.weights[p]);
        }
    return out;
}

struct Sector {
    int class_index = 0;
    int representative = 0;
    int centralizer_size = 1;
    FixedLocus locus;
    std::vector<int> point_pos;  // ambient id -> position in locus, -1 if absent
};

struct PairingWeights {
    std::vector<std::vector<double>> weights;  // per class
};

struct SectorChart {
    ConjugacyData conjugacy;
    std::vector<Sector> sectors;                             // one per class, class order
    std::vector<std::vector<std::vector<int>>> intersections;  // [i][j]: ambient ids in locus_i and locus_j
    std::vector<std::vector<int>> fusion_table;              // [i][j] -> class index of rep_i * rep_j
    bool abelian = true;
    std::string fusion_note;  // attached to non-abelian charts

    int class_count() const { return static_cast<int>(sectors.size()); }
    int identity_class() const { return conjugacy.identity_class; }

    PairingWeights pairing_weights() const {
        PairingWeights w;
        for (const Sector& s : sectors) w.weights.push_back(s.locus.weights);
        return w;
    }
};

/// One sector per conjugacy class, using the class representative's fixed
/// locus. Construction asserts the inclusion X^g cap X^h subset X^{gh} for
/// every representative pair, which the fusion product relies on.
inline SectorChart sector_chart(const DiscreteSpace& space, const GroupAction& action,
                                const FiniteGroupTable& group) {
    if (static_cast<int>(action.perms.size()) != group.order())
        throw ValidationError("sector_chart: action size does not match group order");
    ValidationReport rep = validate_action(space, action, group);
    if (!rep.ok) throw ValidationError("sector_chart: invalid action: " + rep.message);

    SectorChart chart;
    chart.conjugacy = conjugacy_classes(group);
    const int k = static_cast<int>(chart.conjugacy.classes.size());
    for (int ci = 0; ci < k; ++ci) {
        Sector s;
        s.class_index = ci;
        s.representative = chart.conjugacy.representative[ci];
        s.centralizer_size = static_cast<int>(chart.conjugacy.centralizer[ci].size());
        s.locus = fixed_locus(space, action, s.representative);
        s.point_pos.assign(space.point_count(), -1);
        for (int i = 0; i < s.locus.size(); ++i) s.point_pos[s.locus.points[i]] = i;
        chart.sectors.push_back(std::move(s));
    }
    chart.abelian = group.is_abelian();
    if (!chart.abelian)
        chart.fusion_note =
            "non-abelian group: the fusion class product uses fixed minimal representatives and is "
            "representative-dependent";

    chart.fusion_table.assign(k, std::vector<int>(k, 0));
    chart.intersections.assign(k, std::vector<std::vector<int>>(k));
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            const int gi = chart.sectors[i].representative;
            const int gj = chart.sectors[j].representative;
            const int prod = group.mul(gi, gj);
            chart.fusion_table[i][j] = chart.conjugacy.class_of[prod];
            std::vector<int> common;
            std::set_intersection(chart.sectors[i].locus.points.begin(), chart.sectors[i].locus.points.end(),
                                  chart.sectors[j].locus.points.begin(), chart.sectors[j].locus.points.end(),
                                  std::back_inserter(common));
            for (int p : common)
                if (action.perms[prod][p] != p)
                    throw ValidationError(
                        "sector_chart: inclusion X^g cap X^h subset X^{gh} violated; the action is inconsistent");
            chart.intersections[i][j] = std::move(common);
        }
    return chart;
}

// ---------------------------------------------------------------------------
// Locus Laplacians.

struct LaplacianPair {
    Matrix stiffness;            // L = degree - adjacency of the induced subgraph
    std::vector<double> weight;  // quadrature weights of the locus points
};

/// Stiffness matrix of the edge-weighted subgraph induced on the locus.
/// Empty loci yield the 0-dimensional operator; isolated points the zero
/// operator.
inline LaplacianPair build_laplacian(const DiscreteSpace& space, const FixedLocus& locus) {
    const int d = locus.size();
    std::vector<int> pos(space.point_count(), -1);
    for (int i = 0; i < d; ++i) {
        const int p = locus.points[i];
        if (p < 0 || p >= space.point_count())
            throw ValidationError("build_laplacian: locus references a point outside the space");
        pos[p] = i;
    }
    LaplacianPair out;
    out.stiffness = Matrix(d, d);
    out.weight = locus.weights;
    for (const auto& e : space.edges) {
        const int pa = pos[e.a];
        const int pb = pos[e.b];
        if (pa < 0 || pb < 0) continue;
        out.stiffness(pa, pa) += e.weight;
        out.stiffness(pb, pb) += e.weight;
        out.stiffness(pa, pb) -= e.weight;
        out.stiffness(pb, pa) -= e.weight;
    }
    return out;
}

}  // namespace orbifold
