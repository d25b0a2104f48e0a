#pragma once

// Per-sector generalized eigendecomposition of the locus Laplacians,
// degeneracy clustering, and the UV/IR scale split.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "orbifold/algebra.hpp"
#include "orbifold/errors.hpp"
#include "orbifold/linalg.hpp"
#include "orbifold/space.hpp"

namespace orbifold {

inline constexpr double kDefaultClusterRelTol = 1e-9;

struct Mode {
    double eigenvalue = 0.0;
    std::vector<double> vec;  // W-orthonormal eigenvector over the locus points
    int cluster = -1;
};

struct Cluster {
    double eigenvalue = 0.0;  // mean of member eigenvalues
    std::vector<int> members;
};

struct SectorModes {
    std::vector<double> weight;  // W diagonal (locus quadrature weights)
    std::vector<Mode> modes;     // eigenvalues ascending
    std::vector<Cluster> clusters;

    int dimension() const { return static_cast<int>(modes.size()); }
    double lambda_max() const { return modes.empty() ? 0.0 : modes.back().eigenvalue; }
};

struct ModeBasis {
    std::vector<SectorModes> sectors;

    int sector_count() const { return static_cast<int>(sectors.size()); }
    int total_modes() const {
        int t = 0;
        for (const auto& s : sectors) t += s.dimension();
        return t;
    }
    double lambda_max() const {
        double m = 0.0;
        for (const auto& s : sectors) m = std::max(m, s.lambda_max());
        return m;
    }
    /// Smallest strictly positive cluster eigenvalue, or 0 when none exists.
    double lambda_min_positive() const {
        double m = 0.0;
        for (const auto& s : sectors)
            for (const auto& c : s.clusters)
                if (c.eigenvalue > 0.0 && (m == 0.0 || c.eigenvalue < m)) m = c.eigenvalue;
        return m;
    }
};

/// Greedy sweep grouping consecutive eigenvalues with
/// |lambda_{i+1} - lambda_i| <= rel_tol * max(1, lambda_i); the cluster
/// eigenvalue is the member mean.
inline SectorModes cluster_modes(SectorModes sector, double rel_tol = kDefaultClusterRelTol) {
    sector.clusters.clear();
    const int d = sector.dimension();
    int i = 0;
    while (i < d) {
        Cluster c;
        c.members.push_back(i);
        double sum = sector.modes[i].eigenvalue;
        int j = i + 1;
        while (j < d &&
               std::abs(sector.modes[j].eigenvalue - sector.modes[j - 1].eigenvalue) <=
                   rel_tol * std::max(1.0, sector.modes[j - 1].eigenvalue)) {
            c.members.push_back(j);
            sum += sector.modes[j].eigenvalue;
            ++j;
        }
        c.eigenvalue = sum / static_cast<double>(c.members.size());
        const int id = static_cast<int>(sector.clusters.size());
        for (int k : c.members) sector.modes[k].cluster = id;
        sector.clusters.push_back(std::move(c));
        i = j;
    }
    return sector;
}

/// Full generalized eigensystem of (L, W), deterministically ordered, with
/// singleton clusters attached (re-cluster with cluster_modes for a coarser
/// tolerance).
inline SectorModes eigendecompose(const LaplacianPair& lap) {
    SectorModes out;
    out.weight = lap.weight;
    const int d = lap.stiffness.rows();
    if (d == 0) return out;
    SymmetricEigen eig = generalized_eigensolve(lap.stiffness, lap.weight);
    out.modes.resize(d);
    for (int k = 0; k < d; ++k) {
        out.modes[k].eigenvalue = eig.values[k];
        out.modes[k].vec.resize(d);
        for (int i = 0; i < d; ++i) out.modes[k].vec[i] = eig.vectors(i, k);
    }
    return cluster_modes(std::move(out), 0.0);
}

/// Eigendecomposition of every sector of a chart.
inline ModeBasis decompose_chart(const DiscreteSpace& space, const SectorChart& chart,
                                 double rel_tol = kDefaultClusterRelTol) {
    ModeBasis basis;
    for (const Sector& s : chart.sectors)
        basis.sectors.push_back(cluster_modes(eigendecompose(build_laplacian(space, s.locus)), rel_tol));
    return basis;
}

struct ScaleSplit {
    double cutoff = 0.0;
    std::vector<int> first_uv;  // per sector: index of the first UV mode
};

/// Partition each sector at the cutoff. Whole clusters land on one side: a
/// cluster is IR iff its cluster eigenvalue satisfies lambda <= cutoff.
inline ScaleSplit scale_split(const ModeBasis& basis, double cutoff) {
    if (cutoff < 0.0) throw ValidationError("scale_split: cutoff must be nonnegative");
    ScaleSplit split;
    split.cutoff = cutoff;
    for (const SectorModes& s : basis.sectors) {
        int first = s.dimension();
        for (const Cluster& c : s.clusters)
            if (c.eigenvalue > cutoff) {
                first = c.members.front();
                break;
            }
        split.first_uv.push_back(first);
    }
    return split;
}

/// The generalized operator W^{-1} L applied to a sector component.
inline std::vector<Complex> apply_laplacian(const LaplacianPair& lap, const std::vector<Complex>& f) {
    const int d = lap.stiffness.rows();
    if (static_cast<int>(f.size()) != d) throw ValidationError("apply_laplacian: component length mismatch");
    std::vector<Complex> out(d, Complex(0.0, 0.0));
    for (int i = 0; i < d; ++i) {
        Complex acc(0.0, 0.0);
        for (int j = 0; j < d; ++j) acc += lap.stiffness(i, j) * f[j];
        out[i] = acc / lap.weight[i];
    }
    return out;
}

/// Residual ||L v - lambda W v|| of one mode, for verification.
inline double mode_residual(const LaplacianPair& lap, const Mode& mode) {
    const int d = lap.stiffness.rows();
    double sum = 0.0;
    for (int i = 0; i < d; ++i) {
        double acc = 0.0;
        for (int j = 0; j < d; ++j) acc += lap.stiffness(i, j) * mode.vec[j];
        acc -= mode.eigenvalue * lap.weight[i] * mode.vec[i];
        sum += acc * acc;
    }
    return std::sqrt(sum);
}

}  // namespace orbifold
