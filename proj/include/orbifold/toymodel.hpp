#pragma once

// The exact C/Z2 model: truncated parity-graded polynomial sectors plus a
// one-dimensional twisted sector (the value at the fixed point {0}).
// Independent of the graph machinery; toy_cross_check replays the same data
// through the generic spectral pipeline and compares coefficientwise.
//
// Eigenvalue convention: the monomial z^n carries lambda = n; the twisted
// scalar carries lambda = 0 and therefore survives every cutoff.

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "orbifold/errors.hpp"
#include "orbifold/rgflow.hpp"
#include "orbifold/spectral.hpp"

namespace orbifold {

struct ParityElement {
    int truncation = 0;               // N: monomials z^0..z^N are stored
    std::vector<Complex> even;        // coefficients of z^0, z^2, ...
    std::vector<Complex> odd;         // coefficients of z^1, z^3, ...
    Complex twisted = Complex(0.0, 0.0);  // value at the fixed point {0}

    static int even_size(int n) { return n / 2 + 1; }
    static int odd_size(int n) { return (n + 1) / 2; }
};

inline ParityElement zero_parity_element(int truncation) {
    if (truncation < 0) throw ValidationError("toy model: truncation degree must be nonnegative");
    ParityElement e;
    e.truncation = truncation;
    e.even.assign(ParityElement::even_size(truncation), Complex(0.0, 0.0));
    e.odd.assign(ParityElement::odd_size(truncation), Complex(0.0, 0.0));
    return e;
}

/// Even/odd split of a coefficient vector over z^0..z^N, with the twisted
/// value set to f(0) (the coefficient of z^0).
inline ParityElement parity_split(const std::vector<Complex>& coefficients) {
    const int n = coefficients.empty() ? 0 : static_cast<int>(coefficients.size()) - 1;
    ParityElement e = zero_parity_element(n);
    for (int d = 0; d <= n && d < static_cast<int>(coefficients.size()); ++d) {
        if (d % 2 == 0)
            e.even[d / 2] = coefficients[d];
        else
            e.odd[d / 2] = coefficients[d];
    }
    e.twisted = coefficients.empty() ? Complex(0.0, 0.0) : coefficients[0];
    return e;
}

/// e_+: the constant 1 in the even (untwisted) sector.
inline ParityElement toy_idempotent_untwisted(int truncation) {
    ParityElement e = zero_parity_element(truncation);
    e.even[0] = Complex(1.0, 0.0);
    return e;
}

/// e_-: the unit of the one-dimensional twisted sector.
inline ParityElement toy_idempotent_twisted(int truncation) {
    ParityElement e = zero_parity_element(truncation);
    e.twisted = Complex(1.0, 0.0);
    return e;
}

/// Polynomial product with parity bookkeeping (even*even -> even,
/// odd*odd -> even, even*odd -> odd), truncated at degree N; twisted values
/// multiply as functions on the fixed point.
inline ParityElement toy_product(const ParityElement& a, const ParityElement& b) {
    if (a.truncation != b.truncation) throw ValidationError("toy_product: truncation degrees differ");
    const int n = a.truncation;
    auto coeff = [n](const ParityElement& x, int degree) -> Complex {
        if (degree < 0 || degree > n) return Complex(0.0, 0.0);
        return degree % 2 == 0 ? x.even[degree / 2] : x.odd[degree / 2];
    };
    ParityElement out = zero_parity_element(n);
    for (int da = 0; da <= n; ++da) {
        const Complex ca = coeff(a, da);
        if (ca == Complex(0.0, 0.0)) continue;
        for (int db = 0; db + da <= n; ++db) {
            const Complex cb = coeff(b, db);
            if (cb == Complex(0.0, 0.0)) continue;
            const int d = da + db;
            if (d % 2 == 0)
                out.even[d / 2] += ca * cb;
            else
                out.odd[d / 2] += ca * cb;
        }
    }
    out.twisted = a.twisted * b.twisted;
    return out;
}

/// Spectral cutoff at Lambda = 1/ell: zero every monomial with degree
/// n > 1/ell in both parities; the twisted value (lambda = 0) is always
/// retained.
inline ParityElement toy_rg(const ParityElement& a, double ell) {
    if (!(ell > 0.0)) throw ValidationError("toy_rg: scale ell must be positive");
    const double cutoff = 1.0 / ell;
    ParityElement out = a;
    for (std::size_t k = 0; k < out.even.size(); ++k)
        if (static_cast<double>(2 * k) > cutoff) out.even[k] = Complex(0.0, 0.0);
    for (std::size_t k = 0; k < out.odd.size(); ++k)
        if (static_cast<double>(2 * k + 1) > cutoff) out.odd[k] = Complex(0.0, 0.0);
    return out;
}

// ---------------------------------------------------------------------------
// Cross-check against the generic spectral pipeline.

/// The toy spectrum replayed as generic machinery: a diagonal mode basis
/// with lambda = n split by parity plus a single lambda = 0 twisted mode.
/// Sector order: [even, odd, twisted].
inline ModeBasis toy_mode_basis(int truncation) {
    if (truncation < 0) throw ValidationError("toy model: truncation degree must be nonnegative");
    auto diagonal_sector = [](const std::vector<double>& lambdas) {
        SectorModes s;
        const int d = static_cast<int>(lambdas.size());
        s.weight.assign(d, 1.0);
        s.modes.resize(d);
        for (int k = 0; k < d; ++k) {
            s.modes[k].eigenvalue = lambdas[k];
            s.modes[k].vec.assign(d, 0.0);
            s.modes[k].vec[k] = 1.0;
        }
        return cluster_modes(std::move(s), 0.0);
    };
    std::vector<double> even_l, odd_l;
    for (int k = 0; 2 * k <= truncation; ++k) even_l.push_back(2.0 * k);
    for (int k = 0; 2 * k + 1 <= truncation; ++k) odd_l.push_back(2.0 * k + 1.0);
    ModeBasis basis;
    basis.sectors.push_back(diagonal_sector(even_l));
    basis.sectors.push_back(diagonal_sector(odd_l));
    basis.sectors.push_back(diagonal_sector({0.0}));
    return basis;
}

inline AlgebraElement toy_as_element(const ParityElement& a) {
    AlgebraElement e;
    e.comps.resize(3);
    e.comps[0] = a.even;
    e.comps[1] = a.odd;
    e.comps[2] = {a.twisted};
    return e;
}

struct ToyCrossCheck {
    int truncation = 0;
    int trials = 0;
    std::vector<double> ell_grid;
    double max_deviation = 0.0;
    bool pass = true;
};

/// Runs toy_rg and the generic rg_filter on identical spectra over the grid
/// and reports the worst coefficientwise deviation across random elements.
inline ToyCrossCheck toy_cross_check(int truncation, std::vector<double> ell_grid, int trials = 50,
                                     unsigned long long seed = 0x0b1f01dULL) {
    const ModeBasis basis = toy_mode_basis(truncation);
    if (ell_grid.empty()) ell_grid = default_ell_grid(basis);
    ToyCrossCheck report;
    report.truncation = truncation;
    report.trials = trials;
    report.ell_grid = ell_grid;
    std::mt19937_64 rng(seed);
    for (int t = 0; t < trials; ++t) {
        ParityElement a = zero_parity_element(truncation);
        for (auto& v : a.even) v = Complex(2.0 * canonical_unit(rng) - 1.0, 2.0 * canonical_unit(rng) - 1.0);
        for (auto& v : a.odd) v = Complex(2.0 * canonical_unit(rng) - 1.0, 2.0 * canonical_unit(rng) - 1.0);
        a.twisted = Complex(2.0 * canonical_unit(rng) - 1.0, 2.0 * canonical_unit(rng) - 1.0);
        const AlgebraElement generic = toy_as_element(a);
        for (double ell : ell_grid) {
            const ParityElement toy = toy_rg(a, ell);
            const AlgebraElement filtered = rg_filter(make_rg_state(basis, ell), generic);
            const AlgebraElement expected = toy_as_element(toy);
            for (int c = 0; c < 3; ++c)
                for (std::size_t p = 0; p < expected.comps[c].size(); ++p)
                    report.max_deviation =
                        std::max(report.max_deviation, std::abs(expected.comps[c][p] - filtered.comps[c][p]));
        }
    }
    report.pass = report.max_deviation <= 1e-12;
    return report;
}

}  // namespace orbifold
