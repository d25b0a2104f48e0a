#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "orbifold/toymodel.hpp"

using namespace orbifold;

namespace {

double max_abs_diff(const ParityElement& a, const ParityElement& b) {
    double m = std::abs(a.twisted - b.twisted);
    for (std::size_t k = 0; k < a.even.size(); ++k) m = std::max(m, std::abs(a.even[k] - b.even[k]));
    for (std::size_t k = 0; k < a.odd.size(); ++k) m = std::max(m, std::abs(a.odd[k] - b.odd[k]));
    return m;
}

ParityElement monomial(int n, int degree) {
    ParityElement e = zero_parity_element(n);
    if (degree % 2 == 0)
        e.even[degree / 2] = Complex(1.0, 0.0);
    else
        e.odd[degree / 2] = Complex(1.0, 0.0);
    return e;
}

}  // namespace

TEST_CASE("parity_split: constants, monomials, mixed polynomials") {
    const ParityElement one = parity_split({Complex(1.0, 0.0)});
    CHECK(one.truncation == 0);
    CHECK(one.even == std::vector<Complex>{Complex(1.0, 0.0)});
    CHECK(one.odd.empty());
    CHECK(one.twisted == Complex(1.0, 0.0));

    const ParityElement z = parity_split({Complex(0.0, 0.0), Complex(1.0, 0.0)});
    CHECK(z.even == std::vector<Complex>{Complex(0.0, 0.0)});
    CHECK(z.odd == std::vector<Complex>{Complex(1.0, 0.0)});
    CHECK(z.twisted == Complex(0.0, 0.0));

    const ParityElement f = parity_split({Complex(3.0, 0.0), Complex(2.0, 0.0), Complex(5.0, 0.0)});
    CHECK(f.even == std::vector<Complex>{Complex(3.0, 0.0), Complex(5.0, 0.0)});
    CHECK(f.odd == std::vector<Complex>{Complex(2.0, 0.0)});
    CHECK(f.twisted == Complex(3.0, 0.0));
}

TEST_CASE("parity_split agrees with the (f(z) +- f(-z))/2 symmetrization oracle") {
    std::mt19937_64 rng(71);
    for (int t = 0; t < 30; ++t) {
        const int n = 1 + static_cast<int>(rng() % 12);
        std::vector<Complex> coeffs(n + 1);
        for (auto& c : coeffs) c = Complex(2.0 * canonical_unit(rng) - 1.0, 2.0 * canonical_unit(rng) - 1.0);
        const ParityElement split = parity_split(coeffs);
        // Oracle: coefficients of (f(z) + f(-z))/2 and (f(z) - f(-z))/2.
        for (int d = 0; d <= n; ++d) {
            const Complex sym = 0.5 * (coeffs[d] + (d % 2 == 0 ? coeffs[d] : -coeffs[d]));
            const Complex alt = 0.5 * (coeffs[d] - (d % 2 == 0 ? coeffs[d] : -coeffs[d]));
            if (d % 2 == 0) {
                CHECK(split.even[d / 2] == sym);
            } else {
                CHECK(split.odd[d / 2] == alt);
            }
        }
        CHECK(split.twisted == coeffs[0]);
    }
}

TEST_CASE("toy_product: idempotents, parity landing, truncation") {
    const int n = 4;
    const ParityElement eplus = toy_idempotent_untwisted(n);
    const ParityElement etw = toy_idempotent_twisted(n);
    CHECK(max_abs_diff(toy_product(eplus, eplus), eplus) == 0.0);
    CHECK(max_abs_diff(toy_product(etw, etw), etw) == 0.0);
    // Orthogonality of the two sector units.
    const ParityElement cross = toy_product(eplus, etw);
    CHECK(max_abs_diff(cross, zero_parity_element(n)) == 0.0);

    // z * z lands in the even sector.
    const ParityElement zz = toy_product(monomial(n, 1), monomial(n, 1));
    CHECK(zz.even[1] == Complex(1.0, 0.0));
    CHECK(zz.odd == std::vector<Complex>(2, Complex(0.0, 0.0)));

    // (1 + z)(1 - z) = 1 - z^2 for N >= 2.
    ParityElement a = parity_split({Complex(1.0, 0.0), Complex(1.0, 0.0), Complex(0.0, 0.0)});
    ParityElement b = parity_split({Complex(1.0, 0.0), Complex(-1.0, 0.0), Complex(0.0, 0.0)});
    const ParityElement prod = toy_product(a, b);
    CHECK(prod.even[0] == Complex(1.0, 0.0));
    CHECK(prod.even[1] == Complex(-1.0, 0.0));
    CHECK(prod.odd[0] == Complex(0.0, 0.0));
    CHECK(prod.twisted == Complex(1.0, 0.0));

    // Degrees beyond N are truncated, not wrapped.
    const ParityElement big = toy_product(monomial(n, 3), monomial(n, 3));
    CHECK(max_abs_diff(big, zero_parity_element(n)) == 0.0);

    CHECK_THROWS_AS(toy_product(zero_parity_element(2), zero_parity_element(3)), ValidationError);
}

TEST_CASE("parity conservation table holds for all monomial pairs") {
    const int n = 12;
    for (int da = 0; da <= n; ++da)
        for (int db = 0; da + db <= n; ++db) {
            const ParityElement p = toy_product(monomial(n, da), monomial(n, db));
            const int d = da + db;
            if (d % 2 == 0) {
                CHECK(p.even[d / 2] == Complex(1.0, 0.0));
                for (const Complex& c : p.odd) CHECK(c == Complex(0.0, 0.0));
            } else {
                CHECK(p.odd[d / 2] == Complex(1.0, 0.0));
                for (const Complex& c : p.even) CHECK(c == Complex(0.0, 0.0));
            }
        }
}

TEST_CASE("toy_rg: thresholds, twisted survival, identity regime") {
    // f = 1 + z^3 at ell = 1/2: the z^3 mode (lambda = 3 > 2) is removed.
    const ParityElement f = parity_split({Complex(1.0, 0.0), Complex(0.0, 0.0), Complex(0.0, 0.0), Complex(1.0, 0.0)});
    const ParityElement filtered = toy_rg(f, 0.5);
    CHECK(filtered.even[0] == Complex(1.0, 0.0));
    CHECK(filtered.odd[1] == Complex(0.0, 0.0));
    CHECK(filtered.odd[0] == Complex(0.0, 0.0));
    CHECK(filtered.twisted == Complex(1.0, 0.0));  // twisted survives

    // ell = 1/N keeps every stored mode.
    std::mt19937_64 rng(73);
    const int n = 9;
    ParityElement a = zero_parity_element(n);
    for (auto& v : a.even) v = Complex(canonical_unit(rng), canonical_unit(rng));
    for (auto& v : a.odd) v = Complex(canonical_unit(rng), canonical_unit(rng));
    a.twisted = Complex(canonical_unit(rng), canonical_unit(rng));
    CHECK(max_abs_diff(toy_rg(a, 1.0 / n), a) == 0.0);

    // The twisted value survives arbitrarily coarse scales.
    const ParityElement coarse = toy_rg(a, 1e6);
    CHECK(coarse.twisted == a.twisted);
    for (std::size_t k = 1; k < coarse.even.size(); ++k) CHECK(coarse.even[k] == Complex(0.0, 0.0));

    // toy_rg is a projection and preserves the parity split.
    for (double ell : {0.2, 0.45, 1.0}) {
        const ParityElement once = toy_rg(a, ell);
        CHECK(max_abs_diff(toy_rg(once, ell), once) == 0.0);
    }
    ParityElement even_only = a;
    for (auto& v : even_only.odd) v = Complex(0.0, 0.0);
    const ParityElement filtered_even = toy_rg(even_only, 0.3);
    for (const Complex& c : filtered_even.odd) CHECK(c == Complex(0.0, 0.0));

    CHECK_THROWS_AS(toy_rg(a, 0.0), ValidationError);
}

TEST_CASE("toy idempotents are fixed by toy_rg at every scale") {
    const int n = 8;
    for (double ell : {1e-3, 0.1, 0.5, 1.0, 7.0, 1e4}) {
        CHECK(max_abs_diff(toy_rg(toy_idempotent_untwisted(n), ell), toy_idempotent_untwisted(n)) == 0.0);
        CHECK(max_abs_diff(toy_rg(toy_idempotent_twisted(n), ell), toy_idempotent_twisted(n)) == 0.0);
    }
}

TEST_CASE("toy_cross_check agrees with the generic pipeline") {
    const ToyCrossCheck base = toy_cross_check(8, {});
    CHECK(base.pass);
    CHECK(base.max_deviation <= 1e-12);

    const ToyCrossCheck tiny = toy_cross_check(0, {});
    CHECK(tiny.pass);

    // Include exact reciprocal-integer scales where the cutoff ties a mode.
    std::vector<double> grid;
    for (int k = 1; k <= 16; ++k) grid.push_back(1.0 / k);
    const ToyCrossCheck ties = toy_cross_check(16, grid, 50);
    CHECK(ties.pass);
    CHECK(ties.max_deviation <= 1e-12);
}
