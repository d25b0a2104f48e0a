#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "orbifold/rgflow.hpp"

using namespace orbifold;

namespace {

struct Fixture {
    DiscreteSpace space = make_circle(8);
    FiniteGroupTable group = group_preset("Z2");
    SectorChart chart;
    ModeBasis basis;
    PairingWeights weights;

    Fixture() {
        GroupAction refl;
        refl.perms.assign(2, std::vector<int>(8));
        for (int p = 0; p < 8; ++p) {
            refl.perms[0][p] = p;
            refl.perms[1][p] = (8 - p) % 8;
        }
        chart = sector_chart(space, refl, group);
        basis = decompose_chart(space, chart);
        weights = chart.pairing_weights();
    }
};

double max_abs_diff(const AlgebraElement& a, const AlgebraElement& b) {
    double m = 0.0;
    for (std::size_t c = 0; c < a.comps.size(); ++c)
        for (std::size_t p = 0; p < a.comps[c].size(); ++p) m = std::max(m, std::abs(a.comps[c][p] - b.comps[c][p]));
    return m;
}

}  // namespace

TEST_CASE("rg_filter preserves idempotents at every scale") {
    const Fixture f;
    for (double ell : default_ell_grid(f.basis))
        for (int c = 0; c < f.chart.class_count(); ++c) {
            const AlgebraElement e = idempotent(f.chart, c);
            const AlgebraElement filtered = rg_filter(make_rg_state(f.basis, ell), e);
            CHECK(weighted_norm(element_difference(filtered, e), f.weights) <= 1e-12);
        }
}

TEST_CASE("a cutoff above the spectrum is the identity map") {
    const Fixture f;
    const double ell = 1.0 / (2.0 * f.basis.lambda_max());  // cutoff = 2 lambda_max
    const RGState state = make_rg_state(f.basis, ell);
    std::mt19937_64 rng(37);
    for (int t = 0; t < 20; ++t) {
        const AlgebraElement a = random_element(f.chart, rng);
        CHECK(max_abs_diff(rg_filter(state, a), a) <= 1e-12);
    }
}

TEST_CASE("delta function projection matches the closed-form Fourier oracle") {
    // circle(8), untwisted delta at point 0, Lambda = 1: the retained modes
    // are j = 0, +-1, so P delta_0 (p) = 1/8 + (1/4) cos(pi p / 4).
    const Fixture f;
    AlgebraElement delta = zero_element(f.chart);
    delta.comps[0][0] = Complex(1.0, 0.0);
    const AlgebraElement filtered = rg_filter(make_rg_state(f.basis, 1.0), delta);
    for (int p = 0; p < 8; ++p) {
        const double oracle = 1.0 / 8.0 + 0.25 * std::cos(kPi * p / 4.0);
        CHECK(std::abs(filtered.comps[0][p] - oracle) <= 1e-10);
    }
}

TEST_CASE("rg_filter is a projection and coarser filters absorb finer ones") {
    const Fixture f;
    std::mt19937_64 rng(41);
    const std::vector<double> grid = default_ell_grid(f.basis, 9);
    for (int t = 0; t < 10; ++t) {
        const AlgebraElement a = random_element(f.chart, rng);
        for (double ell : grid) {
            const RGState st = make_rg_state(f.basis, ell);
            const AlgebraElement once = rg_filter(st, a);
            CHECK(max_abs_diff(rg_filter(st, once), once) <= 1e-10);
        }
        for (std::size_t i = 0; i < grid.size(); ++i)
            for (std::size_t j = i; j < grid.size(); ++j) {
                const RGState fine = make_rg_state(f.basis, grid[i]);    // smaller ell: larger cutoff
                const RGState coarse = make_rg_state(f.basis, grid[j]);  // larger ell: smaller cutoff
                const AlgebraElement coarse_only = rg_filter(coarse, a);
                CHECK(max_abs_diff(rg_filter(fine, coarse_only), coarse_only) <= 1e-10);
            }
    }
}

TEST_CASE("rg_filter commutes with sector projection exactly") {
    const Fixture f;
    std::mt19937_64 rng(43);
    const RGState st = make_rg_state(f.basis, 0.7);
    for (int t = 0; t < 10; ++t) {
        const AlgebraElement a = random_element(f.chart, rng);
        for (int c = 0; c < f.chart.class_count(); ++c) {
            const AlgebraElement x = rg_filter(st, sector_project(a, c));
            const AlgebraElement y = sector_project(rg_filter(st, a), c);
            for (int s = 0; s < f.chart.class_count(); ++s)
                for (std::size_t p = 0; p < x.comps[s].size(); ++p) CHECK(x.comps[s][p] == y.comps[s][p]);
        }
    }
}

TEST_CASE("rg_compress: unit, zero, and the trace identity") {
    const Fixture f;
    const RGState st = make_rg_state(f.basis, 1.0);

    const CompressedOperator unit = rg_compress(st, algebra_unit(f.chart));
    for (int i = 0; i < unit.matrix.rows(); ++i)
        for (int j = 0; j < unit.matrix.cols(); ++j)
            CHECK(std::abs(unit.matrix(i, j) - (i == j ? Complex(1.0, 0.0) : Complex(0.0, 0.0))) <= 1e-12);

    const CompressedOperator zero = rg_compress(st, zero_element(f.chart));
    CHECK(zero.matrix.max_abs() == 0.0);

    std::mt19937_64 rng(47);
    const AlgebraElement a = random_element(f.chart, rng);
    const CompressedOperator ca = rg_compress(st, a);
    Complex trace_oracle(0.0, 0.0);
    for (const auto& [s, k] : ca.modes) {
        const SectorModes& sm = f.basis.sectors[s];
        for (std::size_t p = 0; p < sm.weight.size(); ++p)
            trace_oracle += sm.modes[k].vec[p] * sm.weight[p] * a.comps[s][p] * sm.modes[k].vec[p];
    }
    CHECK(std::abs(ca.matrix.trace() - trace_oracle) <= 1e-12);
}

TEST_CASE("multiplicativity defect vanishes above the spectrum and for the unit") {
    const Fixture f;
    std::mt19937_64 rng(53);
    const AlgebraElement a = random_element(f.chart, rng);
    const AlgebraElement b = random_element(f.chart, rng);

    const RGState wide = make_rg_state(f.basis, 1.0 / (2.0 * f.basis.lambda_max()));
    CHECK(multiplicativity_defect(wide, a, b) <= 1e-10);

    const RGState mid = make_rg_state(f.basis, 1.0);
    CHECK(multiplicativity_defect(mid, algebra_unit(f.chart), b) <= 1e-10);
    CHECK(multiplicativity_defect(mid, a, algebra_unit(f.chart)) <= 1e-10);

    // Generic elements at a strict cutoff have a strictly positive defect.
    CHECK(multiplicativity_defect(mid, a, b) > 0.0);
}

TEST_CASE("beta_estimate is the crossing-window step function") {
    const Fixture f;
    // Kernel-supported element: beta vanishes for all ell.
    const AlgebraElement e1 = idempotent(f.chart, 1);  // two isolated fixed points, lambda = 0
    for (double ell : {0.1, 1.0, 10.0})
        CHECK(weighted_norm(beta_estimate(f.basis, e1, ell, 1e-3), f.weights) <= 1e-12);

    // Single-mode element at lambda*: nonzero exactly when the window
    // (1/(ell+dell), 1/ell] crosses lambda*. Margins of 1% on either side
    // keep the test away from floating ties.
    const SectorModes& sm = f.basis.sectors[0];
    const int k = 3;  // an interior eigenvalue of circle(8): lambda = 2
    const double lam = sm.clusters[sm.modes[k].cluster].eigenvalue;
    AlgebraElement mode = zero_element(f.chart);
    for (int p = 0; p < 8; ++p) mode.comps[0][p] = sm.modes[k].vec[p];

    const double ell_at = 1.0 / (1.01 * lam);            // cutoff just above lambda*
    const double dell = 1.0 / (0.99 * lam) - ell_at;     // cutoff just below after the step
    const AlgebraElement crossing = beta_estimate(f.basis, mode, ell_at, dell);
    CHECK(weighted_norm(crossing, f.weights) > 1.0);  // magnitude ~ ell/dell ~ 50
    // Expected value: -(ell/dell) * mode on the crossing cluster.
    AlgebraElement expected = mode;
    for (auto& v : expected.comps[0]) v *= -(ell_at / dell);
    CHECK(max_abs_diff(crossing, expected) <= 1e-9 * (ell_at / dell));

    const AlgebraElement quiet = beta_estimate(f.basis, mode, 0.5 * ell_at, 1e-4);
    CHECK(weighted_norm(quiet, f.weights) <= 1e-12);

    CHECK_THROWS_AS(beta_estimate(f.basis, mode, -1.0, 0.1), ValidationError);
    CHECK_THROWS_AS(beta_estimate(f.basis, mode, 1.0, 0.0), ValidationError);
}

TEST_CASE("is_rg_fixed: idempotents yes, UV-supported elements no, zero yes") {
    const Fixture f;
    const std::vector<double> grid = default_ell_grid(f.basis);
    for (int c = 0; c < f.chart.class_count(); ++c) {
        const FixedPointVerdict v = is_rg_fixed(f.basis, idempotent(f.chart, c), grid, 1e-9, f.weights);
        CHECK(v.fixed);
        CHECK_FALSE(v.witness_ell.has_value());
    }
    // An element with weight on the top eigenvalue is not fixed; the witness
    // is the first grid ell whose cutoff drops that cluster.
    const SectorModes& sm = f.basis.sectors[0];
    AlgebraElement top = zero_element(f.chart);
    for (int p = 0; p < 8; ++p) top.comps[0][p] = sm.modes[7].vec[p];
    const FixedPointVerdict v = is_rg_fixed(f.basis, top, grid, 1e-9, f.weights);
    CHECK_FALSE(v.fixed);
    REQUIRE(v.witness_ell.has_value());
    CHECK(1.0 / *v.witness_ell < sm.modes[7].eigenvalue);
    CHECK(v.max_deviation > 0.5);

    CHECK(is_rg_fixed(f.basis, zero_element(f.chart), grid, 1e-9, f.weights).fixed);
    CHECK_THROWS_AS(is_rg_fixed(f.basis, top, {}, 1e-9, f.weights), ValidationError);
}

TEST_CASE("fusion commutation defect: unit and wide-cutoff cases vanish") {
    const Fixture f;
    std::mt19937_64 rng(59);
    const AlgebraElement a = random_element(f.chart, rng);
    const AlgebraElement b = random_element(f.chart, rng);

    const RGState wide = make_rg_state(f.basis, 1.0 / (2.0 * f.basis.lambda_max()));
    CHECK(fusion_commutation_defect(wide, f.chart, a, b) <= 1e-10);

    const RGState mid = make_rg_state(f.basis, 1.0);
    const AlgebraElement e1 = idempotent(f.chart, f.chart.identity_class());
    CHECK(fusion_commutation_defect(mid, f.chart, e1, b) <= 1e-10);

    // Generic pair at a strict cutoff: a positive value is recorded.
    CHECK(fusion_commutation_defect(mid, f.chart, a, b) >= 0.0);
}

TEST_CASE("flow_sweep: counts weakly decreasing, idempotents fixed") {
    const Fixture f;
    std::mt19937_64 rng(61);
    const AlgebraElement pa = random_element(f.chart, rng);
    const AlgebraElement pb = random_element(f.chart, rng);
    const FlowReport rep = flow_sweep(f.basis, f.chart, {}, pa, pb);
    REQUIRE_FALSE(rep.rows.empty());
    for (std::size_t i = 1; i < rep.rows.size(); ++i)
        for (std::size_t s = 0; s < rep.rows[i].retained.size(); ++s)
            CHECK(rep.rows[i].retained[s] <= rep.rows[i - 1].retained[s]);
    for (bool fx : rep.idempotent_fixed) CHECK(fx);
    for (const auto& row : rep.rows) CHECK(row.idem_defect <= 1e-12);
}

TEST_CASE("invalid scales are rejected") {
    const Fixture f;
    CHECK_THROWS_AS(make_rg_state(f.basis, 0.0), ValidationError);
    CHECK_THROWS_AS(make_rg_state(f.basis, -2.0), ValidationError);
}
