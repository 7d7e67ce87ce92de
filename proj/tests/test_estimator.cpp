#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <limits>

#include "helixlab/estimator.hpp"
#include "helixlab/rng.hpp"

using namespace helixlab;

TEST_CASE("interpolation bound is the geometric mean") {
    CHECK(std::fabs(interpolation_bound(0.04, 0.25) - 0.1) <= 1e-15);
    CHECK(interpolation_bound(0.0, 5.0) == 0.0);
    CHECK_THROWS_AS(interpolation_bound(-1.0, 1.0), std::invalid_argument);
}

TEST_CASE("rayleigh quotient of the identity is one") {
    GridSpec g(32, 8.0);
    double inf = std::numeric_limits<double>::infinity();
    SampledMultiplier s = sample_weight(g, [](Vec3) { return 1.0; }, -inf, inf);
    auto rf = random_frequency_field(g, FrequencyBand{}, stream_key(40, 0.0, 0, 0, 0));
    CHECK(std::fabs(rayleigh_l4(s, rf.field) - 1.0) <= 1e-10);

    // representation and grid are validated
    SpectralField phys(g, Rep::Physical);
    CHECK_THROWS_AS(rayleigh_l4(s, phys), std::logic_error);
    SampledMultiplier other{GridSpec(16, 8.0)};
    CHECK_THROWS_AS(rayleigh_l4(other, rf.field), std::invalid_argument);
}

TEST_CASE("multiplier operators are diagonal on lattice modes") {
    GridSpec g = grid_for_lambda(8.0, 8.0);
    PieceIndex p(8.0, 0, 0);
    SampledMultiplier s = sample_piece(p, g, 1e-9);
    REQUIRE(!s.index.empty());

    // a pure mode in the plateau comes back scaled by its symbol value
    std::size_t pick = s.index[s.index.size() / 2];
    std::complex<double> expect = s.value[s.index.size() / 2];
    SpectralField mode(g, Rep::Frequency);
    mode.data[pick] = {1.0, 0.0};
    CHECK(std::fabs(rayleigh_l4(s, mode) - std::abs(expect)) <=
          1e-10 * (1.0 + std::abs(expect)));

    // a mode outside the sampled support is annihilated
    SpectralField off(g, Rep::Frequency);
    off.data[g.flat(1, 1, 1)] = {1.0, 0.0};
    CHECK(rayleigh_l4(s, off) <= 1e-14);
}

TEST_CASE("piece norm bracket holds and reruns bit-identically") {
    // collar-resolving grid: the bracket leans on the kernel l1, which is
    // only meaningful when the radial profile is sampled
    GridSpec g = collar_grid(8.0);
    PieceIndex p(8.0, 0, 0);
    L4Probe probe;
    NormRecord r = compute_norm_record(p, g, 4, 99, 1e-8, &probe);

    CHECK(r.l2_norm > 0.0);
    CHECK(r.kernel_l1 == r.linf_upper);
    CHECK(r.kernel_l1 >= r.l2_norm - 1e-9);  // convolution dominates the sup
    CHECK(std::fabs(r.interp_upper -
                    interpolation_bound(r.l2_norm, r.linf_upper)) <= 1e-15);
    CHECK(r.l4_lower > 0.0);
    CHECK(r.l4_lower <= 1.05 * r.interp_upper);
    /* the cubic grid truncates the kernel needle, so capture sits below the
     * 0.95 confidence bar by design and the record carries the flag rather
     * than erroring; truncation can only shrink the l1, so the interpolation
     * upper bound it feeds errs tight, never inflated */
    CHECK(r.mass_capture > 0.7);
    CHECK(r.mass_capture < 0.95);
    CHECK(r.delta == p.delta());
    CHECK(r.seed == 99);
    CHECK(probe.best == r.l4_lower);
    CHECK(probe.best == std::max(probe.best_random, probe.knapp_value));
    CHECK(probe.knapp_best == (probe.knapp_value > probe.best_random));

    NormRecord r2 = compute_norm_record(p, g, 4, 99, 1e-8);
    CHECK(r.l2_norm == r2.l2_norm);
    CHECK(r.linf_upper == r2.linf_upper);
    CHECK(r.l4_lower == r2.l4_lower);
    CHECK(r.interp_upper == r2.interp_upper);
    CHECK(r.mass_capture == r2.mass_capture);

    // the cache is an optimization, not a source of state
    clear_shell_cache();
    NormRecord r3 = compute_norm_record(p, g, 4, 99, 1e-8);
    CHECK(r.l2_norm == r3.l2_norm);
    CHECK(r.l4_lower == r3.l4_lower);

    CHECK(norm_l2(p, g, 1e-8) == r.l2_norm);
    CHECK(norm_l4_lower(p, g, 4, 99, 1e-8) == r.l4_lower);
    CHECK_THROWS_AS(norm_l4_probe(p, g, 0, 99, 1e-8), std::invalid_argument);
}

TEST_CASE("square function of a one-piece family is an identity") {
    GridSpec g = grid_for_lambda(8.0, 8.0);
    PieceIndex p(8.0, 0, 0);
    std::vector<SampledMultiplier> family{sample_piece(p, g, 1e-8)};
    auto rf = random_test_field(g, FrequencyBand{}, stream_key(41, 8.0, 0, 0, 0));
    SquareFunctionResult res = square_function_pieces(family, rf.field);
    CHECK(res.sectors == 1);
    CHECK(res.lhs > 0.0);
    CHECK(std::fabs(res.lhs - res.rhs) <= 1e-12 * res.rhs);
    CHECK(std::fabs(res.cs_margin - 1.0) <= 1e-12);
    CHECK(std::fabs(res.pointwise_max - 1.0) <= 1e-12);

    CHECK_THROWS_AS(square_function_pieces({}, rf.field), std::invalid_argument);
    std::vector<SampledMultiplier> wrong{SampledMultiplier{GridSpec(16, 8.0)}};
    CHECK_THROWS_AS(square_function_pieces(wrong, rf.field), std::invalid_argument);
}

TEST_CASE("square-function comparisons never exceed their ceilings") {
    GridSpec g = grid_for_lambda(8.0, 8.0);
    FrequencyBand band;
    band.xi3_min = 6.0;
    band.xi3_max = 16.0;
    band.ratio_min = 0.98;
    band.ratio_max = 1.02;
    for (int t = 0; t < 3; ++t) {
        auto rf = random_test_field(g, band, stream_key(42, 8.0, 0, 0, t));
        REQUIRE(!rf.empty_band);
        SquareFunctionResult res = square_function_ratio(8.0, 0, g, rf.field, 1e-8);
        CHECK(res.sectors == 13);
        CHECK(res.lhs > 0.0);
        CHECK(res.rhs > 0.0);
        CHECK(res.cs_margin <= 1.0 + 1e-10);
        CHECK(res.pointwise_max <= 1.0 + 1e-10);
    }
    // deterministic: the same field gives the same numbers
    auto rf = random_test_field(g, band, stream_key(42, 8.0, 0, 0, 0));
    SquareFunctionResult a = square_function_ratio(8.0, 0, g, rf.field, 1e-8);
    SquareFunctionResult b = square_function_ratio(8.0, 0, g, rf.field, 1e-8);
    CHECK(a.lhs == b.lhs);
    CHECK(a.rhs == b.rhs);

    SpectralField freq(g, Rep::Frequency);
    CHECK_THROWS_AS(square_function_ratio(8.0, 0, g, freq, 1e-8), std::logic_error);
}

TEST_CASE("two pieces with disjoint supports still satisfy the ceilings") {
    GridSpec g(32, 8.0);
    auto slab = [&](double lo, double hi) {
        return sample_weight(
            g, [lo, hi](Vec3 xi) { return (xi.z > lo && xi.z < hi) ? 1.0 : 0.0; },
            lo, hi);
    };
    std::vector<SampledMultiplier> family{slab(2.0, 5.0), slab(5.5, 9.0)};
    auto rf = random_test_field(g, FrequencyBand{}, stream_key(43, 0.0, 0, 0, 0));
    SquareFunctionResult res = square_function_pieces(family, rf.field);
    CHECK(res.sectors == 2);
    CHECK(res.cs_margin <= 1.0 + 1e-10);
    CHECK(res.pointwise_max <= 1.0 + 1e-10);
    CHECK(res.lhs <= std::sqrt(2.0) * res.rhs * (1.0 + 1e-10));
}

TEST_CASE("angular square function: degenerate and concentrated cases") {
    GridSpec g(32, 8.0);
    // opening so wide that a single sector covers the circle
    FrequencyBand band;
    band.abs_min = 2.0;
    band.abs_max = 10.0;
    auto rf = random_test_field(g, band, stream_key(44, 0.0, 0, 0, 0));
    REQUIRE(!rf.empty_band);
    CHECK(std::fabs(cordoba_ratio(6.4, g, rf.field) - 1.0) <= 1e-10);

    /* a field living inside one sector plateau passes through a single
     * localization untouched, so the ratio is exactly 1 */
    double delta = 0.25;
    int count = static_cast<int>(std::lround(2.0 * M_PI / delta));  // 25
    FrequencyBand sector;
    sector.abs_min = 2.0;
    sector.abs_max = 10.0;
    sector.theta_center = 0.0;
    sector.theta_half = 0.2 * (2.0 * M_PI / count);  // inside the quarter-aperture
    auto cf = random_test_field(g, sector, stream_key(44, 0.0, 0, 0, 1));
    REQUIRE(!cf.empty_band);
    CHECK(std::fabs(cordoba_ratio(delta, g, cf.field) - 1.0) <= 1e-9);

    CHECK_THROWS_AS(cordoba_ratio(0.0, g, rf.field), std::invalid_argument);
    SpectralField freq(g, Rep::Frequency);
    CHECK_THROWS_AS(cordoba_ratio(0.25, g, freq), std::logic_error);
}

TEST_CASE("focusing field keeps most of its energy on its piece window") {
    GridSpec g = collar_grid(8.0);
    PieceIndex p(8.0, 0, 0);
    SampledMultiplier w = sample_weight(
        g, [&p](Vec3 xi) { return piece_weight(p, xi); }, 6.0, 16.0);
    SpectralField kf = knapp_field(p, g);
    forward_transform(kf);
    double inside = 0.0, total = 0.0;
    for (const auto& v : kf.data) total += std::norm(v);
    for (std::size_t i = 0; i < w.index.size(); ++i)
        inside += std::norm(w.value[i].real() * kf.data[w.index[i]]);
    REQUIRE(total > 0.0);
    CHECK(std::sqrt(inside / total) >= 0.8);
}

TEST_CASE("whole-block lower bound is positive and reproducible") {
    GridSpec g = collar_grid(8.0);  // shares the cached shell with the tests above
    double a = slambda_norm_l4_lower(8.0, g, 3, 123, 1e-8);
    double b = slambda_norm_l4_lower(8.0, g, 3, 123, 1e-8);
    CHECK(a > 0.0);
    CHECK(a == b);
    CHECK_THROWS_AS(slambda_norm_l4_lower(8.0, g, 0, 123, 1e-8),
                    std::invalid_argument);
    CHECK_THROWS_AS(slambda_norm_l4_lower(512.0, GridSpec(64, 8.0), 3, 123, 1e-8),
                    std::invalid_argument);
}

TEST_CASE("exponent sweep input validation") {
    CHECK_THROWS_AS(tau_estimate({{8.0, 0}, {12.0, 0}, {16.0, 0}}, 8.0, 2, 1, 1e-8),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        tau_estimate({{8.0, 0}, {8.0, 0}, {12.0, 0}, {16.0, 0}}, 8.0, 0, 1, 1e-8),
        std::invalid_argument);
}

TEST_CASE("region-restricted sweep: control calibration is flat") {
    GridSpec g(32, 8.0);
    std::vector<double> lambdas{2.5, 3.2, 4.0, 5.0};
    RegionSweep ctrl = elliptic_oscillatory_l4(Region::Oscillatory, lambdas, g, 3,
                                               7, 1e-6, true);
    REQUIRE(ctrl.values.size() == 4);
    for (double v : ctrl.values) {
        // near 1: the weight is flat on most of the draw window.  (A 0..1
        // frequency weight contracts l2 but not l4, so 1 is not a ceiling.)
        CHECK(v > 0.5);
        CHECK(v <= 1.2);
    }
    CHECK(std::fabs(ctrl.fit.slope) <= 0.1);

    RegionSweep again = elliptic_oscillatory_l4(Region::Oscillatory, lambdas, g, 3,
                                                7, 1e-6, true);
    CHECK(ctrl.values == again.values);

    CHECK_THROWS_AS(
        elliptic_oscillatory_l4(Region::ConicA, lambdas, g, 3, 7, 1e-6, true),
        std::invalid_argument);
    CHECK_THROWS_AS(
        elliptic_oscillatory_l4(Region::Elliptic, {30.0}, g, 3, 7, 1e-6, true),
        std::invalid_argument);  // beyond Nyquist for this lattice
}
