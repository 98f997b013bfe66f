#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <vector>

#include "mwlp/error.hpp"
#include "mwlp/muckenhoupt.hpp"
#include "mwlp/scalar_path.hpp"

using namespace mwlp;

namespace {

// Antiderivative of |x|^a on the real line (a > -1).
double power_primitive(double x, double a) {
    return std::copysign(std::pow(std::abs(x), a + 1.0) / (a + 1.0), x);
}

double exact_mean(double lo, double hi, double a) {
    return (power_primitive(hi, a) - power_primitive(lo, a)) / (hi - lo);
}

// Brute-force sup over intervals [s r, (s+1) r) of mean(|x|^a) / inf(|x|^a), a < 0,
// with s scanned densely over [-1, 0] (homogeneity removes r).
double brute_force_a1(double a) {
    double best = 0.0;
    for (int i = 0; i <= 20000; ++i) {
        const double lo = -1.0 + i / 20000.0;
        const double hi = lo + 1.0;
        const double far = std::max(std::abs(lo), std::abs(hi));
        best = std::max(best, exact_mean(lo, hi, a) / std::pow(far, a));
    }
    return best;
}

// Same quantity restricted to the cubes of a family, with exact integrals and
// the infimum over the whole cube.
double family_a1(const CubeFamily& family, double a) {
    double best = 0.0;
    for (std::size_t i = 0; i < family.size(); ++i) {
        const Cube c = family.cube(i);
        const double lo = c.center[0] - 0.5 * c.r, hi = c.center[0] + 0.5 * c.r;
        const double far = std::max(std::abs(lo), std::abs(hi));
        best = std::max(best, exact_mean(lo, hi, a) / std::pow(far, a));
    }
    return best;
}

scalar::Family scalar_family(const CubeFamily& f) {
    return scalar::Family{f.dim(), f.scales(), f.box(), f.q()};
}

scalar::Weight scalar_power(double a) {
    return [a](std::span<const double> x) {
        double s = 0.0;
        for (double v : x) s += v * v;
        return std::pow(std::sqrt(s), a);
    };
}

std::vector<WeightSpec> zoo() {
    std::vector<WeightSpec> out;
    for (int n : {1, 2}) {
        for (int N : {1, 2, 3}) out.push_back(identity_weight(n, N));
        for (double a : {-0.5, -0.25, 0.0}) out.push_back(scalar_power_weight(n, 1, a));
        out.push_back(diagonal_power_weight(n, {-0.5, 0.0}));
        out.push_back(diagonal_power_weight(n, {-0.25, -0.5, 0.0}));
        out.push_back(conjugated_weight(n, {-0.5, -0.25}));
    }
    return out;
}

CubeFamily small_family(int n) {
    return n == 1 ? CubeFamily::dyadic(1, -3, 2, 4.0, 16) : CubeFamily::dyadic(2, -1, 1, 1.0, 4);
}

}  // namespace

TEST_CASE("CubeFamily enumeration and dilation") {
    const CubeFamily f = CubeFamily::dyadic(1, -1, 1, 2.0, 4);
    // r = 1/2: centers k/4, |k| <= 8; r = 1: |k| <= 4; r = 2: |k| <= 2.
    CHECK(f.size() == 17 + 9 + 5);
    const Cube c = f.cube(0);
    CHECK(c.r == 0.5);
    CHECK(c.center[0] == -2.0);
    const CubeFamily g = f.dilated(0.25);
    REQUIRE(g.size() == f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        CHECK(g.cube(i).r == 0.25 * f.cube(i).r);
        CHECK(g.cube(i).center[0] == 0.25 * f.cube(i).center[0]);
    }
    CHECK_THROWS_AS(CubeFamily::dyadic(1, 0, 0, 1.0, 3), Error);
    const CubeFamily empty(1, {}, 1.0, 4);
    CHECK_THROWS_AS(ap_constant_small_p(identity_weight(1, 1), 1.0, empty), Error);
}

TEST_CASE("scalar_reduction examples") {
    const double x1[] = {1.3};
    CHECK(scalar_reduction(identity_weight(1, 2), 1.0, Vector::Unit(2, 0))(x1) == 1.0);
    const double x4[] = {4.0};
    CHECK(scalar_reduction(scalar_power_weight(1, 1, -0.5), 1.0, Vector::Ones(1))(x4) ==
          doctest::Approx(0.5).epsilon(1e-15));
    Vector diag_dir(2);
    diag_dir << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
    const double one[] = {1.0};
    // Oracle: W(1) = I, so w = |(1/sqrt2, 1/sqrt2)| = 1.
    CHECK(scalar_reduction(diagonal_power_weight(1, {-0.5, 0.0}), 1.0, diag_dir)(one) ==
          doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(scalar_reduction(identity_weight(1, 2), 1.0, Vector::Ones(2)), Error);
}

TEST_CASE("small-p constant: identity is exactly one") {
    for (double p : {0.25, 0.5, 1.0}) {
        CHECK(ap_constant_small_p(identity_weight(1, 2), p, small_family(1)).value == 1.0);
        CHECK(ap_constant_small_p(identity_weight(2, 3), p, small_family(2)).value == 1.0);
    }
    CHECK_THROWS_AS(ap_constant_small_p(identity_weight(1, 1), 1.5, small_family(1)), Error);
}

TEST_CASE("small-p constant of |x|^{-1/2} matches the brute-force oracle") {
    // Over all intervals the supremum is 1 + sqrt 2, attained off the (r/2)-lattice.
    CHECK(brute_force_a1(-0.5) == doctest::Approx(1.0 + std::sqrt(2.0)).epsilon(1e-6));

    const CubeFamily family = CubeFamily::dyadic(1, -8, 4, 16.0, 512);
    const double oracle = family_a1(family, -0.5);
    CHECK(oracle == doctest::Approx(2.0).epsilon(1e-12));
    const ApEstimate est = ap_constant_small_p(scalar_power_weight(1, 1, -0.5), 1.0, family);
    CHECK(std::abs(est.value - oracle) / oracle < 0.02);
    CHECK(est.value <= oracle);
    CHECK(est.argmax_cube.r > 0.0);

    // Generic matrix kernel (N = 2 diagonal, second entry constant) on a few cubes.
    const CubeFamily tiny = CubeFamily::dyadic(1, 0, 0, 0.5, 512);
    const ApEstimate diag = ap_constant_small_p(diagonal_power_weight(1, {-0.5, 0.0}), 1.0, tiny);
    CHECK(std::abs(diag.value - family_a1(tiny, -0.5)) / 2.0 < 0.02);
}

TEST_CASE("small-p constant converges monotonically under q refinement") {
    const CubeFamily family = CubeFamily::dyadic(1, -8, 4, 16.0, 64);
    const int qs[] = {64, 128, 256, 512};
    const auto trace = ap_refinement_trace(scalar_power_weight(1, 1, -0.5), 1.0, family, qs);
    for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i].value >= trace[i - 1].value);
}

TEST_CASE("large-p constant") {
    CHECK(ap_constant_large_p(identity_weight(1, 2), 2.0, small_family(1)).value ==
          doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(ap_constant_large_p(identity_weight(1, 1), 1.0, small_family(1)), Error);

    // |x|^{1/2} with p = 2: dense oracle from exact cube integrals over the same family.
    const CubeFamily family = CubeFamily::dyadic(1, -8, 4, 16.0, 512);
    double oracle = 0.0;
    for (std::size_t i = 0; i < family.size(); ++i) {
        const Cube c = family.cube(i);
        const double lo = c.center[0] - 0.5 * c.r, hi = c.center[0] + 0.5 * c.r;
        oracle = std::max(oracle, exact_mean(lo, hi, 0.5) * exact_mean(lo, hi, -0.5));
    }
    const WeightSpec w = scalar_power_weight(1, 1, 0.5);
    const double v512 = ap_constant_large_p(w, 2.0, family).value;
    const double v1024 = ap_constant_large_p(w, 2.0, family.with_q(1024)).value;
    CHECK(std::isfinite(v512));
    CHECK(std::abs(v1024 - v512) / v512 < 0.02);
    CHECK(std::abs(v512 - oracle) / oracle < 0.02);
}

TEST_CASE("N = 1 matrix path equals the scalar path") {
    const CubeFamily family = CubeFamily::dyadic(1, -4, 3, 8.0, 32);
    for (double a : {-0.5, -0.25, 0.0, 0.25, 0.5}) {
        const WeightSpec w = scalar_power_weight(1, 1, a);
        if (a <= 0.0) {
            for (double p : {0.5, 1.0}) {
                const double matrix = ap_constant_small_p(w, p, family).value;
                const double scalar = scalar::ap_small_p(scalar_power(a), scalar_family(family));
                CHECK(std::abs(matrix - scalar) <= 1e-12 * scalar);
            }
        }
        for (double p : {1.5, 2.0, 3.0}) {
            const double matrix = ap_constant_large_p(w, p, family).value;
            const double scalar = scalar::ap_large_p(scalar_power(a), p, scalar_family(family));
            CHECK(std::abs(matrix - scalar) <= 1e-12 * scalar);
        }
    }
    const CubeFamily plane = CubeFamily::dyadic(2, -1, 1, 1.0, 4);
    const WeightSpec w2 = scalar_power_weight(2, 1, -0.25);
    CHECK(std::abs(ap_constant_small_p(w2, 1.0, plane).value -
                   scalar::ap_small_p(scalar_power(-0.25), scalar_family(plane))) < 1e-12);
}

TEST_CASE("A_p estimates are at least one across the zoo") {
    for (const WeightSpec& spec : zoo()) {
        const CubeFamily family = small_family(spec.n);
        for (double p : {0.5, 1.0, 2.0}) {
            const double v = ap_constant(spec, p, family).value;
            CHECK(v >= 1.0 - 1e-9);
        }
    }
}

TEST_CASE("A_p estimates are dilation invariant") {
    for (const WeightSpec& spec : zoo()) {
        const CubeFamily family = small_family(spec.n);
        for (double p : {0.5, 2.0}) {
            const double base = ap_constant(spec, p, family).value;
            for (double R : {0.25, 0.5, 2.0, 4.0}) {
                const double dilated = ap_constant(dilate_weight(spec, R), p, family.dilated(1.0 / R)).value;
                CHECK(std::abs(dilated - base) <= 1e-12 * base);
            }
        }
    }
}

TEST_CASE("A_p estimates do not decrease under refinement") {
    for (const WeightSpec& spec : zoo()) {
        if (spec.n != 1) continue;
        const CubeFamily coarse = CubeFamily::dyadic(1, -2, 1, 2.0, 16);
        const CubeFamily wider = CubeFamily::dyadic(1, -3, 2, 2.0, 16);
        for (double p : {0.5, 1.0, 2.0}) {
            const double v = ap_constant(spec, p, coarse).value;
            CHECK(ap_constant(spec, p, coarse.with_q(32)).value >= v * (1.0 - 1e-6));
            CHECK(ap_constant(spec, p, wider).value >= v);
        }
    }
}

TEST_CASE("doubling: Lebesgue measure") {
    for (int n : {1, 2}) {
        const WeightSpec id = identity_weight(n, 2);
        const auto dirs = default_directions(2, 1);
        CHECK(dirs.size() == 2 + 8);
        const DoublingReport r = doubling_report(id, 1.0, small_family(n), dirs);
        CHECK(r.C_dbl == std::ldexp(1.0, n));
        CHECK(r.beta == static_cast<double>(n));
        CHECK(std::abs(r.c_w - 1.0) < 1e-9);
        CHECK(r.c_w >= 1.0);
        CHECK(r.directions_tested == dirs.size());
        CHECK(r.scalar_a1_max == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("doubling: |x|^{-1/2} on nested intervals and on the full family") {
    const WeightSpec w = scalar_power_weight(1, 1, -0.5);
    const auto dirs = default_directions(1, 1);

    // Oracle on origin-centered nested intervals: (2 sqrt r) / (2 sqrt(r/2)) = sqrt 2.
    const double nested_oracle = (power_primitive(1.0, -0.5) - power_primitive(-1.0, -0.5)) /
                                 (power_primitive(0.5, -0.5) - power_primitive(-0.5, -0.5));
    CHECK(nested_oracle == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
    const CubeFamily nested = CubeFamily::dyadic(1, -8, 4, 0.0, 128);
    const DoublingReport rn = doubling_report(w, 1.0, nested, dirs);
    CHECK(std::abs(rn.beta - 0.5) / 0.5 < 0.05);

    // Full lattice family: off-center cubes dominate; oracle from exact integrals.
    const CubeFamily family = CubeFamily::dyadic(1, -8, 4, 16.0, 128);
    double oracle = 0.0;
    for (std::size_t i = 0; i < family.size(); ++i) {
        const Cube c = family.cube(i);
        const double z = c.center[0], r = c.r;
        const double big = power_primitive(z + r, -0.5) - power_primitive(z - r, -0.5);
        const double small = power_primitive(z + r / 2, -0.5) - power_primitive(z - r / 2, -0.5);
        oracle = std::max(oracle, big / small);
    }
    const DoublingReport rf = doubling_report(w, 1.0, family, dirs);
    CHECK(std::abs(rf.C_dbl - oracle) / oracle < 0.02);
    CHECK(rf.beta >= 1.0);  // at least n for a weight that is continuous off the origin
    CHECK(rf.c_w >= 1.0);
    CHECK(std::isfinite(rf.scalar_a1_max));

    // Scalar path agreement.
    const auto sd = scalar::doubling(scalar_power(-0.5), scalar_family(family), 4);
    CHECK(std::abs(sd.C_dbl - rf.C_dbl) <= 1e-12 * rf.C_dbl);
    CHECK(std::abs(sd.c_w - rf.c_w) <= 1e-12 * rf.c_w);
}

TEST_CASE("doubling invariants across the zoo") {
    for (const WeightSpec& spec : zoo()) {
        const auto dirs = default_directions(spec.N, 7);
        const DoublingReport r = doubling_report(spec, 1.0, small_family(spec.n), dirs);
        CHECK(r.C_dbl >= 1.0);
        CHECK(r.beta >= 0.0);
        CHECK(r.c_w >= 1.0);
        CHECK(r.scalar_a1_max >= 1.0 - 1e-12);
    }
}
