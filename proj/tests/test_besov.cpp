#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "mwlp/besov.hpp"
#include "mwlp/bound.hpp"
#include "mwlp/error.hpp"
#include "mwlp/rng.hpp"
#include "mwlp/scalar_path.hpp"

using namespace mwlp;

namespace {

constexpr double kPi = std::numbers::pi;

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::ConfigInvalid;
}

PartitionSpec standard(int j_lo = -5, int j_hi = 5) {
    PartitionSpec s;
    s.j_lo = j_lo;
    s.j_hi = j_hi;
    return s;
}

PartitionSpec wide_variant(int j_lo, int j_hi) {
    PartitionSpec s;
    s.c1 = 1.0 / std::sqrt(2.0);
    s.c2 = 2.0 * std::sqrt(2.0);
    s.j_lo = j_lo;
    s.j_hi = j_hi;
    return s;
}

// Field with spectrum drawn on the nodes with lo <= |xi| <= hi.
SampledVectorField field_on_band(const TorusGrid& grid, double lo, double hi, int N, std::uint64_t seed) {
    Spectrum s{grid, N, std::vector<Complex>(grid.size() * N)};
    Rng rng(seed);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double r = grid.frequency_norm(k);
        if (r < lo || r > hi) continue;
        for (int c = 0; c < N; ++c) s.values[k * N + c] = rng.complex_normal();
    }
    auto f = inverse_transform(s);
    f.band_radius = hi * 1.001;
    return f;
}

double max_abs_diff(const SampledVectorField& a, const SampledVectorField& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) m = std::max(m, std::abs(a.values[i] - b.values[i]));
    return m;
}

double max_abs(const SampledVectorField& a) {
    double m = 0.0;
    for (auto v : a.values) m = std::max(m, std::abs(v));
    return m;
}

// Scalar partition written out directly: the normalizer sums every k in [-60, 60].
struct ScalarPartition {
    double c1, c2, shape;
    double h(double y) const {
        if (!(y > c1 && y < c2)) return 0.0;
        const double u = std::log(y / c1) / std::log(c2 / c1);
        return std::exp(shape * (1.0 - 1.0 / (4.0 * u * (1.0 - u))));
    }
    double psi(int j, double y) const {
        if (y <= 0.0) return 0.0;
        double S = 0.0;
        for (int k = -60; k <= 60; ++k) S += h(std::pow(2.0, -k) * y);
        return h(std::pow(2.0, -j) * y) / S;
    }
};

double scalar_besov(const std::vector<std::complex<double>>& f, const scalar::Grid1d& grid, const ScalarPartition& part,
                    int j_lo, int j_hi, double s, double p, double q, const scalar::Weight& w) {
    double sum = 0.0;
    for (int j = j_lo; j <= j_hi; ++j) {
        const auto g = scalar::apply_multiplier(f, grid, [&](double xi) { return part.psi(j, std::abs(xi)); });
        sum += std::pow(std::exp2(j * s) * scalar::lp_norm(g, grid, w, p), q);
    }
    return std::pow(sum, 1.0 / q);
}

}  // namespace

TEST_CASE("partition construction examples") {
    const DyadicPartition part(standard());
    const TorusGrid grid(1, 512, 65536, 0.0);
    double worst = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double r = grid.frequency_norm(k);
        if (r < part.interior_lo() || r > part.interior_hi()) continue;
        double s = 0.0;
        for (int j = part.j_lo(); j <= part.j_hi(); ++j) s += part.psi(j, r);
        worst = std::max(worst, std::abs(s - 1.0));
    }
    CHECK(worst < 1e-10);

    for (int j = -5; j <= 5; ++j) {
        CHECK(part.psi(j, std::ldexp(2.0, j)) == 0.0);
        CHECK(part.psi(j, std::ldexp(0.5, j)) == 0.0);
    }

    // Both admissible variants, including the one with c2 = 4 c1.
    CHECK_NOTHROW(DyadicPartition(wide_variant(-5, 5)));
    PartitionSpec quad = standard();
    quad.c1 = 0.5;
    quad.c2 = 2.0;
    quad.profile = BumpProfile::polynomial;
    quad.shape = 4.0;
    CHECK_NOTHROW(DyadicPartition{quad});
}

TEST_CASE("partition invariants on dense radii") {
    for (const auto& spec : {standard(), wide_variant(-4, 6)}) {
        for (auto profile : {BumpProfile::smooth_exponential, BumpProfile::polynomial, BumpProfile::tent}) {
            PartitionSpec ps = spec;
            ps.profile = profile;
            ps.shape = profile == BumpProfile::polynomial ? 4.0 : 3.0;
            const DyadicPartition part(ps);
            Rng rng(11);
            double sum_err = 0.0;
            bool scale_family = true, support = true;
            for (int i = 0; i < 4000; ++i) {
                const double y = std::exp(rng.uniform(std::log(part.interior_lo()), std::log(part.interior_hi())));
                double s = 0.0;
                for (int j = part.j_lo(); j <= part.j_hi(); ++j) {
                    const double v = part.psi(j, y);
                    s += v;
                    if (v != part.psi(0, std::ldexp(y, -j))) scale_family = false;
                    if (v != 0.0 && !(y > std::ldexp(ps.c1, j) && y < std::ldexp(ps.c2, j))) support = false;
                    if (v < 0.0 || v > 1.0) support = false;
                }
                sum_err = std::max(sum_err, std::abs(s - 1.0));
            }
            CHECK(sum_err < 1e-10);
            CHECK(scale_family);
            CHECK(support);
        }
    }
}

TEST_CASE("partition errors") {
    PartitionSpec s = standard();
    s.c2 = 1.0;
    CHECK(code_of([&] { DyadicPartition{s}; }) == ErrorCode::CoverageGap);
    s.c2 = 0.9;
    CHECK(code_of([&] { DyadicPartition{s}; }) == ErrorCode::CoverageGap);
    s.c2 = 2.5;
    CHECK(code_of([&] { DyadicPartition{s}; }) == ErrorCode::ConfigInvalid);
    s = standard();
    s.c1 = 0.0;
    CHECK(code_of([&] { DyadicPartition{s}; }) == ErrorCode::ConfigInvalid);
    s = standard();
    s.j_lo = 2;
    s.j_hi = 1;
    CHECK(code_of([&] { DyadicPartition{s}; }) == ErrorCode::ConfigInvalid);
    s = standard();
    s.shape = 0.0;
    CHECK(code_of([&] { DyadicPartition{s}; }) == ErrorCode::DegenerateBump);
    s.profile = BumpProfile::polynomial;
    s.shape = -1.0;
    CHECK(code_of([&] { DyadicPartition{s}; }) == ErrorCode::DegenerateBump);
    // A bump that underflows across most of its support.
    s.profile = BumpProfile::smooth_exponential;
    s.shape = 1e6;
    CHECK(code_of([&] { DyadicPartition{s}; }) == ErrorCode::DegenerateBump);

    CHECK(bump_profile_from_string("tent") == BumpProfile::tent);
    CHECK(code_of([] { bump_profile_from_string("box"); }) == ErrorCode::ConfigInvalid);
}

TEST_CASE("partition json round trip") {
    PartitionSpec s = wide_variant(-3, 4);
    s.profile = BumpProfile::polynomial;
    s.shape = 5.0;
    const auto back = partition_from_json(to_json(s));
    CHECK(back.c1 == s.c1);
    CHECK(back.c2 == s.c2);
    CHECK(back.j_lo == -3);
    CHECK(back.j_hi == 4);
    CHECK(back.profile == BumpProfile::polynomial);
    CHECK(back.shape == 5.0);
    CHECK(code_of([] { partition_from_json(nlohmann::json{{"j_range", "x"}}); }) == ErrorCode::ConfigInvalid);
}

TEST_CASE("kernel of psi_0 matches direct quadrature") {
    const DyadicPartition part(standard(-2, 2));
    const TorusGrid grid(1, 1024, 65536, 0.0);
    const auto sym = partition_symbol(part, 0, grid);
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    const double h = grid.spacing();
    for (int idx : {0, 1, 7, 64, 300, 2000}) {
        const double x = idx * h;
        // (2 pi)^{-1/2} int psi_0(|xi|) e^{i x xi} dxi, even in xi.
        const double oracle = 2.0 / std::sqrt(2.0 * kPi) *
                              GK::integrate([&](double xi) { return part.psi(0, xi) * std::cos(x * xi); }, 0.5, 2.0,
                                            15, 1e-14);
        CHECK(std::abs(sym.kernel()[idx].real() - oracle) < 1e-9);
        CHECK(std::abs(sym.kernel()[idx].imag()) < 1e-12);
    }
    // Scale family on the kernel side: k_j(x) = 2^j k_0(2^j x).
    const auto s1 = partition_symbol(part, 1, grid);
    const auto sm1 = partition_symbol(part, -1, grid);
    for (int idx : {0, 5, 40, 333}) {
        CHECK(std::abs(s1.kernel()[idx].real() - 2.0 * sym.kernel()[2 * idx].real()) < 1e-10);
        CHECK(std::abs(sym.kernel()[idx].real() - 2.0 * sm1.kernel()[2 * idx].real()) < 1e-10);
    }
}

TEST_CASE("decay check for smooth profiles") {
    const TorusGrid grid(1, 2048, 262144, 0.0);
    PartitionSpec pe = standard();
    PartitionSpec pp = standard();
    pp.profile = BumpProfile::polynomial;
    pp.shape = 4.0;
    for (const auto& spec : {pe, pp}) {
        DyadicPartition part(spec);
        const auto d = partition_decay_check(part, grid, 4.0);
        CHECK(std::isfinite(d.decay_C));
        CHECK(d.spread <= 0.10);
        CHECK(d.K.size() == 11);
        REQUIRE(part.decay_C);
        CHECK(*part.decay_C == d.decay_C);
        CHECK(*part.decay_M == 4.0);
        // The fitted envelope bounds every kernel sample of psi_0.
        const auto sym = partition_symbol(part, 0, grid);
        bool bounded = true;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double x = std::abs(grid.signed_index(i) * grid.spacing());
            if (std::abs(sym.kernel()[i]) > d.K[5] * std::pow(1.0 + x, -4.0) * (1.0 + 1e-12)) bounded = false;
        }
        CHECK(bounded);
    }
}

TEST_CASE("decay constant is linear in the symbol") {
    const DyadicPartition part(standard(-2, 2));
    const TorusGrid grid(1, 1024, 65536, 0.0);
    const auto sym = partition_symbol(part, 0, grid);
    const auto twice = sym.scaled(2.0);
    const double K1 = kernel_decay_constant(grid, sym.kernel(), 1.0, 4.0);
    const double K2 = kernel_decay_constant(grid, twice.kernel(), 1.0, 4.0);
    CHECK(std::abs(K2 / K1 - 2.0) < 1e-12);
}

TEST_CASE("tent profile fails the decay check") {
    PartitionSpec s = standard(-2, 2);
    s.profile = BumpProfile::tent;
    DyadicPartition part(s);
    const TorusGrid grid(1, 1024, 65536, 0.0);
    CHECK(code_of([&] { partition_decay_check(part, grid, 4.0); }) == ErrorCode::DivergentFit);
    CHECK_FALSE(part.decay_C);
    // The kernel decays like |x|^{-2}, so an exponent below 2 fits stably.
    CHECK_NOTHROW(partition_decay_check(part, grid, 1.5));
}

TEST_CASE("overlap set examples") {
    const DyadicPartition psi(standard());
    const auto same = overlap_sets(psi, psi);
    CHECK(same.n0 == 3);
    for (int j = -4; j <= 4; ++j) CHECK(same.A[j + 5] == std::vector<int>{j - 1, j, j + 1});
    CHECK(same.boundary == std::vector<int>{-5, 5});
    CHECK(same.A[0] == std::vector<int>{-5, -4});

    PartitionSpec dil = standard();
    dil.c1 = 1.0;
    dil.c2 = 4.0;
    const auto shifted = overlap_sets(psi, DyadicPartition(dil));
    CHECK(shifted.n0 == 3);
    for (int j = -3; j <= 5; ++j) CHECK(shifted.A[j + 5] == std::vector<int>{j - 2, j - 1, j});

    PartitionSpec far = standard(10, 12);
    const auto disjoint = overlap_sets(psi, DyadicPartition(far));
    for (const auto& A : disjoint.A) CHECK(A.empty());
    CHECK(disjoint.boundary.size() >= 1);
    CHECK(std::find(disjoint.boundary.begin(), disjoint.boundary.end(), 5) != disjoint.boundary.end());

    // Direct interval arithmetic for the wide variant.
    const DyadicPartition phi(wide_variant(-5, 5));
    const auto mixed = overlap_sets(psi, phi);
    for (int j = -4; j <= 4; ++j) {
        std::vector<int> expect;
        for (int k = -5; k <= 5; ++k) {
            const double lo = std::max(0.5 * std::exp2(j), phi.c1() * std::exp2(k));
            const double hi = std::min(2.0 * std::exp2(j), phi.c2() * std::exp2(k));
            if (lo < hi) expect.push_back(k);
        }
        CHECK(mixed.A[j + 5] == expect);
    }
    CHECK(mixed.n0 == 4);
}

TEST_CASE("combine terms") {
    const std::vector<double> t{1.0, 2.0, 3.0};
    CHECK(std::abs(combine_terms(t, -1, 1.0, 1.0) - 8.5) < 1e-14);
    CHECK(std::abs(combine_terms(t, -1, 1.0, 2.0) - std::sqrt(0.25 + 4.0 + 36.0)) < 1e-14);
    CHECK(combine_terms(t, -1, 1.0, INFINITY) == 6.0);
    CHECK(std::abs(combine_terms(t, 0, 0.0, 0.5) - std::pow(1.0 + std::sqrt(2.0) + std::sqrt(3.0), 2.0)) < 1e-12);
}

TEST_CASE("besov norm examples") {
    const TorusGrid grid(1, 256, 4096, 0.5);
    PartitionSpec narrow = standard(-3, 3);
    narrow.c1 = 0.75;
    narrow.c2 = 1.75;
    const DyadicPartition part(narrow);
    BesovParams params;
    params.weight = scalar_power_weight(1, 2, 0.5);
    params.s = 0.7;

    // psi_0 is identically 1 on [0.875, 1.5].
    const auto f = field_on_band(grid, 0.9, 1.45, 2, 5);
    for (double p : {0.5, 1.0, 2.0}) {
        params.p = p;
        const auto b = besov_norm(f, params, part);
        const double direct = lp_w_norm(f, params.weight, p);
        CHECK(std::abs(b.value - direct) < 1e-12 * direct);
        CHECK_FALSE(b.truncation_warning);
        for (std::size_t i = 0; i < b.terms.size(); ++i)
            if (i != 3) CHECK(b.terms[i] < 1e-12 * direct);
    }

    const SampledVectorField zero(grid, 2);
    params.p = 1.0;
    const auto bz = besov_norm(zero, params, part);
    CHECK(bz.value == 0.0);
    CHECK_FALSE(bz.truncation_warning);

    CHECK(code_of([&] {
              BesovParams bad = params;
              bad.q = 0.0;
              besov_norm(f, bad, part);
          }) == ErrorCode::ExponentOutOfRange);
}

TEST_CASE("besov norm homogeneity under dilation") {
    // Localized wave packets evaluated in closed form; g(x) = f(2x).
    const TorusGrid grid(1, 1024, 32768, 0.0);
    const DyadicPartition part(standard(-6, 6));
    auto packet = [&](double lambda) {
        SampledVectorField f(grid, 2);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double x = lambda * grid.coordinate(static_cast<int>(i));
            const double env = std::exp(-x * x / (2.0 * 144.0));
            f.values[2 * i] = env * std::exp(Complex(0.0, x));
            f.values[2 * i + 1] = Complex(0.5, -1.0) * env * std::exp(Complex(0.0, 1.3 * x));
        }
        return f;
    };
    const auto f = packet(1.0);
    const auto g = packet(2.0);
    for (double p : {1.0, 2.0, 0.5}) {
        for (double s : {0.0, 0.5, -0.3}) {
            BesovParams params;
            params.weight = identity_weight(1, 2);
            params.p = p;
            params.s = s;
            const auto bf = besov_norm(f, params, part);
            const auto bg = besov_norm(g, params, part);
            CHECK_FALSE(bf.truncation_warning);
            CHECK_FALSE(bg.truncation_warning);
            const double expect = std::exp2(s - 1.0 / p);
            CHECK(std::abs(bg.value / bf.value / expect - 1.0) < 0.01);
        }
    }
}

TEST_CASE("besov norm is absolutely homogeneous") {
    const TorusGrid grid(1, 256, 4096, 0.5);
    const DyadicPartition part(standard(-3, 3));
    const auto corpus = shell_corpus(grid, 0.25, 8.0, 2, 4, 21);
    BesovParams params;
    params.weight = conjugated_weight(1, {0.4, -0.3});
    for (double q : std::initializer_list<double>{1.0, 2.0, INFINITY}) {
        params.q = q;
        for (const auto& f : corpus) {
            auto cf = f;
            const Complex c(-2.5, 1.5);
            for (auto& v : cf.values) v *= c;
            const double a = besov_norm(f, params, part).value;
            const double b = besov_norm(cf, params, part).value;
            CHECK(std::abs(b - std::abs(c) * a) < 1e-12 * b);
        }
    }
}

TEST_CASE("reconstruction from the pieces") {
    const TorusGrid grid(1, 256, 4096, 0.5);
    const DyadicPartition part(standard(-3, 3));
    const auto corpus = shell_corpus(grid, 0.25, 8.0, 2, 6, 4);
    std::vector<MultiplierSymbol> syms;
    for (int j = -3; j <= 3; ++j) syms.push_back(partition_symbol(part, j, grid));
    for (const auto& f : corpus) {
        const auto pieces = apply_multipliers(syms, f);
        auto sum = pieces.front();
        for (std::size_t i = 1; i < pieces.size(); ++i)
            for (std::size_t v = 0; v < sum.values.size(); ++v) sum.values[v] += pieces[i].values[v];
        CHECK(max_abs_diff(sum, f) < 1e-10 * max_abs(f));
    }
}

TEST_CASE("truncation warning") {
    const TorusGrid grid(1, 256, 4096, 0.5);
    const DyadicPartition part(standard(-2, 2));
    const auto f = field_on_band(grid, 0.5, 6.0, 1, 9);
    BesovParams params;
    params.weight = identity_weight(1, 1);
    const auto b = besov_norm(f, params, part);
    CHECK(b.truncation_warning);
    CHECK(b.out_of_range_mass > 0.01);
    CHECK(b.out_of_range_mass <= 1.0);
}

TEST_CASE("equivalence experiment properties") {
    const TorusGrid grid(1, 256, 4096, 0.5);
    const DyadicPartition psi(standard(-3, 3));
    const DyadicPartition phi(wide_variant(-3, 3));
    BesovParams params;
    params.weight = scalar_power_weight(1, 2, 0.5);
    params.s = 0.5;
    const auto corpus = shell_corpus(grid, 0.25, 8.0, 2, 16, 77);

    const auto self = equivalence_experiment(corpus, params, psi, psi);
    for (double r : self.ratios) CHECK(r == 1.0);

    const auto fwd = equivalence_experiment(corpus, params, psi, phi);
    const auto bwd = equivalence_experiment(corpus, params, phi, psi);
    CHECK(fwd.truncated == 0);
    for (std::size_t i = 0; i < corpus.size(); ++i) CHECK(std::abs(fwd.ratios[i] * bwd.ratios[i] - 1.0) < 1e-12);
    CHECK(fwd.r_min <= fwd.r_max);
    CHECK(std::isfinite(fwd.r_max / fwd.r_min));

    // Doubling the corpus keeps the first members, so the bracket can only widen.
    const auto doubled = shell_corpus(grid, 0.25, 8.0, 2, 32, 77);
    for (std::size_t i = 0; i < corpus.size(); ++i) CHECK(doubled[i].values == corpus[i].values);
    const auto big = equivalence_experiment(doubled, params, psi, phi);
    CHECK(big.r_min <= fwd.r_min);
    CHECK(big.r_max >= fwd.r_max);

    // Same fields sampled twice as finely.
    const TorusGrid fine(1, 256, 8192, 0.5);
    const auto fine_corpus = shell_corpus(fine, 0.25, 8.0, 2, 16, 77);
    const auto fr = equivalence_experiment(fine_corpus, params, psi, phi);
    for (std::size_t i = 0; i < corpus.size(); ++i) CHECK(std::abs(fr.ratios[i] / fwd.ratios[i] - 1.0) < 0.02);

    std::vector<SampledVectorField> with_zero(corpus.begin(), corpus.begin() + 2);
    with_zero.emplace_back(grid, 2);
    CHECK(code_of([&] { equivalence_experiment(with_zero, params, psi, phi); }) == ErrorCode::ZeroNorm);
    CHECK(code_of([&] { equivalence_experiment(std::span<const SampledVectorField>{}, params, psi, phi); }) == ErrorCode::EmptyFamily);
}

TEST_CASE("scalar cross-check") {
    const TorusGrid grid(1, 128, 2048, 0.5);
    const scalar::Grid1d g1{128.0, 2048, 0.5};
    const DyadicPartition psi(standard(-3, 3));
    const DyadicPartition phi(wide_variant(-3, 3));
    const ScalarPartition sp{0.5, 2.0, 3.0};
    const ScalarPartition sq{1.0 / std::sqrt(2.0), 2.0 * std::sqrt(2.0), 3.0};
    const auto corpus = shell_corpus(grid, 0.25, 8.0, 1, 6, 3);

    const scalar::Weight one = [](std::span<const double>) { return 1.0; };
    const scalar::Weight power = [](std::span<const double> x) { return std::pow(std::abs(x[0]), 0.5); };
    for (int case_ = 0; case_ < 2; ++case_) {
        BesovParams params;
        params.weight = case_ == 0 ? identity_weight(1, 1) : scalar_power_weight(1, 1, 0.5);
        params.s = 0.5;
        params.p = case_ == 0 ? 1.0 : 0.75;
        params.q = case_ == 0 ? 1.0 : 2.0;
        const auto res = equivalence_experiment(corpus, params, psi, phi);
        for (std::size_t i = 0; i < corpus.size(); ++i) {
            const auto& f = corpus[i].values;
            const auto& w = case_ == 0 ? one : power;
            const double a = scalar_besov(f, g1, sp, -3, 3, params.s, params.p, params.q, w);
            const double b = scalar_besov(f, g1, sq, -3, 3, params.s, params.p, params.q, w);
            CHECK(std::abs(res.ratios[i] / (a / b) - 1.0) < 1e-10);
            const double direct = besov_norm(corpus[i], params, psi).value;
            CHECK(std::abs(direct / a - 1.0) < 1e-10);
        }
    }
}

TEST_CASE("equivalence constant bounds the ratios") {
    const TorusGrid grid(1, 256, 4096, 0.5);
    DyadicPartition psi(standard(-3, 3));
    DyadicPartition phi(wide_variant(-3, 3));
    BesovParams params;
    params.weight = identity_weight(1, 2);
    params.s = 0.5;
    const auto cubes = CubeFamily::dyadic(1, -4, 3, 8.0, 32);
    const auto dirs = default_directions(2, 3);

    CHECK(code_of([&] { equivalence_constant(params, psi, phi, cubes, dirs); }) == ErrorCode::ConfigInvalid);

    const TorusGrid decay_grid(1, 512, 32768, 0.0);
    partition_decay_check(psi, decay_grid, 4.0);
    partition_decay_check(phi, decay_grid, 4.0);
    const auto C = equivalence_constant(params, psi, phi, cubes, dirs);
    CHECK(C.n0 == 4);
    CHECK(C.ap == doctest::Approx(1.0));
    CHECK(C.c_w == doctest::Approx(1.0));
    CHECK(std::abs(C.C_P - assemble_constant(1, 1.0, 1.0, 4.0, C.beta, C.c_w, C.ap)) < 1e-12 * C.C_P);
    CHECK(C.C_equiv == doctest::Approx(C.upper * C.lower));

    const auto corpus = shell_corpus(grid, 0.25, 8.0, 2, 16, 8);
    const auto res = equivalence_experiment(corpus, params, psi, phi);
    CHECK(res.r_max <= C.upper);
    CHECK(1.0 / res.r_min <= C.lower);
    CHECK(res.r_max / res.r_min <= C.C_equiv);

    BesovParams low = params;
    low.p = 0.5;
    psi.decay_M = 2.0;
    phi.decay_M = 2.0;
    CHECK(code_of([&] { equivalence_constant(low, psi, phi, cubes, dirs); }) == ErrorCode::HypothesisViolated);
    BesovParams high = params;
    high.p = 2.0;
    CHECK(code_of([&] { equivalence_constant(high, psi, phi, cubes, dirs); }) == ErrorCode::ExponentOutOfRange);
}

TEST_CASE("shell corpus") {
    const TorusGrid grid(1, 256, 4096, 0.5);
    const auto a = shell_corpus(grid, 0.25, 8.0, 2, 5, 1);
    const auto b = shell_corpus(grid, 0.25, 8.0, 2, 5, 1);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].values == b[i].values);
        CHECK(bandlimit_check(a[i], 8.0, 1e-10).ok);
        const auto spec = forward_transform(a[i]);
        double low = 0.0;
        for (std::size_t k = 0; k < grid.size(); ++k)
            if (grid.frequency_norm(k) < 0.25) low = std::max(low, std::abs(spec.values[2 * k]));
        CHECK(low < 1e-10 * max_abs(a[i]));
    }
    CHECK(code_of([&] { shell_corpus(grid, 1.0, 1.5, 1, 1, 0); }) == ErrorCode::ConfigInvalid);
}
