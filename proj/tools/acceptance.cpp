// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "mwlp/besov.hpp"
#include "mwlp/bound.hpp"
#include "mwlp/config.hpp"
#include "mwlp/error.hpp"
#include "mwlp/muckenhoupt.hpp"
#include "mwlp/parallel.hpp"
#include "mwlp/runner.hpp"
#include "mwlp/scalar_path.hpp"
#include "mwlp/spectral.hpp"

using namespace mwlp;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

scalar::Weight scalar_power(double a) {
    return [a](std::span<const double> x) {
        double s = 0.0;
        for (double v : x) s += v * v;
        return std::pow(std::sqrt(s), a);
    };
}

double power_primitive(double x, double a) { return std::copysign(std::pow(std::abs(x), a + 1.0) / (a + 1.0), x); }

// 1. Every A_p estimate over the weight zoo is at least one.
Outcome ap_floor() {
    double lowest = INFINITY;
    int count = 0;
    for (int n : {1, 2}) {
        const CubeFamily cubes = n == 1 ? CubeFamily::dyadic(1, -3, 2, 4.0, 16) : CubeFamily::dyadic(2, -1, 1, 1.0, 4);
        std::vector<WeightSpec> zoo;
        for (int N : {1, 2, 3}) {
            zoo.push_back(identity_weight(n, N));
            for (double a : {-0.5, -0.25, 0.0}) zoo.push_back(scalar_power_weight(n, N, a));
        }
        zoo.push_back(diagonal_power_weight(n, {-0.5, 0.0}));
        zoo.push_back(diagonal_power_weight(n, {-0.25, -0.5, 0.0}));
        zoo.push_back(conjugated_weight(n, {-0.5, -0.25}));
        for (const auto& w : zoo)
            for (double p : {0.5, 1.0, 2.0}) {
                lowest = std::min(lowest, ap_constant(w, p, cubes).value);
                ++count;
            }
    }
    return {lowest >= 1.0 - 1e-9, fmt("min over %d estimates = %.12f (need >= 1 - 1e-9)", count, lowest)};
}

// 2. [W(R.)]_{A_p} on the matched family R^{-1} Q equals [W]_{A_p} on Q.
Outcome dilation() {
    double worst = 0.0;
    const CubeFamily cubes = CubeFamily::dyadic(1, -3, 2, 4.0, 16);
    const std::vector<WeightSpec> ws{scalar_power_weight(1, 1, -0.5), diagonal_power_weight(1, {-0.5, -0.25}),
                                     conjugated_weight(1, {-0.5, -0.25})};
    for (const auto& w : ws)
        for (double p : {0.5, 1.0, 2.0}) {
            const double base = ap_constant(w, p, cubes).value;
            for (double R : {0.25, 0.5, 2.0, 4.0})
                worst = std::max(worst, rel(ap_constant(dilate_weight(w, R), p, cubes.dilated(1.0 / R)).value, base));
        }
    return {worst <= 1e-12, fmt("max relative change %.2e over R in {1/4,1/2,2,4} (need <= 1e-12)", worst)};
}

// 3. [|x|^{-1/2}]_{A_1} near 2 with monotone refinement.
Outcome power_a1() {
    const CubeFamily family = CubeFamily::dyadic(1, -8, 4, 16.0, 64);
    const int qs[] = {64, 128, 256, 512};
    const auto trace = ap_refinement_trace(scalar_power_weight(1, 1, -0.5), 1.0, family, qs);
    bool monotone = true;
    for (std::size_t i = 1; i < trace.size(); ++i) monotone &= trace[i].value >= trace[i - 1].value;
    const double v = trace.back().value;
    return {monotone && rel(v, 2.0) <= 0.02,
            fmt("q=64..512: %.6f %.6f %.6f %.6f, monotone=%s, |q512 - 2|/2 = %.4f (need <= 0.02)", trace[0].value,
                trace[1].value, trace[2].value, trace[3].value, monotone ? "yes" : "no", rel(v, 2.0))};
}

// 4. Doubling of Lebesgue measure and of |x|^{-1/2}.
Outcome doubling() {
    bool lebesgue = true;
    std::string detail;
    for (int n : {1, 2}) {
        const CubeFamily cubes = n == 1 ? CubeFamily::dyadic(1, -2, 2, 2.0, 8) : CubeFamily::dyadic(2, -1, 1, 1.0, 4);
        const auto r = doubling_report(identity_weight(n, 2), 1.0, cubes, default_directions(2, 5));
        lebesgue &= r.C_dbl == std::exp2(n) && r.beta == n;
        detail += fmt("n=%d C_dbl=%.15g beta=%.15g; ", n, r.C_dbl, r.beta);
    }
    const auto w = scalar_power_weight(1, 1, -0.5);
    const auto dirs = default_directions(1, 5);
    const double oracle = std::log2((power_primitive(1.0, -0.5) - power_primitive(-1.0, -0.5)) /
                                    (power_primitive(0.5, -0.5) - power_primitive(-0.5, -0.5)));
    const auto nested = doubling_report(w, 1.0, CubeFamily::dyadic(1, -8, 4, 0.0, 128), dirs);
    const auto full = doubling_report(w, 1.0, CubeFamily::dyadic(1, -6, 5, 32.0, 64), dirs);
    const bool power = rel(nested.beta, oracle) <= 0.05;
    detail += fmt("|x|^-1/2 nested beta=%.4f (oracle %.4f, need within 5%%); full-family beta=%.4f", nested.beta, oracle,
                  full.beta);
    return {lebesgue && power, detail};
}

// 5. Sampling series against the direct multiplier.
Outcome sampling() {
    const TorusGrid grid(1, 64, 512, 0.0);
    SymbolSpec spec;
    spec.kind = SymbolKind::raised_cosine;
    spec.R = 1.0;
    MultiplierSymbol phi(grid, spec);
    const double K4 = phi.fit_decay(4.0);
    const auto fit = checked_decay_fit(
        grid, [&](std::span<const double> xi) { return evaluate_symbol(spec, xi); }, 1.0, true, 4.0, INFINITY);
    const auto fields = bandlimited_corpus(grid, 1.0, 2, 8, 505);
    double worst = 0.0;
    for (double u0 : {0.0, 0.5}) {
        const double u[] = {u0};
        for (const auto& f : fields) {
            const auto a = apply_multiplier(phi, f);
            const auto s = sampling_series(phi, f, u);
            double d = 0.0, m = 0.0;
            for (std::size_t i = 0; i < a.values.size(); ++i) {
                d = std::max(d, std::abs(a.values[i] - s.values[i]));
                m = std::max(m, std::abs(a.values[i]));
            }
            worst = std::max(worst, d / m);
        }
    }
    return {worst <= 1e-6 && std::isfinite(K4),
            fmt("max relative discrepancy %.2e over 8 fields x u in {0, 1/2} (need <= 1e-6); M=4 fit K=%.4g on T=64, "
                "growth %.2f when T doubles",
                worst, K4, fit.growth)};
}

struct BoundCase {
    const char* name;
    WeightSpec w;
    double p;
};

SymbolSpec poly6() {
    SymbolSpec s;
    s.kind = SymbolKind::polynomial;
    s.order = 6;
    s.R = 1.0;
    return s;
}

// 6. Empirical ratio against the assembled constant.
Outcome boundedness() {
    const TorusGrid grid(1, 64, 512, 0.5);
    MultiplierSymbol phi(grid, poly6());
    phi.fit_decay(6.0);
    const auto cubes = CubeFamily::dyadic(1, -6, 5, 32.0, 64);
    const auto dirs = default_directions(2, 7);
    const auto corpus = bandlimited_corpus(grid, 1.0, 2, 32, 606);
    bool ok = true;
    std::string detail;
    const BoundCase cases[] = {{"power", diagonal_power_weight(1, {-0.5, -0.25}), 0.5},
                               {"power", diagonal_power_weight(1, {-0.5, -0.25}), 1.0},
                               {"conjugated", conjugated_weight(1, {-0.5, -0.25}), 0.5},
                               {"conjugated", conjugated_weight(1, {-0.5, -0.25}), 1.0}};
    for (const auto& c : cases) {
        try {
            const auto rep = theoretical_constant(c.w, phi, c.p, cubes, dirs);
            const double r = empirical_ratio(c.w, phi, c.p, corpus).max;
            ok &= r <= rep.C_theory * 1.01;
            detail += fmt("%s p=%.1f ratio=%.4f C=%.3g; ", c.name, c.p, r, rep.C_theory);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::HypothesisViolated) throw;
            detail += fmt("%s p=%.1f hypothesis fails (skipped); ", c.name, c.p);
        }
    }
    return {ok, detail + "need ratio <= 1.01 C"};
}

// 7. Ratios over R in {1/4, 1, 4} under one constant.
Outcome r_uniformity() {
    const TorusGrid grid(1, 64, 512, 0.5);
    MultiplierSymbol phi(grid, poly6());
    phi.fit_decay(6.0);
    const auto cubes = CubeFamily::dyadic(1, -6, 5, 32.0, 64);
    const auto dirs = default_directions(2, 7);
    const double Rs[] = {0.25, 1.0, 4.0};
    bool ok = true;
    std::string detail;
    for (const auto& w : {identity_weight(1, 2), diagonal_power_weight(1, {-0.5, -0.25})}) {
        const double C = theoretical_constant(w, phi, 1.0, cubes, dirs).C_theory;
        const auto sweep = rescale_experiment(w, poly6(), 1.0, grid, Rs, 32, 707);
        double lo = INFINITY, hi = 0.0;
        for (const auto& s : sweep) {
            lo = std::min(lo, s.ratio);
            hi = std::max(hi, s.ratio);
        }
        ok &= hi <= C;
        if (w.kind == WeightKind::identity) {
            ok &= hi - lo <= 1e-9;
            detail += fmt("identity: max %.6f <= C=%.3g, spread %.1e (need <= 1e-9); ", hi, C, hi - lo);
        } else {
            detail += fmt("power: ratios %.4f %.4f %.4f <= C=%.3g", sweep[0].ratio, sweep[1].ratio, sweep[2].ratio, C);
        }
    }
    return {ok, detail};
}

// 8. p = 1, W = I: ratio below the discrete L^1 norm of the kernel.
Outcome young() {
    const TorusGrid grid(1, 64, 512, 0.5);
    SymbolSpec spec;
    MultiplierSymbol phi(grid, spec);
    const double bound = young_bound(phi);
    auto corpus = gaussian_corpus(grid, 2, 16, 808);
    const auto band = bandlimited_corpus(grid, 1.0, 2, 16, 809);
    corpus.insert(corpus.end(), band.begin(), band.end());
    const double r = large_p_ratio(identity_weight(1, 2), phi, 1.0, corpus).max;
    return {r <= bound * (1.0 + 1e-6), fmt("ratio %.6f, kernel L^1 norm %.6f (need ratio <= norm (1 + 1e-6))", r, bound)};
}

// 9. Lattice sum closed form.
Outcome lattice() {
    const double L = lattice_sum_L(1, 2.0, 1e-12);
    const double exact = kPi * kPi / 3.0 - 1.0;
    return {std::abs(L - exact) <= 1e-8, fmt("L(1,2) = %.12f, pi^2/3 - 1 = %.12f, error %.1e (need <= 1e-8)", L, exact,
                                             std::abs(L - exact))};
}

PartitionSpec partition(double c1, double c2) {
    PartitionSpec s;
    s.c1 = c1;
    s.c2 = c2;
    s.j_lo = -4;
    s.j_hi = 4;
    return s;
}

// 10. Besov equivalence for two partitions.
Outcome besov() {
    DyadicPartition psi(partition(0.5, 2.0));
    DyadicPartition phi(partition(1.0 / std::sqrt(2.0), 2.0 * std::sqrt(2.0)));
    const TorusGrid decay_grid(1, 4096, 524288, 0.0);
    partition_decay_check(psi, decay_grid, 4.0);
    partition_decay_check(phi, decay_grid, 4.0);
    const TorusGrid grid(1, 256, 8192, 0.5);
    const auto cubes = CubeFamily::dyadic(1, -6, 5, 32.0, 64);
    bool ok = true;
    double worst_recip = 0.0, worst_move = 0.0, worst_frac = 0.0;
    int configs = 0;
    for (int N : {1, 2}) {
        const auto dirs = default_directions(N, 7);
        const auto corpus64 = shell_corpus(grid, 0.25, 8.0, N, 64, 1010);
        const std::vector<SampledVectorField> corpus32(corpus64.begin(), corpus64.begin() + 32);
        for (double q : std::initializer_list<double>{1.0, INFINITY})
            for (double s : {0.0, 0.5}) {
                BesovParams params;
                params.s = s;
                params.p = 1.0;
                params.q = q;
                params.weight = scalar_power_weight(1, N, -0.5);
                const auto C = equivalence_constant(params, psi, phi, cubes, dirs);
                const auto fwd = equivalence_experiment(corpus32, params, psi, phi);
                const auto bwd = equivalence_experiment(corpus32, params, phi, psi);
                const auto big = equivalence_experiment(corpus64, params, psi, phi);
                for (std::size_t i = 0; i < fwd.ratios.size(); ++i)
                    worst_recip = std::max(worst_recip, std::abs(fwd.ratios[i] * bwd.ratios[i] - 1.0));
                const double move = std::max(rel(big.r_min, fwd.r_min), rel(big.r_max, fwd.r_max));
                worst_move = std::max(worst_move, move);
                worst_frac = std::max(worst_frac, (fwd.r_max / fwd.r_min) / C.C_equiv);
                ok &= fwd.r_max / fwd.r_min <= C.C_equiv && fwd.truncated == 0;
                ++configs;
            }
    }
    ok &= worst_recip <= 1e-12 && worst_move <= 0.10;
    return {ok, fmt("%d configs: max (r_max/r_min)/C_equiv = %.2e, reciprocity error %.1e (need <= 1e-12), bracket "
                    "move under corpus doubling %.3f (need <= 0.10)",
                    configs, worst_frac, worst_recip, worst_move)};
}

double scalar_besov(std::span<const Complex> f, const scalar::Grid1d& grid, double c1, double c2, double s,
                    const scalar::Weight& w) {
    auto h = [&](double y) {
        if (!(y > c1 && y < c2)) return 0.0;
        const double u = std::log(y / c1) / std::log(c2 / c1);
        return std::exp(3.0 * (1.0 - 1.0 / (4.0 * u * (1.0 - u))));
    };
    double sum = 0.0;
    for (int j = -4; j <= 4; ++j) {
        const auto g = scalar::apply_multiplier(f, grid, [&](double xi) {
            const double y = std::abs(xi);
            if (y == 0.0) return 0.0;
            double S = 0.0;
            for (int k = -60; k <= 60; ++k) S += h(std::pow(2.0, -k) * y);
            return h(std::pow(2.0, -j) * y) / S;
        });
        sum += std::exp2(j * s) * scalar::lp_norm(g, grid, w, 1.0);
    }
    return sum;
}

// 11. N = 1 pipelines against the scalar-only code.
Outcome scalar_cross_check() {
    double worst = 0.0;
    const CubeFamily family = CubeFamily::dyadic(1, -4, 3, 8.0, 32);
    const scalar::Family sf{1, family.scales(), family.box(), family.q()};
    for (double a : {-0.5, -0.25, 0.25}) {
        const auto w = scalar_power_weight(1, 1, a);
        if (a < 0.0)
            for (double p : {0.5, 1.0})
                worst = std::max(worst, rel(ap_constant(w, p, family).value, scalar::ap_small_p(scalar_power(a), sf)));
        for (double p : {1.5, 3.0})
            worst = std::max(worst, rel(ap_constant(w, p, family).value, scalar::ap_large_p(scalar_power(a), p, sf)));
        const auto d = doubling_report(w, 1.0, family, default_directions(1, 3));
        const auto sd = scalar::doubling(scalar_power(a), sf, 4);
        worst = std::max({worst, rel(d.C_dbl, sd.C_dbl), rel(d.beta, sd.beta), rel(d.c_w, sd.c_w)});
    }

    const TorusGrid grid(1, 64, 512, 0.5);
    const scalar::Grid1d g1{64.0, 512, 0.5};
    SymbolSpec spec;
    const MultiplierSymbol phi(grid, spec);
    const auto corpus = bandlimited_corpus(grid, 1.0, 1, 8, 1111);
    for (double p : {0.5, 1.0, 2.0}) {
        const auto w = scalar_power_weight(1, 1, -0.5);
        const auto r = p <= 1.0 ? empirical_ratio(w, phi, p, corpus) : large_p_ratio(w, phi, p, corpus);
        for (std::size_t i = 0; i < corpus.size(); ++i) {
            const auto g = scalar::apply_multiplier(corpus[i].values, g1, [&](double xi) {
                const double x[] = {xi};
                return evaluate_symbol(spec, x).real();
            });
            const double sr = scalar::lp_norm(g, g1, scalar_power(-0.5), p) /
                              scalar::lp_norm(corpus[i].values, g1, scalar_power(-0.5), p);
            worst = std::max(worst, rel(r.ratios[i], sr));
        }
    }

    const TorusGrid bg(1, 256, 8192, 0.5);
    const scalar::Grid1d bg1{256.0, 8192, 0.5};
    const DyadicPartition psi(partition(0.5, 2.0));
    const DyadicPartition phi2(partition(1.0 / std::sqrt(2.0), 2.0 * std::sqrt(2.0)));
    const auto shells = shell_corpus(bg, 0.25, 8.0, 1, 4, 1112);
    BesovParams params;
    params.s = 0.5;
    params.weight = scalar_power_weight(1, 1, -0.5);
    const auto res = equivalence_experiment(shells, params, psi, phi2);
    for (std::size_t i = 0; i < shells.size(); ++i) {
        const double a = scalar_besov(shells[i].values, bg1, 0.5, 2.0, 0.5, scalar_power(-0.5));
        const double b = scalar_besov(shells[i].values, bg1, 1.0 / std::sqrt(2.0), 2.0 * std::sqrt(2.0), 0.5,
                                      scalar_power(-0.5));
        worst = std::max(worst, rel(res.ratios[i], a / b));
    }
    return {worst <= 1e-10,
            fmt("A_p, doubling, multiplier ratios and Besov ratios: max relative difference %.1e (need <= 1e-10)", worst)};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// 12. Byte-identical outputs across runs and thread counts.
Outcome determinism() {
    const char* text = R"(
weight.kind = diagonal-power
weight.N = 2
weight.alpha = -0.5, -0.25
p = 1
symbol.kind = polynomial
symbol.order = 6
symbol.M = 6
corpus.size = 16
besov.psi.j_lo = -4
besov.psi.j_hi = 4
besov.phi.j_lo = -4
besov.phi.j_hi = 4
besov.T = 256
besov.m = 8192
besov.decay_T = 1024
besov.decay_m = 131072
)";
    auto v = validate(text);
    if (!v.config) return {false, "acceptance config invalid: " + v.errors.front()};
    const auto root = std::filesystem::temp_directory_path() / "mwlp_acceptance_determinism";
    std::filesystem::remove_all(root);
    const unsigned threads[] = {1, 1, 4};
    std::vector<std::filesystem::path> dirs;
    for (int i = 0; i < 3; ++i) {
        set_thread_count(threads[i]);
        const auto dir = root / ("run" + std::to_string(i));
        write_report(run(*v.config), dir.string());
        dirs.push_back(dir);
    }
    set_thread_count(1);
    int files = 0;
    bool same = true;
    for (const auto& e : std::filesystem::directory_iterator(dirs[0])) {
        const auto name = e.path().filename();
        if (name == "run.log") continue;
        ++files;
        for (int i = 1; i < 3; ++i) same &= slurp(e.path()) == slurp(dirs[i] / name);
    }
    const auto report = nlohmann::json::parse(slurp(dirs[0] / "report.json"));
    same &= report["exit_code"] == 0;
    return {same && files >= 5, fmt("%d output files compared over 3 runs (threads 1, 1, 4): %s", files,
                                    same ? "byte-identical" : "DIFFER")};
}

}  // namespace

int main() {
    set_thread_count(1);
    const std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"A_p floor", ap_floor},
        {"dilation invariance", dilation},
        {"|x|^-1/2 A_1 oracle", power_a1},
        {"doubling", doubling},
        {"sampling identity", sampling},
        {"boundedness", boundedness},
        {"R-uniformity", r_uniformity},
        {"p >= 1 Young bound", young},
        {"lattice sum", lattice},
        {"Besov equivalence", besov},
        {"scalar cross-check", scalar_cross_check},
        {"determinism", determinism},
    };
    int failed = 0, index = 0;
    for (const auto& [name, fn] : criteria) {
        ++index;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failed += !o.pass;
        std::printf("%s %2d %-22s %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", index, name, o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    std::printf("%d/%d criteria passed\n", index - failed, index);
    return failed == 0 ? 0 : 1;
}
