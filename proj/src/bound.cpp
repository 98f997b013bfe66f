#include "mwlp/bound.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mwlp/error.hpp"
#include "mwlp/parallel.hpp"
#include "mwlp/rng.hpp"

namespace mwlp {

namespace {

struct KahanSum {
    double sum = 0.0, comp = 0.0;
    void add(double v) {
        const double y = v - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
};

// sum over k in Z^n with |k| <= rho of (1 + |k|)^{-s}, and the number of terms.
// Only the nonnegative orthant is visited; each nonzero coordinate doubles the multiplicity.
std::pair<double, double> direct_lattice_sum(int n, double s, long rho) {
    const long r2 = rho * rho;
    KahanSum sum;
    double count = 0.0;
    auto add = [&](long k2, int nonzero) {
        const double mult = static_cast<double>(1 << nonzero);
        sum.add(mult * std::pow(1.0 + std::sqrt(static_cast<double>(k2)), -s));
        count += mult;
    };
    auto isqrt = [](long v) {
        long r = static_cast<long>(std::sqrt(static_cast<double>(v)));
        while (r * r > v) --r;
        while ((r + 1) * (r + 1) <= v) ++r;
        return r;
    };
    if (n == 1) {
        for (long a = rho; a >= 0; --a) add(a * a, a != 0);
    } else if (n == 2) {
        for (long a = rho; a >= 0; --a)
            for (long b = isqrt(r2 - a * a); b >= 0; --b) add(a * a + b * b, (a != 0) + (b != 0));
    } else {
        for (long a = rho; a >= 0; --a) {
            const long ra = r2 - a * a;
            for (long b = isqrt(ra); b >= 0; --b)
                for (long c = isqrt(ra - b * b); c >= 0; --c)
                    add(a * a + b * b + c * c, (a != 0) + (b != 0) + (c != 0));
        }
    }
    return {sum.sum, count};
}

// omega_{n-1} int_a^inf r^{n-1} (1 + r)^{-s} dr, binomial expansion of ((1+r) - 1)^{n-1}.
double radial_tail(int n, double s, double a) {
    const double omega = 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
    double total = 0.0, binom = 1.0;
    for (int i = 0; i <= n - 1; ++i) {
        if (i > 0) binom = binom * (n - i) / i;
        const double sign = ((n - 1 - i) % 2 == 0) ? 1.0 : -1.0;
        total += sign * binom * std::pow(1.0 + a, i + 1 - s) / (s - i - 1);
    }
    return omega * total;
}

double lattice_estimate(int n, double s, long rho) {
    const auto [direct, count] = direct_lattice_sum(n, s, rho);
    const double ball = std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
    const double a = std::pow(count / ball, 1.0 / n);
    return direct + radial_tail(n, s, a);
}

void require_positive_norm(double v, std::size_t i) {
    if (!(v > 0.0)) throw Error(ErrorCode::ZeroNorm, "corpus member " + std::to_string(i) + " has zero norm");
}

RatioResult ratio_over(const WeightSpec& spec, const MultiplierSymbol& phi, double p,
                       std::span<const SampledVectorField> corpus) {
    if (corpus.empty()) throw Error(ErrorCode::EmptyFamily, "empty corpus");
    for (const auto& f : corpus)
        if (!(f.grid == phi.grid())) throw Error(ErrorCode::GridMismatch, "corpus and symbol grids differ");
    const WeightedNorm norm(spec, phi.grid(), p);
    RatioResult out;
    out.ratios.assign(corpus.size(), 0.0);
    parallel_chunks(corpus.size(), 1, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            const double den = norm(corpus[i]);
            require_positive_norm(den, i);
            out.ratios[i] = norm(apply_multiplier(phi, corpus[i])) / den;
        }
    });
    for (std::size_t i = 0; i < out.ratios.size(); ++i)
        if (out.ratios[i] > out.max) { out.max = out.ratios[i]; out.argmax = i; }
    return out;
}

}  // namespace

double lattice_sum_L(int n, double s, double tol) {
    if (n < 1 || n > 3) throw Error(ErrorCode::ConfigInvalid, "lattice sums are implemented for n = 1, 2, 3");
    if (!(s > n)) throw Error(ErrorCode::Divergent, "lattice sum diverges unless s > n");
    // Cap the direct part near 10^7 terms; the tail integral carries the rest.
    const long cap = n == 1 ? (1L << 23) : n == 2 ? (1L << 12) : (1L << 8);
    long rho = 8;
    double prev = lattice_estimate(n, s, rho);
    while (rho < cap) {
        rho *= 2;
        const double next = lattice_estimate(n, s, rho);
        if (std::abs(next - prev) <= tol) return next;
        prev = next;
    }
    return prev;
}

double peetre_constant(int n, double M, double p) {
    if (!(M >= 0.0) || !(p > 0.0)) throw Error(ErrorCode::ConfigInvalid, "Peetre constant needs M >= 0 and p > 0");
    return std::pow(1.0 + 0.5 * std::sqrt(static_cast<double>(n)), M * p);
}

double assemble_constant(int n, double p, double K, double M, double beta, double c_w, double ap) {
    if (!(M > (n + beta) / p))
        throw Error(ErrorCode::HypothesisViolated,
                    "decay exponent must satisfy M > (n + beta) / p (M = " + std::to_string(M) +
                        ", (n + beta) / p = " + std::to_string((n + beta) / p) + ")");
    const double L = lattice_sum_L(n, M * p - beta);
    return std::pow(L * c_w * peetre_constant(n, M, p) * std::pow(K, p) * ap, 1.0 / p);
}

BoundednessReport theoretical_constant(const WeightSpec& spec, const MultiplierSymbol& phi, double p,
                                       const CubeFamily& cubes, std::span<const Vector> directions) {
    if (!(p > 0.0 && p <= 1.0)) throw Error(ErrorCode::ExponentOutOfRange, "the constant chain needs 0 < p <= 1");
    if (!phi.K() || !phi.M()) throw Error(ErrorCode::ConfigInvalid, "symbol has no fitted decay constant");
    if (spec.n != phi.grid().dim() || cubes.dim() != spec.n)
        throw Error(ErrorCode::GridMismatch, "weight, symbol and cube dimensions differ");
    BoundednessReport r;
    r.p = p;
    r.n = spec.n;
    r.N = spec.N;
    r.R = phi.R();
    r.K = *phi.K();
    r.M = *phi.M();
    r.weight = to_json(spec).dump();
    r.symbol = phi.name();
    const auto dbl = doubling_report(spec, p, cubes, directions);
    r.beta = dbl.beta;
    r.c_w = dbl.c_w;
    r.ap = ap_constant(spec, p, cubes).value;
    r.c_M = peetre_constant(r.n, r.M, p);
    r.periodization_scale = std::pow(1.0 + r.R * phi.grid().period() / 2.0, r.n - r.M);
    r.warning = "beta is a lower estimate from sampled cubes and directions; M > (n + beta) / p is checked against it";
    if (!(r.M > (r.n + r.beta) / p))
        throw Error(ErrorCode::HypothesisViolated,
                    "decay exponent must satisfy M > (n + beta) / p (M = " + std::to_string(r.M) +
                        ", beta = " + std::to_string(r.beta) + ")");
    r.L = lattice_sum_L(r.n, r.M * p - r.beta);
    r.C_theory = std::pow(r.L * r.c_w * r.c_M * std::pow(r.K, p) * r.ap, 1.0 / p);
    return r;
}

RatioResult empirical_ratio(const WeightSpec& spec, const MultiplierSymbol& phi, double p,
                            std::span<const SampledVectorField> corpus, double band_tol) {
    for (std::size_t i = 0; i < corpus.size(); ++i)
        if (!bandlimit_check(corpus[i], phi.R(), band_tol).ok)
            throw Error(ErrorCode::BandViolation, "corpus member " + std::to_string(i) + " is not bandlimited to R");
    return ratio_over(spec, phi, p, corpus);
}

RatioResult large_p_ratio(const WeightSpec& spec, const MultiplierSymbol& phi, double p,
                          std::span<const SampledVectorField> corpus) {
    if (!(p >= 1.0) || !std::isfinite(p)) throw Error(ErrorCode::ExponentOutOfRange, "large-p ratio needs p >= 1");
    return ratio_over(spec, phi, p, corpus);
}

double young_bound(const MultiplierSymbol& phi) {
    const auto& g = phi.grid();
    double s = 0.0;
    for (const auto& k : phi.kernel()) s += std::abs(k);
    return std::pow(2.0 * std::numbers::pi, -0.5 * g.dim()) * std::pow(g.spacing(), g.dim()) * s;
}

std::vector<SampledVectorField> bandlimited_corpus(const TorusGrid& grid, double R, int N, std::size_t count,
                                                   std::uint64_t seed) {
    static constexpr SpectralProfile profiles[] = {SpectralProfile::flat, SpectralProfile::decaying,
                                                   SpectralProfile::annulus};
    std::vector<SampledVectorField> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
        out.push_back(synthesize_bandlimited(grid, R, N, substream_seed(seed, "corpus", i), profiles[i % 3]));
    return out;
}

std::vector<SampledVectorField> gaussian_corpus(const TorusGrid& grid, int N, std::size_t count, std::uint64_t seed) {
    std::vector<SampledVectorField> out;
    out.reserve(count);
    const int n = grid.dim();
    const double half = 0.5 * grid.period();
    std::vector<double> x(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < count; ++i) {
        Rng rng(substream_seed(seed, "gaussian-corpus", i));
        SampledVectorField f(grid, N);
        const int bumps = 1 + static_cast<int>(rng.uniform() * 4.0);
        for (int b = 0; b < bumps; ++b) {
            std::vector<double> c(static_cast<std::size_t>(n));
            for (auto& v : c) v = rng.uniform(-0.4 * half, 0.4 * half);
            const double width = rng.uniform(0.25, 3.0);
            std::vector<Complex> amp(static_cast<std::size_t>(N));
            for (auto& a : amp) a = rng.complex_normal();
            for (std::size_t j = 0; j < grid.size(); ++j) {
                grid.node(j, x);
                double d2 = 0.0;
                for (int a = 0; a < n; ++a) {
                    const double d = x[static_cast<std::size_t>(a)] - c[static_cast<std::size_t>(a)];
                    d2 += d * d;
                }
                const double g = std::exp(-0.5 * d2 / (width * width));
                for (int comp = 0; comp < N; ++comp) f.at(j, comp) += g * amp[static_cast<std::size_t>(comp)];
            }
        }
        out.push_back(std::move(f));
    }
    return out;
}

std::vector<RatioSample> rescale_experiment(const WeightSpec& spec, const SymbolSpec& base, double p,
                                            const TorusGrid& base_grid, std::span<const double> R_list,
                                            std::size_t corpus_size, std::uint64_t seed) {
    std::vector<RatioSample> out;
    for (double R : R_list) {
        if (!(R > 0.0)) throw Error(ErrorCode::NonPositiveScale, "rescaling factor must be positive");
        const double TR = base_grid.period() / R;
        const double Tr = std::round(TR);
        if (std::abs(TR - Tr) > 1e-9 || Tr < 2.0)
            throw Error(ErrorCode::ConfigInvalid, "T / R must be an even integer for R = " + std::to_string(R));
        const TorusGrid grid(base_grid.dim(), static_cast<int>(Tr), base_grid.samples(), base_grid.shift());
        const MultiplierSymbol phi(
            grid, base.R * R, is_compact(base.kind),
            [&](std::span<const double> xi) {
                std::vector<double> y(xi.begin(), xi.end());
                for (auto& v : y) v /= R;
                return evaluate_symbol(base, y);
            },
            to_string(base.kind));
        const auto corpus = bandlimited_corpus(grid, base.R * R, spec.N, corpus_size, seed);
        out.push_back({R, empirical_ratio(spec, phi, p, corpus).max});
    }
    return out;
}

nlohmann::json to_json(const BoundednessReport& r) {
    nlohmann::json sweep = nlohmann::json::array();
    for (const auto& s : r.R_sweep) sweep.push_back({{"R", s.R}, {"ratio", s.ratio}});
    nlohmann::json j = {{"p", r.p},
                        {"n", r.n},
                        {"N", r.N},
                        {"R", r.R},
                        {"K", r.K},
                        {"M", r.M},
                        {"beta", r.beta},
                        {"c_w", r.c_w},
                        {"c_M", r.c_M},
                        {"L", r.L},
                        {"ap", r.ap},
                        {"C_theory", r.C_theory},
                        {"corpus_size", r.corpus_size},
                        {"R_sweep", sweep},
                        {"periodization_scale", r.periodization_scale},
                        {"warning", r.warning},
                        {"symbol", r.symbol}};
    j["ratio_max"] = r.ratio_max ? nlohmann::json(*r.ratio_max) : nlohmann::json(nullptr);
    j["weight"] = r.weight.empty() ? nlohmann::json(nullptr) : nlohmann::json::parse(r.weight);
    return j;
}

}  // namespace mwlp
