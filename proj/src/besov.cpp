#include "mwlp/besov.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mwlp/bound.hpp"
#include "mwlp/error.hpp"
#include "mwlp/parallel.hpp"
#include "mwlp/rng.hpp"

namespace mwlp {

namespace {

double radius(std::span<const double> xi) {
    double s = 0.0;
    for (double v : xi) s += v * v;
    return std::sqrt(s);
}

bool is_infinite(double q) { return std::isinf(q) && q > 0.0; }

void check_exponents(double p, double q) {
    if (!(p > 0.0) || !std::isfinite(p)) throw Error(ErrorCode::ExponentOutOfRange, "p must be positive");
    if (!(q > 0.0)) throw Error(ErrorCode::ExponentOutOfRange, "q must be positive or infinite");
}

// Octave exponents k with 2^{-k} y in (c1, c2) for y in [1/2, 1), padded by one.
std::pair<int, int> octave_window(double c1, double c2) {
    return {static_cast<int>(std::floor(std::log2(0.5 / c2))) - 1, static_cast<int>(std::ceil(std::log2(1.0 / c1))) + 1};
}

}  // namespace

std::string to_string(BumpProfile profile) {
    switch (profile) {
        case BumpProfile::smooth_exponential: return "smooth-exponential";
        case BumpProfile::polynomial: return "polynomial";
        case BumpProfile::tent: return "tent";
    }
    return "unknown";
}

BumpProfile bump_profile_from_string(const std::string& s) {
    for (auto p : {BumpProfile::smooth_exponential, BumpProfile::polynomial, BumpProfile::tent})
        if (to_string(p) == s) return p;
    throw Error(ErrorCode::ConfigInvalid, "unknown bump profile: " + s);
}

DyadicPartition::DyadicPartition(const PartitionSpec& spec) : spec_(spec) {
    if (!(spec.c1 > 0.0) || !std::isfinite(spec.c2))
        throw Error(ErrorCode::ConfigInvalid, "partition needs 0 < c1 < c2");
    if (!(spec.c2 > 2.0 * spec.c1))
        throw Error(ErrorCode::CoverageGap, "annuli (c1 2^j, c2 2^j) leave gaps unless c2 > 2 c1");
    if (spec.c2 > 4.0 * spec.c1 * (1.0 + 1e-12)) throw Error(ErrorCode::ConfigInvalid, "partition needs c2 <= 4 c1");
    if (spec.j_lo > spec.j_hi) throw Error(ErrorCode::ConfigInvalid, "empty j range");
    if (spec.profile != BumpProfile::tent && !(spec.shape > 0.0 && std::isfinite(spec.shape)))
        throw Error(ErrorCode::DegenerateBump, "bump shape parameter must be positive");
    // The normalizer must stay away from zero across one octave.
    double smallest = INFINITY;
    for (int i = 0; i < 4096; ++i) smallest = std::min(smallest, normalizer(0.5 + i / 8192.0));
    if (!(smallest > 1e-200) || !std::isfinite(smallest))
        throw Error(ErrorCode::DegenerateBump, "bump vanishes on part of its support");
}

double DyadicPartition::bump(double y) const {
    if (!(y > spec_.c1 && y < spec_.c2)) return 0.0;
    const double u = spec_.profile == BumpProfile::tent ? (y - spec_.c1) / (spec_.c2 - spec_.c1)
                                                        : std::log(y / spec_.c1) / std::log(spec_.c2 / spec_.c1);
    if (!(u > 0.0 && u < 1.0)) return 0.0;
    const double v = 4.0 * u * (1.0 - u);
    switch (spec_.profile) {
        case BumpProfile::smooth_exponential: return std::exp(spec_.shape * (1.0 - 1.0 / v));
        case BumpProfile::polynomial: return std::pow(v, spec_.shape);
        case BumpProfile::tent: return 1.0 - std::abs(2.0 * u - 1.0);
    }
    return 0.0;
}

double DyadicPartition::normalizer(double y) const {
    if (!(y > 0.0)) return 0.0;
    int e = 0;
    const double mant = std::frexp(y, &e);  // y = mant 2^e, mant in [1/2, 1)
    const auto [k_lo, k_hi] = octave_window(spec_.c1, spec_.c2);
    double s = 0.0;
    for (int k = k_lo; k <= k_hi; ++k) s += bump(std::ldexp(mant, -k));
    return s;
}

double DyadicPartition::psi(int j, double y) const {
    if (!(y > 0.0)) return 0.0;
    const double b = bump(std::ldexp(y, -j));
    if (b == 0.0) return 0.0;
    return b / normalizer(y);
}

double DyadicPartition::interior_lo() const { return std::ldexp(spec_.c1, spec_.j_lo + 1); }
double DyadicPartition::interior_hi() const { return std::ldexp(spec_.c2, spec_.j_hi - 1); }

DyadicPartition make_partition(const PartitionSpec& spec) { return DyadicPartition(spec); }

MultiplierSymbol partition_symbol(const DyadicPartition& part, int j, const TorusGrid& grid) {
    return MultiplierSymbol(
        grid, std::ldexp(part.c2(), j), true,
        [&part, j](std::span<const double> xi) { return Complex(part.psi(j, radius(xi)), 0.0); },
        "psi_" + std::to_string(j));
}

PartitionDecay partition_decay_check(DyadicPartition& part, const TorusGrid& grid, double M, double max_growth) {
    const TorusGrid wide(grid.dim(), 2 * grid.period(), 2 * grid.samples(), grid.shift());
    PartitionDecay out;
    for (int j = part.j_lo(); j <= part.j_hi(); ++j) {
        const double scale = std::ldexp(1.0, j);
        const auto sym = partition_symbol(part, j, grid);
        const double K = kernel_decay_constant(grid, sym.kernel(), scale, M);
        const auto refined = partition_symbol(part, j, wide);
        const double K2 = kernel_decay_constant(wide, refined.kernel(), scale, M);
        out.K.push_back(K);
        out.growth.push_back(K2 / K);
        if (!(K2 / K <= max_growth))
            throw Error(ErrorCode::DivergentFit, "decay constant of psi_" + std::to_string(j) +
                                                     " grows under refinement (factor " + std::to_string(K2 / K) + ")");
    }
    const auto [lo, hi] = std::minmax_element(out.K.begin(), out.K.end());
    out.decay_C = *hi;
    out.spread = *hi / *lo - 1.0;
    part.decay_C = out.decay_C;
    part.decay_M = M;
    return out;
}

OverlapSets overlap_sets(const DyadicPartition& psi, const DyadicPartition& phi) {
    OverlapSets out;
    out.j_lo = psi.j_lo();
    int n0_all = 0;
    for (int j = psi.j_lo(); j <= psi.j_hi(); ++j) {
        std::vector<int> A;
        bool clipped = false;
        for (int d = -8; d <= 8; ++d) {
            const int k = j + d;
            const double lo = std::max(std::ldexp(psi.c1(), j), std::ldexp(phi.c1(), k));
            const double hi = std::min(std::ldexp(psi.c2(), j), std::ldexp(phi.c2(), k));
            if (!(lo < hi)) continue;
            if (k < phi.j_lo() || k > phi.j_hi()) {
                clipped = true;
                continue;
            }
            A.push_back(k);
        }
        const int size = static_cast<int>(A.size());
        n0_all = std::max(n0_all, size);
        if (clipped) out.boundary.push_back(j);
        else out.n0 = std::max(out.n0, size);
        out.A.push_back(std::move(A));
    }
    if (out.n0 == 0) out.n0 = n0_all;
    return out;
}

double combine_terms(std::span<const double> terms, int j_lo, double s, double q) {
    if (is_infinite(q)) {
        double m = 0.0;
        for (std::size_t i = 0; i < terms.size(); ++i)
            m = std::max(m, std::exp2(s * (j_lo + static_cast<int>(i))) * terms[i]);
        return m;
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < terms.size(); ++i)
        sum += std::pow(std::exp2(s * (j_lo + static_cast<int>(i))) * terms[i], q);
    return std::pow(sum, 1.0 / q);
}

BesovEvaluator::BesovEvaluator(const DyadicPartition& part, const BesovParams& params, const TorusGrid& grid)
    : part_(part), params_(params), grid_(grid), norm_(params.weight, grid, params.p) {
    check_exponents(params.p, params.q);
    for (int j = part.j_lo(); j <= part.j_hi(); ++j) symbols_.push_back(partition_symbol(part, j, grid));
    coverage_.assign(grid.size(), 0.0);
    for (const auto& sym : symbols_)
        for (std::size_t k = 0; k < grid.size(); ++k) coverage_[k] += sym.values()[k].real();
}

BesovNorm BesovEvaluator::operator()(const SampledVectorField& f) const {
    const auto pieces = apply_multipliers(symbols_, f);
    BesovNorm out;
    for (const auto& g : pieces) out.terms.push_back(norm_(g));
    out.value = combine_terms(out.terms, part_.j_lo(), params_.s, params_.q);

    const auto spec = forward_transform(f);
    const auto N = static_cast<std::size_t>(f.N);
    double all = 0.0, outside = 0.0;
    for (std::size_t k = 0; k < grid_.size(); ++k) {
        double e = 0.0;
        for (std::size_t c = 0; c < N; ++c) e += std::norm(spec.values[k * N + c]);
        e = std::sqrt(e);
        all = std::max(all, e);
        if (std::abs(coverage_[k] - 1.0) > 1e-10) outside = std::max(outside, e);
    }
    out.out_of_range_mass = all > 0.0 ? outside / all : 0.0;
    out.truncation_warning = out.out_of_range_mass > 1e-10;
    return out;
}

BesovNorm besov_norm(const SampledVectorField& f, const BesovParams& params, const DyadicPartition& part) {
    return BesovEvaluator(part, params, f.grid)(f);
}

namespace {

struct CorpusTerms {
    std::vector<std::vector<double>> terms;
    std::size_t truncated = 0;
};

CorpusTerms corpus_terms(std::span<const SampledVectorField> corpus, const BesovParams& params,
                         const DyadicPartition& part) {
    const BesovEvaluator eval(part, params, corpus.front().grid);
    CorpusTerms out;
    out.terms.resize(corpus.size());
    std::vector<char> warned(corpus.size(), 0);
    parallel_chunks(corpus.size(), 1, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            auto r = eval(corpus[i]);
            out.terms[i] = std::move(r.terms);
            warned[i] = r.truncation_warning;
        }
    });
    for (char w : warned) out.truncated += w != 0;
    return out;
}

}  // namespace

EquivalenceResult equivalence_experiment(std::span<const SampledVectorField> corpus, const BesovParams& params,
                                         const DyadicPartition& psi, const DyadicPartition& phi) {
    if (corpus.empty()) throw Error(ErrorCode::EmptyFamily, "empty corpus");
    check_exponents(params.p, params.q);
    for (const auto& f : corpus)
        if (!(f.grid == corpus.front().grid)) throw Error(ErrorCode::GridMismatch, "corpus grids differ");
    const auto a = corpus_terms(corpus, params, psi);
    const auto b = corpus_terms(corpus, params, phi);
    EquivalenceResult out;
    out.truncated = std::max(a.truncated, b.truncated);
    out.r_min = INFINITY;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const double na = combine_terms(a.terms[i], psi.j_lo(), params.s, params.q);
        const double nb = combine_terms(b.terms[i], phi.j_lo(), params.s, params.q);
        if (!(na > 0.0) || !(nb > 0.0))
            throw Error(ErrorCode::ZeroNorm, "corpus member " + std::to_string(i) + " has zero Besov norm");
        const double r = na / nb;
        out.ratios.push_back(r);
        out.r_min = std::min(out.r_min, r);
        out.r_max = std::max(out.r_max, r);
    }
    return out;
}

EquivalenceConstant equivalence_constant(const BesovParams& params, const DyadicPartition& psi,
                                         const DyadicPartition& phi, const CubeFamily& cubes,
                                         std::span<const Vector> directions) {
    check_exponents(params.p, params.q);
    if (params.p > 1.0)
        throw Error(ErrorCode::ExponentOutOfRange, "the assembled equivalence constant needs 0 < p <= 1");
    if (!psi.decay_C || !phi.decay_C || !psi.decay_M || !phi.decay_M)
        throw Error(ErrorCode::ConfigInvalid, "both partitions need a decay check before assembling constants");
    const int n = params.weight.n;
    EquivalenceConstant out;
    out.M = std::min(*psi.decay_M, *phi.decay_M);
    const auto dbl = doubling_report(params.weight, params.p, cubes, directions);
    out.beta = dbl.beta;
    out.c_w = dbl.c_w;
    out.ap = ap_constant(params.weight, params.p, cubes).value;
    out.C_P = assemble_constant(n, params.p, 1.0, out.M, out.beta, out.c_w, out.ap);
    const auto fwd = overlap_sets(psi, phi);
    const auto bwd = overlap_sets(phi, psi);
    out.n0 = std::max(fwd.n0, bwd.n0);
    const double q_factor = std::pow(out.n0, is_infinite(params.q) ? 1.0 : std::max(1.0, 1.0 / params.q));
    const double p_factor = std::pow(out.n0, std::max(0.0, 1.0 / params.p - 1.0));

    auto direction = [&](const DyadicPartition& from, const DyadicPartition& to, const OverlapSets& ov) {
        double worst = 0.0;
        for (std::size_t i = 0; i < ov.A.size(); ++i) {
            const int j = ov.j_lo + static_cast<int>(i);
            for (int k : ov.A[i]) {
                const int d = k - j;
                const double rho = std::max(from.c2(), std::ldexp(to.c2(), d));
                const double K = *from.decay_C * std::pow(rho, -n) * std::pow(std::max(1.0, rho), out.M);
                worst = std::max(worst, out.C_P * K * std::exp2(-d * params.s));
            }
        }
        return worst * q_factor * p_factor;
    };
    out.upper = direction(psi, phi, fwd);
    out.lower = direction(phi, psi, bwd);
    out.C_equiv = out.upper * out.lower;
    return out;
}

std::vector<SampledVectorField> shell_corpus(const TorusGrid& grid, double inner, double outer, int N,
                                             std::size_t count, std::uint64_t seed) {
    if (!(inner > 0.0) || !(outer >= 2.0 * inner))
        throw Error(ErrorCode::ConfigInvalid, "shell corpus needs 0 < inner and outer >= 2 inner");
    std::vector<SampledVectorField> out;
    out.reserve(count);
    std::vector<double> radii(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) radii[k] = grid.frequency_norm(k);
    const auto NN = static_cast<std::size_t>(N);
    for (std::size_t i = 0; i < count; ++i) {
        Rng rng(substream_seed(seed, "shells", i));
        Spectrum s{grid, N, std::vector<Complex>(grid.size() * NN)};
        const int shells = 1 + static_cast<int>(rng.uniform() * 3.0);
        std::size_t filled = 0;
        for (int b = 0; b < shells; ++b) {
            const double a = std::exp(rng.uniform(std::log(inner), std::log(0.5 * outer)));
            const double amp = std::exp2(rng.uniform(-2.0, 2.0));
            Rng coeffs(substream_seed(seed, "shell-coefficients", i * 8 + static_cast<std::size_t>(b)));
            for (std::size_t k = 0; k < grid.size(); ++k) {
                if (radii[k] < a || radii[k] >= 2.0 * a) continue;
                for (std::size_t c = 0; c < NN; ++c) s.values[k * NN + c] += amp * coeffs.complex_normal();
                ++filled;
            }
        }
        if (filled == 0) throw Error(ErrorCode::EmptyBand, "shell corpus member has no frequency nodes");
        auto f = inverse_transform(s);
        f.band_radius = outer;
        out.push_back(std::move(f));
    }
    return out;
}

nlohmann::json to_json(const PartitionSpec& spec) {
    return {{"c1", spec.c1},
            {"c2", spec.c2},
            {"j_range", {spec.j_lo, spec.j_hi}},
            {"profile", to_string(spec.profile)},
            {"shape", spec.shape}};
}

PartitionSpec partition_from_json(const nlohmann::json& j) {
    try {
        PartitionSpec s;
        s.c1 = j.value("c1", s.c1);
        s.c2 = j.value("c2", s.c2);
        if (j.contains("j_range")) {
            s.j_lo = j.at("j_range").at(0).get<int>();
            s.j_hi = j.at("j_range").at(1).get<int>();
        }
        if (j.contains("profile")) s.profile = bump_profile_from_string(j.at("profile").get<std::string>());
        s.shape = j.value("shape", s.shape);
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ConfigInvalid, std::string("bad partition: ") + e.what());
    }
}

}  // namespace mwlp
