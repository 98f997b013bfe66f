#include "mwlp/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

#include <fftw3.h>

#include "mwlp/error.hpp"
#include "mwlp/parallel.hpp"
#include "mwlp/quadrature.hpp"
#include "mwlp/rng.hpp"

namespace mwlp {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// FFTW planning is not thread-safe; execution of a finished plan is.
class PlanCache {
public:
    static PlanCache& instance() {
        static PlanCache cache;
        return cache;
    }

    fftw_plan get(int n, int m, int N, int sign) {
        std::lock_guard lock(mutex_);
        const auto key = std::make_tuple(n, m, N, sign);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;
        std::vector<int> dims(static_cast<std::size_t>(n), m);
        std::size_t total = static_cast<std::size_t>(N);
        for (int a = 0; a < n; ++a) total *= static_cast<std::size_t>(m);
        auto* in = fftw_alloc_complex(total);
        auto* out = fftw_alloc_complex(total);
        fftw_plan plan = fftw_plan_many_dft(n, dims.data(), N, in, nullptr, N, 1, out, nullptr, N, 1,
                                            sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(in);
        fftw_free(out);
        if (!plan) throw Error(ErrorCode::ConfigInvalid, "FFT planning failed");
        plans_.emplace(key, plan);
        return plan;
    }

private:
    std::mutex mutex_;
    std::map<std::tuple<int, int, int, int>, fftw_plan> plans_;
};

// Unnormalized DFT of `in` (N interleaved components) with the given sign.
std::vector<Complex> dft(const TorusGrid& g, int N, const std::vector<Complex>& in, int sign) {
    std::vector<Complex> out(in.size());
    fftw_plan plan = PlanCache::instance().get(g.dim(), g.samples(), N, sign);
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(const_cast<Complex*>(in.data())),
                     reinterpret_cast<fftw_complex*>(out.data()));
    return out;
}

// e^{-i x0 xi_k} per axis, x0 = -T/2 + shift h: (-1)^k e^{-2 pi i shift k / m}.
std::vector<Complex> axis_phase(const TorusGrid& g) {
    const int m = g.samples();
    std::vector<Complex> ph(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) {
        const int ks = g.signed_index(k);
        const double sgn = (ks % 2 == 0) ? 1.0 : -1.0;
        const double ang = -kTwoPi * g.shift() * ks / m;
        ph[static_cast<std::size_t>(k)] = g.shift() == 0.0 ? Complex(sgn, 0.0)
                                                           : sgn * Complex(std::cos(ang), std::sin(ang));
    }
    return ph;
}

std::vector<Complex> node_phase(const TorusGrid& g) {
    const auto ph = axis_phase(g);
    std::vector<Complex> out(g.size());
    std::vector<int> idx(static_cast<std::size_t>(g.dim()));
    for (std::size_t i = 0; i < g.size(); ++i) {
        g.unflatten(i, idx);
        Complex z = 1.0;
        for (int k : idx) z *= ph[static_cast<std::size_t>(k)];
        out[i] = z;
    }
    return out;
}

double ipow(double base, int e) {
    double r = 1.0;
    for (int i = 0; i < e; ++i) r *= base;
    return r;
}

std::size_t flatten(const TorusGrid& g, std::span<const int> idx) {
    std::size_t flat = 0;
    for (int k : idx) flat = flat * static_cast<std::size_t>(g.samples()) + static_cast<std::size_t>(k);
    return flat;
}

}  // namespace

TorusGrid::TorusGrid(int n, int T, int m, double shift) : n_(n), T_(T), m_(m), shift_(shift) {
    if (n < 1 || n > 3) throw Error(ErrorCode::ConfigInvalid, "grid dimension must be 1, 2 or 3");
    if (T <= 0 || T % 2 != 0) throw Error(ErrorCode::ConfigInvalid, "period T must be a positive even integer");
    if (m <= 0 || m % T != 0) throw Error(ErrorCode::ConfigInvalid, "m must be divisible by T");
    if (m % 2 != 0) throw Error(ErrorCode::ConfigInvalid, "m must be even");
    if (!(shift >= 0.0 && shift < 1.0)) throw Error(ErrorCode::ConfigInvalid, "grid shift must lie in [0, 1)");
    size_ = 1;
    for (int a = 0; a < n; ++a) size_ *= static_cast<std::size_t>(m);
}

double TorusGrid::frequency_spacing() const { return kTwoPi / T_; }

double TorusGrid::frequency(int k) const { return kTwoPi * signed_index(k) / T_; }

void TorusGrid::unflatten(std::size_t idx, std::span<int> out) const {
    for (int a = n_ - 1; a >= 0; --a) {
        out[static_cast<std::size_t>(a)] = static_cast<int>(idx % static_cast<std::size_t>(m_));
        idx /= static_cast<std::size_t>(m_);
    }
}

void TorusGrid::node(std::size_t idx, std::span<double> out) const {
    for (int a = n_ - 1; a >= 0; --a) {
        out[static_cast<std::size_t>(a)] = coordinate(static_cast<int>(idx % static_cast<std::size_t>(m_)));
        idx /= static_cast<std::size_t>(m_);
    }
}

void TorusGrid::frequency_vector(std::size_t idx, std::span<double> out) const {
    for (int a = n_ - 1; a >= 0; --a) {
        out[static_cast<std::size_t>(a)] = frequency(static_cast<int>(idx % static_cast<std::size_t>(m_)));
        idx /= static_cast<std::size_t>(m_);
    }
}

double TorusGrid::frequency_norm(std::size_t idx) const {
    double s = 0.0;
    for (int a = 0; a < n_; ++a) {
        const double xi = frequency(static_cast<int>(idx % static_cast<std::size_t>(m_)));
        s += xi * xi;
        idx /= static_cast<std::size_t>(m_);
    }
    return std::sqrt(s);
}

SampledVectorField::SampledVectorField(TorusGrid g, int components)
    : grid(std::move(g)), N(components) {
    if (N < 1) throw Error(ErrorCode::ConfigInvalid, "N must be at least 1");
    values.assign(grid.size() * static_cast<std::size_t>(N), Complex(0.0, 0.0));
}

Spectrum forward_transform(const SampledVectorField& f) {
    const TorusGrid& g = f.grid;
    auto out = dft(g, f.N, f.values, FFTW_FORWARD);
    const auto ph = node_phase(g);
    const double scale = std::pow(kTwoPi, -0.5 * g.dim()) * ipow(g.spacing(), g.dim());
    const auto N = static_cast<std::size_t>(f.N);
    for (std::size_t k = 0; k < g.size(); ++k)
        for (std::size_t c = 0; c < N; ++c) out[k * N + c] *= scale * ph[k];
    return {g, f.N, std::move(out)};
}

SampledVectorField inverse_transform(const Spectrum& s) {
    const TorusGrid& g = s.grid;
    const auto ph = node_phase(g);
    const auto N = static_cast<std::size_t>(s.N);
    std::vector<Complex> in(s.values.size());
    for (std::size_t k = 0; k < g.size(); ++k)
        for (std::size_t c = 0; c < N; ++c) in[k * N + c] = s.values[k * N + c] * std::conj(ph[k]);
    SampledVectorField f(g, s.N);
    f.values = dft(g, s.N, in, FFTW_BACKWARD);
    const double scale = std::pow(kTwoPi, -0.5 * g.dim()) * ipow(g.frequency_spacing(), g.dim());
    for (auto& v : f.values) v *= scale;
    return f;
}

SampledVectorField synthesize_in_annulus(const TorusGrid& grid, double inner, double outer, int N,
                                         std::uint64_t seed, SpectralProfile profile) {
    Spectrum s{grid, N, std::vector<Complex>(grid.size() * static_cast<std::size_t>(N))};
    Rng rng(substream_seed(seed, "synthesis"));
    std::size_t count = 0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double r = grid.frequency_norm(k);
        if (r < inner || r >= outer) continue;
        double amp = 1.0;
        switch (profile) {
            case SpectralProfile::flat: break;
            case SpectralProfile::decaying: amp = std::exp(-4.0 * r / outer); break;
            case SpectralProfile::annulus: amp = (r >= 0.5 * (inner + outer)) ? 1.0 : 0.0; break;
        }
        for (int c = 0; c < N; ++c) {
            // Always draw, so the profile never shifts the stream.
            const Complex z = rng.complex_normal();
            s.values[k * static_cast<std::size_t>(N) + static_cast<std::size_t>(c)] = amp * z;
        }
        if (amp != 0.0) ++count;
    }
    if (count == 0) throw Error(ErrorCode::EmptyBand, "no frequency node inside the requested band");
    return inverse_transform(s);
}

SampledVectorField synthesize_bandlimited(const TorusGrid& grid, double R, int N, std::uint64_t seed,
                                          SpectralProfile profile) {
    if (!(R > 0.0) || !std::isfinite(R)) throw Error(ErrorCode::NonPositiveScale, "band radius must be positive");
    const double outer = R - grid.frequency_spacing();
    // The zero node is admitted for any positive R so that a band narrower than
    // one spacing still yields the constant field.
    auto f = synthesize_in_annulus(grid, 0.0, std::max(outer, 1e-300), N, seed, profile);
    f.band_radius = R;
    return f;
}

BandCheck bandlimit_check(const SampledVectorField& f, double R, double tol) {
    const auto s = forward_transform(f);
    BandCheck out;
    const auto N = static_cast<std::size_t>(f.N);
    for (std::size_t k = 0; k < f.grid.size(); ++k) {
        double e = 0.0;
        for (std::size_t c = 0; c < N; ++c) e += std::norm(s.values[k * N + c]);
        e = std::sqrt(e);
        if (f.grid.frequency_norm(k) < R) out.max_in = std::max(out.max_in, e);
        else out.max_out = std::max(out.max_out, e);
    }
    out.ok = out.max_out <= tol * out.max_in;
    return out;
}

bool is_compact(const SymbolKind kind) { return kind != SymbolKind::gaussian; }

Complex evaluate_symbol(const SymbolSpec& spec, std::span<const double> xi) {
    double r2 = 0.0;
    for (double v : xi) r2 += v * v;
    const double r = std::sqrt(r2);
    const double R = spec.R;
    if (is_compact(spec.kind) && r >= R) return 0.0;
    const double a = spec.amplitude;
    switch (spec.kind) {
        case SymbolKind::indicator: return a;
        case SymbolKind::raised_cosine: return a * 0.5 * (1.0 + std::cos(std::numbers::pi * r / R));
        case SymbolKind::triangle: return a * (1.0 - r / R);
        case SymbolKind::polynomial: return a * std::pow(1.0 - r2 / (R * R), spec.order);
        case SymbolKind::bump: return a * std::exp(1.0 - 1.0 / (1.0 - r2 / (R * R)));
        case SymbolKind::shift: {
            double phase = 0.0;
            for (std::size_t i = 0; i < xi.size() && i < spec.shift.size(); ++i) phase += spec.shift[i] * xi[i];
            return a * Complex(std::cos(phase), -std::sin(phase));
        }
        case SymbolKind::gaussian: return a * std::exp(-0.5 * r2 / (R * R));
    }
    return 0.0;
}

std::string to_string(SymbolKind kind) {
    switch (kind) {
        case SymbolKind::indicator: return "indicator";
        case SymbolKind::raised_cosine: return "raised-cosine";
        case SymbolKind::triangle: return "triangle";
        case SymbolKind::polynomial: return "polynomial";
        case SymbolKind::bump: return "bump";
        case SymbolKind::shift: return "shift";
        case SymbolKind::gaussian: return "gaussian";
    }
    return "unknown";
}

SymbolKind symbol_kind_from_string(const std::string& s) {
    for (auto k : {SymbolKind::indicator, SymbolKind::raised_cosine, SymbolKind::triangle,
                   SymbolKind::polynomial, SymbolKind::bump, SymbolKind::shift, SymbolKind::gaussian})
        if (to_string(k) == s) return k;
    throw Error(ErrorCode::ConfigInvalid, "unknown symbol kind: " + s);
}

MultiplierSymbol::MultiplierSymbol(const TorusGrid& grid, double R, bool compact, const SymbolFunction& phi,
                                   std::string name)
    : grid_(grid), R_(R), compact_(compact), name_(std::move(name)) {
    if (!(R > 0.0) || !std::isfinite(R)) throw Error(ErrorCode::NonPositiveScale, "symbol radius must be positive");
    values_.resize(grid.size());
    std::vector<double> xi(static_cast<std::size_t>(grid.dim()));
    for (std::size_t k = 0; k < grid.size(); ++k) {
        grid.frequency_vector(k, xi);
        if (compact && grid.frequency_norm(k) >= R) continue;
        const Complex v = phi(xi);
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw Error(ErrorCode::NonFinite, "symbol value is not finite");
        values_[k] = v;
    }
    compute_kernel();
}

MultiplierSymbol::MultiplierSymbol(const TorusGrid& grid, const SymbolSpec& spec)
    : MultiplierSymbol(grid, spec.R, is_compact(spec.kind),
                       [spec](std::span<const double> xi) { return evaluate_symbol(spec, xi); },
                       to_string(spec.kind)) {}

MultiplierSymbol::MultiplierSymbol(const TorusGrid& grid, double R, bool compact, std::vector<Complex> values,
                                   std::string name)
    : grid_(grid), R_(R), compact_(compact), name_(std::move(name)), values_(std::move(values)) {
    compute_kernel();
}

void MultiplierSymbol::compute_kernel() {
    kernel_ = dft(grid_, 1, values_, FFTW_BACKWARD);
    const double scale = std::pow(kTwoPi, -0.5 * grid_.dim()) * ipow(grid_.frequency_spacing(), grid_.dim());
    for (auto& v : kernel_) v *= scale;
}

double MultiplierSymbol::fit_decay(double M) {
    K_ = kernel_decay_constant(grid_, kernel_, R_, M);
    M_ = M;
    return *K_;
}

MultiplierSymbol MultiplierSymbol::scaled(double c) const {
    auto v = values_;
    for (auto& z : v) z *= c;
    return MultiplierSymbol(grid_, R_, compact_, std::move(v), name_);
}

MultiplierSymbol MultiplierSymbol::product(const MultiplierSymbol& other) const {
    if (!(grid_ == other.grid_)) throw Error(ErrorCode::GridMismatch, "symbols live on different grids");
    auto v = values_;
    for (std::size_t k = 0; k < v.size(); ++k) v[k] *= other.values_[k];
    const bool compact = compact_ || other.compact_;
    double R = std::max(R_, other.R_);
    if (compact_ && other.compact_) R = std::min(R_, other.R_);
    else if (compact_) R = R_;
    else if (other.compact_) R = other.R_;
    return MultiplierSymbol(grid_, R, compact, std::move(v), name_ + "*" + other.name_);
}

double kernel_decay_constant(const TorusGrid& grid, std::span<const Complex> kernel, double scale, double M) {
    if (!(M > 0.0)) throw Error(ErrorCode::ConfigInvalid, "decay exponent M must be positive");
    if (!(scale > 0.0)) throw Error(ErrorCode::NonPositiveScale, "decay scale must be positive");
    const double h = grid.spacing();
    const double norm = ipow(scale, grid.dim());
    double peak = 0.0;
    for (const auto& v : kernel) peak = std::max(peak, std::abs(v));
    const double floor = kKernelNoiseFloor * peak;
    std::vector<int> idx(static_cast<std::size_t>(grid.dim()));
    double K = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j) {
        if (std::abs(kernel[j]) <= floor && j != 0) continue;
        grid.unflatten(j, idx);
        double d2 = 0.0;
        for (int k : idx) {
            const double d = grid.signed_index(k) * h;
            d2 += d * d;
        }
        const double ratio = std::abs(kernel[j]) * std::pow(1.0 + scale * std::sqrt(d2), M) / norm;
        K = std::max(K, ratio);
    }
    return K;
}

double decay_constant(MultiplierSymbol& phi, double M) { return phi.fit_decay(M); }

DecayFit checked_decay_fit(const TorusGrid& grid, const SymbolFunction& phi, double R, bool compact, double M,
                           double max_growth) {
    MultiplierSymbol base(grid, R, compact, phi);
    const TorusGrid wide(grid.dim(), 2 * grid.period(), 2 * grid.samples(), grid.shift());
    MultiplierSymbol refined(wide, R, compact, phi);
    DecayFit fit;
    fit.K = base.fit_decay(M);
    fit.K_refined = refined.fit_decay(M);
    fit.growth = fit.K_refined / fit.K;
    if (!(fit.growth <= max_growth))
        throw Error(ErrorCode::DivergentFit,
                    "kernel decay constant grows under refinement (factor " + std::to_string(fit.growth) + ")");
    return fit;
}

namespace {

SampledVectorField multiply_and_invert(const MultiplierSymbol& phi, const SampledVectorField& f,
                                       const std::vector<Complex>& spec) {
    if (!(phi.grid() == f.grid)) throw Error(ErrorCode::GridMismatch, "symbol and field grids differ");
    const TorusGrid& g = f.grid;
    const auto N = static_cast<std::size_t>(f.N);
    const double inv = 1.0 / static_cast<double>(g.size());
    const auto& v = phi.values();
    std::vector<Complex> prod(spec.size());
    for (std::size_t k = 0; k < g.size(); ++k)
        for (std::size_t c = 0; c < N; ++c) prod[k * N + c] = spec[k * N + c] * (v[k] * inv);
    SampledVectorField out(g, f.N);
    out.values = dft(g, f.N, prod, FFTW_BACKWARD);
    if (phi.compact())
        out.band_radius = f.band_radius ? std::min(*f.band_radius, phi.R()) : phi.R();
    else
        out.band_radius = f.band_radius;
    return out;
}

}  // namespace

SampledVectorField apply_multiplier(const MultiplierSymbol& phi, const SampledVectorField& f) {
    if (!(phi.grid() == f.grid)) throw Error(ErrorCode::GridMismatch, "symbol and field grids differ");
    return multiply_and_invert(phi, f, dft(f.grid, f.N, f.values, FFTW_FORWARD));
}

std::vector<SampledVectorField> apply_multipliers(std::span<const MultiplierSymbol> phis,
                                                  const SampledVectorField& f) {
    for (const auto& phi : phis)
        if (!(phi.grid() == f.grid)) throw Error(ErrorCode::GridMismatch, "symbol and field grids differ");
    const auto spec = dft(f.grid, f.N, f.values, FFTW_FORWARD);
    std::vector<SampledVectorField> out;
    out.reserve(phis.size());
    for (const auto& phi : phis) out.push_back(multiply_and_invert(phi, f, spec));
    return out;
}

namespace {

struct LatticeMap {
    std::vector<std::size_t> nodes;  // flat node index of l + u for each lattice point l
};

LatticeMap lattice_nodes(const MultiplierSymbol& phi, const SampledVectorField& f, std::span<const double> u) {
    if (!(phi.grid() == f.grid)) throw Error(ErrorCode::GridMismatch, "symbol and field grids differ");
    if (!f.band_radius || *f.band_radius > 1.0 + 1e-12)
        throw Error(ErrorCode::BandTooLarge, "sampling series needs a field tagged with band radius <= 1");
    if (phi.R() > 1.0 + 1e-12)
        throw Error(ErrorCode::BandTooLarge, "sampling series needs a symbol supported in B(0, 1)");
    const TorusGrid& g = f.grid;
    const int n = g.dim();
    if (static_cast<int>(u.size()) != n) throw Error(ErrorCode::ConfigInvalid, "offset dimension mismatch");
    const int s = g.samples() / g.period();
    std::vector<int> j0(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a) {
        const double ua = u[static_cast<std::size_t>(a)];
        if (!(std::abs(ua) <= 0.5)) throw Error(ErrorCode::OffsetNotOnGrid, "offset must lie in [-1/2, 1/2]^n");
        const double c = ua / g.spacing() - g.shift();
        const double r = std::round(c);
        if (std::abs(c - r) > 1e-9) throw Error(ErrorCode::OffsetNotOnGrid, "offset is not grid-aligned");
        j0[static_cast<std::size_t>(a)] = static_cast<int>(r);
    }
    const int T = g.period();
    std::size_t count = 1;
    for (int a = 0; a < n; ++a) count *= static_cast<std::size_t>(T);
    LatticeMap map;
    map.nodes.resize(count);
    std::vector<int> idx(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < count; ++i) {
        std::size_t rest = i;
        for (int a = n - 1; a >= 0; --a) {
            const int l = static_cast<int>(rest % static_cast<std::size_t>(T));  // l + T/2
            rest /= static_cast<std::size_t>(T);
            const int j = ((l * s + j0[static_cast<std::size_t>(a)]) % g.samples() + g.samples()) % g.samples();
            idx[static_cast<std::size_t>(a)] = j;
        }
        map.nodes[i] = flatten(g, idx);
    }
    return map;
}

void series_at(const MultiplierSymbol& phi, const SampledVectorField& f, const LatticeMap& map,
               std::size_t t_node, std::vector<int>& t_idx, std::vector<int>& l_idx, Complex* out) {
    const TorusGrid& g = f.grid;
    const int m = g.samples();
    const auto N = static_cast<std::size_t>(f.N);
    g.unflatten(t_node, t_idx);
    const double c = std::pow(kTwoPi, -0.5 * g.dim());
    for (std::size_t comp = 0; comp < N; ++comp) out[comp] = 0.0;
    const auto& ker = phi.kernel();
    for (std::size_t node : map.nodes) {
        g.unflatten(node, l_idx);
        std::size_t d = 0;
        for (std::size_t a = 0; a < t_idx.size(); ++a)
            d = d * static_cast<std::size_t>(m) + static_cast<std::size_t>(((t_idx[a] - l_idx[a]) % m + m) % m);
        const Complex k = ker[d];
        for (std::size_t comp = 0; comp < N; ++comp) out[comp] += f.values[node * N + comp] * k;
    }
    for (std::size_t comp = 0; comp < N; ++comp) out[comp] *= c;
}

}  // namespace

SampledVectorField sampling_series(const MultiplierSymbol& phi, const SampledVectorField& f,
                                   std::span<const double> u) {
    const auto map = lattice_nodes(phi, f, u);
    SampledVectorField out(f.grid, f.N);
    const auto N = static_cast<std::size_t>(f.N);
    parallel_chunks(f.grid.size(), 64, [&](std::size_t b, std::size_t e) {
        std::vector<int> t_idx(static_cast<std::size_t>(f.grid.dim())), l_idx(t_idx.size());
        for (std::size_t t = b; t < e; ++t) series_at(phi, f, map, t, t_idx, l_idx, &out.values[t * N]);
    });
    out.band_radius = f.band_radius ? std::min(*f.band_radius, phi.R()) : phi.R();
    return out;
}

Vector sampling_series_at(const MultiplierSymbol& phi, const SampledVectorField& f, std::span<const double> u,
                          std::size_t t_node) {
    const auto map = lattice_nodes(phi, f, u);
    std::vector<int> t_idx(static_cast<std::size_t>(f.grid.dim())), l_idx(t_idx.size());
    Vector out(f.N);
    series_at(phi, f, map, t_node, t_idx, l_idx, out.data());
    return out;
}

WeightedNorm::WeightedNorm(const WeightSpec& spec, const TorusGrid& grid, double p)
    : grid_(grid), N_(spec.N), p_(p), diagonal_(is_diagonal(spec)) {
    if (!(p > 0.0) || !std::isfinite(p)) throw Error(ErrorCode::ExponentOutOfRange, "p must be positive");
    if (spec.n != grid.dim()) throw Error(ErrorCode::GridMismatch, "weight and grid dimensions differ");
    const auto N = static_cast<std::size_t>(N_);
    if (diagonal_) diag_.resize(grid.size() * N);
    else full_.resize(grid.size() * N * N);
    const double sigma = 1.0 / p;
    parallel_chunks(grid.size(), 256, [&](std::size_t b, std::size_t e) {
        std::vector<double> x(static_cast<std::size_t>(grid.dim()));
        for (std::size_t j = b; j < e; ++j) {
            grid.node(j, x);
            if (diagonal_) weight_root_diagonal_into(spec, x, sigma, &diag_[j * N]);
            else weight_root_into(spec, x, sigma, &full_[j * N * N]);
        }
    });
}

double WeightedNorm::pth_power(const SampledVectorField& f) const {
    if (!(f.grid == grid_)) throw Error(ErrorCode::GridMismatch, "field and weight grids differ");
    if (f.N != N_) throw Error(ErrorCode::GridMismatch, "field and weight vector dimensions differ");
    const auto N = static_cast<std::size_t>(N_);
    std::vector<double> terms(grid_.size());
    for (std::size_t j = 0; j < grid_.size(); ++j) {
        double s = 0.0;
        if (diagonal_) {
            for (std::size_t c = 0; c < N; ++c) s += diag_[j * N + c] * diag_[j * N + c] * std::norm(f.values[j * N + c]);
        } else {
            const Complex* w = &full_[j * N * N];
            for (std::size_t r = 0; r < N; ++r) {
                Complex acc = 0.0;
                for (std::size_t c = 0; c < N; ++c) acc += w[c * N + r] * f.values[j * N + c];
                s += std::norm(acc);
            }
        }
        terms[j] = std::pow(s, 0.5 * p_);
    }
    return pairwise_sum(terms) * ipow(grid_.spacing(), grid_.dim());
}

double WeightedNorm::operator()(const SampledVectorField& f) const { return std::pow(pth_power(f), 1.0 / p_); }

double lp_w_norm(const SampledVectorField& f, const WeightSpec& spec, double p) {
    return WeightedNorm(spec, f.grid, p)(f);
}

void write_field(const std::string& path, const SampledVectorField& f) {
    std::ofstream bin(path, std::ios::binary);
    if (!bin) throw Error(ErrorCode::IoFailure, "cannot open " + path + " for writing");
    const std::int64_t header[4] = {f.grid.dim(), f.grid.period(), f.grid.samples(), f.N};
    bin.write(reinterpret_cast<const char*>(header), sizeof(header));
    bin.write(reinterpret_cast<const char*>(f.values.data()),
              static_cast<std::streamsize>(f.values.size() * sizeof(Complex)));
    if (!bin) throw Error(ErrorCode::IoFailure, "short write to " + path);
    nlohmann::json side = {{"n", f.grid.dim()},
                           {"T", f.grid.period()},
                           {"m", f.grid.samples()},
                           {"N", f.N},
                           {"shift", f.grid.shift()},
                           {"layout", "int64 header n,T,m,N; then re,im doubles, nodes row-major, components fastest"}};
    side["band_radius"] = f.band_radius ? nlohmann::json(*f.band_radius) : nlohmann::json(nullptr);
    std::ofstream js(path + ".json");
    if (!js) throw Error(ErrorCode::IoFailure, "cannot open " + path + ".json for writing");
    js << side.dump(2) << '\n';
}

SampledVectorField read_field(const std::string& path) {
    std::ifstream bin(path, std::ios::binary);
    if (!bin) throw Error(ErrorCode::IoFailure, "cannot open " + path);
    std::int64_t header[4];
    bin.read(reinterpret_cast<char*>(header), sizeof(header));
    if (!bin) throw Error(ErrorCode::IoFailure, "truncated header in " + path);
    double shift = 0.0;
    std::optional<double> band;
    if (std::ifstream js(path + ".json"); js) {
        try {
            const auto side = nlohmann::json::parse(js);
            shift = side.value("shift", 0.0);
            if (side.contains("band_radius") && !side["band_radius"].is_null()) band = side["band_radius"].get<double>();
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::IoFailure, std::string("bad sidecar: ") + e.what());
        }
    }
    SampledVectorField f(TorusGrid(static_cast<int>(header[0]), static_cast<int>(header[1]),
                                   static_cast<int>(header[2]), shift),
                         static_cast<int>(header[3]));
    bin.read(reinterpret_cast<char*>(f.values.data()), static_cast<std::streamsize>(f.values.size() * sizeof(Complex)));
    if (!bin) throw Error(ErrorCode::IoFailure, "truncated data in " + path);
    f.band_radius = band;
    return f;
}

}  // namespace mwlp
