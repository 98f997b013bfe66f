#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mwlp/weights.hpp"

namespace mwlp {

/// Uniform periodic grid standing in for R^n: per axis the nodes are
/// x_j = -T/2 + (j + shift) h with h = T/m, j in [0, m), and the frequency
/// nodes are xi_k = 2 pi k / T with k in [-m/2, m/2) (stored in FFT order).
/// With shift = 0 every integer lattice point of [-T/2, T/2)^n is a node;
/// shift = 1/2 gives the midpoint grid that never samples the origin.
class TorusGrid {
public:
    TorusGrid(int n, int T, int m, double shift = 0.0);

    int dim() const { return n_; }
    int period() const { return T_; }
    int samples() const { return m_; }
    double shift() const { return shift_; }
    double spacing() const { return static_cast<double>(T_) / m_; }
    double frequency_spacing() const;
    std::size_t size() const { return size_; }

    double coordinate(int j) const { return -0.5 * T_ + (j + shift_) * spacing(); }
    /// Signed index in [-m/2, m/2) of FFT position k.
    int signed_index(int k) const { return k < m_ / 2 ? k : k - m_; }
    double frequency(int k) const;

    /// Per-axis indices of flat node (or frequency) index idx, last axis fastest.
    void unflatten(std::size_t idx, std::span<int> out) const;
    void node(std::size_t idx, std::span<double> out) const;
    void frequency_vector(std::size_t idx, std::span<double> out) const;
    double frequency_norm(std::size_t idx) const;

    bool operator==(const TorusGrid& o) const {
        return n_ == o.n_ && T_ == o.T_ && m_ == o.m_ && shift_ == o.shift_;
    }

private:
    int n_, T_, m_;
    double shift_;
    std::size_t size_;
};

/// C^N-valued samples on a torus grid; values[idx * N + c] is component c at
/// flat node idx.
struct SampledVectorField {
    TorusGrid grid;
    int N = 1;
    std::vector<Complex> values;
    std::optional<double> band_radius;

    SampledVectorField(TorusGrid g, int components);
    Complex& at(std::size_t node, int c) { return values[node * static_cast<std::size_t>(N) + static_cast<std::size_t>(c)]; }
    Complex at(std::size_t node, int c) const { return values[node * static_cast<std::size_t>(N) + static_cast<std::size_t>(c)]; }
};

/// Spectrum on the frequency nodes, same layout as SampledVectorField values.
struct Spectrum {
    TorusGrid grid;
    int N = 1;
    std::vector<Complex> values;
};

/// F f(xi_k) = (2 pi)^{-n/2} h^n sum_j f(x_j) e^{-i x_j . xi_k}, per component.
Spectrum forward_transform(const SampledVectorField& f);
/// Inverse of forward_transform: f(x_j) = (2 pi)^{-n/2} (2 pi / T)^n sum_k F(xi_k) e^{i x_j . xi_k}.
SampledVectorField inverse_transform(const Spectrum& s);

enum class SpectralProfile { flat, decaying, annulus };

/// Field with seeded complex-normal coefficients on the frequency nodes with
/// inner <= |xi| < outer, shaped by `profile`, zero elsewhere.
SampledVectorField synthesize_in_annulus(const TorusGrid& grid, double inner, double outer, int N,
                                         std::uint64_t seed,
                                         SpectralProfile profile = SpectralProfile::flat);

/// Member of E_R: coefficients on nodes strictly inside B(0, R - delta),
/// delta one frequency spacing; tagged with band radius R.
/// Throws EmptyBand when no node qualifies.
SampledVectorField synthesize_bandlimited(const TorusGrid& grid, double R, int N,
                                          std::uint64_t seed,
                                          SpectralProfile profile = SpectralProfile::flat);

struct BandCheck {
    bool ok = true;
    double max_out = 0.0;
    double max_in = 0.0;
};

/// ok iff max_{|xi| >= R} |F f(xi)| <= tol * max_{|xi| < R} |F f(xi)|, with |.| the
/// Euclidean norm over components.
BandCheck bandlimit_check(const SampledVectorField& f, double R, double tol);

enum class SymbolKind { indicator, raised_cosine, triangle, polynomial, bump, shift, gaussian };

/// Closed-form multiplier symbols. All kinds except gaussian vanish for |xi| >= R.
///  indicator      1
///  raised_cosine  (1 + cos(pi |xi| / R)) / 2
///  triangle       1 - |xi| / R
///  polynomial     (1 - |xi|^2 / R^2)^order
///  bump           exp(1 - 1 / (1 - |xi|^2 / R^2))
///  shift          exp(-i a . xi)
///  gaussian       exp(-|xi|^2 / (2 R^2)) on all of R^n
struct SymbolSpec {
    SymbolKind kind = SymbolKind::raised_cosine;
    double R = 1.0;
    int order = 4;
    std::vector<double> shift;
    double amplitude = 1.0;
};

Complex evaluate_symbol(const SymbolSpec& spec, std::span<const double> xi);
bool is_compact(const SymbolKind kind);
std::string to_string(SymbolKind kind);
SymbolKind symbol_kind_from_string(const std::string& s);

using SymbolFunction = std::function<Complex(std::span<const double>)>;

/// Symbol phi sampled on the frequency nodes of a grid together with its
/// kernel F^{-1} phi sampled at the displacements d_j = signed(j) h.
/// K and M are unset until fit_decay is called.
class MultiplierSymbol {
public:
    MultiplierSymbol(const TorusGrid& grid, double R, bool compact, const SymbolFunction& phi,
                     std::string name = "custom");
    MultiplierSymbol(const TorusGrid& grid, const SymbolSpec& spec);

    const TorusGrid& grid() const { return grid_; }
    double R() const { return R_; }
    bool compact() const { return compact_; }
    const std::string& name() const { return name_; }
    const std::vector<Complex>& values() const { return values_; }
    const std::vector<Complex>& kernel() const { return kernel_; }
    std::optional<double> K() const { return K_; }
    std::optional<double> M() const { return M_; }

    /// K = max_d |F^{-1} phi(d)| / (R^n (1 + R |d|)^{-M}) over displacement nodes
    /// above the noise floor.
    double fit_decay(double M);

    MultiplierSymbol scaled(double c) const;
    MultiplierSymbol product(const MultiplierSymbol& other) const;

private:
    MultiplierSymbol(const TorusGrid& grid, double R, bool compact, std::vector<Complex> values,
                     std::string name);
    void compute_kernel();

    TorusGrid grid_;
    double R_;
    bool compact_;
    std::string name_;
    std::vector<Complex> values_;
    std::vector<Complex> kernel_;
    std::optional<double> K_, M_;
};

/// Coordinate-wise phi(D) f = F^{-1}(phi F f). Throws GridMismatch.
SampledVectorField apply_multiplier(const MultiplierSymbol& phi, const SampledVectorField& f);

/// phi_i(D) f for several symbols on f's grid, sharing one forward transform.
std::vector<SampledVectorField> apply_multipliers(std::span<const MultiplierSymbol> phis,
                                                  const SampledVectorField& f);

/// Decay constant of phi's kernel; stores (K, M) into phi.
double decay_constant(MultiplierSymbol& phi, double M);

/// Kernel samples at or below this fraction of the kernel's peak are FFT
/// roundoff and are left out of decay fits.
inline constexpr double kKernelNoiseFloor = 1e-13;

/// Decay constant of an arbitrary kernel (displacement layout) measured at
/// scale `scale`: max_d |k(d)| / (scale^n (1 + scale |d|)^{-M}) over samples
/// above the noise floor.
double kernel_decay_constant(const TorusGrid& grid, std::span<const Complex> kernel,
                             double scale, double M);

struct DecayFit {
    double K = 0.0;          // on the given grid
    double K_refined = 0.0;  // on the grid with doubled period and sample count
    double growth = 0.0;     // K_refined / K
};

/// Fits K on `grid` and on the grid with T -> 2T, m -> 2m (same spacing, longer
/// tail). Throws DivergentFit when the constant grows by more than
/// `max_growth`, i.e. the kernel decays slower than (1 + R|x|)^{-M}.
DecayFit checked_decay_fit(const TorusGrid& grid, const SymbolFunction& phi, double R,
                           bool compact, double M, double max_growth = 1.5);

/// sum_l f(l + u) F^{-1}phi(t - u - l) over lattice points l of the period,
/// times (2 pi)^{-n/2}, evaluated at every grid node t. For f in E_1 and
/// supp phi in B(0, 1) this reproduces phi(D) f.
SampledVectorField sampling_series(const MultiplierSymbol& phi, const SampledVectorField& f,
                                   std::span<const double> u);

/// Single-node variant.
Vector sampling_series_at(const MultiplierSymbol& phi, const SampledVectorField& f,
                          std::span<const double> u, std::size_t t_node);

/// Cached W^{1/p} at every node of a grid, for repeated L^p(W) norms.
class WeightedNorm {
public:
    WeightedNorm(const WeightSpec& spec, const TorusGrid& grid, double p);

    /// (h^n sum_j |W^{1/p}(x_j) f(x_j)|^p)^{1/p}.
    double operator()(const SampledVectorField& f) const;
    /// Same without the outer 1/p power.
    double pth_power(const SampledVectorField& f) const;

    double p() const { return p_; }
    const TorusGrid& grid() const { return grid_; }

private:
    TorusGrid grid_;
    int N_;
    double p_;
    bool diagonal_;
    std::vector<double> diag_;
    std::vector<Complex> full_;
};

double lp_w_norm(const SampledVectorField& f, const WeightSpec& spec, double p);

/// Flat binary layout: int64 n, T, m, N, then re/im doubles in value order;
/// JSON sidecar at path + ".json" carries the same header plus shift and band radius.
void write_field(const std::string& path, const SampledVectorField& f);
SampledVectorField read_field(const std::string& path);

}  // namespace mwlp
