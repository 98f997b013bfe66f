#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mwlp/muckenhoupt.hpp"
#include "mwlp/spectral.hpp"
#include "mwlp/weights.hpp"

namespace mwlp {

/// L(n, s) = sum_{k in Z^n} (1 + |k|)^{-s}. Direct summation over |k| <= rho
/// plus the radial tail integral from the radius whose ball volume equals the
/// number of summed points; rho doubles until two estimates agree to `tol`.
/// Throws Divergent for s <= n.
double lattice_sum_L(int n, double s, double tol = 1e-10);

/// c_M = sup_{u in Q_0} (1 + |u|)^{M p} = (1 + sqrt(n) / 2)^{M p}.
double peetre_constant(int n, double M, double p);

struct RatioSample {
    double R = 1.0;
    double ratio = 0.0;
};

struct BoundednessReport {
    double p = 1.0;
    int n = 1;
    int N = 1;
    double R = 1.0;
    double K = 0.0;
    double M = 0.0;
    double beta = 0.0;
    double c_w = 0.0;
    double c_M = 0.0;
    double L = 0.0;
    double ap = 0.0;
    double C_theory = 0.0;
    std::optional<double> ratio_max;
    std::size_t corpus_size = 0;
    std::vector<RatioSample> R_sweep;
    /// (1 + R T / 2)^{n - M}: size of the kernel tail wrapped around the torus.
    double periodization_scale = 0.0;
    /// The doubling exponent is a sampled lower bound, so the hypothesis check
    /// M > (n + beta) / p is one-sided.
    std::string warning;
    std::string weight;
    std::string symbol;
};

nlohmann::json to_json(const BoundednessReport& r);

/// C_theory = (L(n, Mp - beta) c_w c_M K^p [W]_{A_p})^{1/p} with beta, c_w from
/// doubling_report and [W]_{A_p} from ap_constant on `cubes`. `phi` must have
/// a fitted (K, M). Throws HypothesisViolated if M <= (n + beta) / p and
/// ExponentOutOfRange unless 0 < p <= 1.
BoundednessReport theoretical_constant(const WeightSpec& spec, const MultiplierSymbol& phi, double p,
                                       const CubeFamily& cubes, std::span<const Vector> directions);

/// Same chain from precomputed factors.
double assemble_constant(int n, double p, double K, double M, double beta, double c_w, double ap);

struct RatioResult {
    double max = 0.0;
    std::size_t argmax = 0;
    std::vector<double> ratios;
};

/// max over the corpus of ||phi(D) f||_{L^p(W)} / ||f||_{L^p(W)}. Every member
/// must pass bandlimit_check at phi's radius (BandViolation) and have nonzero
/// norm (ZeroNorm).
RatioResult empirical_ratio(const WeightSpec& spec, const MultiplierSymbol& phi, double p,
                            std::span<const SampledVectorField> corpus, double band_tol = 1e-10);

/// `count` bandlimited fields in E_R cycling through the flat, decaying and
/// annulus profiles, seeded per member.
std::vector<SampledVectorField> bandlimited_corpus(const TorusGrid& grid, double R, int N, std::size_t count,
                                                   std::uint64_t seed);

/// Sums of a few randomly placed Gaussians with random C^N amplitudes; not
/// bandlimited.
std::vector<SampledVectorField> gaussian_corpus(const TorusGrid& grid, int N, std::size_t count,
                                                std::uint64_t seed);

/// For each R: the grid with period T / R and the same m, symbol
/// phi_R(xi) = phi(xi / R), the corpus built with the same seeds in E_R, and
/// the empirical ratio. T / R must be an even integer dividing m.
std::vector<RatioSample> rescale_experiment(const WeightSpec& spec, const SymbolSpec& base, double p,
                                            const TorusGrid& base_grid, std::span<const double> R_list,
                                            std::size_t corpus_size, std::uint64_t seed);

/// Empirical ratio for p >= 1 with no band condition on the corpus.
RatioResult large_p_ratio(const WeightSpec& spec, const MultiplierSymbol& phi, double p,
                          std::span<const SampledVectorField> corpus);

/// Young bound for p = 1 and W = I: (2 pi)^{-n/2} h^n sum_j |k(d_j)|.
double young_bound(const MultiplierSymbol& phi);

}  // namespace mwlp
