#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mwlp/muckenhoupt.hpp"
#include "mwlp/spectral.hpp"
#include "mwlp/weights.hpp"

namespace mwlp {

/// Radial bump h on (c1, c2). The smooth profiles use the logarithmic
/// coordinate u = log(y / c1) / log(c2 / c1), the tent the linear one
/// u = (y - c1) / (c2 - c1):
///  smooth_exponential  exp(shape (1 - 1 / (4 u (1 - u))))   (C^infinity)
///  polynomial          (4 u (1 - u))^shape                  (C^{shape - 1} for integer shape)
///  tent                1 - |2u - 1|                         (Lipschitz only)
enum class BumpProfile { smooth_exponential, polynomial, tent };

std::string to_string(BumpProfile profile);
BumpProfile bump_profile_from_string(const std::string& s);

struct PartitionSpec {
    double c1 = 0.5;
    double c2 = 2.0;
    int j_lo = -5;
    int j_hi = 5;
    BumpProfile profile = BumpProfile::smooth_exponential;
    double shape = 3.0;
};

/// psi_j(xi) = h(2^{-j} |xi|) / S(|xi|) with S(y) = sum_{k in Z} h(2^{-k} y).
/// S is evaluated on the octave representative of y, so S(2y) = S(y) holds
/// bit for bit and psi_j(xi) = psi_0(2^{-j} xi) exactly.
class DyadicPartition {
public:
    /// Throws CoverageGap unless c2 > 2 c1 (with open supports c2 = 2 c1 leaves
    /// the points c1 2^k uncovered), ConfigInvalid for c2 > 4 c1 or an empty
    /// j range, and DegenerateBump if the bump vanishes on its support.
    explicit DyadicPartition(const PartitionSpec& spec);

    const PartitionSpec& spec() const { return spec_; }
    double c1() const { return spec_.c1; }
    double c2() const { return spec_.c2; }
    int j_lo() const { return spec_.j_lo; }
    int j_hi() const { return spec_.j_hi; }

    double bump(double y) const;
    double normalizer(double y) const;
    /// Radial value of psi_j at |xi| = y.
    double psi(int j, double y) const;

    /// Radii on which sum_{j in range} psi_j = 1: [c1 2^{j_lo + 1}, c2 2^{j_hi - 1}].
    double interior_lo() const;
    double interior_hi() const;

    std::optional<double> decay_C;
    std::optional<double> decay_M;

private:
    PartitionSpec spec_;
};

DyadicPartition make_partition(const PartitionSpec& spec);

/// psi_j as a multiplier on `grid`, band radius c2 2^j.
MultiplierSymbol partition_symbol(const DyadicPartition& part, int j, const TorusGrid& grid);

struct PartitionDecay {
    double decay_C = 0.0;        // max_j K_j
    std::vector<double> K;       // K_j, j = j_lo .. j_hi
    double spread = 0.0;         // max_j K_j / min_j K_j - 1
    std::vector<double> growth;  // K_j on the (2T, 2m) grid over K_j
};

/// K_j = max_x |F^{-1} psi_j(x)| / (2^{jn} (1 + 2^j |x|)^{-M}) on `grid`;
/// stores decay_C = max_j K_j and M in the partition. Throws DivergentFit when
/// some K_j grows by more than `max_growth` on the grid with doubled period.
PartitionDecay partition_decay_check(DyadicPartition& part, const TorusGrid& grid, double M,
                                     double max_growth = 1.5);

struct OverlapSets {
    int j_lo = 0;
    std::vector<std::vector<int>> A;   // A[j - j_lo]
    int n0 = 0;                        // max #A_j over j whose window is not clipped by Phi's range
    std::vector<int> boundary;         // js whose window is clipped (possibly empty A_j)
};

/// A_j = {k : (c1 2^j, c2 2^j) meets (c1' 2^k, c2' 2^k)}, k in Phi's range.
OverlapSets overlap_sets(const DyadicPartition& psi, const DyadicPartition& phi);

struct BesovParams {
    double s = 0.0;
    double p = 1.0;
    double q = 1.0;  // infinity allowed
    WeightSpec weight = identity_weight(1, 1);
};

struct BesovNorm {
    double value = 0.0;
    std::vector<double> terms;       // ||psi_j(D) f||_{L^p(W)}, j = j_lo .. j_hi
    double out_of_range_mass = 0.0;  // max |F f| where sum_j psi_j != 1, over max |F f|
    bool truncation_warning = false;
};

/// (sum_j 2^{jsq} t_j^q)^{1/q}, or sup_j 2^{js} t_j for q = infinity.
double combine_terms(std::span<const double> terms, int j_lo, double s, double q);

/// Precomputed symbols and weight roots for repeated Besov norms on one grid.
class BesovEvaluator {
public:
    BesovEvaluator(const DyadicPartition& part, const BesovParams& params, const TorusGrid& grid);
    BesovNorm operator()(const SampledVectorField& f) const;
    const DyadicPartition& partition() const { return part_; }

private:
    DyadicPartition part_;
    BesovParams params_;
    TorusGrid grid_;
    std::vector<MultiplierSymbol> symbols_;
    std::vector<double> coverage_;  // sum_j psi_j at each frequency node
    WeightedNorm norm_;
};

BesovNorm besov_norm(const SampledVectorField& f, const BesovParams& params, const DyadicPartition& part);

struct EquivalenceResult {
    std::vector<double> ratios;
    double r_min = 0.0;
    double r_max = 0.0;
    std::size_t truncated = 0;  // corpus members with a truncation warning
};

/// besov_norm(f, Psi) / besov_norm(f, Phi) per corpus member. Throws ZeroNorm.
EquivalenceResult equivalence_experiment(std::span<const SampledVectorField> corpus, const BesovParams& params,
                                         const DyadicPartition& psi, const DyadicPartition& phi);

/// Two-sided constant of the partition change. For the direction Psi -> Phi,
/// with rho_d = max(c2(Psi), c2(Phi) 2^d) over offsets d = k - j in the overlap sets,
///   upper = max_d C_P K_Psi rho_d^{-n} max(1, rho_d)^M 2^{-ds} n0^{max(1, 1/q)} n0^{max(0, 1/p - 1)},
/// where C_P is the multiplier constant of the weight at K = 1. `lower` is the
/// same for Phi -> Psi; r_max <= upper, 1 / r_min <= lower, and C_equiv = upper * lower
/// bounds r_max / r_min.
struct EquivalenceConstant {
    double upper = 0.0;
    double lower = 0.0;
    double C_equiv = 0.0;
    double C_P = 0.0;
    int n0 = 0;
    double M = 0.0;
    double beta = 0.0;
    double c_w = 0.0;
    double ap = 0.0;
};

/// Needs decay_C on both partitions and 0 < p <= 1. Throws HypothesisViolated
/// unless M > (n + beta) / p.
EquivalenceConstant equivalence_constant(const BesovParams& params, const DyadicPartition& psi,
                                         const DyadicPartition& phi, const CubeFamily& cubes,
                                         std::span<const Vector> directions);

/// Fields whose spectrum is a seeded sum of one to three dyadic shells
/// [a, 2a) with log-uniform a, all inside [inner, outer).
std::vector<SampledVectorField> shell_corpus(const TorusGrid& grid, double inner, double outer, int N,
                                             std::size_t count, std::uint64_t seed);

nlohmann::json to_json(const PartitionSpec& spec);
PartitionSpec partition_from_json(const nlohmann::json& j);

}  // namespace mwlp
