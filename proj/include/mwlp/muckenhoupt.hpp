#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mwlp/weights.hpp"

namespace mwlp {

struct Cube {
    std::vector<double> center;
    double r = 1.0;
};

/// Finite family of cubes Q(z, r) = z + r[-1/2, 1/2)^n. For every scale r the
/// centers run over the lattice (r/2) Z^n restricted to [-X, X]^n; integrals
/// use the tensor midpoint rule with q nodes per axis.
class CubeFamily {
public:
    CubeFamily(int n, std::vector<double> scales, double X, int q);

    /// Scales 2^j for j in [j_min, j_max].
    static CubeFamily dyadic(int n, int j_min, int j_max, double X, int q);

    /// Family of cubes R * Q: scales R r, box R X, same q.
    CubeFamily dilated(double R) const;
    CubeFamily with_q(int q) const;

    int dim() const { return n_; }
    int q() const { return q_; }
    double box() const { return X_; }
    const std::vector<double>& scales() const { return scales_; }

    std::size_t size() const { return offsets_.back(); }
    Cube cube(std::size_t index) const;

private:
    int n_;
    std::vector<double> scales_;
    double X_;
    int q_;
    std::vector<long> half_counts_;   // per scale: centers k (r/2) with |k| <= half_count
    std::vector<std::size_t> offsets_;  // prefix sums of cube counts per scale
};

enum class ApRegime { small_p, large_p };

struct ApEstimate {
    double value = 0.0;
    double p = 1.0;
    ApRegime regime = ApRegime::small_p;
    Cube argmax_cube;
    int q = 0;
    double scale_min = 0.0;
    double scale_max = 0.0;
    double box = 0.0;
    std::size_t cubes = 0;
};

using ScalarWeight = std::function<double(std::span<const double>)>;

/// t -> |W^{1/p}(t) x|^p for a unit vector x in C^N.
ScalarWeight scalar_reduction(const WeightSpec& spec, double p, const Vector& x);

/// Matrix A_p constant for 0 < p <= 1:
///   max_Q max_{y in nodes(Q)} mean_{t in nodes(Q)} ||W^{1/p}(t) W^{-1/p}(y)||^p.
/// The essential supremum in y is taken over the quadrature nodes, so the
/// result is a lower estimate of the constant restricted to the family.
ApEstimate ap_constant_small_p(const WeightSpec& spec, double p, const CubeFamily& cubes);

/// Matrix A_p constant for 1 < p < infinity, with p' = p / (p - 1):
///   max_Q mean_x ( mean_t ||W^{1/p}(x) W^{-1/p}(t)||^{p'} )^{p/p'}.
ApEstimate ap_constant_large_p(const WeightSpec& spec, double p, const CubeFamily& cubes);

/// Dispatches on p.
ApEstimate ap_constant(const WeightSpec& spec, double p, const CubeFamily& cubes);

/// Estimates for the same family at each q in `qs`.
std::vector<ApEstimate> ap_refinement_trace(const WeightSpec& spec, double p,
                                            const CubeFamily& cubes, std::span<const int> qs);

struct DoublingReport {
    double C_dbl = 0.0;
    double beta = 0.0;
    double c_w = 0.0;
    std::size_t directions_tested = 0;
    Vector worst_direction;
    Cube worst_cube;
    int lattice_window = 0;
    /// max over tested directions of the scalar A_1 estimate of w_x (p <= 1 only; 0 otherwise).
    double scalar_a1_max = 0.0;
};

/// Coordinate vectors followed by 2 N^2 seeded random unit vectors of C^N.
std::vector<Vector> default_directions(int N, std::uint64_t seed);

/// Doubling constant of the scalar reductions w_x over the family:
///   C_dbl = max_{Q, x} int_{Q(z,2r)} w_x / int_{Q(z,r)} w_x,  beta = log2 C_dbl,
/// and the unit-cube comparison constant
///   c_w = max_{x, k, l} int_{Q_k} w_x / ((1 + |k - l|)^beta int_{Q_l} w_x)
/// over k, l in [-window, window]^n. The enlarged cube is integrated with 2q
/// nodes per axis so the inner cube's nodes are a subset of its nodes.
DoublingReport doubling_report(const WeightSpec& spec, double p, const CubeFamily& cubes,
                               std::span<const Vector> directions, int lattice_window = 4);

std::string to_string(ApRegime regime);

}  // namespace mwlp
