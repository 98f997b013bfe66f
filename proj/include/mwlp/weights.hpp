#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace mwlp {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// A Hermitian N x N matrix. Construction checks the symmetry
/// a_ij = conj(a_ji) to 1e-12 relative to the largest entry.
class HermitianMatrix {
public:
    explicit HermitianMatrix(Matrix m);

    static HermitianMatrix identity(int dim);
    static HermitianMatrix diagonal(std::span<const double> entries);

    int dim() const { return static_cast<int>(m_.rows()); }
    const Matrix& matrix() const { return m_; }
    Complex operator()(int i, int j) const { return m_(i, j); }

private:
    struct Unchecked {};
    HermitianMatrix(Matrix m, Unchecked) : m_(std::move(m)) {}
    friend HermitianMatrix hermitian_power(const HermitianMatrix&, double);

    Matrix m_;
};

/// U diag(lambda_i^alpha) U* from the eigendecomposition of `a`.
/// Throws NotPositiveDefinite when the smallest eigenvalue is at or below
/// 1e-12 times the spectral norm.
HermitianMatrix hermitian_power(const HermitianMatrix& a, double alpha);

/// Largest singular value. Throws NonFinite on NaN/Inf entries.
double spectral_norm(const Matrix& a);

struct RotationProfile {
    int axis_a = 0;
    int axis_b = 1;
    double rate = 1.0;  // theta(x) = rate * |x| (mod 2 pi)
};

enum class WeightKind { identity, scalar_power, diagonal_power, conjugated, scaled };

/// Analytic descriptor of a matrix weight W : R^n -> C^{N x N}.
///
/// - identity:        W(x) = I_N
/// - scalar_power:    W(x) = |x|^alpha I_N                     (alpha = exponents[0])
/// - diagonal_power:  W(x) = diag(|x|^alpha_1, ..., |x|^alpha_N)
/// - conjugated:      W(x) = U(x) diag(|x|^alpha_i) U(x)^*, with U(x) the planar
///                    rotation by theta(x) in coordinates (axis_a, axis_b)
/// - scaled:          W(x) = inner(scale * x)
struct WeightSpec {
    int n = 1;
    int N = 1;
    WeightKind kind = WeightKind::identity;
    std::vector<double> exponents;
    RotationProfile rotation;
    double scale = 1.0;
    std::shared_ptr<const WeightSpec> inner;
};

WeightSpec identity_weight(int n, int N);
WeightSpec scalar_power_weight(int n, int N, double alpha);
WeightSpec diagonal_power_weight(int n, std::vector<double> alphas);
WeightSpec conjugated_weight(int n, std::vector<double> alphas, RotationProfile rotation = {});
/// Conjugated weight with exponents drawn from (-n/2, 0] and a random rate.
WeightSpec random_conjugated_weight(int n, int N, std::uint64_t seed);

/// x -> W(R x). Nested dilations collapse into one scale factor.
WeightSpec dilate_weight(const WeightSpec& spec, double R);

/// True when every value W(x) is diagonal (identity, scalar and diagonal powers,
/// and dilations of those).
bool is_diagonal(const WeightSpec& spec);

HermitianMatrix evaluate_weight(const WeightSpec& spec, std::span<const double> x);

/// W(x)^sigma from the closed form of the descriptor.
HermitianMatrix weight_root_at(const WeightSpec& spec, std::span<const double> x, double sigma);

/// Column-major W(x)^sigma written to out[0 .. N*N). Hot-loop variant of
/// weight_root_at without allocation.
void weight_root_into(const WeightSpec& spec, std::span<const double> x, double sigma,
                      Complex* out);

/// Diagonal of W(x)^sigma; only valid when is_diagonal(spec).
void weight_root_diagonal_into(const WeightSpec& spec, std::span<const double> x, double sigma,
                               double* out);

nlohmann::json to_json(const WeightSpec& spec);
WeightSpec weight_from_json(const nlohmann::json& j);
std::string to_string(WeightKind kind);

namespace detail {

/// ||A B|| in the spectral norm for column-major N x N blocks.
double product_norm(const Complex* a, const Complex* b, int N);

/// Spectral norm of a column-major N x N block.
double block_norm(const Complex* m, int N);

}  // namespace detail

}  // namespace mwlp
