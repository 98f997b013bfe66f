#include "mwlp/weights.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mwlp/error.hpp"
#include "mwlp/rng.hpp"

namespace mwlp {

namespace {

constexpr double kHermitianTol = 1e-12;
constexpr double kPdGuard = 1e-12;

// |factor * x|, with the dilation applied per coordinate so that a dilated
// spec evaluated at x agrees bit-for-bit with the base spec at factor * x.
double radius(std::span<const double> x, double factor = 1.0) {
    double s = 0.0;
    for (double v : x) {
        const double y = factor * v;
        s += y * y;
    }
    return std::sqrt(s);
}

void check_point(const WeightSpec& spec, std::span<const double> x) {
    if (static_cast<int>(x.size()) != spec.n)
        throw Error(ErrorCode::ConfigInvalid, "point dimension " + std::to_string(x.size()) +
                                                  " does not match weight dimension " +
                                                  std::to_string(spec.n));
}

// Innermost non-scaled spec and the accumulated dilation factor.
const WeightSpec& unwrap(const WeightSpec& spec, double& factor) {
    const WeightSpec* s = &spec;
    factor = 1.0;
    while (s->kind == WeightKind::scaled) {
        factor *= s->scale;
        s = s->inner.get();
    }
    return *s;
}

double power_at(double rho, double exponent) {
    if (exponent == 0.0) return 1.0;
    return std::pow(rho, exponent);
}

void require_nonsingular(const WeightSpec& base, double rho) {
    if (rho > 0.0) return;
    for (double a : base.exponents)
        if (a != 0.0) throw Error(ErrorCode::SingularPoint, "weight is singular at x = 0");
}

}  // namespace

HermitianMatrix::HermitianMatrix(Matrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || m_.rows() < 1)
        throw Error(ErrorCode::NonHermitian, "matrix must be square with dim >= 1");
    if (!m_.allFinite()) throw Error(ErrorCode::NonFinite, "matrix has non-finite entries");
    const double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < m_.rows(); ++i)
        for (Eigen::Index j = 0; j <= i; ++j)
            if (std::abs(m_(i, j) - std::conj(m_(j, i))) > kHermitianTol * scale)
                throw Error(ErrorCode::NonHermitian, "entries (" + std::to_string(i) + "," +
                                                         std::to_string(j) + ") not conjugate");
}

HermitianMatrix HermitianMatrix::identity(int dim) {
    return HermitianMatrix(Matrix::Identity(dim, dim), Unchecked{});
}

HermitianMatrix HermitianMatrix::diagonal(std::span<const double> entries) {
    const auto n = static_cast<Eigen::Index>(entries.size());
    Matrix m = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) m(i, i) = entries[static_cast<std::size_t>(i)];
    return HermitianMatrix(std::move(m), Unchecked{});
}

HermitianMatrix hermitian_power(const HermitianMatrix& a, double alpha) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(a.matrix());
    if (eig.info() != Eigen::Success)
        throw Error(ErrorCode::NonFinite, "eigendecomposition failed");
    const Eigen::VectorXd& lambda = eig.eigenvalues();
    const double norm = lambda.cwiseAbs().maxCoeff();
    if (!(lambda.minCoeff() > kPdGuard * norm))
        throw Error(ErrorCode::NotPositiveDefinite,
                    "smallest eigenvalue " + std::to_string(lambda.minCoeff()));
    Eigen::VectorXd powered(lambda.size());
    for (Eigen::Index i = 0; i < lambda.size(); ++i) powered(i) = std::pow(lambda(i), alpha);
    const Matrix& u = eig.eigenvectors();
    Matrix result = u * powered.asDiagonal() * u.adjoint();
    Matrix sym = 0.5 * (result + result.adjoint());
    return HermitianMatrix(std::move(sym), HermitianMatrix::Unchecked{});
}

double spectral_norm(const Matrix& a) {
    if (!a.allFinite()) throw Error(ErrorCode::NonFinite, "matrix has non-finite entries");
    if (a.size() == 0) return 0.0;
    if (a.rows() == a.cols() && a.rows() <= 2) return detail::block_norm(a.data(), int(a.rows()));
    Eigen::JacobiSVD<Matrix> svd(a);
    return svd.singularValues()(0);
}

namespace detail {

double block_norm(const Complex* m, int N) {
    if (N == 1) return std::abs(m[0]);
    if (N == 2) {
        const double frob = std::norm(m[0]) + std::norm(m[1]) + std::norm(m[2]) + std::norm(m[3]);
        const double det = std::norm(m[0] * m[3] - m[2] * m[1]);
        const double disc = std::max(0.0, frob * frob - 4.0 * det);
        return std::sqrt(0.5 * (frob + std::sqrt(disc)));
    }
    Eigen::Map<const Matrix> map(m, N, N);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(map.adjoint() * map, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, eig.eigenvalues()(N - 1)));
}

double product_norm(const Complex* a, const Complex* b, int N) {
    if (N == 1) return std::abs(a[0] * b[0]);
    if (N == 2) {
        Complex m[4];
        m[0] = a[0] * b[0] + a[2] * b[1];
        m[1] = a[1] * b[0] + a[3] * b[1];
        m[2] = a[0] * b[2] + a[2] * b[3];
        m[3] = a[1] * b[2] + a[3] * b[3];
        return block_norm(m, 2);
    }
    Eigen::Map<const Matrix> ma(a, N, N);
    Eigen::Map<const Matrix> mb(b, N, N);
    Matrix prod = ma * mb;
    return block_norm(prod.data(), N);
}

}  // namespace detail

WeightSpec identity_weight(int n, int N) {
    if (n < 1 || N < 1) throw Error(ErrorCode::ConfigInvalid, "dimensions must be >= 1");
    WeightSpec s;
    s.n = n;
    s.N = N;
    s.kind = WeightKind::identity;
    return s;
}

WeightSpec scalar_power_weight(int n, int N, double alpha) {
    WeightSpec s = identity_weight(n, N);
    s.kind = WeightKind::scalar_power;
    s.exponents = {alpha};
    return s;
}

WeightSpec diagonal_power_weight(int n, std::vector<double> alphas) {
    WeightSpec s = identity_weight(n, static_cast<int>(alphas.size()));
    s.kind = WeightKind::diagonal_power;
    s.exponents = std::move(alphas);
    return s;
}

WeightSpec conjugated_weight(int n, std::vector<double> alphas, RotationProfile rotation) {
    WeightSpec s = diagonal_power_weight(n, std::move(alphas));
    if (s.N < 2) throw Error(ErrorCode::ConfigInvalid, "conjugated weight needs N >= 2");
    if (rotation.axis_a == rotation.axis_b || rotation.axis_a < 0 || rotation.axis_b < 0 ||
        rotation.axis_a >= s.N || rotation.axis_b >= s.N)
        throw Error(ErrorCode::ConfigInvalid, "rotation plane must name two distinct axes < N");
    s.kind = WeightKind::conjugated;
    s.rotation = rotation;
    return s;
}

WeightSpec random_conjugated_weight(int n, int N, std::uint64_t seed) {
    Rng rng(substream_seed(seed, "conjugated-weight"));
    std::vector<double> alphas(static_cast<std::size_t>(N));
    for (double& a : alphas) a = -0.5 * n * rng.uniform();
    RotationProfile rot;
    rot.rate = rng.uniform(0.5, 2.0);
    return conjugated_weight(n, std::move(alphas), rot);
}

WeightSpec dilate_weight(const WeightSpec& spec, double R) {
    if (!(R > 0.0) || !std::isfinite(R))
        throw Error(ErrorCode::NonPositiveScale, "dilation factor must be positive");
    if (spec.kind == WeightKind::identity) return spec;
    WeightSpec out;
    out.n = spec.n;
    out.N = spec.N;
    out.kind = WeightKind::scaled;
    if (spec.kind == WeightKind::scaled) {
        out.scale = spec.scale * R;
        out.inner = spec.inner;
    } else {
        out.scale = R;
        out.inner = std::make_shared<const WeightSpec>(spec);
    }
    return out;
}

bool is_diagonal(const WeightSpec& spec) {
    double factor = 1.0;
    const WeightSpec& base = unwrap(spec, factor);
    return base.kind != WeightKind::conjugated;
}

void weight_root_into(const WeightSpec& spec, std::span<const double> x, double sigma,
                      Complex* out) {
    check_point(spec, x);
    double factor = 1.0;
    const WeightSpec& base = unwrap(spec, factor);
    const int N = base.N;
    std::fill(out, out + N * N, Complex{});
    const double rho = radius(x, factor);
    switch (base.kind) {
        case WeightKind::identity:
            for (int i = 0; i < N; ++i) out[i * N + i] = 1.0;
            return;
        case WeightKind::scalar_power: {
            require_nonsingular(base, rho);
            const double d = power_at(rho, base.exponents[0] * sigma);
            for (int i = 0; i < N; ++i) out[i * N + i] = d;
            return;
        }
        case WeightKind::diagonal_power:
        case WeightKind::conjugated: {
            require_nonsingular(base, rho);
            for (int i = 0; i < N; ++i)
                out[i * N + i] = power_at(rho, base.exponents[static_cast<std::size_t>(i)] * sigma);
            if (base.kind == WeightKind::diagonal_power) return;
            const int a = base.rotation.axis_a;
            const int b = base.rotation.axis_b;
            const double theta = std::fmod(base.rotation.rate * rho, 2.0 * std::numbers::pi);
            const double c = std::cos(theta);
            const double s = std::sin(theta);
            const double da = out[a * N + a].real();
            const double db = out[b * N + b].real();
            out[a * N + a] = c * c * da + s * s * db;
            out[b * N + b] = s * s * da + c * c * db;
            out[b * N + a] = c * s * (da - db);
            out[a * N + b] = c * s * (da - db);
            return;
        }
        case WeightKind::scaled:
            break;
    }
    throw Error(ErrorCode::ConfigInvalid, "unreachable weight kind");
}

void weight_root_diagonal_into(const WeightSpec& spec, std::span<const double> x, double sigma,
                               double* out) {
    check_point(spec, x);
    double factor = 1.0;
    const WeightSpec& base = unwrap(spec, factor);
    const double rho = radius(x, factor);
    switch (base.kind) {
        case WeightKind::identity:
            std::fill(out, out + base.N, 1.0);
            return;
        case WeightKind::scalar_power:
            require_nonsingular(base, rho);
            std::fill(out, out + base.N, power_at(rho, base.exponents[0] * sigma));
            return;
        case WeightKind::diagonal_power:
            require_nonsingular(base, rho);
            for (int i = 0; i < base.N; ++i)
                out[i] = power_at(rho, base.exponents[static_cast<std::size_t>(i)] * sigma);
            return;
        default:
            throw Error(ErrorCode::ConfigInvalid, "weight is not diagonal");
    }
}

HermitianMatrix weight_root_at(const WeightSpec& spec, std::span<const double> x, double sigma) {
    Matrix m(spec.N, spec.N);
    weight_root_into(spec, x, sigma, m.data());
    return HermitianMatrix(std::move(m));
}

HermitianMatrix evaluate_weight(const WeightSpec& spec, std::span<const double> x) {
    return weight_root_at(spec, x, 1.0);
}

std::string to_string(WeightKind kind) {
    switch (kind) {
        case WeightKind::identity: return "identity";
        case WeightKind::scalar_power: return "scalar-power";
        case WeightKind::diagonal_power: return "diagonal-power";
        case WeightKind::conjugated: return "conjugated";
        case WeightKind::scaled: return "scaled";
    }
    return "unknown";
}

nlohmann::json to_json(const WeightSpec& spec) {
    nlohmann::json j;
    j["n"] = spec.n;
    j["N"] = spec.N;
    j["kind"] = to_string(spec.kind);
    switch (spec.kind) {
        case WeightKind::identity:
            break;
        case WeightKind::scalar_power:
            j["alpha"] = spec.exponents.at(0);
            break;
        case WeightKind::diagonal_power:
            j["alpha"] = spec.exponents;
            break;
        case WeightKind::conjugated:
            j["alpha"] = spec.exponents;
            j["rotation"] = {{"plane", {spec.rotation.axis_a, spec.rotation.axis_b}},
                             {"rate", spec.rotation.rate}};
            break;
        case WeightKind::scaled:
            j["R"] = spec.scale;
            j["inner"] = to_json(*spec.inner);
            break;
    }
    return j;
}

WeightSpec weight_from_json(const nlohmann::json& j) {
    try {
        const std::string kind = j.at("kind").get<std::string>();
        const int n = j.at("n").get<int>();
        const int N = j.at("N").get<int>();
        WeightSpec s;
        if (kind == "identity") {
            s = identity_weight(n, N);
        } else if (kind == "scalar-power") {
            s = scalar_power_weight(n, N, j.at("alpha").get<double>());
        } else if (kind == "diagonal-power") {
            s = diagonal_power_weight(n, j.at("alpha").get<std::vector<double>>());
        } else if (kind == "conjugated") {
            RotationProfile rot;
            if (j.contains("rotation")) {
                const auto& r = j.at("rotation");
                if (r.contains("plane")) {
                    rot.axis_a = r.at("plane").at(0).get<int>();
                    rot.axis_b = r.at("plane").at(1).get<int>();
                }
                if (r.contains("rate")) rot.rate = r.at("rate").get<double>();
            }
            s = conjugated_weight(n, j.at("alpha").get<std::vector<double>>(), rot);
        } else if (kind == "scaled") {
            WeightSpec inner = weight_from_json(j.at("inner"));
            s.n = n;
            s.N = N;
            s.kind = WeightKind::scaled;
            s.scale = j.at("R").get<double>();
            if (!(s.scale > 0.0)) throw Error(ErrorCode::NonPositiveScale, "R must be positive");
            s.inner = std::make_shared<const WeightSpec>(std::move(inner));
        } else {
            throw Error(ErrorCode::ConfigInvalid, "unknown weight kind '" + kind + "'");
        }
        if (s.n != n || s.N != N)
            throw Error(ErrorCode::ConfigInvalid, "declared n/N inconsistent with parameters");
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ConfigInvalid, std::string("weight JSON: ") + e.what());
    }
}

}  // namespace mwlp
