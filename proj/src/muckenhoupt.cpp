#include "mwlp/muckenhoupt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mwlp/error.hpp"
#include "mwlp/parallel.hpp"
#include "mwlp/quadrature.hpp"
#include "mwlp/rng.hpp"

namespace mwlp {

namespace {

constexpr std::size_t kCubeChunk = 16;

std::size_t ipow(std::size_t base, int e) {
    std::size_t r = 1;
    for (int i = 0; i < e; ++i) r *= base;
    return r;
}

// Winner of a max-reduction; ties resolve to the smaller index so results do
// not depend on how the sweep was split across workers.
struct Best {
    double value = -std::numeric_limits<double>::infinity();
    std::size_t index = 0;
    std::size_t aux = 0;

    void offer(double v, std::size_t i, std::size_t a = 0) {
        if (v > value || (v == value && i < index)) {
            value = v;
            index = i;
            aux = a;
        }
    }
};

Best reduce_chunks(std::span<const Best> parts) {
    Best best;
    for (const Best& b : parts) best.offer(b.value, b.index, b.aux);
    return best;
}

// Roots W^{sigma}(t) at every node, either as diagonals (N per node) or as
// full column-major blocks (N*N per node).
struct NodeRoots {
    bool diagonal = false;
    int N = 1;
    std::vector<double> diag;
    std::vector<Complex> full;

    void compute(const WeightSpec& spec, std::span<const double> nodes, int n, double sigma) {
        N = spec.N;
        diagonal = is_diagonal(spec);
        const std::size_t count = nodes.size() / static_cast<std::size_t>(n);
        const auto un = static_cast<std::size_t>(n);
        const auto uN = static_cast<std::size_t>(N);
        if (diagonal) {
            diag.resize(count * uN);
            for (std::size_t i = 0; i < count; ++i)
                weight_root_diagonal_into(spec, nodes.subspan(i * un, un), sigma, &diag[i * uN]);
        } else {
            full.resize(count * uN * uN);
            for (std::size_t i = 0; i < count; ++i)
                weight_root_into(spec, nodes.subspan(i * un, un), sigma, &full[i * uN * uN]);
        }
    }
};

// ||A_i B_j|| for node roots A (sigma = 1/p) and B (sigma = -1/p).
double pair_norm(const NodeRoots& a, std::size_t i, const NodeRoots& b, std::size_t j) {
    const int N = a.N;
    const auto uN = static_cast<std::size_t>(N);
    if (a.diagonal) {
        const double* da = &a.diag[i * uN];
        const double* db = &b.diag[j * uN];
        double m = 0.0;
        for (int k = 0; k < N; ++k) m = std::max(m, std::abs(da[k] * db[k]));
        return m;
    }
    return detail::product_norm(&a.full[i * uN * uN], &b.full[j * uN * uN], N);
}

// |A_i x| for node roots A.
double apply_norm(const NodeRoots& a, std::size_t i, const Vector& x) {
    const int N = a.N;
    const auto uN = static_cast<std::size_t>(N);
    double s = 0.0;
    if (a.diagonal) {
        const double* d = &a.diag[i * uN];
        for (int k = 0; k < N; ++k) s += std::norm(d[k] * x(k));
        return std::sqrt(s);
    }
    const Complex* m = &a.full[i * uN * uN];
    for (int r = 0; r < N; ++r) {
        Complex acc{};
        for (int c = 0; c < N; ++c) acc += m[static_cast<std::size_t>(c) * uN + static_cast<std::size_t>(r)] * x(c);
        s += std::norm(acc);
    }
    return std::sqrt(s);
}

double pow_fast(double x, double e) { return e == 1.0 ? x : std::pow(x, e); }

void check_family(const WeightSpec& spec, const CubeFamily& cubes) {
    if (cubes.size() == 0) throw Error(ErrorCode::EmptyFamily, "cube family is empty");
    if (cubes.dim() != spec.n)
        throw Error(ErrorCode::ConfigInvalid, "cube family dimension differs from weight dimension");
}

ApEstimate make_estimate(const CubeFamily& cubes, double p, ApRegime regime, const Best& best) {
    ApEstimate e;
    e.value = best.value;
    e.p = p;
    e.regime = regime;
    e.argmax_cube = cubes.cube(best.index);
    e.q = cubes.q();
    e.scale_min = *std::min_element(cubes.scales().begin(), cubes.scales().end());
    e.scale_max = *std::max_element(cubes.scales().begin(), cubes.scales().end());
    e.box = cubes.box();
    e.cubes = cubes.size();
    return e;
}

}  // namespace

CubeFamily::CubeFamily(int n, std::vector<double> scales, double X, int q)
    : n_(n), scales_(std::move(scales)), X_(X), q_(q) {
    if (n_ < 1) throw Error(ErrorCode::ConfigInvalid, "cube dimension must be >= 1");
    if (q_ < 2 || q_ % 2 != 0)
        throw Error(ErrorCode::ConfigInvalid, "quadrature points per axis must be even and >= 2");
    if (!(X_ >= 0.0)) throw Error(ErrorCode::ConfigInvalid, "bounding box must be >= 0");
    offsets_.push_back(0);
    for (double r : scales_) {
        if (!(r > 0.0)) throw Error(ErrorCode::ConfigInvalid, "cube scales must be positive");
        const long h = static_cast<long>(std::floor(2.0 * X_ / r + 1e-9));
        half_counts_.push_back(h);
        offsets_.push_back(offsets_.back() + ipow(static_cast<std::size_t>(2 * h + 1), n_));
    }
}

CubeFamily CubeFamily::dyadic(int n, int j_min, int j_max, double X, int q) {
    std::vector<double> scales;
    for (int j = j_min; j <= j_max; ++j) scales.push_back(std::ldexp(1.0, j));
    return CubeFamily(n, std::move(scales), X, q);
}

CubeFamily CubeFamily::dilated(double R) const {
    if (!(R > 0.0)) throw Error(ErrorCode::NonPositiveScale, "dilation factor must be positive");
    std::vector<double> scales = scales_;
    for (double& r : scales) r *= R;
    return CubeFamily(n_, std::move(scales), X_ * R, q_);
}

CubeFamily CubeFamily::with_q(int q) const { return CubeFamily(n_, scales_, X_, q); }

Cube CubeFamily::cube(std::size_t index) const {
    if (index >= size()) throw Error(ErrorCode::ConfigInvalid, "cube index out of range");
    const auto it = std::upper_bound(offsets_.begin(), offsets_.end(), index);
    const auto s = static_cast<std::size_t>(it - offsets_.begin() - 1);
    std::size_t local = index - offsets_[s];
    const long h = half_counts_[s];
    const auto side = static_cast<std::size_t>(2 * h + 1);
    Cube c;
    c.r = scales_[s];
    c.center.resize(static_cast<std::size_t>(n_));
    for (int d = n_ - 1; d >= 0; --d) {
        const long k = static_cast<long>(local % side) - h;
        local /= side;
        c.center[static_cast<std::size_t>(d)] = static_cast<double>(k) * (0.5 * c.r);
    }
    return c;
}

ScalarWeight scalar_reduction(const WeightSpec& spec, double p, const Vector& x) {
    if (x.size() != spec.N) throw Error(ErrorCode::ConfigInvalid, "direction has wrong dimension");
    if (std::abs(x.norm() - 1.0) > 1e-12)
        throw Error(ErrorCode::ConfigInvalid, "direction must be a unit vector");
    if (!(p > 0.0)) throw Error(ErrorCode::ExponentOutOfRange, "p must be positive");
    return [spec, p, x](std::span<const double> t) {
        Matrix root(spec.N, spec.N);
        weight_root_into(spec, t, 1.0 / p, root.data());
        return std::pow((root * x).norm(), p);
    };
}

ApEstimate ap_constant_small_p(const WeightSpec& spec, double p, const CubeFamily& cubes) {
    if (!(p > 0.0 && p <= 1.0))
        throw Error(ErrorCode::ExponentOutOfRange, "small-p regime needs 0 < p <= 1");
    check_family(spec, cubes);
    const int n = spec.n;
    const std::size_t Q = ipow(static_cast<std::size_t>(cubes.q()), n);
    const std::size_t chunks = (cubes.size() + kCubeChunk - 1) / kCubeChunk;
    std::vector<Best> parts(chunks);
    parallel_chunks(cubes.size(), kCubeChunk, [&](std::size_t begin, std::size_t end) {
        std::vector<double> nodes;
        std::vector<double> vals(Q);
        NodeRoots up, down;
        Best best;
        for (std::size_t c = begin; c < end; ++c) {
            const Cube cube = cubes.cube(c);
            cube_nodes(cube.center, cube.r, cubes.q(), nodes);
            up.compute(spec, nodes, n, 1.0 / p);
            down.compute(spec, nodes, n, -1.0 / p);
            if (spec.N == 1) {
                // ||a_t b_y||^p = a_t^p b_y^p: the y-maximum factors out of the mean.
                for (std::size_t t = 0; t < Q; ++t) vals[t] = pow_fast(up.diag[t], p);
                const double mean = tensor_sum(vals, n, static_cast<std::size_t>(cubes.q())) /
                                    static_cast<double>(Q);
                double bmax = 0.0;
                for (std::size_t y = 0; y < Q; ++y) bmax = std::max(bmax, pow_fast(down.diag[y], p));
                best.offer(mean * bmax, c);
                continue;
            }
            for (std::size_t y = 0; y < Q; ++y) {
                for (std::size_t t = 0; t < Q; ++t) vals[t] = pow_fast(pair_norm(up, t, down, y), p);
                best.offer(tensor_sum(vals, n, static_cast<std::size_t>(cubes.q())) /
                               static_cast<double>(Q),
                           c);
            }
        }
        parts[begin / kCubeChunk] = best;
    });
    return make_estimate(cubes, p, ApRegime::small_p, reduce_chunks(parts));
}

ApEstimate ap_constant_large_p(const WeightSpec& spec, double p, const CubeFamily& cubes) {
    if (!(p > 1.0) || !std::isfinite(p))
        throw Error(ErrorCode::ExponentOutOfRange, "large-p regime needs 1 < p < infinity");
    check_family(spec, cubes);
    const double pp = p / (p - 1.0);
    const int n = spec.n;
    const auto side = static_cast<std::size_t>(cubes.q());
    const std::size_t Q = ipow(side, n);
    const std::size_t chunks = (cubes.size() + kCubeChunk - 1) / kCubeChunk;
    std::vector<Best> parts(chunks);
    parallel_chunks(cubes.size(), kCubeChunk, [&](std::size_t begin, std::size_t end) {
        std::vector<double> nodes;
        std::vector<double> inner(Q), outer(Q);
        NodeRoots up, down;
        Best best;
        for (std::size_t c = begin; c < end; ++c) {
            const Cube cube = cubes.cube(c);
            cube_nodes(cube.center, cube.r, cubes.q(), nodes);
            up.compute(spec, nodes, n, 1.0 / p);
            down.compute(spec, nodes, n, -1.0 / p);
            if (spec.N == 1) {
                // (a_x b_t)^{p'} = a_x^{p'} b_t^{p'}: the inner mean is shared by all x.
                for (std::size_t t = 0; t < Q; ++t) inner[t] = std::pow(down.diag[t], pp);
                const double shared = std::pow(tensor_sum(inner, n, side) / static_cast<double>(Q), p / pp);
                for (std::size_t x = 0; x < Q; ++x) outer[x] = std::pow(up.diag[x], p) * shared;
                best.offer(tensor_sum(outer, n, side) / static_cast<double>(Q), c);
                continue;
            }
            for (std::size_t x = 0; x < Q; ++x) {
                for (std::size_t t = 0; t < Q; ++t) inner[t] = std::pow(pair_norm(up, x, down, t), pp);
                const double mean = tensor_sum(inner, n, side) / static_cast<double>(Q);
                outer[x] = std::pow(mean, p / pp);
            }
            best.offer(tensor_sum(outer, n, side) / static_cast<double>(Q), c);
        }
        parts[begin / kCubeChunk] = best;
    });
    return make_estimate(cubes, p, ApRegime::large_p, reduce_chunks(parts));
}

ApEstimate ap_constant(const WeightSpec& spec, double p, const CubeFamily& cubes) {
    if (!(p > 0.0)) throw Error(ErrorCode::ExponentOutOfRange, "p must be positive");
    return p <= 1.0 ? ap_constant_small_p(spec, p, cubes) : ap_constant_large_p(spec, p, cubes);
}

std::vector<ApEstimate> ap_refinement_trace(const WeightSpec& spec, double p,
                                            const CubeFamily& cubes, std::span<const int> qs) {
    std::vector<ApEstimate> out;
    for (int q : qs) out.push_back(ap_constant(spec, p, cubes.with_q(q)));
    return out;
}

std::vector<Vector> default_directions(int N, std::uint64_t seed) {
    std::vector<Vector> dirs;
    for (int i = 0; i < N; ++i) dirs.push_back(Vector::Unit(N, i));
    Rng rng(substream_seed(seed, "directions"));
    for (int k = 0; k < 2 * N * N; ++k) {
        Vector v(N);
        for (int i = 0; i < N; ++i) v(i) = rng.complex_normal();
        dirs.push_back(v / v.norm());
    }
    return dirs;
}

DoublingReport doubling_report(const WeightSpec& spec, double p, const CubeFamily& cubes,
                               std::span<const Vector> directions, int lattice_window) {
    check_family(spec, cubes);
    if (directions.empty()) throw Error(ErrorCode::ConfigInvalid, "no directions to test");
    if (!(p > 0.0)) throw Error(ErrorCode::ExponentOutOfRange, "p must be positive");
    if (lattice_window < 0) throw Error(ErrorCode::ConfigInvalid, "lattice window must be >= 0");
    for (const Vector& x : directions)
        if (x.size() != spec.N || std::abs(x.norm() - 1.0) > 1e-12)
            throw Error(ErrorCode::ConfigInvalid, "directions must be unit vectors of C^N");

    const int n = spec.n;
    const int q = cubes.q();
    const auto side = static_cast<std::size_t>(q);
    const std::size_t big_count = ipow(2 * side, n);
    const std::size_t small_count = ipow(side, n);
    const std::size_t D = directions.size();
    const bool small_p = p <= 1.0;

    // Row-major positions of the inner cube's nodes inside the enlarged cube.
    std::vector<std::size_t> subset(small_count);
    for (std::size_t s = 0; s < small_count; ++s) {
        std::size_t rem = s, big = 0, stride = 1;
        for (int d = n - 1; d >= 0; --d) {
            big += (rem % side + side / 2) * stride;
            rem /= side;
            stride *= 2 * side;
        }
        subset[s] = big;
    }

    struct Part {
        Best ratio;
        std::vector<double> a1;  // per direction
    };
    const std::size_t chunks = (cubes.size() + kCubeChunk - 1) / kCubeChunk;
    std::vector<Part> parts(chunks);
    parallel_chunks(cubes.size(), kCubeChunk, [&](std::size_t begin, std::size_t end) {
        std::vector<double> nodes, w(big_count), inner(small_count);
        NodeRoots roots;
        Part part;
        part.a1.assign(D, 0.0);
        for (std::size_t c = begin; c < end; ++c) {
            const Cube cube = cubes.cube(c);
            cube_nodes(cube.center, 2.0 * cube.r, 2 * q, nodes);
            roots.compute(spec, nodes, n, 1.0 / p);
            for (std::size_t d = 0; d < D; ++d) {
                for (std::size_t t = 0; t < big_count; ++t)
                    w[t] = pow_fast(apply_norm(roots, t, directions[d]), p);
                double lo = std::numeric_limits<double>::infinity();
                for (std::size_t s = 0; s < small_count; ++s) {
                    inner[s] = w[subset[s]];
                    lo = std::min(lo, inner[s]);
                }
                const double small_mass = tensor_sum(inner, n, side);
                if (!(small_mass > 0.0) || !(lo > 0.0))
                    throw Error(ErrorCode::ZeroMass, "cube integral of w_x vanished");
                const double big_mass = tensor_sum(w, n, 2 * side);
                part.ratio.offer(big_mass / small_mass, c, d);
                if (small_p)
                    part.a1[d] =
                        std::max(part.a1[d], small_mass / static_cast<double>(small_count) / lo);
            }
        }
        parts[begin / kCubeChunk] = std::move(part);
    });

    Best ratio;
    std::vector<double> a1(D, 0.0);
    for (const Part& part : parts) {
        ratio.offer(part.ratio.value, part.ratio.index, part.ratio.aux);
        for (std::size_t d = 0; d < D; ++d) a1[d] = std::max(a1[d], part.a1[d]);
    }

    DoublingReport report;
    report.C_dbl = ratio.value;
    report.beta = std::log2(report.C_dbl);
    report.directions_tested = D;
    report.worst_direction = directions[ratio.aux];
    report.worst_cube = cubes.cube(ratio.index);
    report.lattice_window = lattice_window;
    report.scalar_a1_max = small_p ? *std::max_element(a1.begin(), a1.end()) : 0.0;

    // Unit-cube masses for the cross-cube constant.
    const int W = lattice_window;
    const auto wside = static_cast<std::size_t>(2 * W + 1);
    const std::size_t lattice = ipow(wside, n);
    std::vector<std::vector<double>> mass(D, std::vector<double>(lattice));
    std::vector<std::vector<long>> coords(lattice, std::vector<long>(static_cast<std::size_t>(n)));
    {
        std::vector<double> nodes, w(small_count), center(static_cast<std::size_t>(n));
        NodeRoots roots;
        for (std::size_t k = 0; k < lattice; ++k) {
            std::size_t rem = k;
            for (int d = n - 1; d >= 0; --d) {
                coords[k][static_cast<std::size_t>(d)] = static_cast<long>(rem % wside) - W;
                rem /= wside;
                center[static_cast<std::size_t>(d)] = static_cast<double>(coords[k][static_cast<std::size_t>(d)]);
            }
            cube_nodes(center, 1.0, q, nodes);
            roots.compute(spec, nodes, n, 1.0 / p);
            for (std::size_t d = 0; d < D; ++d) {
                for (std::size_t t = 0; t < small_count; ++t)
                    w[t] = pow_fast(apply_norm(roots, t, directions[d]), p);
                mass[d][k] = tensor_sum(w, n, side) / static_cast<double>(small_count);
                if (!(mass[d][k] > 0.0))
                    throw Error(ErrorCode::ZeroMass, "unit cube integral of w_x vanished");
            }
        }
    }
    double c_w = 0.0;
    for (std::size_t d = 0; d < D; ++d)
        for (std::size_t k = 0; k < lattice; ++k)
            for (std::size_t l = 0; l < lattice; ++l) {
                double dist2 = 0.0;
                for (int a = 0; a < n; ++a) {
                    const double diff = static_cast<double>(coords[k][static_cast<std::size_t>(a)] -
                                                            coords[l][static_cast<std::size_t>(a)]);
                    dist2 += diff * diff;
                }
                const double denom =
                    dist2 == 0.0 ? mass[d][l] : std::pow(1.0 + std::sqrt(dist2), report.beta) * mass[d][l];
                c_w = std::max(c_w, mass[d][k] / denom);
            }
    report.c_w = c_w;
    return report;
}

std::string to_string(ApRegime regime) {
    return regime == ApRegime::small_p ? "small_p" : "large_p";
}

}  // namespace mwlp
