#include "mwlp/scalar_path.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <unsupported/Eigen/FFT>

namespace mwlp::scalar {

namespace {

// Visits every cube of the family with its midpoint nodes.
template <class F>
void for_each_cube(const Family& family, double dilation, int q, F&& visit) {
    const int n = family.n;
    std::vector<double> center(static_cast<std::size_t>(n));
    std::vector<long> k(static_cast<std::size_t>(n));
    for (double r : family.scales) {
        const long h = static_cast<long>(std::floor(2.0 * family.X / r + 1e-9));
        std::fill(k.begin(), k.end(), -h);
        while (true) {
            for (int d = 0; d < n; ++d)
                center[static_cast<std::size_t>(d)] = static_cast<double>(k[static_cast<std::size_t>(d)]) * (0.5 * r);
            visit(center, dilation * r, q);
            int d = n - 1;
            while (d >= 0 && k[static_cast<std::size_t>(d)] == h) k[static_cast<std::size_t>(d--)] = -h;
            if (d < 0) break;
            ++k[static_cast<std::size_t>(d)];
        }
    }
}

// Weight values at the q^n midpoint nodes of center + r[-1/2,1/2)^n.
std::vector<double> sample(const Weight& w, const std::vector<double>& center, double r, int q) {
    const int n = static_cast<int>(center.size());
    std::size_t count = 1;
    for (int d = 0; d < n; ++d) count *= static_cast<std::size_t>(q);
    std::vector<double> out(count), x(static_cast<std::size_t>(n));
    for (std::size_t idx = 0; idx < count; ++idx) {
        std::size_t rem = idx;
        for (int d = n - 1; d >= 0; --d) {
            const auto i = static_cast<double>(rem % static_cast<std::size_t>(q));
            rem /= static_cast<std::size_t>(q);
            x[static_cast<std::size_t>(d)] = center[static_cast<std::size_t>(d)] + r * ((i + 0.5) / q - 0.5);
        }
        out[idx] = w(x);
    }
    return out;
}

double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

}  // namespace

double ap_small_p(const Weight& w, const Family& family) {
    double best = 0.0;
    for_each_cube(family, 1.0, family.q, [&](const std::vector<double>& c, double r, int q) {
        const auto v = sample(w, c, r, q);
        best = std::max(best, mean(v) / *std::min_element(v.begin(), v.end()));
    });
    return best;
}

double ap_large_p(const Weight& w, double p, const Family& family) {
    const double pp = p / (p - 1.0);
    double best = 0.0;
    for_each_cube(family, 1.0, family.q, [&](const std::vector<double>& c, double r, int q) {
        auto v = sample(w, c, r, q);
        const double a = mean(v);
        for (double& x : v) x = std::pow(x, -pp / p);
        best = std::max(best, a * std::pow(mean(v), p / pp));
    });
    return best;
}

Doubling doubling(const Weight& w, const Family& family, int lattice_window) {
    Doubling out;
    for (double r : family.scales) {
        Family one = family;
        one.scales = {r};
        for_each_cube(one, 1.0, family.q, [&](const std::vector<double>& c, double rr, int q) {
            const double inner = mean(sample(w, c, rr, q));
            // Same nodes as the matrix path: the enlarged cube at twice the count.
            const double outer = mean(sample(w, c, 2.0 * rr, 2 * q)) * std::pow(2.0, family.n);
            out.C_dbl = std::max(out.C_dbl, outer / inner);
        });
    }
    out.beta = std::log2(out.C_dbl);
    const int n = family.n;
    const long W = lattice_window;
    std::vector<std::vector<double>> points;
    std::vector<double> masses;
    std::vector<long> k(static_cast<std::size_t>(n), -W);
    while (true) {
        std::vector<double> c(k.begin(), k.end());
        points.push_back(c);
        masses.push_back(mean(sample(w, c, 1.0, family.q)));
        int d = n - 1;
        while (d >= 0 && k[static_cast<std::size_t>(d)] == W) k[static_cast<std::size_t>(d--)] = -W;
        if (d < 0) break;
        ++k[static_cast<std::size_t>(d)];
    }
    for (std::size_t a = 0; a < points.size(); ++a)
        for (std::size_t b = 0; b < points.size(); ++b) {
            double dist2 = 0.0;
            for (int d = 0; d < n; ++d) {
                const double diff = points[a][static_cast<std::size_t>(d)] - points[b][static_cast<std::size_t>(d)];
                dist2 += diff * diff;
            }
            out.c_w = std::max(out.c_w, masses[a] / (std::pow(1.0 + std::sqrt(dist2), out.beta) * masses[b]));
        }
    return out;
}

double lp_norm(std::span<const std::complex<double>> f, const Grid1d& grid, const Weight& w,
               double p) {
    double s = 0.0;
    double x[1];
    for (int j = 0; j < grid.m; ++j) {
        x[0] = grid.node(j);
        s += w(x) * std::pow(std::abs(f[static_cast<std::size_t>(j)]), p);
    }
    return std::pow(grid.h() * s, 1.0 / p);
}

std::vector<std::complex<double>> apply_multiplier(std::span<const std::complex<double>> f,
                                                   const Grid1d& grid,
                                                   const std::function<double(double)>& symbol) {
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> in(f.begin(), f.end()), spec, out;
    fft.fwd(spec, in);
    const int m = grid.m;
    for (int k = 0; k < m; ++k) {
        const int signed_k = k < m / 2 ? k : k - m;
        spec[static_cast<std::size_t>(k)] *= symbol(2.0 * std::numbers::pi * signed_k / grid.T);
    }
    fft.inv(out, spec);
    return out;
}

}  // namespace mwlp::scalar
