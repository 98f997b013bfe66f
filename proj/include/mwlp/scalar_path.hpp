#pragma once

#include <complex>
#include <functional>
#include <span>
#include <vector>

// Scalar-only (N = 1) reimplementations used to cross-check the matrix
// pipelines. Nothing here goes through the matrix algebra, the weight
// descriptors or FFTW; weights are plain functions of the point.

namespace mwlp::scalar {

using Weight = std::function<double(std::span<const double>)>;

struct Family {
    int n = 1;
    std::vector<double> scales;
    double X = 0.0;
    int q = 2;
};

/// max_Q (mean_Q w) / (min_Q w): the N = 1 form of the small-p constant.
double ap_small_p(const Weight& w, const Family& family);

/// max_Q (mean_Q w) (mean_Q w^{-p'/p})^{p/p'}: the N = 1 form of the large-p constant.
double ap_large_p(const Weight& w, double p, const Family& family);

struct Doubling {
    double C_dbl = 0.0;
    double beta = 0.0;
    double c_w = 0.0;
};

Doubling doubling(const Weight& w, const Family& family, int lattice_window);

/// Periodic 1-D grid x_j = -T/2 + (j + shift) h, h = T/m.
struct Grid1d {
    double T = 64.0;
    int m = 512;
    double shift = 0.0;
    double h() const { return T / m; }
    double node(int j) const { return -T / 2 + (j + shift) * h(); }
};

/// (h sum_j w(x_j) |f_j|^p)^{1/p}.
double lp_norm(std::span<const std::complex<double>> f, const Grid1d& grid, const Weight& w,
               double p);

/// phi(D) f with phi sampled at xi_k = 2 pi k / T, k in [-m/2, m/2).
std::vector<std::complex<double>> apply_multiplier(std::span<const std::complex<double>> f,
                                                   const Grid1d& grid,
                                                   const std::function<double(double)>& symbol);

}  // namespace mwlp::scalar
