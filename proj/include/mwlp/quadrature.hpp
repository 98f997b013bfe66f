#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mwlp {

/// Pairwise sum, splitting at the midpoint. A run of 2k equal values sums to
/// exactly twice a run of k, which keeps doubling ratios of constant weights
/// exact.
double pairwise_sum(std::span<const double> values);

/// Pairwise sum of a row-major n-dimensional array with `side` entries per
/// axis, reduced axis by axis.
double tensor_sum(std::span<const double> values, int n, std::size_t side);

/// Midpoint-rule nodes of the cube center + r[-1/2,1/2)^n with q nodes per
/// axis, row-major with the last axis fastest. Writes q^n * n coordinates.
void cube_nodes(std::span<const double> center, double r, int q, std::vector<double>& out);

}  // namespace mwlp
