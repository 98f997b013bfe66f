#include "mwlp/quadrature.hpp"

#include <cmath>

namespace mwlp {

double pairwise_sum(std::span<const double> values) {
    switch (values.size()) {
        case 0: return 0.0;
        case 1: return values[0];
        case 2: return values[0] + values[1];
        default: break;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double tensor_sum(std::span<const double> values, int n, std::size_t side) {
    if (n <= 1) return pairwise_sum(values);
    const std::size_t stride = values.size() / side;
    std::vector<double> slices(side);
    for (std::size_t i = 0; i < side; ++i)
        slices[i] = tensor_sum(values.subspan(i * stride, stride), n - 1, side);
    return pairwise_sum(slices);
}

void cube_nodes(std::span<const double> center, double r, int q, std::vector<double>& out) {
    const int n = static_cast<int>(center.size());
    std::size_t count = 1;
    for (int d = 0; d < n; ++d) count *= static_cast<std::size_t>(q);
    out.resize(count * static_cast<std::size_t>(n));
    std::vector<double> offsets(static_cast<std::size_t>(q));
    for (int i = 0; i < q; ++i) offsets[static_cast<std::size_t>(i)] = (i + 0.5) / q - 0.5;
    for (std::size_t idx = 0; idx < count; ++idx) {
        std::size_t rem = idx;
        for (int d = n - 1; d >= 0; --d) {
            const std::size_t i = rem % static_cast<std::size_t>(q);
            rem /= static_cast<std::size_t>(q);
            out[idx * static_cast<std::size_t>(n) + static_cast<std::size_t>(d)] =
                center[static_cast<std::size_t>(d)] + r * offsets[i];
        }
    }
}

}  // namespace mwlp
