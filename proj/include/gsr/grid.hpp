#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace gsr {

/// A partition 0 = x_0 < x_1 < ... < x_{n-1} = A of [0, A].
///
/// Nodes are stored ascending. For the hat basis the collocation points
/// are the nodes themselves (z_j = x_{j-1}, j = 1..n).
struct Partition {
    double threshold = 0.0;
    std::vector<double> nodes;
    std::vector<double> widths;   ///< widths[k] = nodes[k+1] - nodes[k]
    double h_max = 0.0;

    std::size_t size() const { return nodes.size(); }
    std::size_t intervals() const { return widths.size(); }

    /// Index k of the interval [x_k, x_{k+1}] containing x, clamped to the
    /// last interval at x = A.
    std::size_t locate(double x) const {
        auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
        std::size_t k = it == nodes.begin() ? 0 : static_cast<std::size_t>(it - nodes.begin()) - 1;
        return std::min(k, intervals() - 1);
    }
};

namespace detail {

inline void finish_partition(Partition& p) {
    p.widths.resize(p.nodes.size() - 1);
    for (std::size_t k = 0; k + 1 < p.nodes.size(); ++k) {
        p.widths[k] = p.nodes[k + 1] - p.nodes[k];
        if (!(p.widths[k] > 0.0))
            throw std::invalid_argument("partition nodes must be strictly increasing");
    }
    p.h_max = *std::max_element(p.widths.begin(), p.widths.end());
}

inline void check_partition_args(double threshold, std::size_t node_count) {
    if (!(threshold > 0.0) || !std::isfinite(threshold))
        throw std::invalid_argument("partition: threshold A must be positive and finite");
    if (node_count < 2) throw std::invalid_argument("partition: need at least 2 nodes");
}

}  // namespace detail

/// Nodes at the shifted Chebyshev abscissas
///   x_{N-j} = (A/2){1 + cos[(2j-1)pi/(2N)] / cos(pi/(2N))},  j = 1..N,
/// with the endpoints assigned exactly. Widths follow
/// h_j = A tan(pi/(2N)) sin(pi j/N) and h_max = h_{floor(N/2)}.
inline Partition chebyshev_partition(double threshold, std::size_t node_count) {
    detail::check_partition_args(threshold, node_count);
    const double n = static_cast<double>(node_count);
    const double scale = std::cos(std::numbers::pi / (2.0 * n));

    Partition p;
    p.threshold = threshold;
    p.nodes.resize(node_count);
    for (std::size_t j = 1; j <= node_count; ++j) {
        const double c = std::cos((2.0 * static_cast<double>(j) - 1.0) * std::numbers::pi / (2.0 * n));
        p.nodes[node_count - j] = 0.5 * threshold * (1.0 + c / scale);
    }
    p.nodes.front() = 0.0;
    p.nodes.back() = threshold;
    detail::finish_partition(p);
    return p;
}

/// Equispaced nodes; used by the midpoint (Markov chain) discretization.
inline Partition uniform_partition(double threshold, std::size_t node_count) {
    detail::check_partition_args(threshold, node_count);
    Partition p;
    p.threshold = threshold;
    p.nodes.resize(node_count);
    const double step = threshold / static_cast<double>(node_count - 1);
    for (std::size_t k = 0; k < node_count; ++k) p.nodes[k] = step * static_cast<double>(k);
    p.nodes.back() = threshold;
    detail::finish_partition(p);
    return p;
}

/// Hat function phi_j, j = 1..N, centred at x_{j-1}; phi_1 has no left
/// ramp and phi_N no right ramp.
inline double hat_eval(const Partition& p, std::size_t j, double x) {
    const std::size_t n = p.size();
    if (j < 1 || j > n) throw std::out_of_range("hat_eval: basis index out of range");
    if (!(x >= 0.0 && x <= p.threshold)) throw std::domain_error("hat_eval: x outside [0, A]");

    const std::size_t c = j - 1;  // centre node
    if (x == p.nodes[c]) return 1.0;
    if (c > 0 && x > p.nodes[c - 1] && x < p.nodes[c])
        return (x - p.nodes[c - 1]) / p.widths[c - 1];
    if (c + 1 < n && x > p.nodes[c] && x < p.nodes[c + 1])
        return (p.nodes[c + 1] - x) / p.widths[c];
    return 0.0;
}

/// sum_j coeffs[j] phi_j(x): linear interpolation of nodal values.
inline double interpolate(const Partition& p, std::span<const double> coeffs, double x) {
    if (coeffs.size() != p.size()) throw std::invalid_argument("interpolate: coefficient count mismatch");
    if (!(x >= 0.0 && x <= p.threshold)) throw std::domain_error("interpolate: x outside [0, A]");
    const std::size_t k = p.locate(x);
    const double w = (x - p.nodes[k]) / p.widths[k];
    return (1.0 - w) * coeffs[k] + w * coeffs[k + 1];
}

}  // namespace gsr
