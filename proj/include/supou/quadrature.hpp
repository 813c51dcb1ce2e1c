#ifndef SUPOU_QUADRATURE_HPP
#define SUPOU_QUADRATURE_HPP

#include <cmath>
#include <cstdint>
#include <mutex>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace supou {

struct QuadratureRule {
    std::vector<double> nodes;    // on (0, 1)
    std::vector<double> weights;  // sum to 1
};

namespace detail {

// Gauss-Legendre nodes/weights on (-1,1) by Newton iteration on P_n,
// then mapped to (0,1).
inline QuadratureRule build_gauss_legendre(int n) {
    QuadratureRule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    constexpr double pi = 3.141592653589793238462643383279502884;
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (x * p0 - p1) / (x * x - 1.0);
            const double dx = p0 / pp;
            x -= dx;
            if (std::fabs(dx) < 1e-15) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * pp * pp);
        rule.nodes[static_cast<std::size_t>(i)] = 0.5 * (1.0 - x);
        rule.nodes[static_cast<std::size_t>(n - 1 - i)] = 0.5 * (1.0 + x);
        rule.weights[static_cast<std::size_t>(i)] = 0.5 * w;
        rule.weights[static_cast<std::size_t>(n - 1 - i)] = 0.5 * w;
    }
    return rule;
}

} // namespace detail

inline const QuadratureRule& gauss_legendre(int n) {
    static std::mutex mu;
    static std::unordered_map<int, QuadratureRule> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, detail::build_gauss_legendre(n)).first;
    return it->second;
}

// Halton low-discrepancy point in [0,1)^dim, index >= 1.
inline void halton_point(std::uint64_t index, int dim, double* out) {
    static constexpr int primes[8] = {2, 3, 5, 7, 11, 13, 17, 19};
    if (dim > 8) throw std::invalid_argument("halton_point: at most 8 dimensions");
    for (int d = 0; d < dim; ++d) {
        const std::uint64_t base = static_cast<std::uint64_t>(primes[d]);
        double f = 1.0, r = 0.0;
        std::uint64_t i = index;
        while (i > 0) {
            f /= static_cast<double>(base);
            r += f * static_cast<double>(i % base);
            i /= base;
        }
        out[d] = r;
    }
}

} // namespace supou

#endif // SUPOU_QUADRATURE_HPP
