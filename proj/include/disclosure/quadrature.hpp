// ---------------------------------------------------------------------------
// quadrature.hpp -- Gauss-Legendre rules and piecewise integration helpers
// ---------------------------------------------------------------------------
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace disclosure::quad {

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;

    explicit GaussLegendre(int n) {
        if (n < 1) throw std::invalid_argument("GaussLegendre: n must be >= 1");
        nodes.resize(n);
        weights.resize(n);
        // Newton iteration on P_n, seeded with the Chebyshev-like estimate.
        const int m = (n + 1) / 2;
        for (int i = 0; i < m; ++i) {
            double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
            double pp = 0.0;  // P_n'(x)
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
                if (std::abs(dx) < 1e-15) break;
            }
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
            weights[n - 1 - i] = weights[i];
        }
    }
};

/// Shared, thread-safe cache of rules keyed by node count.
inline const GaussLegendre& rule(int n) {
    static std::map<int, GaussLegendre> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, GaussLegendre(n)).first;
    return it->second;
}

/// n-point Gauss-Legendre approximation of the integral of g over [a, b].
template <typename F>
double integrate(F&& g, double a, double b, int n) {
    if (a == b) return 0.0;
    const GaussLegendre& r = rule(n);
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double acc = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i)
        acc += r.weights[i] * g(mid + half * r.nodes[i]);
    return acc * half;
}

/// Integrates g over [a, b], splitting at any of the given breakpoints that
/// fall strictly inside the interval.  Keeps each panel smooth so the rule
/// retains its full order across density kinks and clamping transitions.
template <typename F>
double integrate_piecewise(F&& g, double a, double b,
                           const std::vector<double>& breakpoints, int n) {
    if (a == b) return 0.0;
    const double sign = (a < b) ? 1.0 : -1.0;
    const double lo = std::min(a, b), hi = std::max(a, b);
    std::vector<double> cuts;
    cuts.push_back(lo);
    for (double c : breakpoints)
        if (c > lo + 1e-15 && c < hi - 1e-15) cuts.push_back(c);
    cuts.push_back(hi);
    std::sort(cuts.begin(), cuts.end());
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        acc += integrate(g, cuts[i], cuts[i + 1], n);
    return sign * acc;
}

}  // namespace disclosure::quad
