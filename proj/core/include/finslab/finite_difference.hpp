#pragma once

// Finite-difference helpers. The Richardson differentiator is a cross-check
// for jet arithmetic; Fornberg weights differentiate data on nonuniform grids.

#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace finslab {

/// First derivative of f at x by central differences at steps h and h/2,
/// combined by one Richardson step (error O(h^4)).
inline double richardson_derivative(const std::function<double(double)>& f, double x, double h) {
    auto central = [&](double s) { return (f(x + s) - f(x - s)) / (2.0 * s); };
    return (4.0 * central(0.5 * h) - central(h)) / 3.0;
}

/// Second derivative with the same scheme.
inline double richardson_second_derivative(const std::function<double(double)>& f, double x, double h) {
    const double f0 = f(x);
    auto central = [&](double s) { return (f(x + s) - 2.0 * f0 + f(x - s)) / (s * s); };
    return (4.0 * central(0.5 * h) - central(h)) / 3.0;
}

/// Weights w_j such that sum_j w_j f(grid[j]) approximates the m-th derivative at x0.
inline std::vector<double> fornberg_weights(double x0, std::span<const double> grid, int m) {
    const int n = static_cast<int>(grid.size());
    if (n <= m) throw std::invalid_argument("fornberg_weights needs more nodes than the derivative order");
    std::vector<std::vector<double>> c(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(m + 1), 0.0));
    double c1 = 1.0;
    double c4 = grid[0] - x0;
    c[0][0] = 1.0;
    for (int i = 1; i < n; ++i) {
        const int mn = std::min(i, m);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = grid[static_cast<std::size_t>(i)] - x0;
        for (int j = 0; j < i; ++j) {
            const double c3 = grid[static_cast<std::size_t>(i)] - grid[static_cast<std::size_t>(j)];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k)
                    c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) w[static_cast<std::size_t>(j)] = c[j][m];
    return w;
}

/// m-th derivative of samples (t_j, f_j) at node i using a stencil of `width`
/// nodes centered where possible.
inline double grid_derivative(std::span<const double> t, std::span<const double> f, std::size_t i, int m = 1,
                              int width = 5) {
    const std::size_t n = t.size();
    if (f.size() != n || n < static_cast<std::size_t>(width)) throw std::invalid_argument("grid_derivative: bad grid");
    const std::size_t half = static_cast<std::size_t>(width / 2);
    std::size_t lo = i >= half ? i - half : 0;
    if (lo + static_cast<std::size_t>(width) > n) lo = n - static_cast<std::size_t>(width);
    const auto w = fornberg_weights(t[i], t.subspan(lo, static_cast<std::size_t>(width)), m);
    double d = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) d += w[j] * f[lo + j];
    return d;
}

} // namespace finslab
