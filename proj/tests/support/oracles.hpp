#pragma once

// Test-side reference computations. Nothing here touches jet arithmetic.

#include <finslab/expr.hpp>
#include <finslab/metric.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

using Fn = std::function<double(const std::vector<double>&)>;

struct Estimate {
    double value;
    double error;
};

inline const std::vector<double>& stencil(int k) {
    static const std::array<std::vector<double>, 5> table = {
        std::vector<double>{1.0},
        std::vector<double>{-0.5, 0.0, 0.5},
        std::vector<double>{1.0, -2.0, 1.0},
        std::vector<double>{-0.5, 1.0, 0.0, -1.0, 0.5},
        std::vector<double>{1.0, -4.0, 6.0, -4.0, 1.0},
    };
    return table.at(static_cast<std::size_t>(k));
}

/// Tensor-product central difference for the mixed partial with exponents `alpha`.
template <class T>
T central_mixed_in(const std::function<T(const std::vector<T>&)>& f, const std::vector<T>& z,
                   const std::vector<int>& alpha, T h) {
    std::vector<int> vars;
    for (std::size_t i = 0; i < alpha.size(); ++i)
        if (alpha[i] > 0) vars.push_back(static_cast<int>(i));
    int total = 0;
    for (int a : alpha) total += a;
    T sum = 0;
    std::vector<T> p = z;
    std::function<void(std::size_t, T)> walk = [&](std::size_t level, T weight) {
        if (level == vars.size()) {
            sum += weight * f(p);
            return;
        }
        const int var = vars[level];
        const auto& w = stencil(alpha[static_cast<std::size_t>(var)]);
        const int half = static_cast<int>(w.size() / 2);
        for (int j = 0; j < static_cast<int>(w.size()); ++j) {
            if (w[static_cast<std::size_t>(j)] == 0.0) continue;
            p[static_cast<std::size_t>(var)] = z[static_cast<std::size_t>(var)] + (j - half) * h;
            walk(level + 1, weight * static_cast<T>(w[static_cast<std::size_t>(j)]));
        }
        p[static_cast<std::size_t>(var)] = z[static_cast<std::size_t>(var)];
    };
    walk(0, T(1));
    return sum / std::pow(h, total);
}

/// Ridders-Richardson extrapolation of central_mixed over h, h/1.6, ...
template <class T>
Estimate mixed_partial_in(const std::function<T(const std::vector<T>&)>& f, const std::vector<T>& z,
                          const std::vector<int>& alpha, T h0, int levels = 7) {
    const T con = 1.6L, con2 = con * con;
    std::vector<std::vector<T>> a(static_cast<std::size_t>(levels), std::vector<T>(static_cast<std::size_t>(levels)));
    T h = h0;
    a[0][0] = central_mixed_in(f, z, alpha, h);
    T best = a[0][0], best_err = 1e300;
    for (int i = 1; i < levels; ++i) {
        h /= con;
        a[0][i] = central_mixed_in(f, z, alpha, h);
        T fac = con2;
        for (int j = 1; j <= i; ++j) {
            a[j][i] = (a[j - 1][i] * fac - a[j - 1][i - 1]) / (fac - 1);
            fac *= con2;
            const T err = std::max(std::abs(a[j][i] - a[j - 1][i]), std::abs(a[j][i] - a[j - 1][i - 1]));
            if (err <= best_err) {
                best = a[j][i];
                best_err = err;
            }
        }
        if (std::abs(a[i][i] - a[i - 1][i - 1]) >= 2 * best_err) break;
    }
    return {static_cast<double>(best), static_cast<double>(best_err)};
}

inline double central_mixed(const Fn& f, const std::vector<double>& z, const std::vector<int>& alpha, double h) {
    return central_mixed_in<double>(f, z, alpha, h);
}

inline Estimate mixed_partial(const Fn& f, const std::vector<double>& z, const std::vector<int>& alpha, double h0,
                              int levels = 7) {
    return mixed_partial_in<double>(f, z, alpha, h0, levels);
}

using ExtendedFn = std::function<long double(const std::vector<long double>&)>;

/// Plain tree walk in long double, independent of the library evaluator.
inline long double evaluate_extended(const finslab::Expr::Node& n, const std::vector<long double>& z) {
    using K = finslab::Expr::Kind;
    switch (n.kind) {
    case K::constant: return n.value;
    case K::variable: return z[static_cast<std::size_t>(n.var)];
    case K::negate: return -evaluate_extended(*n.lhs, z);
    case K::add: return evaluate_extended(*n.lhs, z) + evaluate_extended(*n.rhs, z);
    case K::sub: return evaluate_extended(*n.lhs, z) - evaluate_extended(*n.rhs, z);
    case K::mul: return evaluate_extended(*n.lhs, z) * evaluate_extended(*n.rhs, z);
    case K::div: return evaluate_extended(*n.lhs, z) / evaluate_extended(*n.rhs, z);
    case K::pow: return std::pow(evaluate_extended(*n.lhs, z), evaluate_extended(*n.rhs, z));
    case K::exp: return std::exp(evaluate_extended(*n.lhs, z));
    case K::log: return std::log(evaluate_extended(*n.lhs, z));
    case K::sqrt: return std::sqrt(evaluate_extended(*n.lhs, z));
    case K::sin: return std::sin(evaluate_extended(*n.lhs, z));
    case K::cos: return std::cos(evaluate_extended(*n.lhs, z));
    }
    return 0;
}

/// The metric as a plain function of (x, y) concatenated.
inline Fn as_function(const finslab::MetricDefinition& m) {
    const int n = m.dimension();
    return [m, n](const std::vector<double>& z) {
        finslab::Vector x(n), y(n);
        for (int i = 0; i < n; ++i) {
            x[i] = z[static_cast<std::size_t>(i)];
            y[i] = z[static_cast<std::size_t>(n + i)];
        }
        return m.evaluate(x, y);
    };
}

/// The metric body in long double, for high-order differences near the domain boundary.
inline ExtendedFn as_extended_function(const finslab::MetricDefinition& m) {
    const finslab::Expr body = m.body();
    return [body](const std::vector<long double>& z) { return evaluate_extended(body.node(), z); };
}

inline std::vector<double> concat(const finslab::TangentSample& v) {
    std::vector<double> z(v.x.data(), v.x.data() + v.x.size());
    z.insert(z.end(), v.y.data(), v.y.data() + v.y.size());
    return z;
}

/// Smallest domain-predicate value, used to keep difference stencils inside A.
inline double clearance(const finslab::MetricDefinition& m, const finslab::TangentSample& v) {
    double c = 1.0;
    const auto z = concat(v);
    for (const auto& p : m.domain()) c = std::min(c, p.evaluate<double>(z));
    return c;
}

/// Hessian of L in y by Ridders extrapolation, halved.
inline Eigen::MatrixXd fundamental_tensor(const finslab::MetricDefinition& m, const finslab::TangentSample& v) {
    const int n = m.dimension();
    const auto f = as_function(m);
    const auto z = concat(v);
    const double h0 = std::min(0.1, 0.2 * clearance(m, v));
    Eigen::MatrixXd g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            std::vector<int> alpha(static_cast<std::size_t>(2 * n), 0);
            alpha[static_cast<std::size_t>(n + i)] += 1;
            alpha[static_cast<std::size_t>(n + j)] += 1;
            g(i, j) = 0.5 * mixed_partial(f, z, alpha, h0).value;
        }
    return g;
}

/// Levi-Civita symbols Gamma[k](i, j) of a pointwise quadratic form A(x).
inline std::vector<Eigen::MatrixXd> levi_civita(const std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>& A,
                                                const Eigen::VectorXd& x) {
    const int n = static_cast<int>(x.size());
    std::vector<Eigen::MatrixXd> dA(static_cast<std::size_t>(n), Eigen::MatrixXd::Zero(n, n));
    for (int c = 0; c < n; ++c)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                Fn f = [&](const std::vector<double>& z) {
                    Eigen::VectorXd p = x;
                    p[c] = z[0];
                    return A(p)(i, j);
                };
                dA[static_cast<std::size_t>(c)](i, j) = mixed_partial(f, {x[c]}, {1}, 0.1).value;
            }
    const Eigen::MatrixXd inv = A(x).inverse();
    std::vector<Eigen::MatrixXd> gamma(static_cast<std::size_t>(n), Eigen::MatrixXd::Zero(n, n));
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double s = 0.0;
                for (int l = 0; l < n; ++l)
                    s += inv(k, l)
                         * (dA[static_cast<std::size_t>(i)](l, j) + dA[static_cast<std::size_t>(j)](i, l)
                            - dA[static_cast<std::size_t>(l)](i, j));
                gamma[static_cast<std::size_t>(k)](i, j) = 0.5 * s;
            }
    return gamma;
}

/// Composite Simpson rule on a uniform grid with an even number of intervals.
inline double simpson(const std::vector<double>& f, double h) {
    const std::size_t n = f.size() - 1;
    double s = f.front() + f.back();
    for (std::size_t i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f[i];
    return s * h / 3.0;
}

} // namespace oracle
