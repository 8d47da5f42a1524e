#pragma once

// Residuals shared by unit and acceptance tests.

#include <finslab/connection.hpp>
#include <finslab/tensors.hpp>

#include <random>

namespace checks {

using finslab::Matrix;
using finslab::MetricDefinition;
using finslab::TangentSample;
using finslab::Vector;

/// X(g_V(Y,Z)) - g_V(D_X Y, Z) - g_V(Y, D_X Z) - 2 C_V(D_X V, Y, Z) at x, with
/// V(p) = v0 + B (p - x) and constant X, Y, Z. The outer derivative is a
/// central difference of step h.
inline double compatibility_residual(const MetricDefinition& m, const Vector& x, const Vector& v0, const Matrix& B,
                                     const Vector& X, const Vector& Y, const Vector& Z, double h = 1e-5) {
    auto gVYZ = [&](double s) {
        const Vector p = x + s * X;
        const TangentSample at{p, v0 + B * (p - x)};
        return finslab::fundamental_tensor(m, at)(Y, Z);
    };
    const double outer = (gVYZ(h) - gVYZ(-h)) / (2.0 * h);
    const TangentSample v{x, v0};
    const auto gam = finslab::christoffel(m, v);
    const auto g = finslab::fundamental_tensor(m, v);
    const auto C = finslab::cartan_tensor(m, v);
    const Vector DY = gam.contract(X, Y);
    const Vector DZ = gam.contract(X, Z);
    const Vector DV = B * X + gam.contract(X, v0);
    return outer - g(DY, Z) - g(Y, DZ) - 2.0 * C(DV, Y, Z);
}

struct Configuration {
    Vector x, v0, X, Y, Z;
    Matrix B;
};

/// A random admissible linear field around an admissible sample whose domain
/// predicates all exceed margin * |y|, so the fixed difference step resolves
/// the third fiber derivatives.
inline Configuration random_configuration(const MetricDefinition& m, std::mt19937_64& rng, double margin = 0.05) {
    const int n = m.dimension();
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto vec = [&] {
        Vector v(n);
        for (int i = 0; i < n; ++i) v[i] = gauss(rng);
        return v;
    };
    for (;;) {
        const TangentSample s = finslab::sample_admissible(m, rng);
        std::vector<double> z(s.x.data(), s.x.data() + s.x.size());
        z.insert(z.end(), s.y.data(), s.y.data() + s.y.size());
        bool clear = true;
        for (const auto& p : m.domain()) clear = clear && p.evaluate<double>(z) > margin * s.y.norm();
        if (!clear) continue;
        Configuration c;
        c.x = s.x;
        c.v0 = s.y;
        c.B = Matrix(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) c.B(i, j) = 0.2 * gauss(rng);
        c.X = vec();
        c.Y = vec();
        c.Z = vec();
        bool ok = true;
        for (double s : {-2e-5, -1e-5, 1e-5, 2e-5}) {
            const Vector p = c.x + s * c.X;
            ok = ok && m.admissible({p, c.v0 + c.B * (p - c.x)});
        }
        if (ok) return c;
    }
}

} // namespace checks
