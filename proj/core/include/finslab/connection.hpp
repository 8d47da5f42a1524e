#pragma once

// Chern connection of a pseudo-Finsler metric in a chart: spray, nonlinear
// connection, Christoffel symbols, curvature, and derivatives of anisotropic
// scalars. Everything is read off a single Taylor jet of L in (x, y).

#include "finslab/metric.hpp"
#include "finslab/sample.hpp"

#include <vector>

namespace finslab {

struct SprayValue {
    Vector G;
    /// N(i, j) = dG^i / dy^j.
    Matrix N;
};

struct ChristoffelField {
    /// gamma[k](i, j) = Gamma^k_ij.
    std::vector<Matrix> gamma;
    TangentSample basepoint;
    /// Largest |Gamma^k_ij - Gamma^k_ji| before symmetrization.
    double symmetry_drift = 0.0;

    /// Gamma^k_ij X^i Y^j.
    Vector contract(const Vector& X, const Vector& Y) const;
    /// Matrix A with (A X)^k = Gamma^k_ij X^i u^j.
    Matrix along(const Vector& u) const;
};

/// All pointwise quantities available from one jet of L.
struct LocalGeometry {
    enum class Level {
        /// g, g^-1, G (jet order 2).
        spray = 2,
        /// adds N and Christoffel symbols (jet order 3).
        connection = 3,
        /// adds the Jacobi matrix and the full curvature (jet order 4).
        curvature = 4,
    };

    TangentSample basepoint;
    Level level;
    Matrix g;
    Matrix g_inv;
    Vector G;
    Matrix N;
    ChristoffelField christoffel;
    /// jacobi(i, k): R_v(v, w)v = jacobi * w.
    Matrix jacobi;
    /// curvature[l](k, i*n + j) = R^l_kij with R(X, Y)Z = R^l_kij X^i Y^j Z^k.
    std::vector<Matrix> curvature;

    double metric(const Vector& u, const Vector& w) const { return u.dot(g * w); }
};

LocalGeometry local_geometry(const MetricDefinition& m, const TangentSample& v,
                             LocalGeometry::Level level = LocalGeometry::Level::connection);

/// G^i = 1/4 g^il (d^2L/dy^l dx^k y^k - dL/dx^l) and N^i_j = dG^i/dy^j.
SprayValue spray(const MetricDefinition& m, const TangentSample& v);

/// Spray coefficients only, from an order-2 jet.
Vector spray_coefficients(const MetricDefinition& m, const TangentSample& v);

ChristoffelField christoffel(const MetricDefinition& m, const TangentSample& v);

/// R_v(v, w)v computed from the spray curvature.
Vector jacobi_operator(const MetricDefinition& m, const TangentSample& v, const Vector& w);

/// R_v(X, Y)Z from Christoffel symbols and their horizontal derivatives.
Vector chern_curvature(const MetricDefinition& m, const TangentSample& v, const Vector& X, const Vector& Y,
                       const Vector& Z);

/// Partial derivatives of an anisotropic scalar f at v.
struct ScalarDerivatives {
    double value;
    Vector dx;
    Vector dy;
};
ScalarDerivatives scalar_derivatives(const MetricDefinition& f, const TangentSample& v);

/// Covector delta f / delta x^i = df/dx^i - N^m_i df/dy^m, with N from m.
Vector horizontal_covector(const MetricDefinition& f, const TangentSample& v, const MetricDefinition& m);

/// Chern horizontal derivative of f along X at v.
double horizontal_derivative(const MetricDefinition& f, const Vector& X, const TangentSample& v,
                             const MetricDefinition& m);

/// Solves g_v(grad, .) = d^v f_v.
Vector vertical_gradient(const MetricDefinition& f, const TangentSample& v, const MetricDefinition& m);

/// Solves g_v(grad, .) = horizontal derivative of f.
Vector horizontal_gradient(const MetricDefinition& f, const TangentSample& v, const MetricDefinition& m);

} // namespace finslab
