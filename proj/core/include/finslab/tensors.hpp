#pragma once

#include "finslab/metric.hpp"
#include "finslab/sample.hpp"

#include <vector>

namespace finslab {

struct FundamentalTensor {
    Matrix g;
    TangentSample basepoint;

    double operator()(const Vector& u, const Vector& w) const { return u.dot(g * w); }
};

struct CartanTensor {
    /// components[i](j, k) = C_ijk.
    std::vector<Matrix> components;
    TangentSample basepoint;
    /// Largest deviation from total symmetry before symmetrization.
    double symmetry_drift = 0.0;

    double operator()(const Vector& u, const Vector& v, const Vector& w) const;
    /// Matrix of C(u, ., .).
    Matrix contract(const Vector& u) const;
};

/// g_ij = 1/2 d^2 L / dy^i dy^j at v.
FundamentalTensor fundamental_tensor(const MetricDefinition& m, const TangentSample& v);

/// C_ijk = 1/4 d^3 L / dy^i dy^j dy^k at v.
CartanTensor cartan_tensor(const MetricDefinition& m, const TangentSample& v);

/// Covector g_v(v, e_i) = 1/2 dL/dy^i.
Vector legendre(const MetricDefinition& m, const TangentSample& v);

inline constexpr double kNondegeneracyTolerance = 1e-12;

/// |det g| / scale^n with scale = max |g_ij|.
double nondegeneracy(const Matrix& g);

/// LU inverse; throws SingularMetric when nondegeneracy(g) <= 1e-12.
Matrix inverse_metric(const Matrix& g);
inline Matrix inverse_metric(const FundamentalTensor& g) { return inverse_metric(g.g); }

/// Throws InadmissibleSample unless m.admissible(v).
void require_admissible(const MetricDefinition& m, const TangentSample& v);

} // namespace finslab
