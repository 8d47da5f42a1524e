#pragma once

#include "finslab/curve.hpp"
#include "finslab/metric.hpp"

#include <optional>

namespace finslab {

/// Fixed-step classical RK4 for x' = y, y' = -2G(x, y) on [t0, t1]. The step
/// is adjusted to divide the span evenly. Every stage is checked against the
/// domain of m (DomainExit).
DiscreteCurve integrate_geodesic(const MetricDefinition& m, const Vector& x0, const Vector& v0, double t0, double t1,
                                 double h);

struct LightconeProjection {
    TangentSample sample;
    double delta = 0.0;
    int iterations = 0;
};

inline constexpr double kLightlikeTolerance = 1e-8;

/// Newton on delta -> L(v + delta w) until |L| <= 1e-12 min(1, |v|^2).
LightconeProjection project_to_lightcone_detailed(const MetricDefinition& m, const TangentSample& v, const Vector& w);
inline TangentSample project_to_lightcone(const MetricDefinition& m, const TangentSample& v, const Vector& w) {
    return project_to_lightcone_detailed(m, v, w).sample;
}

/// |L(v)| <= 1e-8 |v|^2.
bool is_lightlike(const MetricDefinition& m, const TangentSample& v, double tol = kLightlikeTolerance);

/// 1/2 int lambda(gamma') L(gamma') dt by composite Simpson; lambda absent means 1.
double energy(const DiscreteCurve& c, const MetricDefinition& m, const MetricDefinition* lambda = nullptr);

/// phi on a uniform mu grid, with phi' = lambda(gamma'(phi)).
struct Reparametrization {
    std::vector<double> mu;
    std::vector<double> phi;
    std::vector<double> phi_dot;

    /// Hermite interpolation of phi.
    double at(double m) const;
    double derivative_at(double m) const;
    /// phi^{-1}(t) by bisection plus Newton.
    double inverse(double t) const;
};

struct ConformalReparametrization {
    Reparametrization phi;
    /// gamma o phi with velocity phi' gamma'(phi).
    DiscreteCurve curve;
};

/// Integrates phi' = lambda(gamma'(phi)) with phi(mu_begin) = gamma.t_begin().
/// Throws ReparametrizationRange when phi leaves gamma's parameter range.
ConformalReparametrization reparametrize_conformal(const DiscreteCurve& gamma, const MetricDefinition& m,
                                                   const MetricDefinition& lambda, double mu_begin, double mu_end,
                                                   double h);

/// Length of the mu interval that maps onto all of gamma: int dt / lambda.
double conformal_parameter_length(const DiscreteCurve& gamma, const MetricDefinition& lambda);

/// max over interior nodes of |D(lambda(gamma') gamma')| (Euclidean chart norm),
/// with Gamma from m. lambda absent means 1.
double pregeodesic_residual(const DiscreteCurve& c, const MetricDefinition& m, const MetricDefinition* lambda = nullptr);

} // namespace finslab
