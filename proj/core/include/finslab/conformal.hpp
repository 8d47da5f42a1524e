#pragma once

// Anisotropic conformal changes: shared lightcones, the anisotropy factor and
// the scaled metric lambda L.

#include "finslab/metric.hpp"
#include "finslab/sample.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace finslab {

/// Two metrics on the same conic domain, with the sampling budget used to
/// compare them.
struct ConformalPair {
    MetricDefinition L1;
    MetricDefinition L2;
    int samples = 200;
    std::uint64_t seed = 1;
};

/// Throws DimensionMismatch or PreconditionFailure unless L1 and L2 share the
/// dimension and the domain predicates.
ConformalPair make_conformal_pair(MetricDefinition L1, MetricDefinition L2, int samples = 200,
                                  std::uint64_t seed = 1);

struct ConeRecord {
    /// 1 when the point lies on the cone of L1, 2 for L2.
    int side = 1;
    TangentSample sample;
    double L1 = 0.0;
    double L2 = 0.0;
    double violation = 0.0;
};

struct CoincidenceReport {
    bool verdict = false;
    double max_violation = 0.0;
    int attempts = 0;
    int cone_points_1 = 0;
    int cone_points_2 = 0;
    /// No sample could be projected onto the cone of that metric inside A.
    bool empty_1 = false;
    bool empty_2 = false;
    std::vector<ConeRecord> records;
};

inline constexpr double kCoincidenceTolerance = 1e-8;

/// Violation at a cone point p: |L2/|d_y L2| - L1/|d_y L1|| / |p|, the gap
/// between the first-order distances of p to both cones.
double cone_violation(const MetricDefinition& L1, const MetricDefinition& L2, const TangentSample& p);

/// Projects admissible samples onto each lightcone and evaluates the other
/// metric there. Verdict: max violation <= 1e-8 and either both cones were
/// reached or both are empty on the sampled domain.
CoincidenceReport lightcones_coincide(const ConformalPair& pair);

enum class AnisotropyRoute {
    /// g2_v(v, w) / g1_v(v, w).
    cone_formula,
    /// L2(v) / L1(v).
    quotient,
};

struct AnisotropyFactor {
    double mu = 0.0;
    Vector w;
    AnisotropyRoute route = AnisotropyRoute::quotient;
    double L1 = 0.0;
    double L2 = 0.0;
};

/// g2_v(v, w) / g1_v(v, w) for the given w. Throws NoTransversalVector when
/// |g1_v(v, w)| is negligible.
double anisotropy_formula(const MetricDefinition& L1, const MetricDefinition& L2, const TangentSample& v,
                          const Vector& w);

/// mu(v). On the cone of L1 (|L1| <= 1e-8 |v|^2) the pairing formula is used,
/// with w the basis vector maximizing |g1_v(v, e_k)| when none is given; off
/// the cone the quotient L2/L1.
AnisotropyFactor anisotropy_factor(const ConformalPair& pair, const TangentSample& v,
                                   std::optional<Vector> w = std::nullopt);

const char* route_name(AnisotropyRoute r);

/// lambda L as a metric expression. The domain is the union of both predicate lists.
MetricDefinition conformal_product(const MetricDefinition& m, const MetricDefinition& lambda);

struct ScaledMetric {
    MetricDefinition metric;
    int samples = 0;
    double min_factor = 0.0;
    /// Smallest |det g| of lambda L over the samples.
    double min_abs_determinant = 0.0;
    /// min |det g| < 1e-10: lambda L fails to be nondegenerate somewhere on A.
    bool nondegeneracy_warning = false;
};

inline constexpr double kNondegeneracyWarning = 1e-10;

/// Validates homogeneity of m (degree 2) and lambda (degree 0), positivity of
/// lambda on `samples` draws, and reports the nondegeneracy of lambda L.
/// Throws PositivityFailure or PreconditionFailure.
ScaledMetric scale_metric(const MetricDefinition& m, const MetricDefinition& lambda, int samples = 200,
                          std::uint64_t seed = 1);

} // namespace finslab
