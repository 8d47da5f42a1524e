#include "finslab/conformal.hpp"

#include "finslab/geodesics.hpp"
#include "finslab/tensors.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace finslab {

namespace {

std::vector<std::string> sorted_sources(const MetricDefinition& m) {
    auto s = m.domain_source();
    std::sort(s.begin(), s.end());
    return s;
}

/// Basis indices ordered by decreasing |covector_k|.
std::vector<int> ranked_basis(const Vector& covector) {
    std::vector<int> idx(static_cast<std::size_t>(covector.size()));
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int a, int b) { return std::abs(covector[a]) > std::abs(covector[b]); });
    return idx;
}

std::optional<TangentSample> reach_cone(const MetricDefinition& m, const TangentSample& v) {
    const Vector ell = legendre(m, v);
    for (int k : ranked_basis(ell)) {
        Vector w = Vector::Zero(m.dimension());
        w[k] = 1.0;
        try {
            TangentSample p = project_to_lightcone(m, v, w);
            if (!m.admissible(p)) continue;
            // The tolerance scales with |v|^2; repeat at unit length.
            p.y /= p.y.norm();
            p = project_to_lightcone(m, p, w);
            if (m.admissible(p)) return p;
        } catch (const Error&) {
        }
    }
    return std::nullopt;
}

} // namespace

ConformalPair make_conformal_pair(MetricDefinition L1, MetricDefinition L2, int samples, std::uint64_t seed) {
    if (L1.dimension() != L2.dimension()) throw DimensionMismatch("conformal pair metrics differ in dimension");
    if (sorted_sources(L1) != sorted_sources(L2))
        throw PreconditionFailure("conformal pair metrics must share their domain predicates");
    if (samples < 1) throw std::invalid_argument("conformal pair needs a positive sample budget");
    return {std::move(L1), std::move(L2), samples, seed};
}

double cone_violation(const MetricDefinition& L1, const MetricDefinition& L2, const TangentSample& p) {
    const double d1 = 2.0 * legendre(L1, p).norm();
    const double d2 = 2.0 * legendre(L2, p).norm();
    if (d1 == 0.0 || d2 == 0.0) throw TransversalityFailure("vanishing fiber differential on the lightcone");
    return std::abs(L2.value(p) / d2 - L1.value(p) / d1) / p.y.norm();
}

CoincidenceReport lightcones_coincide(const ConformalPair& pair) {
    CoincidenceReport report;
    std::mt19937_64 rng(pair.seed);
    for (int k = 0; k < pair.samples; ++k) {
        const TangentSample v = sample_admissible(pair.L1, rng);
        if (!pair.L2.admissible(v)) continue;
        ++report.attempts;
        for (int side : {1, 2}) {
            const MetricDefinition& own = side == 1 ? pair.L1 : pair.L2;
            const auto p = reach_cone(own, v);
            if (!p || !pair.L1.admissible(*p) || !pair.L2.admissible(*p)) continue;
            ConeRecord r{side, *p, pair.L1.value(*p), pair.L2.value(*p), cone_violation(pair.L1, pair.L2, *p)};
            report.max_violation = std::max(report.max_violation, r.violation);
            (side == 1 ? report.cone_points_1 : report.cone_points_2)++;
            report.records.push_back(std::move(r));
        }
    }
    report.empty_1 = report.cone_points_1 == 0;
    report.empty_2 = report.cone_points_2 == 0;
    report.verdict = report.empty_1 == report.empty_2 && report.max_violation <= kCoincidenceTolerance;
    return report;
}

double anisotropy_formula(const MetricDefinition& L1, const MetricDefinition& L2, const TangentSample& v,
                          const Vector& w) {
    const double g1 = legendre(L1, v).dot(w);
    const double g2 = legendre(L2, v).dot(w);
    const double scale = std::max(1.0, fundamental_tensor(L1, v).g.cwiseAbs().maxCoeff()) * v.y.norm() * w.norm();
    if (!(std::abs(g1) > 1e-10 * scale)) throw NoTransversalVector("g1_v(v, w) vanishes for the chosen w");
    return g2 / g1;
}

AnisotropyFactor anisotropy_factor(const ConformalPair& pair, const TangentSample& v, std::optional<Vector> w) {
    require_admissible(pair.L1, v);
    require_admissible(pair.L2, v);
    AnisotropyFactor out;
    out.L1 = pair.L1.value(v);
    out.L2 = pair.L2.value(v);
    const int n = pair.L1.dimension();
    if (!w) {
        const Vector ell = legendre(pair.L1, v);
        const int k = ranked_basis(ell).front();
        w = Vector::Zero(n);
        (*w)[k] = 1.0;
    }
    out.w = *w;
    if (std::abs(out.L1) <= kLightlikeTolerance * v.y.squaredNorm()) {
        out.route = AnisotropyRoute::cone_formula;
        out.mu = anisotropy_formula(pair.L1, pair.L2, v, *w);
    } else {
        out.route = AnisotropyRoute::quotient;
        out.mu = out.L2 / out.L1;
    }
    return out;
}

const char* route_name(AnisotropyRoute r) {
    return r == AnisotropyRoute::cone_formula ? "cone_formula" : "quotient";
}

MetricDefinition conformal_product(const MetricDefinition& m, const MetricDefinition& lambda) {
    if (m.dimension() != lambda.dimension()) throw DimensionMismatch("conformal factor and metric differ in dimension");
    std::vector<Expr> domain = m.domain();
    auto known = m.domain_source();
    const auto extra = lambda.domain_source();
    for (std::size_t i = 0; i < extra.size(); ++i) {
        if (std::find(known.begin(), known.end(), extra[i]) != known.end()) continue;
        known.push_back(extra[i]);
        domain.push_back(lambda.domain()[i]);
    }
    const std::string name = (lambda.name().empty() ? std::string("lambda") : lambda.name()) + "*"
                             + (m.name().empty() ? std::string("L") : m.name());
    return MetricDefinition(m.dimension(), lambda.body() * m.body(), std::move(domain), 2, name).with_box(m.box());
}

ScaledMetric scale_metric(const MetricDefinition& m, const MetricDefinition& lambda, int samples,
                          std::uint64_t seed) {
    if (m.degree() != 2) throw PreconditionFailure("the base metric must be declared with degree 2");
    if (lambda.degree() != 0) throw PreconditionFailure("the conformal factor must be declared with degree 0");
    if (!validate_homogeneity(m, 20, seed).pass) throw PreconditionFailure("base metric is not 2-homogeneous");
    const MetricDefinition product = conformal_product(m, lambda);
    if (!validate_homogeneity(lambda.with_domain(product.domain()).with_box(m.box()), 20, seed).pass)
        throw PreconditionFailure("conformal factor is not 0-homogeneous");

    ScaledMetric out{product, samples, std::numeric_limits<double>::infinity(),
                     std::numeric_limits<double>::infinity(), false};
    std::mt19937_64 rng(seed);
    for (int k = 0; k < samples; ++k) {
        const TangentSample v = sample_admissible(product, rng);
        const double f = lambda.value(v);
        if (!(f > 0.0)) throw PositivityFailure("conformal factor is not positive at a sampled vector");
        out.min_factor = std::min(out.min_factor, f);
        out.min_abs_determinant =
            std::min(out.min_abs_determinant, std::abs(fundamental_tensor(product, v).g.determinant()));
    }
    out.nondegeneracy_warning = out.min_abs_determinant < kNondegeneracyWarning;
    return out;
}

} // namespace finslab
