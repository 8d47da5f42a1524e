#include <finslab/conformal.hpp>
#include <finslab/geodesics.hpp>
#include <finslab/tensors.hpp>

#include <gtest/gtest.h>

#include "oracles.hpp"

#include <cmath>

using namespace finslab;

namespace {

Vector vec(std::initializer_list<double> a) {
    Vector v(static_cast<Eigen::Index>(a.size()));
    Eigen::Index i = 0;
    for (double c : a) v[i++] = c;
    return v;
}

TangentSample at(std::initializer_list<double> x, std::initializer_list<double> y) { return {vec(x), vec(y)}; }

MetricDefinition scaled(const MetricDefinition& m, double c) {
    return MetricDefinition(m.dimension(), c * m.body(), m.domain(), 2, "scaled");
}

const std::vector<std::string> kWedge = {"y0-y1", "y0+y1"};

MetricDefinition wedge_minkowski() { return parse_metric("-y0^2 + y1^2 + y2^2", 3, kWedge, 2, "wedge"); }

MetricDefinition wedge_factor() { return parse_metric("((y0-y1)/(y0+y1))^0.3", 3, kWedge, 0, "wedge-factor"); }

} // namespace

TEST(Lightcones, PositiveMultipleCoincides) {
    const auto m = builtin_metric("minkowski-3");
    const auto report = lightcones_coincide(make_conformal_pair(m, scaled(m, 2.0), 50, 3));
    EXPECT_TRUE(report.verdict);
    EXPECT_LE(report.max_violation, 1e-15);
    EXPECT_GT(report.cone_points_1, 0);
    EXPECT_GT(report.cone_points_2, 0);
}

TEST(Lightcones, DifferentSlopesDisagree) {
    const auto m = builtin_metric("minkowski-3");
    const auto steep = parse_metric("-4*y0^2 + y1^2 + y2^2", 3);
    const auto report = lightcones_coincide(make_conformal_pair(m, steep, 50, 3));
    EXPECT_FALSE(report.verdict);
    EXPECT_GT(report.max_violation, 1e-2);
}

TEST(Lightcones, BogoslovskyAgainstMinkowskiWedge) {
    const auto report =
        lightcones_coincide(make_conformal_pair(builtin_metric("minkowski-2-future"), builtin_metric("bogoslovsky")));
    EXPECT_TRUE(report.verdict);
    EXPECT_EQ(report.empty_1, report.empty_2);
}

TEST(Lightcones, LiftedFactorKeepsCone) {
    const auto m = wedge_minkowski();
    const auto report = lightcones_coincide(make_conformal_pair(m, scale_metric(m, wedge_factor()).metric));
    EXPECT_TRUE(report.verdict);
    EXPECT_FALSE(report.empty_1);
    EXPECT_LE(report.max_violation, 1e-10);
}

TEST(Lightcones, PairNeedsSharedDomain) {
    EXPECT_THROW(make_conformal_pair(builtin_metric("minkowski-2"), builtin_metric("bogoslovsky")), PreconditionFailure);
    EXPECT_THROW(make_conformal_pair(builtin_metric("minkowski-2"), builtin_metric("minkowski-3")), DimensionMismatch);
}

TEST(Anisotropy, ConstantMultiple) {
    const auto m = builtin_metric("minkowski-3");
    const auto pair = make_conformal_pair(m, scaled(m, 2.0));
    const auto on = anisotropy_factor(pair, at({0, 0, 0}, {1, 0.6, 0.8}));
    EXPECT_EQ(on.route, AnisotropyRoute::cone_formula);
    EXPECT_NEAR(on.mu, 2.0, 1e-15);
    const auto off = anisotropy_factor(pair, at({0, 0, 0}, {1, 0.3, 0.1}));
    EXPECT_EQ(off.route, AnisotropyRoute::quotient);
    EXPECT_NEAR(off.mu, 2.0, 1e-15);
}

TEST(Anisotropy, IndependentOfTransversalVector) {
    const auto m = wedge_minkowski();
    const auto pair = make_conformal_pair(m, scale_metric(m, wedge_factor()).metric);
    const TangentSample v = at({0, 0, 0}, {1, 0.6, 0.8});
    const double expected = std::pow(0.4 / 1.6, 0.3);
    for (const Vector& w : {vec({1, 0, 0}), vec({0, 1, 0}), vec({0, 0, 1}), vec({0.3, -0.7, 0.2})})
        EXPECT_NEAR(anisotropy_formula(pair.L1, pair.L2, v, w), expected, 1e-14);
    EXPECT_NEAR(anisotropy_factor(pair, v).mu, expected, 1e-14);
    EXPECT_THROW(anisotropy_formula(pair.L1, pair.L2, v, vec({0, 0.8, -0.6})), NoTransversalVector);
}

TEST(Anisotropy, QuotientRecoversFactor) {
    const auto pair = make_conformal_pair(builtin_metric("minkowski-2-future"), builtin_metric("bogoslovsky"));
    const auto a = anisotropy_factor(pair, at({0, 0}, {1, 0.5}));
    EXPECT_EQ(a.route, AnisotropyRoute::quotient);
    EXPECT_NEAR(a.mu, 0.7192230933248643, 1e-14);
    // Approaching the cone from inside the wedge the quotient stays (u/w)^0.3.
    for (double eps : {1e-2, 1e-4, 1e-6}) {
        const TangentSample v = at({0, 0}, {1, 1 - eps});
        EXPECT_NEAR(anisotropy_factor(pair, v).mu, std::pow(eps / (2 - eps), 0.3), 1e-12);
    }
}

TEST(ScaleMetric, HessianMatchesDifferences) {
    const auto m = builtin_metric("einstein-static");
    const auto lambda = builtin_metric("einstein-factor");
    const auto s = scale_metric(m, lambda, 50, 5);
    EXPECT_FALSE(s.nondegeneracy_warning);
    EXPECT_GE(s.min_factor, 1.0);
    for (const auto& v : sample_admissible(s.metric, 4, 9)) {
        const Matrix g = fundamental_tensor(s.metric, v).g;
        const Eigen::MatrixXd ref = oracle::fundamental_tensor(s.metric, v);
        EXPECT_LE((g - ref).cwiseAbs().maxCoeff(), 1e-7 * std::max(1.0, ref.cwiseAbs().maxCoeff()));
        EXPECT_NEAR(s.metric.value(v), lambda.value(v) * m.value(v), 1e-14 * std::max(1.0, std::abs(m.value(v))));
    }
}

TEST(ScaleMetric, Preconditions) {
    const auto m = builtin_metric("minkowski-3");
    EXPECT_THROW(scale_metric(m, constant_factor(3, -1.0)), PositivityFailure);
    EXPECT_THROW(scale_metric(m, parse_metric("1 + y0^2", 3, {}, 0)), PreconditionFailure);
    EXPECT_THROW(scale_metric(builtin_metric("einstein-factor"), builtin_metric("einstein-factor")),
                 PreconditionFailure);
}
