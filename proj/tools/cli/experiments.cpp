#include "experiments.hpp"

#include <finslab/conformal.hpp>
#include <finslab/connection.hpp>
#include <finslab/expr.hpp>
#include <finslab/finite_difference.hpp>
#include <finslab/geodesics.hpp>
#include <finslab/tensors.hpp>
#include <finslab/variational.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <random>

namespace finslab::cli {

namespace {

std::string num(double v) {
    if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

class Context {
public:
    Context(const std::string& experiment, const Config& c, const Overrides& o) : config(c), overrides(o) {
        report.experiment = experiment;
        report.config = c.path().string();
        const std::int64_t seed = c.integer("experiment.seed", 1);
        if (seed < 0) throw ConfigError("seed must be non-negative");
        report.seed = o.seed ? *o.seed : static_cast<std::uint64_t>(seed);
        if (c.has("experiment.name") && c.text("experiment.name") != experiment)
            throw ConfigError("config describes experiment '" + c.text("experiment.name") + "', not '" + experiment + "'");
    }

    double tol(const std::string& name, double fallback) const {
        const double t = overrides.tol ? *overrides.tol : config.tolerance(name, fallback);
        if (!(t > 0.0)) throw ConfigError("tolerance for " + name + " must be positive");
        return t;
    }

    double step() const {
        const double h = overrides.step ? *overrides.step : config.number("curve.step", 1e-3);
        if (!(h > 0.0)) throw ConfigError("step must be positive");
        return h;
    }

    int samples(const std::string& key, int fallback) const {
        const auto s = config.integer(key, fallback);
        if (s < 1) throw ConfigError(key + " must be positive");
        return static_cast<int>(s);
    }

    MetricDefinition metric() const { return config.metric("metric"); }
    MetricDefinition lambda(int n) const {
        const auto l = config.metric("lambda", n);
        if (l.degree() != 0) throw ConfigError("[lambda] must declare degree 0");
        return l;
    }

    /// Initial point and velocity from [curve], checked against m.
    TangentSample initial(const MetricDefinition& m) const {
        TangentSample v{config.vector("curve.x0"), config.vector("curve.v0")};
        if (v.x.size() != m.dimension() || v.y.size() != m.dimension())
            throw ConfigError("[curve] x0 and v0 need " + std::to_string(m.dimension()) + " components");
        if (!m.admissible(v)) throw ConfigError("[curve] initial vector is outside the domain of " + m.name());
        return v;
    }

    double t0() const { return config.number("curve.t0", 0.0); }
    double t1() const {
        const double t = config.number("curve.t1");
        if (!(t > t0())) throw ConfigError("[curve] t1 must exceed t0");
        return t;
    }

    const Config& config;
    const Overrides& overrides;
    Report report;
};

int auto_direction(const MetricDefinition& m, const TangentSample& v) {
    const Vector ell = legendre(m, v);
    Eigen::Index k = 0;
    ell.cwiseAbs().maxCoeff(&k);
    return static_cast<int>(k);
}

/// Lightlike initial data: v0 projected onto the cone along the basis vector
/// with the largest Legendre component.
TangentSample lightlike_initial(Context& ctx, const MetricDefinition& m) {
    const TangentSample v = ctx.initial(m);
    Vector w = Vector::Zero(m.dimension());
    w[auto_direction(m, v)] = 1.0;
    const TangentSample p = project_to_lightcone(m, v, w);
    ctx.report.check("initial_lightlike", std::abs(m.value(p)), kLightlikeTolerance * p.y.squaredNorm(),
                     is_lightlike(m, p))
        .extra = {{"projected", num((p.y - v.y).norm())}};
    return p;
}

double max_abs(const Matrix& a) { return a.size() ? a.cwiseAbs().maxCoeff() : 0.0; }

double clearance(const MetricDefinition& m, const TangentSample& v) {
    std::vector<double> z(v.x.data(), v.x.data() + v.x.size());
    z.insert(z.end(), v.y.data(), v.y.data() + v.y.size());
    double c = std::numeric_limits<double>::infinity();
    for (const auto& p : m.domain()) c = std::min(c, p.evaluate<double>(z) / v.y.norm());
    return c;
}

MetricDefinition reciprocal(const MetricDefinition& lambda) {
    return MetricDefinition(lambda.dimension(), Expr::constant(1.0) / lambda.body(), lambda.domain(), 0,
                            "1/" + lambda.name())
        .with_box(lambda.box());
}

// ---------------------------------------------------------------------------

void tensors(Context& ctx) {
    const auto m = ctx.metric();
    const int samples = ctx.samples("tensors.samples", 200);
    double euler = 0, ghom = 0, crad = 0, chom = 0, torsion = 0, nondeg = std::numeric_limits<double>::infinity();
    for (const auto& v : sample_admissible(m, samples, ctx.report.seed)) {
        const TangentSample v2{v.x, 2.0 * v.y};
        const double L = m.value(v);
        const auto g = fundamental_tensor(m, v);
        euler = std::max(euler, std::abs(g(v.y, v.y) - L) / std::max(1.0, std::abs(L)));
        ghom = std::max(ghom, max_abs(fundamental_tensor(m, v2).g - g.g));
        const auto C = cartan_tensor(m, v);
        const auto C2 = cartan_tensor(m, v2);
        crad = std::max(crad, max_abs(C.contract(v.y)));
        for (std::size_t i = 0; i < C.components.size(); ++i)
            chom = std::max(chom, max_abs(2.0 * C2.components[i] - C.components[i]));
        torsion = std::max(torsion, christoffel(m, v).symmetry_drift);
        nondeg = std::min(nondeg, nondegeneracy(g.g));
    }
    auto& r = ctx.report;
    r.bound("euler_identity", euler, ctx.tol("euler_identity", 1e-9));
    r.bound("g_homogeneity", ghom, ctx.tol("g_homogeneity", 1e-10));
    r.bound("cartan_radial", crad, ctx.tol("cartan_radial", 1e-10));
    r.bound("cartan_homogeneity", chom, ctx.tol("cartan_homogeneity", 1e-10));
    r.bound("torsion_drift", torsion, ctx.tol("torsion_drift", 1e-13));
    r.check("min_nondegeneracy", nondeg, kNondegeneracyTolerance, nondeg > kNondegeneracyTolerance);
}

void geodesic(Context& ctx) {
    const auto m = ctx.metric();
    const bool lightlike = ctx.config.flag("curve.lightlike", false);
    const TangentSample v = lightlike ? lightlike_initial(ctx, m) : ctx.initial(m);
    const double t0 = ctx.t0(), t1 = ctx.t1();
    const auto gamma = integrate_geodesic(m, v.x, v.y, t0, t1, ctx.step());
    const double L0 = m.value(v);
    double drift = 0.0, speed = 1.0;
    for (std::size_t i = 0; i < gamma.size(); ++i) {
        drift = std::max(drift, std::abs(m.value(gamma.sample(i)) - L0));
        speed = std::max(speed, gamma.velocity(i).squaredNorm());
    }
    ctx.report.bound("L_drift", drift, ctx.tol("L_drift", 1e-8));
    // The residual is quadratic in the velocity.
    ctx.report.bound("geodesic_residual", pregeodesic_residual(gamma, m) / speed, ctx.tol("geodesic_residual", 1e-7));

    if (ctx.config.has("geodesic.order_steps")) {
        auto steps = ctx.config.numbers("geodesic.order_steps");
        std::sort(steps.begin(), steps.end(), std::greater<>());
        if (steps.size() < 2) throw ConfigError("[geodesic] order_steps needs at least two steps");
        // A faster start keeps the truncation error above rounding.
        const Vector v0 = ctx.config.has("geodesic.order_v0") ? ctx.config.vector("geodesic.order_v0") : v.y;
        if (v0.size() != m.dimension() || !m.admissible({v.x, v0}))
            throw ConfigError("[geodesic] order_v0 is not an admissible vector");
        const auto ref = integrate_geodesic(m, v.x, v0, t0, t1, steps.back() / 8.0);
        const Vector end = ref.position(ref.size() - 1);
        std::vector<double> lx, ly;
        for (double h : steps) {
            const auto c = integrate_geodesic(m, v.x, v0, t0, t1, h);
            lx.push_back(std::log(h));
            ly.push_back(std::log((c.position(c.size() - 1) - end).norm()));
        }
        const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / static_cast<double>(lx.size());
        const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / static_cast<double>(ly.size());
        double sxy = 0, sxx = 0;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            sxy += (lx[i] - mx) * (ly[i] - my);
            sxx += (lx[i] - mx) * (lx[i] - mx);
        }
        const double slope = sxy / sxx;
        ctx.report.bound("rk4_order", std::abs(slope - 4.0), ctx.tol("rk4_order", 0.3)).extra = {{"slope", num(slope)}};
    }
    ctx.report.curves.emplace_back("geodesic", gamma);
}

void lightcone(Context& ctx) {
    const auto L1 = ctx.config.metric("metric");
    const auto L2 = ctx.config.metric("metric2");
    const int samples = ctx.samples("lightcone.samples", 200);
    const ConformalPair pair = [&] {
        try {
            return make_conformal_pair(L1, L2, samples, ctx.report.seed);
        } catch (const Error& e) {
            throw ConfigError(e.what());
        }
    }();
    const auto co = lightcones_coincide(pair);
    auto& r = ctx.report;
    r.check("cone_violation", co.max_violation, ctx.tol("cone_violation", kCoincidenceTolerance),
            co.verdict && co.max_violation <= ctx.tol("cone_violation", kCoincidenceTolerance))
        .extra = {{"cone_points_1", std::to_string(co.cone_points_1)},
                  {"cone_points_2", std::to_string(co.cone_points_2)}};
    r.check("cones_reached_alike", co.empty_1 == co.empty_2 ? 0.0 : 1.0, 0.0, co.empty_1 == co.empty_2);

    if (!ctx.config.has_section("lambda")) return;
    const auto mu = ctx.lambda(L1.dimension());
    // Off the cone: random samples and offsets from cone points.
    double off_err = 0.0;
    int off_count = 0;
    std::mt19937_64 rng(ctx.report.seed);
    for (int k = 0; k < samples; ++k) {
        const TangentSample v = sample_admissible(L1, rng);
        if (!L2.admissible(v)) continue;
        off_err = std::max(off_err, std::abs(anisotropy_factor(pair, v).mu - mu.value(v)));
        ++off_count;
    }
    const auto offsets = ctx.config.has("lightcone.offsets") ? ctx.config.numbers("lightcone.offsets")
                                                             : std::vector<double>{1e-2, 1e-4, 1e-6};
    double cone_err = 0.0, spread = 0.0;
    int cone_count = 0;
    for (const auto& rec : co.records) {
        if (rec.side != 1) continue;
        const TangentSample& p = rec.sample;
        const int k = auto_direction(L1, p);
        for (double eps : offsets) {
            for (double sign : {1.0, -1.0}) {
                TangentSample v = p;
                v.y[k] += sign * eps * p.y.norm();
                if (!L1.admissible(v) || !L2.admissible(v)) continue;
                off_err = std::max(off_err, std::abs(anisotropy_factor(pair, v).mu - mu.value(v)));
                ++off_count;
                break;
            }
        }
        // The pairing formula needs cone points inside the domain.
        if (clearance(L1, p) < 1e-6 || clearance(L2, p) < 1e-6) continue;
        ++cone_count;
        const auto a = anisotropy_factor(pair, p);
        cone_err = std::max(cone_err, std::abs(a.mu - mu.value(p)));
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (int j = 0; j < L1.dimension(); ++j) {
            Vector w = Vector::Zero(L1.dimension());
            w[j] = 1.0;
            try {
                const double m = anisotropy_formula(L1, L2, p, w);
                lo = std::min(lo, m);
                hi = std::max(hi, m);
            } catch (const NoTransversalVector&) {
            }
        }
        if (hi >= lo) spread = std::max(spread, hi - lo);
    }
    r.bound("mu_off_cone", off_err, ctx.tol("mu_off_cone", 1e-8)).extra = {{"points", std::to_string(off_count)}};
    r.check("interior_cone_points", cone_count, 0, true);
    if (cone_count > 0) {
        r.bound("mu_on_cone", cone_err, ctx.tol("mu_on_cone", 1e-8));
        r.bound("w_spread", spread, ctx.tol("w_spread", 1e-9));
    }
}

struct ScaledGeodesic {
    MetricDefinition m, lambda;
    DiscreteCurve gamma;
};

ScaledGeodesic scaled_geodesic(Context& ctx) {
    const auto m = ctx.metric();
    const auto lambda = ctx.lambda(m.dimension());
    const TangentSample v = lightlike_initial(ctx, m);
    auto gamma = integrate_geodesic(conformal_product(m, lambda), v.x, v.y, ctx.t0(), ctx.t1(), ctx.step());
    return {m, lambda, std::move(gamma)};
}

ConformalReparametrization to_base(const ScaledGeodesic& s) {
    const double span = conformal_parameter_length(s.gamma, s.lambda);
    return reparametrize_conformal(s.gamma, s.m, s.lambda, 0.0, span,
                                   span / static_cast<double>(s.gamma.size() - 1));
}

void conformal_pregeodesic(Context& ctx) {
    const auto s = scaled_geodesic(ctx);
    auto& r = ctx.report;
    double worst = 0.0;
    for (std::size_t i = 0; i < s.gamma.size(); ++i)
        worst = std::max(worst, std::abs(s.m.value(s.gamma.sample(i))) / s.gamma.velocity(i).squaredNorm());
    r.bound("lightlike_along", worst, ctx.tol("lightlike_along", kLightlikeTolerance));
    r.bound("base_residual", pregeodesic_residual(s.gamma, s.m, &s.lambda), ctx.tol("base_residual", 1e-6));
    const auto rep = to_base(s);
    r.bound("reparametrized_residual", pregeodesic_residual(rep.curve, s.m), ctx.tol("reparametrized_residual", 1e-6));

    // Back with 1/lambda from the L-geodesic.
    const auto lm = conformal_product(s.m, s.lambda);
    const auto back = reparametrize_conformal(rep.curve, lm, reciprocal(s.lambda), s.gamma.t_begin(), s.gamma.t_end(),
                                              (s.gamma.t_end() - s.gamma.t_begin()) / (s.gamma.size() - 1));
    double trip = 0.0;
    for (std::size_t j = 0; j < back.phi.mu.size(); ++j)
        trip = std::max(trip, std::abs(rep.phi.at(back.phi.phi[j]) - back.phi.mu[j]));
    r.bound("round_trip", trip, ctx.tol("round_trip", 1e-8));
    r.curves.emplace_back("gamma", s.gamma);
    r.curves.emplace_back("gamma_tilde", rep.curve);
}

FieldAlongCurve parse_field(const Config& c, const std::string& key, const DiscreteCurve& gamma) {
    const auto parts = split_list(c.text(key));
    if (static_cast<int>(parts.size()) != gamma.dimension())
        throw ConfigError(key + " needs " + std::to_string(gamma.dimension()) + " components");
    const VariableTable vars({"t"});
    std::vector<Expr> comps;
    try {
        for (const auto& p : parts) comps.push_back(parse_expression(p, vars));
    } catch (const ParseError& e) {
        throw ConfigError(key + ": " + e.what());
    }
    const auto layout = JetLayout::get(1, 2);
    FieldAlongCurve W;
    W.t = gamma.times();
    for (double t : W.t) {
        const JetScalar tj = JetScalar::variable(layout, 0, t);
        Vector v(gamma.dimension()), d(gamma.dimension());
        for (int k = 0; k < gamma.dimension(); ++k) {
            const JetScalar f = comps[static_cast<std::size_t>(k)].evaluate<JetScalar>(std::span<const JetScalar>(&tj, 1));
            v[k] = f.value();
            d[k] = derivative(f, {0});
        }
        W.values.push_back(v);
        W.derivatives.push_back(d);
    }
    return W;
}

void variation(Context& ctx) {
    const auto s = scaled_geodesic(ctx);
    const double ds = ctx.config.number("variation.ds", 1e-2);
    int count = 0;
    for (int k = 1; ctx.config.has("variation.field" + std::to_string(k)); ++k) {
        const auto W = parse_field(ctx.config, "variation.field" + std::to_string(k), s.gamma);
        const auto var = linear_variation(s.gamma, W, s.m);
        const std::function<double(double)> E = [&](double e) {
            return energy_of_linear_variation(s.gamma, W, e, s.lambda, s.m);
        };
        const double d1 = richardson_derivative(E, 0.0, ds);
        const double d2 = richardson_second_derivative(E, 0.0, ds);
        const double f1 = first_variation(s.gamma, var, s.lambda, s.m);
        const double f2 = second_variation(s.gamma, var, s.lambda, s.m);
        const std::string id = std::to_string(k);
        ctx.report.bound("first_variation_" + id, std::abs(f1 - d1), ctx.tol("first_variation", 1e-6)).extra = {
            {"formula", num(f1)}, {"difference", num(d1)}};
        ctx.report.bound("second_variation_" + id, std::abs(f2 - d2), ctx.tol("second_variation", 1e-5)).extra = {
            {"formula", num(f2)}, {"difference", num(d2)}};
        ++count;
    }
    if (count == 0) throw ConfigError("[variation] needs field1 (and optionally field2, ...)");
    ctx.report.curves.emplace_back("gamma", s.gamma);
}

void expect_focal(Context& ctx, const std::vector<FocalPoint>& found, bool list) {
    auto& r = ctx.report;
    for (std::size_t k = 0; list && k < found.size(); ++k)
        r.check("focal_" + std::to_string(k + 1), found[k].parameter, 0.0, true).extra = {
            {"multiplicity", std::to_string(found[k].multiplicity)},
            {"relative_singular_value", num(found[k].relative_singular_value)}};
    if (!ctx.config.has("focal.expect")) return;
    const auto expect = ctx.config.numbers("focal.expect");
    std::vector<double> mult(expect.size(), 1.0);
    if (ctx.config.has("focal.multiplicity")) mult = ctx.config.numbers("focal.multiplicity");
    if (mult.size() != expect.size()) throw ConfigError("[focal] expect and multiplicity differ in length");
    r.check("focal_count", static_cast<double>(found.size()), static_cast<double>(expect.size()),
            found.size() == expect.size());
    const double tol = ctx.tol("focal_parameter", 1e-5);
    for (std::size_t k = 0; k < expect.size(); ++k) {
        const std::string id = std::to_string(k + 1);
        if (k >= found.size()) {
            r.check("focal_parameter_" + id, std::numeric_limits<double>::infinity(), tol, false);
            continue;
        }
        r.bound("focal_parameter_" + id, std::abs(found[k].parameter - expect[k]), tol);
        r.check("focal_multiplicity_" + id, found[k].multiplicity, mult[k], found[k].multiplicity == mult[k]);
    }
}

void focal(Context& ctx) {
    const auto m = ctx.metric();
    const TangentSample v = lightlike_initial(ctx, m);
    SubmanifoldPatch P = ctx.config.submanifold(v.x);
    if ((P.point() - v.x).norm() > 1e-9 * std::max(1.0, v.x.norm()))
        throw ConfigError("[submanifold] basepoint differs from [curve] x0");
    if (P.ambient_dimension() != m.dimension()) throw ConfigError("[submanifold] has the wrong ambient dimension");
    try {
        require_normal(P, v.y, m);
    } catch (const PreconditionFailure& e) {
        throw ConfigError(e.what());
    }
    const auto gamma = integrate_geodesic(m, v.x, v.y, ctx.t0(), ctx.t1(), ctx.step());
    const auto search = find_focal_points(gamma, P, m);
    double pairing = 0.0;
    for (int k = 0; k + 1 < search.basis.count(); ++k)
        pairing = std::max(pairing, kernel_pairing(gamma, search.basis.column(k), m));
    ctx.report.bound("kernel_pairing", pairing, ctx.tol("kernel_pairing", 1e-7));
    expect_focal(ctx, search.points, true);
    ctx.report.curves.emplace_back("geodesic", gamma);
}

void focal_correspondence(Context& ctx) {
    const auto s = scaled_geodesic(ctx);
    SubmanifoldPatch P = ctx.config.submanifold(s.gamma.position(0));
    if ((P.point() - s.gamma.position(0)).norm() > 1e-9 * std::max(1.0, P.point().norm()))
        throw ConfigError("[submanifold] basepoint differs from [curve] x0");
    try {
        require_normal(P, s.gamma.velocity(0), s.m);
    } catch (const PreconditionFailure& e) {
        throw ConfigError(e.what());
    }
    const auto rep = verify_focal_correspondence(s.gamma, P, s.lambda, s.m);
    auto& r = ctx.report;
    const double tol = ctx.tol("pairing", kPairingTolerance);
    std::map<std::string, int> index;
    for (const auto& rec : rep.records) {
        const std::string name = "focal_" + rec.side + "_" + std::to_string(++index[rec.side]);
        r.bound(name, rec.pairing_error, tol).extra = {{"side", rec.side},
                                                       {"parameter", num(rec.parameter)},
                                                       {"multiplicity", std::to_string(rec.multiplicity)},
                                                       {"paired_parameter", num(rec.paired_parameter)}};
    }
    r.check("multiplicities_match", rep.multiplicities_match ? 0.0 : 1.0, 0.0, rep.multiplicities_match);
    expect_focal(ctx, rep.base.points, false);
    r.curves.emplace_back("gamma", s.gamma);
    r.curves.emplace_back("gamma_tilde", rep.reparametrization.curve);
}

} // namespace

Report run_experiment(const std::string& experiment, const Config& config, const Overrides& overrides) {
    static const std::map<std::string, void (*)(Context&)> table = {
        {"tensors", tensors},
        {"geodesic", geodesic},
        {"lightcone", lightcone},
        {"conformal-pregeodesic", conformal_pregeodesic},
        {"variation", variation},
        {"focal", focal},
        {"focal-correspondence", focal_correspondence},
    };
    const auto it = table.find(experiment);
    if (it == table.end()) throw ConfigError("unknown experiment '" + experiment + "'");
    Context ctx(experiment, config, overrides);
    it->second(ctx);
    return std::move(ctx.report);
}

} // namespace finslab::cli
