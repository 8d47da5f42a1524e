#include "finslab/geodesics.hpp"

#include "finslab/connection.hpp"
#include "finslab/finite_difference.hpp"
#include "finslab/tensors.hpp"

#include <algorithm>
#include <cmath>

namespace finslab {

namespace {

int step_count(double span, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("step must be positive");
    if (!(span > 0.0)) throw std::invalid_argument("integration span must be positive");
    return std::max(1, static_cast<int>(std::llround(span / h)));
}

} // namespace

DiscreteCurve integrate_geodesic(const MetricDefinition& m, const Vector& x0, const Vector& v0, double t0, double t1,
                                 double h) {
    if (!m.admissible({x0, v0})) throw InadmissibleSample("initial data lies outside the domain");
    const int steps = step_count(t1 - t0, h);
    const double dt = (t1 - t0) / steps;

    auto accel = [&](const Vector& x, const Vector& y, double t) -> Vector {
        const TangentSample s{x, y};
        if (!m.admissible(s)) throw DomainExit(t);
        try {
            return -2.0 * spray_coefficients(m, s);
        } catch (const DomainError&) {
            throw DomainExit(t);
        }
    };

    std::vector<double> ts{t0};
    std::vector<Vector> xs{x0}, ys{v0}, as{accel(x0, v0, t0)};
    ts.reserve(static_cast<std::size_t>(steps) + 1);
    Vector x = x0, y = v0;
    for (int k = 0; k < steps; ++k) {
        const double t = t0 + k * dt;
        const Vector& a1 = as.back();
        const Vector x2 = x + 0.5 * dt * y, y2 = y + 0.5 * dt * a1;
        const Vector a2 = accel(x2, y2, t + 0.5 * dt);
        const Vector x3 = x + 0.5 * dt * y2, y3 = y + 0.5 * dt * a2;
        const Vector a3 = accel(x3, y3, t + 0.5 * dt);
        const Vector x4 = x + dt * y3, y4 = y + dt * a3;
        const Vector a4 = accel(x4, y4, t + dt);
        x += dt / 6.0 * (y + 2.0 * y2 + 2.0 * y3 + y4);
        y += dt / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
        const double tn = k + 1 == steps ? t1 : t0 + (k + 1) * dt;
        as.push_back(accel(x, y, tn));
        ts.push_back(tn);
        xs.push_back(x);
        ys.push_back(y);
    }
    return DiscreteCurve(std::move(ts), std::move(xs), std::move(ys), std::move(as));
}

// ---------------------------------------------------------------------------

bool is_lightlike(const MetricDefinition& m, const TangentSample& v, double tol) {
    return std::abs(m.value(v)) <= tol * v.y.squaredNorm();
}

LightconeProjection project_to_lightcone_detailed(const MetricDefinition& m, const TangentSample& v, const Vector& w) {
    require_admissible(m, v);
    const double target = 1e-12 * std::min(1.0, v.y.squaredNorm());
    LightconeProjection out{v, 0.0, 0};
    double L = m.value(v);
    if (std::abs(L) <= target) return out;

    const FundamentalTensor g0 = fundamental_tensor(m, v);
    const double pairing = g0(v.y, w);
    const double scale = std::max(1.0, g0.g.cwiseAbs().maxCoeff()) * v.y.norm() * w.norm();
    if (!(std::abs(pairing) > 1e-10 * scale))
        throw TransversalityFailure("w is not transversal: g_v(v, w) vanishes");

    TangentSample cur = v;
    double delta = 0.0;
    for (int it = 1; it <= 50; ++it) {
        const double slope = 2.0 * legendre(m, cur).dot(w);
        if (slope == 0.0) throw TransversalityFailure("derivative of L along w vanished during projection");
        double step = -L / slope;
        TangentSample next{v.x, v.y + (delta + step) * w};
        int halvings = 0;
        while (!m.admissible(next)) {
            if (++halvings > 60) throw NoConvergence("lightcone projection cannot stay inside the domain");
            step *= 0.5;
            next.y = v.y + (delta + step) * w;
        }
        delta += step;
        cur = next;
        L = m.value(cur);
        if (std::abs(L) <= target) return {cur, delta, it};
    }
    throw NoConvergence("lightcone projection did not converge in 50 iterations");
}

// ---------------------------------------------------------------------------

double energy(const DiscreteCurve& c, const MetricDefinition& m, const MetricDefinition* lambda) {
    std::vector<double> f(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        const TangentSample s = c.sample(i);
        const double L = m.value(s);
        f[i] = lambda ? lambda->value(s) * L : L;
    }
    const double h = (c.t_end() - c.t_begin()) / static_cast<double>(c.size() - 1);
    for (std::size_t i = 1; i < c.size(); ++i)
        if (std::abs(c.time(i) - c.time(i - 1) - h) > 1e-9 * std::max(1.0, h))
            throw GridMismatch("energy quadrature needs a uniform grid");
    return 0.5 * simpson(f, h);
}

// ---------------------------------------------------------------------------

double Reparametrization::at(double m) const {
    auto it = std::upper_bound(mu.begin(), mu.end(), m);
    std::size_t i = it == mu.begin() ? 0 : static_cast<std::size_t>(it - mu.begin()) - 1;
    i = std::min(i, mu.size() - 2);
    const double h = mu[i + 1] - mu[i];
    const double s = (m - mu[i]) / h, s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * phi[i] + (s3 - 2 * s2 + s) * h * phi_dot[i] + (-2 * s3 + 3 * s2) * phi[i + 1]
           + (s3 - s2) * h * phi_dot[i + 1];
}

double Reparametrization::derivative_at(double m) const {
    auto it = std::upper_bound(mu.begin(), mu.end(), m);
    std::size_t i = it == mu.begin() ? 0 : static_cast<std::size_t>(it - mu.begin()) - 1;
    i = std::min(i, mu.size() - 2);
    const double h = mu[i + 1] - mu[i];
    const double s = (m - mu[i]) / h, s2 = s * s;
    return (6 * s2 - 6 * s) / h * phi[i] + (3 * s2 - 4 * s + 1) * phi_dot[i] + (-6 * s2 + 6 * s) / h * phi[i + 1]
           + (3 * s2 - 2 * s) * phi_dot[i + 1];
}

double Reparametrization::inverse(double t) const {
    auto it = std::upper_bound(phi.begin(), phi.end(), t);
    std::size_t i = it == phi.begin() ? 0 : static_cast<std::size_t>(it - phi.begin()) - 1;
    i = std::min(i, phi.size() - 2);
    double lo = mu[i], hi = mu[i + 1];
    double m = lo + (hi - lo) * (t - phi[i]) / (phi[i + 1] - phi[i]);
    for (int k = 0; k < 60; ++k) {
        const double r = at(m) - t;
        if (std::abs(r) <= 1e-15 * std::max(1.0, std::abs(t))) break;
        if (r > 0) hi = m;
        else lo = m;
        const double d = derivative_at(m);
        double next = m - r / d;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        m = next;
    }
    return m;
}

ConformalReparametrization reparametrize_conformal(const DiscreteCurve& gamma, const MetricDefinition& m,
                                                   const MetricDefinition& lambda, double mu_begin, double mu_end,
                                                   double h) {
    for (std::size_t i = 0; i < gamma.size(); ++i) {
        const TangentSample s = gamma.sample(i);
        if (!is_lightlike(m, s)) throw NotLightlike("curve is not lightlike at node " + std::to_string(i));
        if (!(lambda.value(s) > 0.0)) throw PositivityFailure("conformal factor is not positive along the curve");
    }
    const int steps = step_count(mu_end - mu_begin, h);
    const double dmu = (mu_end - mu_begin) / steps;
    const double slack = 1e-9 * std::max(1.0, gamma.t_end() - gamma.t_begin());

    double reached = mu_begin;
    auto rate = [&](double t) {
        if (t < gamma.t_begin() - slack || t > gamma.t_end() + slack) throw ReparametrizationRange(mu_begin, reached);
        t = std::clamp(t, gamma.t_begin(), gamma.t_end());
        return lambda.value(gamma.sample_at(t));
    };

    Reparametrization rp;
    double phi = gamma.t_begin();
    rp.mu.push_back(mu_begin);
    rp.phi.push_back(phi);
    rp.phi_dot.push_back(rate(phi));
    for (int k = 0; k < steps; ++k) {
        const double k1 = rp.phi_dot.back();
        const double k2 = rate(phi + 0.5 * dmu * k1);
        const double k3 = rate(phi + 0.5 * dmu * k2);
        const double k4 = rate(phi + dmu * k3);
        phi += dmu / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        const double mu = k + 1 == steps ? mu_end : mu_begin + (k + 1) * dmu;
        const double phidot = rate(phi);
        reached = mu;
        rp.mu.push_back(mu);
        rp.phi.push_back(phi);
        rp.phi_dot.push_back(phidot);
    }

    std::vector<Vector> xs, ys, as;
    for (std::size_t j = 0; j < rp.mu.size(); ++j) {
        const double t = std::clamp(rp.phi[j], gamma.t_begin(), gamma.t_end());
        const TangentSample s = gamma.sample_at(t);
        xs.push_back(s.x);
        ys.push_back(rp.phi_dot[j] * s.y);
        if (gamma.has_acceleration()) {
            const Vector a = gamma.acceleration_at(t);
            const auto d = scalar_derivatives(lambda, s);
            const double phiddot = rp.phi_dot[j] * (d.dx.dot(s.y) + d.dy.dot(a));
            as.push_back(phiddot * s.y + rp.phi_dot[j] * rp.phi_dot[j] * a);
        }
    }
    ConformalReparametrization out{rp, DiscreteCurve(rp.mu, std::move(xs), std::move(ys), std::move(as))};
    return out;
}

double conformal_parameter_length(const DiscreteCurve& gamma, const MetricDefinition& lambda) {
    std::vector<double> f(gamma.size());
    for (std::size_t i = 0; i < gamma.size(); ++i) f[i] = 1.0 / lambda.value(gamma.sample(i));
    const double h = (gamma.t_end() - gamma.t_begin()) / static_cast<double>(gamma.size() - 1);
    return simpson(f, h);
}

double pregeodesic_residual(const DiscreteCurve& c, const MetricDefinition& m, const MetricDefinition* lambda) {
    const int n = c.dimension();
    std::vector<double> lam(c.size(), 1.0);
    for (std::size_t i = 0; i < c.size(); ++i) {
        const TangentSample s = c.sample(i);
        require_admissible(m, s);
        if (lambda) lam[i] = lambda->value(s);
    }
    std::vector<double> comp(c.size());
    std::vector<Vector> d(c.size(), Vector::Zero(n));
    for (int k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < c.size(); ++i) comp[i] = lam[i] * c.velocity(i)[k];
        for (std::size_t i = 0; i < c.size(); ++i) d[i][k] = grid_derivative(c.times(), comp, i, 1, 5);
    }
    double worst = 0.0;
    for (std::size_t i = 2; i + 2 < c.size(); ++i) {
        const TangentSample s = c.sample(i);
        const Vector r = d[i] + lam[i] * christoffel(m, s).contract(s.y, s.y);
        worst = std::max(worst, r.norm());
    }
    return worst;
}

} // namespace finslab
