#include "finslab/curve.hpp"

#include "finslab/connection.hpp"
#include "finslab/finite_difference.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

namespace finslab {

DiscreteCurve::DiscreteCurve(std::vector<double> t, std::vector<Vector> x, std::vector<Vector> y, std::vector<Vector> a)
    : t_(std::move(t)), x_(std::move(x)), y_(std::move(y)), a_(std::move(a)) {
    if (t_.size() < 2) throw std::invalid_argument("a curve needs at least two nodes");
    if (x_.size() != t_.size() || y_.size() != t_.size() || (!a_.empty() && a_.size() != t_.size()))
        throw DimensionMismatch("curve node arrays differ in length");
    for (std::size_t i = 1; i < t_.size(); ++i)
        if (!(t_[i] > t_[i - 1])) throw std::invalid_argument("curve times must increase strictly");
}

std::size_t DiscreteCurve::segment(double t) const {
    const double slack = 1e-12 * std::max(1.0, std::abs(t_.back()) + std::abs(t_.front()));
    if (t < t_.front() - slack || t > t_.back() + slack)
        throw std::out_of_range("time " + std::to_string(t) + " outside the curve's range");
    auto it = std::upper_bound(t_.begin(), t_.end(), t);
    std::size_t i = it == t_.begin() ? 0 : static_cast<std::size_t>(it - t_.begin()) - 1;
    return std::min(i, t_.size() - 2);
}

namespace {

struct Hermite {
    double h00, h10, h01, h11;
};

Hermite basis(double s, double h) {
    const double s2 = s * s, s3 = s2 * s;
    return {2 * s3 - 3 * s2 + 1, (s3 - 2 * s2 + s) * h, -2 * s3 + 3 * s2, (s3 - s2) * h};
}

Hermite basis_derivative(double s, double h) {
    const double s2 = s * s;
    return {(6 * s2 - 6 * s) / h, 3 * s2 - 4 * s + 1, (-6 * s2 + 6 * s) / h, 3 * s2 - 2 * s};
}

Vector combine(const Hermite& b, const Vector& p0, const Vector& m0, const Vector& p1, const Vector& m1) {
    return b.h00 * p0 + b.h10 * m0 + b.h01 * p1 + b.h11 * m1;
}

} // namespace

Vector DiscreteCurve::position_at(double t) const {
    const std::size_t i = segment(t);
    const double h = t_[i + 1] - t_[i];
    return combine(basis((t - t_[i]) / h, h), x_[i], y_[i], x_[i + 1], y_[i + 1]);
}

Vector DiscreteCurve::velocity_at(double t) const {
    const std::size_t i = segment(t);
    const double h = t_[i + 1] - t_[i];
    const double s = (t - t_[i]) / h;
    if (has_acceleration()) return combine(basis(s, h), y_[i], a_[i], y_[i + 1], a_[i + 1]);
    return combine(basis_derivative(s, h), x_[i], y_[i], x_[i + 1], y_[i + 1]);
}

Vector DiscreteCurve::acceleration_at(double t) const {
    if (!has_acceleration()) throw std::logic_error("curve stores no accelerations");
    const std::size_t i = segment(t);
    const double h = t_[i + 1] - t_[i];
    return combine(basis_derivative((t - t_[i]) / h, h), y_[i], a_[i], y_[i + 1], a_[i + 1]);
}

// ---------------------------------------------------------------------------

Vector FieldAlongCurve::at(double s) const {
    if (t.size() != values.size() || t.size() < 2) throw GridMismatch("field grid is inconsistent");
    auto it = std::upper_bound(t.begin(), t.end(), s);
    std::size_t i = it == t.begin() ? 0 : static_cast<std::size_t>(it - t.begin()) - 1;
    i = std::min(i, t.size() - 2);
    if (has_derivatives()) {
        const double h = t[i + 1] - t[i];
        return combine(basis((s - t[i]) / h, h), values[i], derivatives[i], values[i + 1], derivatives[i + 1]);
    }
    const std::size_t width = std::min<std::size_t>(4, t.size());
    std::size_t lo = i >= 1 ? i - 1 : 0;
    if (lo + width > t.size()) lo = t.size() - width;
    Vector out = Vector::Zero(values.front().size());
    for (std::size_t a = lo; a < lo + width; ++a) {
        double w = 1.0;
        for (std::size_t b = lo; b < lo + width; ++b)
            if (b != a) w *= (s - t[b]) / (t[a] - t[b]);
        out += w * values[a];
    }
    return out;
}

Vector FieldAlongCurve::derivative(std::size_t i) const {
    if (has_derivatives()) return derivatives.at(i);
    const auto n = values.front().size();
    const int width = static_cast<int>(std::min<std::size_t>(5, t.size()));
    Vector out(n);
    std::vector<double> comp(values.size());
    for (Eigen::Index c = 0; c < n; ++c) {
        for (std::size_t j = 0; j < values.size(); ++j) comp[j] = values[j][c];
        out[c] = grid_derivative(t, comp, i, 1, width);
    }
    return out;
}

FieldAlongCurve velocity_field(const DiscreteCurve& c) {
    FieldAlongCurve f;
    f.t = c.times();
    for (std::size_t i = 0; i < c.size(); ++i) f.values.push_back(c.velocity(i));
    if (c.has_acceleration())
        for (std::size_t i = 0; i < c.size(); ++i) f.derivatives.push_back(c.acceleration(i));
    return f;
}

FieldAlongCurve covariant_derivative_along(const DiscreteCurve& curve, const FieldAlongCurve& U,
                                           const FieldAlongCurve& X, const MetricDefinition& m) {
    if (U.size() != curve.size() || X.size() != curve.size() || U.t != curve.times() || X.t != curve.times())
        throw GridMismatch("fields are not sampled on the curve's grid");
    FieldAlongCurve out;
    out.t = curve.times();
    for (std::size_t i = 0; i < curve.size(); ++i) {
        const TangentSample ref{curve.position(i), U.values[i]};
        if (!m.admissible(ref)) throw InadmissibleSample("reference field leaves the domain at node " + std::to_string(i));
        const auto gam = christoffel(m, ref);
        out.values.push_back(X.derivative(i) + gam.contract(X.values[i], curve.velocity(i)));
    }
    return out;
}

void write_curve_csv(const DiscreteCurve& c, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    const int n = c.dimension();
    out << "t";
    for (int i = 0; i < n; ++i) out << ",x" << i;
    for (int i = 0; i < n; ++i) out << ",y" << i;
    out << '\n';
    char buf[32];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << buf;
    };
    for (std::size_t k = 0; k < c.size(); ++k) {
        put(c.time(k));
        for (int i = 0; i < n; ++i) out << ',', put(c.position(k)[i]);
        for (int i = 0; i < n; ++i) out << ',', put(c.velocity(k)[i]);
        out << '\n';
    }
}

double simpson(const std::vector<double>& f, double h) {
    const std::size_t intervals = f.size() - 1;
    if (f.size() < 2) return 0.0;
    if (intervals == 1) return 0.5 * h * (f[0] + f[1]);
    std::size_t even = intervals % 2 == 0 ? intervals : intervals - 3;
    double s = 0.0;
    if (even > 0) {
        s = f[0] + f[even];
        for (std::size_t i = 1; i < even; ++i) s += (i % 2 ? 4.0 : 2.0) * f[i];
        s *= h / 3.0;
    }
    if (even != intervals) s += 3.0 * h / 8.0 * (f[even] + 3.0 * f[even + 1] + 3.0 * f[even + 2] + f[even + 3]);
    return s;
}

} // namespace finslab
