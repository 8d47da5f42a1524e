#pragma once

#include "finslab/metric.hpp"
#include "finslab/sample.hpp"

#include <filesystem>
#include <vector>

namespace finslab {

/// Node data of a trajectory with cubic Hermite dense output. Positions are
/// interpolated from (x, y); velocities from (y, a) when accelerations are
/// stored, otherwise by differentiating the position interpolant.
class DiscreteCurve {
public:
    DiscreteCurve() = default;
    DiscreteCurve(std::vector<double> t, std::vector<Vector> x, std::vector<Vector> y, std::vector<Vector> a = {});

    std::size_t size() const noexcept { return t_.size(); }
    int dimension() const noexcept { return x_.empty() ? 0 : static_cast<int>(x_.front().size()); }
    const std::vector<double>& times() const noexcept { return t_; }
    double t_begin() const { return t_.front(); }
    double t_end() const { return t_.back(); }
    double time(std::size_t i) const { return t_[i]; }
    const Vector& position(std::size_t i) const { return x_[i]; }
    const Vector& velocity(std::size_t i) const { return y_[i]; }
    bool has_acceleration() const noexcept { return !a_.empty(); }
    const Vector& acceleration(std::size_t i) const { return a_.at(i); }
    TangentSample sample(std::size_t i) const { return {x_[i], y_[i]}; }

    Vector position_at(double t) const;
    Vector velocity_at(double t) const;
    Vector acceleration_at(double t) const;
    TangentSample sample_at(double t) const { return {position_at(t), velocity_at(t)}; }

private:
    std::size_t segment(double t) const;

    std::vector<double> t_;
    std::vector<Vector> x_;
    std::vector<Vector> y_;
    std::vector<Vector> a_;
};

/// A vector field sampled at the nodes of a curve, optionally with its
/// coordinate time derivative.
struct FieldAlongCurve {
    std::vector<double> t;
    std::vector<Vector> values;
    std::vector<Vector> derivatives;

    std::size_t size() const noexcept { return values.size(); }
    bool has_derivatives() const noexcept { return !derivatives.empty(); }
    /// Hermite interpolation when derivatives are present, else cubic Lagrange.
    Vector at(double s) const;
    /// Coordinate derivative at node i (stored, or 5-point differences).
    Vector derivative(std::size_t i) const;
};

FieldAlongCurve velocity_field(const DiscreteCurve& c);

/// (D X)^k = dX^k/dt + X^i gamma'^j Gamma^k_ij(U) at every node.
FieldAlongCurve covariant_derivative_along(const DiscreteCurve& curve, const FieldAlongCurve& U,
                                           const FieldAlongCurve& X, const MetricDefinition& m);

/// CSV with header t,x0..,y0.., full precision.
void write_curve_csv(const DiscreteCurve& c, const std::filesystem::path& path);

/// Composite Simpson on a uniform grid; an odd interval count closes with the 3/8 rule.
double simpson(const std::vector<double>& f, double h);

} // namespace finslab
