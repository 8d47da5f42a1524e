#pragma once

#include "finslab/expr.hpp"
#include "finslab/jets.hpp"
#include "finslab/sample.hpp"

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace finslab {

/// An anisotropic scalar on a conic domain A of TM, given as an expression in
/// x0..x{n-1}, y0..y{n-1}. Degree 2 for metrics L, degree 0 for conformal factors.
class MetricDefinition {
public:
    using Interval = std::pair<double, double>;

    MetricDefinition(int n, Expr body, std::vector<Expr> domain = {}, int degree = 2, std::string name = {});

    int dimension() const noexcept { return n_; }
    const Expr& body() const noexcept { return body_; }
    const std::vector<Expr>& domain() const noexcept { return domain_; }
    int degree() const noexcept { return degree_; }
    const std::string& name() const noexcept { return name_; }
    /// Chart box used by the sampler; defaults to [-1, 1] per coordinate.
    const std::vector<Interval>& box() const noexcept { return box_; }

    MetricDefinition with_domain(std::vector<Expr> domain) const;
    MetricDefinition with_box(std::vector<Interval> box) const;
    MetricDefinition with_name(std::string name) const;

    /// y != 0 and every domain predicate strictly positive. Never throws on well-formed input.
    bool admissible(const TangentSample& v) const;

    /// Value at an admissible sample; throws InadmissibleSample otherwise.
    double value(const TangentSample& v) const;
    double operator()(const TangentSample& v) const { return value(v); }

    /// Value without the admissibility check (may throw DomainError).
    double evaluate(const Vector& x, const Vector& y) const;

    /// Taylor jet of the body at v.
    JetScalar jet(const TangentSample& v, int order, SeedMode mode = SeedMode::chart_and_fiber) const;

    /// Body and predicates rendered in the DSL.
    std::string body_source() const;
    std::vector<std::string> domain_source() const;

    void check_dimension(const TangentSample& v) const;

private:
    int n_;
    Expr body_;
    std::vector<Expr> domain_;
    int degree_;
    std::string name_;
    std::vector<Interval> box_;
};

/// Parse a body and its domain predicates over x0..x{n-1}, y0..y{n-1}.
MetricDefinition parse_metric(std::string_view source, int n, const std::vector<std::string>& domain = {},
                              int degree = 2, std::string name = {});

/// Metric file: header lines `dim=n`, `degree=d`, `domain=e1;e2`, optional
/// `name=` and `box=lo:hi;lo:hi`, `#` comments, then the body expression.
MetricDefinition parse_metric_file(std::string_view text);
MetricDefinition load_metric_file(const std::filesystem::path& path);

struct HomogeneityReport {
    double max_relative_error = 0.0;
    int samples = 0;
    bool pass = false;
};

HomogeneityReport validate_homogeneity(const MetricDefinition& m, int samples, std::uint64_t seed);

inline constexpr int kMaxRejections = 10000;

/// x uniform in the box, y uniform on the unit sphere scaled into [0.5, 2].
/// Throws SamplingFailure after kMaxRejections rejected draws.
TangentSample sample_admissible(const MetricDefinition& m, std::mt19937_64& rng);
std::vector<TangentSample> sample_admissible(const MetricDefinition& m, int count, std::uint64_t seed);

/// Degree-0 constant.
MetricDefinition constant_factor(int n, double c);

/// Built-in metrics and factors by name.
MetricDefinition builtin_metric(std::string_view name);
std::vector<std::string> builtin_names();

} // namespace finslab
