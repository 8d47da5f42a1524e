#include "finslab/jets.hpp"

#include "finslab/errors.hpp"
#include "finslab/sample.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <utility>

namespace finslab {

namespace {

double factorial(int k) {
    double r = 1.0;
    for (int i = 2; i <= k; ++i) r *= i;
    return r;
}

// All multi-indices of total degree d over nvars variables, lexicographically
// descending in the leading exponent. The enumeration does not depend on the
// truncation order, which gives the prefix property across layouts.
void enumerate_degree(int nvars, int d, MultiIndex& current, int var, std::vector<MultiIndex>& out) {
    if (var == nvars - 1) {
        current[var] = d;
        out.push_back(current);
        current[var] = 0;
        return;
    }
    for (int e = d; e >= 0; --e) {
        current[var] = e;
        enumerate_degree(nvars, d - e, current, var + 1, out);
    }
    current[var] = 0;
}

} // namespace

JetLayout::JetLayout(int nvars, int order) : nvars_(nvars), order_(order) {
    if (nvars < 1) throw std::invalid_argument("jet layout needs at least one variable");
    if (order < 0 || order > kMaxJetOrder)
        throw std::invalid_argument("jet order must lie in [0, " + std::to_string(kMaxJetOrder) + "]");

    for (int d = 0; d <= order; ++d) {
        degree_offsets_.push_back(indices_.size());
        MultiIndex current(nvars, 0);
        enumerate_degree(nvars, d, current, 0, indices_);
    }
    degree_offsets_.push_back(indices_.size());

    degrees_.reserve(indices_.size());
    weights_.reserve(indices_.size());
    lookup_.reserve(indices_.size());
    for (std::size_t p = 0; p < indices_.size(); ++p) {
        int deg = 0;
        double w = 1.0;
        for (int e : indices_[p]) {
            deg += e;
            w *= factorial(e);
        }
        degrees_.push_back(deg);
        weights_.push_back(w);
        lookup_.emplace_back(key(indices_[p]), static_cast<std::uint32_t>(p));
    }
    std::sort(lookup_.begin(), lookup_.end());

    MultiIndex sum(nvars);
    for (std::size_t a = 0; a < indices_.size(); ++a) {
        const std::size_t limit = prefix_size(order - degrees_[a]);
        for (std::size_t b = 0; b < limit; ++b) {
            for (int v = 0; v < nvars; ++v) sum[v] = indices_[a][v] + indices_[b][v];
            products_.push_back({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b),
                                 static_cast<std::uint32_t>(position(sum))});
        }
    }

    derivative_maps_.resize(nvars);
    if (order > 0) {
        const std::size_t lower = prefix_size(order - 1);
        MultiIndex shifted(nvars);
        for (int v = 0; v < nvars; ++v) {
            derivative_maps_[v].reserve(lower);
            for (std::size_t p = 0; p < lower; ++p) {
                shifted = indices_[p];
                shifted[v] += 1;
                derivative_maps_[v].push_back(
                    {static_cast<std::uint32_t>(position(shifted)), static_cast<double>(shifted[v])});
            }
        }
    }
}

std::shared_ptr<const JetLayout> JetLayout::get(int nvars, int order) {
    static std::mutex mutex;
    static std::map<std::pair<int, int>, std::shared_ptr<const JetLayout>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto& slot = cache[{nvars, order}];
    if (!slot) slot = std::make_shared<const JetLayout>(nvars, order);
    return slot;
}

std::uint64_t JetLayout::key(const MultiIndex& a) const {
    std::uint64_t k = 0;
    for (int v = nvars_ - 1; v >= 0; --v) k = k * (kMaxJetOrder + 1) + static_cast<std::uint64_t>(a[v]);
    return k;
}

std::ptrdiff_t JetLayout::position(const MultiIndex& a) const {
    if (static_cast<int>(a.size()) != nvars_) throw DimensionMismatch("multi-index has wrong length");
    int deg = 0;
    for (int e : a) {
        if (e < 0) throw std::invalid_argument("negative multi-index entry");
        deg += e;
    }
    if (deg > order_) return -1;
    const std::uint64_t k = key(a);
    auto it = std::lower_bound(lookup_.begin(), lookup_.end(), std::make_pair(k, std::uint32_t{0}));
    return static_cast<std::ptrdiff_t>(it->second);
}

std::size_t JetLayout::prefix_size(int d) const {
    if (d < 0) return 0;
    if (d > order_) d = order_;
    return degree_offsets_[d + 1];
}

// ---------------------------------------------------------------------------

JetScalar::JetScalar(std::shared_ptr<const JetLayout> layout, double value)
    : layout_(std::move(layout)), coeffs_(layout_->size(), 0.0) {
    coeffs_[0] = value;
}

JetScalar::JetScalar(std::shared_ptr<const JetLayout> layout, std::vector<double> coeffs)
    : layout_(std::move(layout)), coeffs_(std::move(coeffs)) {}

JetScalar JetScalar::variable(std::shared_ptr<const JetLayout> layout, int var, double value) {
    if (var < 0 || var >= layout->nvars()) throw std::out_of_range("jet variable index out of range");
    JetScalar v(layout, value);
    if (layout->order() >= 1) v.coeffs_[1 + static_cast<std::size_t>(var)] = 1.0;
    return v;
}

double JetScalar::coefficient(const MultiIndex& a) const {
    const auto p = layout_->position(a);
    return p < 0 ? 0.0 : coeffs_[static_cast<std::size_t>(p)];
}

JetScalar JetScalar::truncated(int order) const {
    if (order >= layout_->order()) return *this;
    auto layout = JetLayout::get(layout_->nvars(), order);
    std::vector<double> c(coeffs_.begin(), coeffs_.begin() + static_cast<std::ptrdiff_t>(layout->size()));
    return JetScalar(std::move(layout), std::move(c));
}

namespace {

void require_same_vars(const JetScalar& a, const JetScalar& b) {
    if (a.nvars() != b.nvars()) throw DimensionMismatch("jets over different variable sets");
}

} // namespace

JetScalar& JetScalar::operator+=(const JetScalar& rhs) {
    require_same_vars(*this, rhs);
    if (rhs.order() < order()) *this = truncated(rhs.order());
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += rhs.coeffs_[i];
    return *this;
}

JetScalar& JetScalar::operator-=(const JetScalar& rhs) {
    require_same_vars(*this, rhs);
    if (rhs.order() < order()) *this = truncated(rhs.order());
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= rhs.coeffs_[i];
    return *this;
}

JetScalar& JetScalar::operator*=(const JetScalar& rhs) { return *this = *this * rhs; }
JetScalar& JetScalar::operator/=(const JetScalar& rhs) { return *this = *this / rhs; }

JetScalar& JetScalar::operator+=(double rhs) {
    coeffs_[0] += rhs;
    return *this;
}

JetScalar& JetScalar::operator-=(double rhs) {
    coeffs_[0] -= rhs;
    return *this;
}

JetScalar& JetScalar::operator*=(double rhs) {
    for (double& c : coeffs_) c *= rhs;
    return *this;
}

JetScalar& JetScalar::operator/=(double rhs) {
    if (rhs == 0.0) throw DomainError("jet division by zero");
    for (double& c : coeffs_) c /= rhs;
    return *this;
}

JetScalar JetScalar::operator-() const {
    JetScalar r = *this;
    for (double& c : r.coeffs_) c = -c;
    return r;
}

JetScalar operator*(const JetScalar& lhs, const JetScalar& rhs) {
    require_same_vars(lhs, rhs);
    const auto& layout = lhs.order() <= rhs.order() ? lhs.layout_ : rhs.layout_;
    std::vector<double> out(layout->size(), 0.0);
    const double* a = lhs.coeffs_.data();
    const double* b = rhs.coeffs_.data();
    for (const auto& t : layout->products()) out[t.out] += a[t.lhs] * b[t.rhs];
    return JetScalar(layout, std::move(out));
}

JetScalar operator/(const JetScalar& lhs, const JetScalar& rhs) { return lhs * reciprocal(rhs); }

JetScalar operator/(double lhs, const JetScalar& rhs) { return reciprocal(rhs) * lhs; }

// ---------------------------------------------------------------------------

double extract_derivative(const JetScalar& f, const MultiIndex& a) {
    const auto p = f.layout()->position(a);
    if (p < 0) throw std::out_of_range("multi-index degree exceeds the jet truncation order");
    const auto pos = static_cast<std::size_t>(p);
    return f.layout()->factorial_weight(pos) * f.coefficients()[pos];
}

double derivative(const JetScalar& f, std::initializer_list<int> vars) {
    MultiIndex a(static_cast<std::size_t>(f.nvars()), 0);
    for (int v : vars) {
        if (v < 0 || v >= f.nvars()) throw std::out_of_range("jet variable index out of range");
        ++a[static_cast<std::size_t>(v)];
    }
    return extract_derivative(f, a);
}

JetScalar differentiate(const JetScalar& f, int var) {
    if (var < 0 || var >= f.nvars()) throw std::out_of_range("jet variable index out of range");
    if (f.order() == 0) throw std::out_of_range("cannot differentiate an order-0 jet");
    auto layout = JetLayout::get(f.nvars(), f.order() - 1);
    const auto& map = f.layout_->derivative_map(var);
    std::vector<double> out(layout->size());
    for (std::size_t p = 0; p < out.size(); ++p) out[p] = map[p].factor * f.coeffs_[map[p].source];
    return JetScalar(std::move(layout), std::move(out));
}

JetScalar compose(const JetScalar& u, std::span<const double> taylor) {
    // Horner in the nilpotent increment du = u - u(0).
    JetScalar du = u;
    du.coeffs_[0] = 0.0;
    const int k = std::min<int>(u.order(), static_cast<int>(taylor.size()) - 1);
    JetScalar r(u.layout_, taylor[static_cast<std::size_t>(k)]);
    for (int i = k - 1; i >= 0; --i) {
        r = r * du;
        r.coeffs_[0] += taylor[static_cast<std::size_t>(i)];
    }
    return r;
}

// Taylor coefficients f^(k)(u0)/k! for k = 0..order.
namespace {

using Taylor = std::array<double, kMaxJetOrder + 1>;

std::span<const double> head(const Taylor& t, int order) {
    return std::span<const double>(t.data(), static_cast<std::size_t>(order) + 1);
}

} // namespace

JetScalar exp(const JetScalar& u) {
    Taylor t{};
    const double e = std::exp(u.value());
    for (int k = 0; k <= u.order(); ++k) t[k] = e / factorial(k);
    return compose(u, head(t, u.order()));
}

JetScalar log(const JetScalar& u) {
    const double u0 = u.value();
    if (!(u0 > 0.0)) throw DomainError("log of a nonpositive value");
    Taylor t{};
    t[0] = std::log(u0);
    double p = 1.0;
    for (int k = 1; k <= u.order(); ++k) {
        p /= u0;
        t[k] = ((k % 2 == 1) ? 1.0 : -1.0) * p / k;
    }
    return compose(u, head(t, u.order()));
}

JetScalar sqrt(const JetScalar& u) {
    if (!(u.value() > 0.0)) throw DomainError("sqrt of a nonpositive value");
    return pow(u, 0.5);
}

JetScalar sin(const JetScalar& u) {
    Taylor t{};
    const double s = std::sin(u.value());
    const double c = std::cos(u.value());
    const double cycle[4] = {s, c, -s, -c};
    for (int k = 0; k <= u.order(); ++k) t[k] = cycle[k % 4] / factorial(k);
    return compose(u, head(t, u.order()));
}

JetScalar cos(const JetScalar& u) {
    Taylor t{};
    const double s = std::sin(u.value());
    const double c = std::cos(u.value());
    const double cycle[4] = {c, -s, -c, s};
    for (int k = 0; k <= u.order(); ++k) t[k] = cycle[k % 4] / factorial(k);
    return compose(u, head(t, u.order()));
}

JetScalar reciprocal(const JetScalar& u) {
    const double u0 = u.value();
    if (u0 == 0.0) throw DomainError("division by a jet with zero value part");
    Taylor t{};
    double p = 1.0 / u0;
    for (int k = 0; k <= u.order(); ++k) {
        t[k] = ((k % 2 == 0) ? 1.0 : -1.0) * p;
        p /= u0;
    }
    return compose(u, head(t, u.order()));
}

JetScalar pow(const JetScalar& u, double p) {
    const double rounded = std::round(p);
    if (rounded == p && std::abs(p) <= 64.0) {
        // Integer exponents are valid for any sign of the base.
        const int n = static_cast<int>(std::abs(rounded));
        JetScalar result = u.constant(1.0);
        JetScalar base = u;
        for (int e = n; e > 0; e >>= 1) {
            if (e & 1) result = result * base;
            if (e > 1) base = base * base;
        }
        return rounded < 0 ? reciprocal(result) : result;
    }
    const double u0 = u.value();
    if (!(u0 > 0.0)) throw DomainError("fractional power of a nonpositive base");
    Taylor t{};
    double falling = 1.0;
    for (int k = 0; k <= u.order(); ++k) {
        t[k] = falling * std::pow(u0, p - k) / factorial(k);
        falling *= (p - k);
    }
    return compose(u, head(t, u.order()));
}

JetScalar pow(const JetScalar& u, const JetScalar& p) {
    bool constant_exponent = true;
    const auto c = p.coefficients();
    for (std::size_t i = 1; i < c.size(); ++i) constant_exponent = constant_exponent && c[i] == 0.0;
    if (constant_exponent) return pow(u, p.value());
    if (!(u.value() > 0.0)) throw DomainError("variable power of a nonpositive base");
    return exp(p * log(u));
}

// ---------------------------------------------------------------------------

std::vector<JetScalar> seed(const TangentSample& sample, int order, SeedMode mode) {
    if (order < 2 || order > kMaxJetOrder)
        throw std::invalid_argument("seed order must lie in [2, " + std::to_string(kMaxJetOrder) + "]");
    const auto n = sample.x.size();
    if (n == 0 || sample.y.size() != n) throw DimensionMismatch("chart and fiber dimensions differ");

    std::vector<JetScalar> vars;
    vars.reserve(static_cast<std::size_t>(2 * n));
    if (mode == SeedMode::chart_and_fiber) {
        auto layout = JetLayout::get(static_cast<int>(2 * n), order);
        for (Eigen::Index i = 0; i < n; ++i) vars.push_back(JetScalar::variable(layout, static_cast<int>(i), sample.x[i]));
        for (Eigen::Index i = 0; i < n; ++i)
            vars.push_back(JetScalar::variable(layout, static_cast<int>(n + i), sample.y[i]));
    } else {
        auto layout = JetLayout::get(static_cast<int>(n), order);
        for (Eigen::Index i = 0; i < n; ++i) vars.emplace_back(layout, sample.x[i]);
        for (Eigen::Index i = 0; i < n; ++i) vars.push_back(JetScalar::variable(layout, static_cast<int>(i), sample.y[i]));
    }
    return vars;
}

} // namespace finslab
