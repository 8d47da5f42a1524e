#pragma once

// Truncated multivariate Taylor arithmetic.
//
// A JetScalar of order k in m variables stores the Taylor coefficients c_a of
// a scalar function for every multi-index a with |a| <= k, so that
//     f(z0 + dz) = sum_a c_a dz^a + O(|dz|^{k+1}).
// Partial derivatives are recovered as a! * c_a. Coefficients are kept in a
// dense table ordered by total degree, so truncating to a lower order is a
// prefix of the table.

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <memory>
#include <span>
#include <vector>

namespace finslab {

struct TangentSample;

using MultiIndex = std::vector<int>;

inline constexpr int kMaxJetOrder = 4;

class JetLayout {
public:
    struct Product {
        std::uint32_t lhs;
        std::uint32_t rhs;
        std::uint32_t out;
    };
    struct Shift {
        std::uint32_t source;
        double factor;
    };

    /// Shared, immutable layout for `nvars` variables truncated at `order` (0..4).
    static std::shared_ptr<const JetLayout> get(int nvars, int order);

    int nvars() const noexcept { return nvars_; }
    int order() const noexcept { return order_; }
    std::size_t size() const noexcept { return indices_.size(); }

    const MultiIndex& index(std::size_t position) const { return indices_[position]; }
    int degree(std::size_t position) const { return degrees_[position]; }

    /// Position of a multi-index in the table, or -1 when its degree exceeds the order.
    std::ptrdiff_t position(const MultiIndex& a) const;

    /// Number of table entries with total degree <= d.
    std::size_t prefix_size(int d) const;

    /// a! for the multi-index stored at `position`.
    double factorial_weight(std::size_t position) const { return weights_[position]; }

    const std::vector<Product>& products() const noexcept { return products_; }

    /// For d/dz_var: entry p of the order-(k-1) result is factor * c[source].
    const std::vector<Shift>& derivative_map(int var) const { return derivative_maps_[var]; }

    JetLayout(int nvars, int order);

private:
    std::uint64_t key(const MultiIndex& a) const;

    int nvars_;
    int order_;
    std::vector<MultiIndex> indices_;
    std::vector<int> degrees_;
    std::vector<double> weights_;
    std::vector<std::size_t> degree_offsets_;
    std::vector<std::pair<std::uint64_t, std::uint32_t>> lookup_;
    std::vector<Product> products_;
    std::vector<std::vector<Shift>> derivative_maps_;
};

class JetScalar {
public:
    /// Constant jet.
    JetScalar(std::shared_ptr<const JetLayout> layout, double value);

    /// Independent variable `var` with the given value part.
    static JetScalar variable(std::shared_ptr<const JetLayout> layout, int var, double value);

    double value() const noexcept { return coeffs_[0]; }
    int order() const noexcept { return layout_->order(); }
    int nvars() const noexcept { return layout_->nvars(); }
    const std::shared_ptr<const JetLayout>& layout() const noexcept { return layout_; }
    std::span<const double> coefficients() const noexcept { return coeffs_; }

    /// Raw Taylor coefficient (not factorial-normalized); zero beyond the table.
    double coefficient(const MultiIndex& a) const;

    JetScalar truncated(int order) const;

    /// A constant jet with the same layout.
    JetScalar constant(double value) const { return JetScalar(layout_, value); }

    JetScalar& operator+=(const JetScalar& rhs);
    JetScalar& operator-=(const JetScalar& rhs);
    JetScalar& operator*=(const JetScalar& rhs);
    JetScalar& operator/=(const JetScalar& rhs);
    JetScalar& operator+=(double rhs);
    JetScalar& operator-=(double rhs);
    JetScalar& operator*=(double rhs);
    JetScalar& operator/=(double rhs);

    JetScalar operator-() const;

    friend JetScalar operator+(JetScalar lhs, const JetScalar& rhs) { return lhs += rhs; }
    friend JetScalar operator-(JetScalar lhs, const JetScalar& rhs) { return lhs -= rhs; }
    friend JetScalar operator*(const JetScalar& lhs, const JetScalar& rhs);
    friend JetScalar operator/(const JetScalar& lhs, const JetScalar& rhs);
    friend JetScalar operator+(JetScalar lhs, double rhs) { return lhs += rhs; }
    friend JetScalar operator-(JetScalar lhs, double rhs) { return lhs -= rhs; }
    friend JetScalar operator*(JetScalar lhs, double rhs) { return lhs *= rhs; }
    friend JetScalar operator/(JetScalar lhs, double rhs) { return lhs /= rhs; }
    friend JetScalar operator+(double lhs, JetScalar rhs) { return rhs += lhs; }
    friend JetScalar operator-(double lhs, const JetScalar& rhs) { return -rhs + lhs; }
    friend JetScalar operator*(double lhs, JetScalar rhs) { return rhs *= lhs; }
    friend JetScalar operator/(double lhs, const JetScalar& rhs);

private:
    JetScalar(std::shared_ptr<const JetLayout> layout, std::vector<double> coeffs);
    friend JetScalar differentiate(const JetScalar& f, int var);
    friend JetScalar compose(const JetScalar& u, std::span<const double> taylor);

    std::shared_ptr<const JetLayout> layout_;
    std::vector<double> coeffs_;
};

/// Partial derivative d^a f at the expansion point (factorial-normalized).
/// Throws std::out_of_range when |a| exceeds the truncation order.
double extract_derivative(const JetScalar& f, const MultiIndex& a);

/// Same as extract_derivative, with the multi-index given as a list of
/// variable positions, e.g. {3, 3} for d^2/dz_3^2.
double derivative(const JetScalar& f, std::initializer_list<int> vars);

/// d f / dz_var as a jet of one order lower.
JetScalar differentiate(const JetScalar& f, int var);

/// sum_k taylor[k] * (u - u(0))^k, truncated at u's order.
JetScalar compose(const JetScalar& u, std::span<const double> taylor);

JetScalar exp(const JetScalar& u);
JetScalar log(const JetScalar& u);
JetScalar sqrt(const JetScalar& u);
JetScalar sin(const JetScalar& u);
JetScalar cos(const JetScalar& u);
JetScalar pow(const JetScalar& u, double p);
JetScalar pow(const JetScalar& u, const JetScalar& p);
JetScalar reciprocal(const JetScalar& u);

enum class SeedMode {
    /// 2n variables: x^0..x^{n-1} then y^0..y^{n-1}.
    chart_and_fiber,
    /// n variables y^0..y^{n-1}; chart coordinates enter as constants.
    fiber_only,
};

/// Jet variables for every chart and fiber coordinate of `sample`, in the
/// order x^0..x^{n-1}, y^0..y^{n-1}. Requires 2 <= order <= 4.
std::vector<JetScalar> seed(const TangentSample& sample, int order,
                            SeedMode mode = SeedMode::chart_and_fiber);

} // namespace finslab
