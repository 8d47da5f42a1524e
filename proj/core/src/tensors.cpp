#include "finslab/tensors.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <array>
#include <cmath>

namespace finslab {

void require_admissible(const MetricDefinition& m, const TangentSample& v) {
    if (!m.admissible(v))
        throw InadmissibleSample("sample lies outside the domain of " + (m.name().empty() ? std::string("the metric") : m.name()));
}

FundamentalTensor fundamental_tensor(const MetricDefinition& m, const TangentSample& v) {
    require_admissible(m, v);
    const int n = m.dimension();
    const JetScalar L = m.jet(v, 2, SeedMode::fiber_only);
    Matrix g(n, n);
    MultiIndex a(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            ++a[static_cast<std::size_t>(i)];
            ++a[static_cast<std::size_t>(j)];
            g(i, j) = g(j, i) = 0.5 * extract_derivative(L, a);
            --a[static_cast<std::size_t>(i)];
            --a[static_cast<std::size_t>(j)];
        }
    return {g, v};
}

double CartanTensor::operator()(const Vector& u, const Vector& v, const Vector& w) const {
    return v.dot(contract(u) * w);
}

Matrix CartanTensor::contract(const Vector& u) const {
    const auto n = static_cast<Eigen::Index>(components.size());
    Matrix out = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) out += u[i] * components[static_cast<std::size_t>(i)];
    return out;
}

CartanTensor cartan_tensor(const MetricDefinition& m, const TangentSample& v) {
    require_admissible(m, v);
    const int n = m.dimension();
    const JetScalar L = m.jet(v, 3, SeedMode::fiber_only);
    CartanTensor c;
    c.basepoint = v;
    c.components.assign(static_cast<std::size_t>(n), Matrix::Zero(n, n));
    MultiIndex a(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                ++a[static_cast<std::size_t>(i)];
                ++a[static_cast<std::size_t>(j)];
                ++a[static_cast<std::size_t>(k)];
                c.components[static_cast<std::size_t>(i)](j, k) = 0.25 * extract_derivative(L, a);
                --a[static_cast<std::size_t>(i)];
                --a[static_cast<std::size_t>(j)];
                --a[static_cast<std::size_t>(k)];
            }
    // One coefficient per multi-index, so all permutations read the same entry.
    double drift = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                std::array<int, 3> p{i, j, k};
                const double ref = c.components[static_cast<std::size_t>(i)](j, k);
                std::sort(p.begin(), p.end());
                do {
                    drift = std::max(drift, std::abs(c.components[static_cast<std::size_t>(p[0])](p[1], p[2]) - ref));
                } while (std::next_permutation(p.begin(), p.end()));
            }
    c.symmetry_drift = drift;
    return c;
}

Vector legendre(const MetricDefinition& m, const TangentSample& v) {
    require_admissible(m, v);
    const int n = m.dimension();
    const JetScalar L = m.jet(v, 2, SeedMode::fiber_only);
    Vector out(n);
    MultiIndex a(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i) {
        a[static_cast<std::size_t>(i)] = 1;
        out[i] = 0.5 * extract_derivative(L, a);
        a[static_cast<std::size_t>(i)] = 0;
    }
    return out;
}

double nondegeneracy(const Matrix& g) {
    const double scale = g.cwiseAbs().maxCoeff();
    if (!(scale > 0.0)) return 0.0;
    return std::abs((g / scale).determinant());
}

Matrix inverse_metric(const Matrix& g) {
    if (!(nondegeneracy(g) > kNondegeneracyTolerance)) throw SingularMetric("fundamental tensor is degenerate");
    return Eigen::PartialPivLU<Matrix>(g).inverse();
}

} // namespace finslab
