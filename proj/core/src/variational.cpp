#include "finslab/variational.hpp"

#include "finslab/conformal.hpp"
#include "finslab/connection.hpp"
#include "finslab/finite_difference.hpp"
#include "finslab/tensors.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>

namespace finslab {

namespace {

std::size_t segment_of(const std::vector<double>& t, double s) {
    auto it = std::upper_bound(t.begin(), t.end(), s);
    std::size_t i = it == t.begin() ? 0 : static_cast<std::size_t>(it - t.begin()) - 1;
    return std::min(i, t.size() - 2);
}

template <class V>
V hermite(const std::vector<double>& t, const std::vector<V>& f, const std::vector<V>& df, double s) {
    if (t.size() < 2) throw GridMismatch("interpolation needs at least two nodes");
    const std::size_t i = segment_of(t, s);
    const double h = t[i + 1] - t[i];
    const double u = (s - t[i]) / h, u2 = u * u, u3 = u2 * u;
    return (2 * u3 - 3 * u2 + 1) * f[i] + (u3 - 2 * u2 + u) * h * df[i] + (-2 * u3 + 3 * u2) * f[i + 1]
           + (u3 - u2) * h * df[i + 1];
}

std::vector<Vector> node_derivatives(const std::vector<double>& t, const std::vector<Vector>& values) {
    const std::size_t count = values.size();
    const Eigen::Index n = values.front().size();
    std::vector<Vector> out(count, Vector(n));
    std::vector<double> comp(count);
    const int width = static_cast<int>(std::min<std::size_t>(5, count));
    for (Eigen::Index k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < count; ++i) comp[i] = values[i][k];
        for (std::size_t i = 0; i < count; ++i) out[i][k] = grid_derivative(t, comp, i, 1, width);
    }
    return out;
}

double uniform_step(const std::vector<double>& t) {
    if (t.size() < 3) throw GridMismatch("quadrature needs at least three nodes");
    const double h = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
    for (std::size_t i = 1; i < t.size(); ++i)
        if (std::abs(t[i] - t[i - 1] - h) > 1e-9 * std::max(1.0, h))
            throw GridMismatch("quadrature needs a uniform grid");
    return h;
}

void require_aligned(const DiscreteCurve& c, const FieldAlongCurve& f) {
    if (f.size() != c.size() || f.t.size() != c.size()) throw GridMismatch("field is not sampled on the curve's grid");
    for (std::size_t i = 0; i < c.size(); ++i)
        if (std::abs(f.t[i] - c.time(i)) > 1e-12 * std::max(1.0, std::abs(c.time(i))))
            throw GridMismatch("field is not sampled on the curve's grid");
}

void require_lightlike(const DiscreteCurve& c, const MetricDefinition& m) {
    for (std::size_t i = 0; i < c.size(); ++i)
        if (!is_lightlike(m, c.sample(i))) throw NotLightlike("curve is not lightlike at node " + std::to_string(i));
}

/// R(X, Y)Z from the stored curvature components.
Vector apply_curvature(const LocalGeometry& geo, const Vector& X, const Vector& Y, const Vector& Z) {
    const Eigen::Index n = X.size();
    Vector XY(n * n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) XY[i * n + j] = X[i] * Y[j];
    Vector out(n);
    for (Eigen::Index l = 0; l < n; ++l) out[l] = Z.dot(geo.curvature[static_cast<std::size_t>(l)] * XY);
    return out;
}

struct NodeData {
    LocalGeometry geo;
    ScalarDerivatives lambda;
    /// Horizontal covector of lambda: g(X, grad^h lambda) = hcov . X.
    Vector hcov;
};

std::vector<NodeData> node_data(const DiscreteCurve& c, const MetricDefinition& m, const MetricDefinition& lambda,
                                LocalGeometry::Level level) {
    std::vector<NodeData> out;
    out.reserve(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        const TangentSample s = c.sample(i);
        require_admissible(m, s);
        NodeData d{local_geometry(m, s, level), scalar_derivatives(lambda, s), {}};
        d.hcov = d.lambda.dx - d.geo.N.transpose() * d.lambda.dy;
        out.push_back(std::move(d));
    }
    return out;
}

/// D_{gamma'} X at every node with chart derivatives from 5-point differences.
std::vector<Vector> covariant_derivatives(const DiscreteCurve& c, const std::vector<NodeData>& nodes,
                                          const std::vector<Vector>& X) {
    auto d = node_derivatives(c.times(), X);
    for (std::size_t i = 0; i < c.size(); ++i) d[i] += nodes[i].geo.christoffel.contract(X[i], c.velocity(i));
    return d;
}

std::vector<Vector> covariant_derivatives(const DiscreteCurve& c, const std::vector<NodeData>& nodes,
                                          const FieldAlongCurve& X) {
    std::vector<Vector> d;
    d.reserve(c.size());
    for (std::size_t i = 0; i < c.size(); ++i)
        d.push_back(X.derivative(i) + nodes[i].geo.christoffel.contract(X.values[i], c.velocity(i)));
    return d;
}

Matrix restricted_metric(const SubmanifoldPatch& P, const Matrix& g) {
    return P.tangent_basis().transpose() * g * P.tangent_basis();
}

Matrix null_space(const Matrix& A, int n) {
    if (A.rows() == 0) return Matrix::Identity(n, n);
    Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    const double tol = 1e-12 * std::max(1.0, s.size() ? s[0] : 0.0);
    int rank = 0;
    for (Eigen::Index k = 0; k < s.size(); ++k)
        if (s[k] > tol) ++rank;
    return svd.matrixV().rightCols(n - rank);
}

} // namespace

// ---------------------------------------------------------------------------

SubmanifoldPatch::SubmanifoldPatch(int n, std::vector<Expr> immersion, Vector u0, std::string name)
    : n_(n), immersion_(std::move(immersion)), u0_(std::move(u0)), name_(std::move(name)) {
    if (static_cast<int>(immersion_.size()) != n_) throw DimensionMismatch("immersion needs one component per chart coordinate");
    const int d = dimension();
    if (d >= n_) throw DimensionMismatch("submanifold dimension must be below the ambient dimension");
    for (const auto& e : immersion_)
        if (e.max_variable() >= std::max(d, 0) && e.max_variable() >= 0)
            throw DimensionMismatch("immersion references an undeclared parameter");
    point_ = Vector(n_);
    tangent_ = Matrix::Zero(n_, d);
    second_.assign(static_cast<std::size_t>(n_), Matrix::Zero(d, d));
    if (d == 0) {
        const double dummy = 0.0;
        for (int k = 0; k < n_; ++k) point_[k] = immersion_[static_cast<std::size_t>(k)].evaluate<double>({&dummy, 1});
        return;
    }
    const auto layout = JetLayout::get(d, 2);
    std::vector<JetScalar> vars;
    for (int a = 0; a < d; ++a) vars.push_back(JetScalar::variable(layout, a, u0_[a]));
    for (int k = 0; k < n_; ++k) {
        const JetScalar f = immersion_[static_cast<std::size_t>(k)].evaluate<JetScalar>(vars);
        point_[k] = f.value();
        for (int a = 0; a < d; ++a) {
            tangent_(k, a) = derivative(f, {a});
            for (int b = 0; b < d; ++b) second_[static_cast<std::size_t>(k)](a, b) = derivative(f, {a, b});
        }
    }
    Eigen::JacobiSVD<Matrix> svd(tangent_);
    const auto& s = svd.singularValues();
    if (!(s[d - 1] > 1e-10 * s[0])) throw PreconditionFailure("immersion is not regular at the basepoint");
}

SubmanifoldPatch SubmanifoldPatch::point(const Vector& p) {
    std::vector<Expr> comps;
    for (Eigen::Index k = 0; k < p.size(); ++k) comps.push_back(Expr::constant(p[k]));
    return SubmanifoldPatch(static_cast<int>(p.size()), std::move(comps), Vector(0), "point");
}

SubmanifoldPatch SubmanifoldPatch::parse(const std::vector<std::string>& components, const Vector& u0,
                                         std::string name) {
    const auto vars = VariableTable::parameters(static_cast<int>(u0.size()));
    std::vector<Expr> comps;
    for (const auto& c : components) comps.push_back(parse_expression(c, vars));
    return SubmanifoldPatch(static_cast<int>(components.size()), std::move(comps), u0, std::move(name));
}

Vector SubmanifoldPatch::tangent_coordinates(const Vector& X) const {
    const int d = dimension();
    if (X.size() != n_) throw DimensionMismatch("vector dimension does not match the patch");
    if (d == 0) {
        if (X.norm() > 1e-12) throw PreconditionFailure("nonzero vector cannot be tangent to a point");
        return Vector(0);
    }
    const Vector c = (tangent_.transpose() * tangent_).ldlt().solve(tangent_.transpose() * X);
    if ((tangent_ * c - X).norm() > 1e-8 * std::max(1.0, X.norm()))
        throw PreconditionFailure("vector is not tangent to the submanifold");
    return c;
}

void require_normal(const SubmanifoldPatch& P, const Vector& N, const MetricDefinition& m) {
    const TangentSample s{P.point(), N};
    if (!m.admissible(s)) throw PreconditionFailure("normal reference vector is not admissible");
    const Matrix g = fundamental_tensor(m, s).g;
    const double scale = std::max(1.0, g.cwiseAbs().maxCoeff()) * N.norm();
    const Matrix& T = P.tangent_basis();
    for (Eigen::Index a = 0; a < T.cols(); ++a)
        if (std::abs(N.dot(g * T.col(a))) > 1e-8 * scale * T.col(a).norm())
            throw PreconditionFailure("reference vector is not g-orthogonal to the submanifold");
    if (T.cols() == 0) return;
    const Matrix G = restricted_metric(P, g);
    Eigen::JacobiSVD<Matrix> svd(G);
    const auto& sv = svd.singularValues();
    if (!(sv[sv.size() - 1] > 1e-10 * std::max(1.0, sv[0])))
        throw PreconditionFailure("restricted metric on the submanifold is degenerate");
}

Vector tangential_part(const SubmanifoldPatch& P, const Matrix& g, const Vector& X) {
    if (P.dimension() == 0) return Vector::Zero(X.size());
    const Matrix& T = P.tangent_basis();
    const Vector c = restricted_metric(P, g).partialPivLu().solve(T.transpose() * (g * X));
    return T * c;
}

Vector second_fundamental_form(const SubmanifoldPatch& P, const Vector& N, const Vector& U, const Vector& W,
                               const MetricDefinition& m) {
    require_normal(P, N, m);
    const Vector u = P.tangent_coordinates(U);
    const Vector w = P.tangent_coordinates(W);
    const TangentSample s{P.point(), N};
    Vector Z = christoffel(m, s).contract(U, W);
    for (int k = 0; k < P.ambient_dimension(); ++k)
        if (P.dimension() > 0) Z[k] += u.dot(P.second_derivatives()[static_cast<std::size_t>(k)] * w);
    return normal_part(P, fundamental_tensor(m, s).g, Z);
}

Vector normal_second_fundamental_form(const SubmanifoldPatch& P, const Vector& N, const Vector& U,
                                      const MetricDefinition& m) {
    const int d = P.dimension();
    if (d == 0) return Vector::Zero(P.ambient_dimension());
    const Matrix g = fundamental_tensor(m, {P.point(), N}).g;
    const Matrix& T = P.tangent_basis();
    Vector rhs(d);
    for (int b = 0; b < d; ++b) rhs[b] = -N.dot(g * second_fundamental_form(P, N, U, T.col(b), m));
    return T * restricted_metric(P, g).partialPivLu().solve(rhs);
}

// ---------------------------------------------------------------------------

VariationField linear_variation(const DiscreteCurve& gamma, FieldAlongCurve W, const MetricDefinition& m) {
    require_aligned(gamma, W);
    VariationField out{std::move(W), {}};
    for (std::size_t i = 0; i < gamma.size(); ++i) {
        const TangentSample s = gamma.sample(i);
        require_admissible(m, s);
        out.transverse_acceleration.push_back(christoffel(m, s).contract(out.W.values[i], out.W.values[i]));
    }
    return out;
}

double energy_of_linear_variation(const DiscreteCurve& gamma, const FieldAlongCurve& W, double s,
                                  const MetricDefinition& lambda, const MetricDefinition& m) {
    require_aligned(gamma, W);
    const double h = uniform_step(gamma.times());
    std::vector<double> f(gamma.size());
    for (std::size_t i = 0; i < gamma.size(); ++i) {
        const TangentSample v{gamma.position(i) + s * W.values[i], gamma.velocity(i) + s * W.derivative(i)};
        f[i] = lambda.value(v) * m.value(v);
    }
    return 0.5 * simpson(f, h);
}

double first_variation(const DiscreteCurve& gamma, const VariationField& W, const MetricDefinition& lambda,
                       const MetricDefinition& m) {
    require_aligned(gamma, W.W);
    require_lightlike(gamma, m);
    const double h = uniform_step(gamma.times());
    const auto nodes = node_data(gamma, m, lambda, LocalGeometry::Level::connection);
    std::vector<Vector> lam_v;
    for (std::size_t i = 0; i < gamma.size(); ++i) lam_v.push_back(nodes[i].lambda.value * gamma.velocity(i));
    const auto D = covariant_derivatives(gamma, nodes, lam_v);
    std::vector<double> f(gamma.size());
    for (std::size_t i = 0; i < gamma.size(); ++i) f[i] = -W.W.values[i].dot(nodes[i].geo.g * D[i]);
    auto boundary = [&](std::size_t i) {
        return nodes[i].lambda.value * gamma.velocity(i).dot(nodes[i].geo.g * W.W.values[i]);
    };
    return simpson(f, h) + boundary(gamma.size() - 1) - boundary(0);
}

double second_variation(const DiscreteCurve& gamma, const VariationField& W, const MetricDefinition& lambda,
                        const MetricDefinition& m) {
    require_aligned(gamma, W.W);
    require_lightlike(gamma, m);
    if (pregeodesic_residual(gamma, m, &lambda) > 1e-5)
        throw PreconditionFailure("curve is not a geodesic of lambda L");
    const double h = uniform_step(gamma.times());
    const auto nodes = node_data(gamma, m, lambda, LocalGeometry::Level::curvature);
    const auto Wp = covariant_derivatives(gamma, nodes, W.W);
    std::vector<double> f(gamma.size());
    for (std::size_t i = 0; i < gamma.size(); ++i) {
        const auto& nd = nodes[i];
        const Matrix& g = nd.geo.g;
        const Vector& y = gamma.velocity(i);
        const Vector& w = W.W.values[i];
        const Vector R = apply_curvature(nd.geo, y, w, w);
        f[i] = nd.lambda.value * (-R.dot(g * y) + Wp[i].dot(g * Wp[i]))
               + 2.0 * Wp[i].dot(g * y) * (nd.hcov.dot(w) + nd.lambda.dy.dot(Wp[i]));
    }
    double boundary = 0.0;
    if (!W.transverse_acceleration.empty()) {
        if (W.transverse_acceleration.size() != gamma.size())
            throw GridMismatch("transverse acceleration is not sampled on the curve's grid");
        auto term = [&](std::size_t i) {
            return nodes[i].lambda.value * W.transverse_acceleration[i].dot(nodes[i].geo.g * gamma.velocity(i));
        };
        boundary = term(gamma.size() - 1) - term(0);
    }
    return simpson(f, h) + boundary;
}

double index_form(const DiscreteCurve& gamma, const FieldAlongCurve& V, const FieldAlongCurve& W,
                  const SubmanifoldPatch& P, const SubmanifoldPatch& Q, const MetricDefinition& lambda,
                  const MetricDefinition& m) {
    require_aligned(gamma, V);
    require_aligned(gamma, W);
    require_lightlike(gamma, m);
    const std::size_t last = gamma.size() - 1;
    auto at_point = [](const SubmanifoldPatch& S, const Vector& x) {
        if ((S.point() - x).norm() > 1e-9 * std::max(1.0, x.norm()))
            throw PreconditionFailure("curve endpoint does not lie on the submanifold");
    };
    at_point(P, gamma.position(0));
    at_point(Q, gamma.position(last));
    require_normal(P, gamma.velocity(0), m);
    require_normal(Q, gamma.velocity(last), m);
    P.tangent_coordinates(V.values[0]);
    P.tangent_coordinates(W.values[0]);
    Q.tangent_coordinates(V.values[last]);
    Q.tangent_coordinates(W.values[last]);

    const double h = uniform_step(gamma.times());
    const auto nodes = node_data(gamma, m, lambda, LocalGeometry::Level::curvature);
    const auto Vp = covariant_derivatives(gamma, nodes, V);
    const auto Wp = covariant_derivatives(gamma, nodes, W);
    std::vector<double> f(gamma.size());
    for (std::size_t i = 0; i < gamma.size(); ++i) {
        const auto& nd = nodes[i];
        const Matrix& g = nd.geo.g;
        const Vector& y = gamma.velocity(i);
        const Vector& v = V.values[i];
        const Vector& w = W.values[i];
        const double vy = Vp[i].dot(g * y), wy = Wp[i].dot(g * y);
        f[i] = nd.lambda.value * (-apply_curvature(nd.geo, y, v, w).dot(g * y) + Vp[i].dot(g * Wp[i]))
               + vy * nd.hcov.dot(w) + wy * nd.hcov.dot(v) + vy * nd.lambda.dy.dot(Wp[i])
               + wy * nd.lambda.dy.dot(Vp[i]);
    }
    auto boundary = [&](const SubmanifoldPatch& S, std::size_t i) {
        const Vector& y = gamma.velocity(i);
        const Vector sff = second_fundamental_form(S, y, V.values[i], W.values[i], m);
        return nodes[i].lambda.value * sff.dot(nodes[i].geo.g * y);
    };
    return simpson(f, h) + boundary(Q, last) - boundary(P, 0);
}

// ---------------------------------------------------------------------------

FieldAlongCurve JacobiSolution::field() const { return {t, J, J_dot}; }

FieldAlongCurve JacobiSolution::derivative_field() const { return {t, DJ, DJ_dot}; }

Vector JacobiSolution::value_at(double s) const { return hermite(t, J, J_dot, s); }

Vector JacobiSolution::derivative_at(double s) const { return hermite(t, DJ, DJ_dot, s); }

JacobiSolution JacobiBasis::combination(const Vector& c) const {
    JacobiSolution out;
    out.t = t;
    for (std::size_t i = 0; i < t.size(); ++i) {
        out.J.push_back(J[i] * c);
        out.DJ.push_back(DJ[i] * c);
        out.J_dot.push_back(J_dot[i] * c);
        out.DJ_dot.push_back(DJ_dot[i] * c);
    }
    return out;
}

JacobiSolution JacobiBasis::column(int k) const {
    Vector c = Vector::Zero(count());
    c[k] = 1.0;
    return combination(c);
}

Matrix JacobiBasis::value_at(double s) const { return hermite(t, J, J_dot, s); }

JacobiBasis integrate_jacobi_basis(const DiscreteCurve& geodesic, const MetricDefinition& m, const Matrix& J0,
                                   const Matrix& DJ0) {
    const int n = m.dimension();
    if (geodesic.dimension() != n || J0.rows() != n || DJ0.rows() != n || J0.cols() != DJ0.cols())
        throw DimensionMismatch("Jacobi initial data does not match the metric");
    if (geodesic.size() < 2) throw GridMismatch("Jacobi integration needs at least two nodes");

    auto coefficients = [&](const TangentSample& s, double t, Matrix& A, Matrix& K) {
        if (!m.admissible(s)) throw DomainExit(t);
        LocalGeometry geo;
        try {
            geo = local_geometry(m, s, LocalGeometry::Level::curvature);
        } catch (const DomainError&) {
            throw DomainExit(t);
        }
        A = geo.christoffel.along(s.y);
        K = geo.jacobi;
        return geo;
    };
    auto check_geodesic = [&](const LocalGeometry& geo, std::size_t i) {
        if (!geodesic.has_acceleration()) return;
        const Vector& y = geodesic.velocity(i);
        const double r = (geodesic.acceleration(i) + geo.christoffel.contract(y, y)).norm();
        if (r > 1e-6 * std::max(1.0, y.squaredNorm()))
            throw PreconditionFailure("curve is not a geodesic of the metric at node " + std::to_string(i));
    };

    JacobiBasis out;
    out.t = geodesic.times();
    Matrix A0, K0, Am, Km, A1, K1;
    check_geodesic(coefficients(geodesic.sample(0), geodesic.time(0), A0, K0), 0);
    Matrix J = J0, Y = DJ0;
    auto store = [&](const Matrix& A, const Matrix& K) {
        out.J.push_back(J);
        out.DJ.push_back(Y);
        out.J_dot.push_back(Y - A * J);
        out.DJ_dot.push_back(K * J - A * Y);
    };
    store(A0, K0);
    for (std::size_t i = 0; i + 1 < geodesic.size(); ++i) {
        const double t = geodesic.time(i);
        const double h = geodesic.time(i + 1) - t;
        coefficients(geodesic.sample_at(t + 0.5 * h), t + 0.5 * h, Am, Km);
        check_geodesic(coefficients(geodesic.sample(i + 1), geodesic.time(i + 1), A1, K1), i + 1);
        const Matrix k1J = Y - A0 * J, k1Y = K0 * J - A0 * Y;
        const Matrix J2 = J + 0.5 * h * k1J, Y2 = Y + 0.5 * h * k1Y;
        const Matrix k2J = Y2 - Am * J2, k2Y = Km * J2 - Am * Y2;
        const Matrix J3 = J + 0.5 * h * k2J, Y3 = Y + 0.5 * h * k2Y;
        const Matrix k3J = Y3 - Am * J3, k3Y = Km * J3 - Am * Y3;
        const Matrix J4 = J + h * k3J, Y4 = Y + h * k3Y;
        const Matrix k4J = Y4 - A1 * J4, k4Y = K1 * J4 - A1 * Y4;
        J += h / 6.0 * (k1J + 2.0 * k2J + 2.0 * k3J + k4J);
        Y += h / 6.0 * (k1Y + 2.0 * k2Y + 2.0 * k3Y + k4Y);
        store(A1, K1);
        A0 = A1;
        K0 = K1;
    }
    return out;
}

JacobiSolution integrate_jacobi(const DiscreteCurve& geodesic, const MetricDefinition& m, const Vector& J0,
                                const Vector& DJ0) {
    return integrate_jacobi_basis(geodesic, m, J0, DJ0).column(0);
}

void p_jacobi_initial_data(const SubmanifoldPatch& P, const Vector& N, const MetricDefinition& m, Matrix& J0,
                           Matrix& DJ0) {
    require_normal(P, N, m);
    const int n = m.dimension();
    const int d = P.dimension();
    const Matrix g = fundamental_tensor(m, {P.point(), N}).g;
    const Matrix& T = P.tangent_basis();
    J0 = Matrix::Zero(n, n);
    DJ0 = Matrix::Zero(n, n);
    for (int a = 0; a < d; ++a) {
        J0.col(a) = T.col(a);
        DJ0.col(a) = normal_second_fundamental_form(P, N, T.col(a), m);
    }
    // g-orthogonal complement of TP: the part also orthogonal to N first, then
    // one transversal direction.
    const Matrix K0 = null_space(T.transpose() * g, n);
    Matrix A1(d + 1, n);
    A1.topRows(d) = T.transpose() * g;
    A1.row(d) = (g * N).transpose();
    const Matrix K1 = null_space(A1, n);
    Vector extra = Vector::Zero(n);
    for (Eigen::Index k = 0; k < K0.cols(); ++k) {
        const Vector r = K0.col(k) - K1 * (K1.transpose() * K0.col(k));
        if (r.norm() > extra.norm()) extra = r;
    }
    if (K1.cols() + 1 != n - d || extra.norm() < 1e-8)
        throw PreconditionFailure("cannot build a normal complement for the submanifold");
    for (Eigen::Index k = 0; k < K1.cols(); ++k) DJ0.col(d + k) = K1.col(k);
    DJ0.col(n - 1) = extra.normalized();
}

FocalSearch find_focal_points(const DiscreteCurve& geodesic, const SubmanifoldPatch& P, const MetricDefinition& m) {
    if ((P.point() - geodesic.position(0)).norm() > 1e-9 * std::max(1.0, P.point().norm()))
        throw PreconditionFailure("geodesic does not start on the submanifold");
    Matrix J0, DJ0;
    p_jacobi_initial_data(P, geodesic.velocity(0), m, J0, DJ0);
    FocalSearch out;
    out.tangent_fields = P.dimension();
    out.basis = integrate_jacobi_basis(geodesic, m, J0, DJ0);
    const auto& basis = out.basis;
    const auto& t = basis.t;
    const std::size_t count = t.size();

    auto ratio_of = [](const Matrix& M) {
        Eigen::JacobiSVD<Matrix> svd(M);
        const auto& s = svd.singularValues();
        return s[0] > 0.0 ? s[s.size() - 1] / s[0] : 0.0;
    };
    std::vector<double> det(count), ratio(count);
    for (std::size_t i = 0; i < count; ++i) {
        det[i] = basis.J[i].determinant();
        ratio[i] = ratio_of(basis.J[i]);
    }

    std::vector<double> roots;
    std::vector<bool> bracketed(count, false);
    for (std::size_t i = 1; i + 1 < count; ++i) {
        if (!(det[i] * det[i + 1] < 0.0 || (det[i + 1] == 0.0 && det[i] != 0.0))) continue;
        double lo = t[i], hi = t[i + 1], dlo = det[i];
        for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, std::abs(hi)); ++it) {
            const double mid = 0.5 * (lo + hi);
            const double dm = basis.value_at(mid).determinant();
            if (dm == 0.0) {
                lo = hi = mid;
                break;
            }
            if ((dm < 0.0) == (dlo < 0.0)) {
                lo = mid;
                dlo = dm;
            } else {
                hi = mid;
            }
        }
        roots.push_back(0.5 * (lo + hi));
        bracketed[i] = bracketed[i + 1] = true;
    }
    // Even-multiplicity zeros leave det with one sign; catch them as minima.
    const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
    for (std::size_t i = 2; i + 1 < count; ++i) {
        if (bracketed[i] || bracketed[i - 1] || bracketed[i + 1]) continue;
        if (!(ratio[i] < ratio[i - 1] && ratio[i] <= ratio[i + 1] && ratio[i] < 1e-2)) continue;
        double a = t[i - 1], b = t[i + 1];
        double c = b - golden * (b - a), d = a + golden * (b - a);
        double fc = ratio_of(basis.value_at(c)), fd = ratio_of(basis.value_at(d));
        while (b - a > 1e-12 * std::max(1.0, std::abs(b))) {
            if (fc < fd) {
                b = d;
                d = c;
                fd = fc;
                c = b - golden * (b - a);
                fc = ratio_of(basis.value_at(c));
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + golden * (b - a);
                fd = ratio_of(basis.value_at(d));
            }
        }
        const double tm = 0.5 * (a + b);
        if (ratio_of(basis.value_at(tm)) < 1e-6) roots.push_back(tm);
    }
    std::sort(roots.begin(), roots.end());

    for (double r : roots) {
        Eigen::JacobiSVD<Matrix> svd(basis.value_at(r), Eigen::ComputeFullV);
        const auto& s = svd.singularValues();
        int mult = 0;
        for (Eigen::Index k = 0; k < s.size(); ++k)
            if (s[k] <= kRankTolerance * s[0]) ++mult;
        if (mult == 0) continue;
        FocalPoint fp;
        fp.parameter = r;
        fp.multiplicity = mult;
        fp.relative_singular_value = s[s.size() - 1] / s[0];
        fp.kernel = svd.matrixV().rightCols(mult);
        out.points.push_back(std::move(fp));
    }
    return out;
}

// ---------------------------------------------------------------------------

TransferResult transfer_jacobi(const JacobiSolution& Jtilde, const DiscreteCurve& gamma, const Reparametrization& phi,
                               const MetricDefinition& lambda, const MetricDefinition& m) {
    if (phi.mu.size() < 2 || Jtilde.size() < 2) throw InconsistentReparametrization("empty reparametrization");
    const double a = gamma.t_begin(), b = gamma.t_end();
    const double mu_scale = std::max(1.0, std::abs(phi.mu.back() - phi.mu.front()));
    if (std::abs(Jtilde.t.front() - phi.mu.front()) > 1e-9 * mu_scale
        || std::abs(Jtilde.t.back() - phi.mu.back()) > 1e-9 * mu_scale)
        throw InconsistentReparametrization("Jacobi field and reparametrization cover different parameter ranges");
    const double t_scale = std::max(1.0, b - a);
    if (std::abs(phi.phi.front() - a) > 1e-9 * t_scale || std::abs(phi.phi.back() - b) > 1e-6 * t_scale)
        throw InconsistentReparametrization("reparametrization does not map onto the curve's parameter range");

    const std::size_t count = gamma.size();
    const auto& t = gamma.times();
    TransferResult out;
    auto& J = out.pulled;
    auto& V = out.transferred;
    J.t = V.t = t;
    std::vector<double> f(count), lam(count);
    std::vector<Vector> Dgg(count);
    std::vector<Matrix> A(count);
    const std::vector<Vector> acc = gamma.has_acceleration() ? std::vector<Vector>{}
                                                             : node_derivatives(t, velocity_field(gamma).values);
    for (std::size_t i = 0; i < count; ++i) {
        const TangentSample s = gamma.sample(i);
        require_admissible(m, s);
        const LocalGeometry geo = local_geometry(m, s, LocalGeometry::Level::connection);
        const ScalarDerivatives ld = scalar_derivatives(lambda, s);
        const Vector hcov = ld.dx - geo.N.transpose() * ld.dy;
        const double mu = std::clamp(phi.inverse(t[i]), phi.mu.front(), phi.mu.back());
        J.J.push_back(Jtilde.value_at(mu));
        J.DJ.push_back(Jtilde.derivative_at(mu) / ld.value);
        out.source.push_back(hcov.dot(J.J.back()) + ld.dy.dot(J.DJ.back()));
        lam[i] = ld.value;
        f[i] = out.source.back() / ld.value;
        A[i] = geo.christoffel.along(s.y);
        Dgg[i] = (gamma.has_acceleration() ? gamma.acceleration(i) : acc[i]) + geo.christoffel.contract(s.y, s.y);
    }

    // h' = C - s / lambda with C fixed by h(b) = 0; end-corrected trapezoid.
    std::vector<double> I(count, 0.0);
    for (std::size_t i = 0; i + 1 < count; ++i) {
        const double dt = t[i + 1] - t[i];
        const double f0 = grid_derivative(t, f, i, 1, static_cast<int>(std::min<std::size_t>(5, count)));
        const double f1 = grid_derivative(t, f, i + 1, 1, static_cast<int>(std::min<std::size_t>(5, count)));
        I[i + 1] = I[i] + 0.5 * dt * (f[i] + f[i + 1]) + dt * dt / 12.0 * (f0 - f1);
    }
    const double C = I.back() / (b - a);
    for (std::size_t i = 0; i < count; ++i) {
        out.h.push_back(C * (t[i] - a) - I[i]);
        out.h_dot.push_back(C - f[i]);
    }
    out.h.front() = 0.0;
    out.h.back() = 0.0;

    for (std::size_t i = 0; i < count; ++i) {
        const Vector& y = gamma.velocity(i);
        J.J_dot.push_back(J.DJ[i] - A[i] * J.J[i]);
        V.J.push_back(J.J[i] + out.h[i] * y);
        V.DJ.push_back(J.DJ[i] + out.h_dot[i] * y + out.h[i] * Dgg[i]);
        V.J_dot.push_back(V.DJ[i] - A[i] * V.J[i]);
    }
    J.DJ_dot = node_derivatives(t, J.DJ);
    V.DJ_dot = node_derivatives(t, V.DJ);
    return out;
}

double jacobi_characterization_residual(const DiscreteCurve& gamma, const JacobiSolution& V,
                                        const MetricDefinition& lambda, const MetricDefinition& m) {
    require_aligned(gamma, V.field());
    const auto nodes = node_data(gamma, m, lambda, LocalGeometry::Level::curvature);
    const std::size_t count = gamma.size();
    std::vector<Vector> X1, X2, X3, X4, gradh;
    for (std::size_t i = 0; i < count; ++i) {
        const auto& nd = nodes[i];
        const Vector& y = gamma.velocity(i);
        const Vector gradv = nd.geo.g_inv * nd.lambda.dy;
        const double vy = V.DJ[i].dot(nd.geo.g * y);
        gradh.push_back(nd.geo.g_inv * nd.hcov);
        X1.push_back(nd.lambda.value * V.DJ[i]);
        X2.push_back(nd.hcov.dot(V.J[i]) * y);
        X3.push_back(vy * gradv);
        X4.push_back(nd.lambda.dy.dot(V.DJ[i]) * y);
    }
    const auto D1 = covariant_derivatives(gamma, nodes, X1);
    const auto D2 = covariant_derivatives(gamma, nodes, X2);
    const auto D3 = covariant_derivatives(gamma, nodes, X3);
    const auto D4 = covariant_derivatives(gamma, nodes, X4);
    double worst = 0.0;
    for (std::size_t i = 2; i + 2 < count; ++i) {
        const auto& nd = nodes[i];
        const Vector& y = gamma.velocity(i);
        const double vy = V.DJ[i].dot(nd.geo.g * y);
        const Vector r = nd.lambda.value * (nd.geo.jacobi * V.J[i]) - D1[i] + vy * gradh[i] - D2[i] - D3[i] - D4[i];
        worst = std::max(worst, r.norm());
    }
    return worst;
}

double boundary_residual(const DiscreteCurve& gamma, const JacobiSolution& V, const SubmanifoldPatch& P,
                         const std::optional<SubmanifoldPatch>& Q, const MetricDefinition& lambda,
                         const MetricDefinition& m) {
    require_aligned(gamma, V.field());
    auto side = [&](const SubmanifoldPatch& S, std::size_t i) {
        const TangentSample s = gamma.sample(i);
        const Matrix g = fundamental_tensor(m, s).g;
        const ScalarDerivatives ld = scalar_derivatives(lambda, s);
        const Vector shape = normal_second_fundamental_form(S, s.y, V.J[i], m);
        const double vy = V.DJ[i].dot(g * s.y);
        double worst = 0.0;
        const Matrix& T = S.tangent_basis();
        for (Eigen::Index a = 0; a < T.cols(); ++a) {
            const Vector W = T.col(a).normalized();
            worst = std::max(worst, std::abs(ld.value * (V.DJ[i] - shape).dot(g * W) + vy * ld.dy.dot(W)));
        }
        return worst;
    };
    double worst = side(P, 0);
    if (Q) worst = std::max(worst, side(*Q, gamma.size() - 1));
    return worst;
}

double conformal_jacobi_residual(const DiscreteCurve& gamma, const JacobiSolution& J, const MetricDefinition& lambda,
                                 const MetricDefinition& m) {
    require_aligned(gamma, J.field());
    const auto nodes = node_data(gamma, m, lambda, LocalGeometry::Level::curvature);
    std::vector<Vector> X;
    for (std::size_t i = 0; i < gamma.size(); ++i) X.push_back(nodes[i].lambda.value * J.DJ[i]);
    const auto D = covariant_derivatives(gamma, nodes, X);
    double worst = 0.0;
    for (std::size_t i = 2; i + 2 < gamma.size(); ++i)
        worst = std::max(worst, (D[i] - nodes[i].lambda.value * (nodes[i].geo.jacobi * J.J[i])).norm());
    return worst;
}

double kernel_pairing(const DiscreteCurve& geodesic, const JacobiSolution& J, const MetricDefinition& m) {
    require_aligned(geodesic, J.field());
    double worst = 0.0;
    for (std::size_t i = 0; i < geodesic.size(); ++i)
        worst = std::max(worst, std::abs(legendre(m, geodesic.sample(i)).dot(J.DJ[i])));
    return worst;
}

// ---------------------------------------------------------------------------

CorrespondenceReport verify_focal_correspondence(const DiscreteCurve& gamma, const SubmanifoldPatch& P,
                                                 const MetricDefinition& lambda, const MetricDefinition& m) {
    CorrespondenceReport out;
    const double span = conformal_parameter_length(gamma, lambda);
    const double h_mu = span / static_cast<double>(gamma.size() - 1);
    out.reparametrization = reparametrize_conformal(gamma, m, lambda, 0.0, span, h_mu);
    const auto& phi = out.reparametrization.phi;
    out.base = find_focal_points(out.reparametrization.curve, P, m);
    out.scaled = find_focal_points(gamma, P, conformal_product(m, lambda));

    const double nan = std::numeric_limits<double>::quiet_NaN();
    const double inf = std::numeric_limits<double>::infinity();
    bool all_paired = true;
    for (const auto& fp : out.base.points) {
        const double image = phi.at(fp.parameter);
        FocalRecord r{"L", fp.parameter, fp.multiplicity, nan, inf};
        for (const auto& other : out.scaled.points) {
            const double e = std::abs(other.parameter - image);
            if (e < r.pairing_error) {
                r.pairing_error = e;
                r.paired_parameter = other.parameter;
                out.multiplicities_match = out.multiplicities_match && other.multiplicity == fp.multiplicity;
            }
        }
        out.records.push_back(r);
    }
    for (const auto& fp : out.scaled.points) {
        FocalRecord r{"lambdaL", fp.parameter, fp.multiplicity, nan, inf};
        for (const auto& other : out.base.points) {
            const double e = std::abs(phi.at(other.parameter) - fp.parameter);
            if (e < r.pairing_error) {
                r.pairing_error = e;
                r.paired_parameter = other.parameter;
                out.multiplicities_match = out.multiplicities_match && other.multiplicity == fp.multiplicity;
            }
        }
        out.records.push_back(r);
    }
    for (const auto& r : out.records) {
        all_paired = all_paired && r.pairing_error <= kPairingTolerance;
        out.max_pairing_error = std::max(out.max_pairing_error, r.pairing_error);
    }
    out.pass = all_paired && out.multiplicities_match;
    return out;
}

} // namespace finslab
