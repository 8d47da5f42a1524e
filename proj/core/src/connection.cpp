#include "finslab/connection.hpp"

#include "finslab/jets.hpp"
#include "finslab/tensors.hpp"

#include <cmath>

namespace finslab {

Vector ChristoffelField::contract(const Vector& X, const Vector& Y) const {
    const auto n = static_cast<Eigen::Index>(gamma.size());
    Vector out(n);
    for (Eigen::Index k = 0; k < n; ++k) out[k] = X.dot(gamma[static_cast<std::size_t>(k)] * Y);
    return out;
}

Matrix ChristoffelField::along(const Vector& u) const {
    const auto n = static_cast<Eigen::Index>(gamma.size());
    Matrix A(n, n);
    for (Eigen::Index k = 0; k < n; ++k) A.row(k) = (gamma[static_cast<std::size_t>(k)] * u).transpose();
    return A;
}

namespace {

using JetMatrix = std::vector<std::vector<JetScalar>>;
using JetVector = std::vector<JetScalar>;

// Gauss-Jordan inverse over jets, pivoting on value parts.
JetMatrix invert(JetMatrix a) {
    const std::size_t n = a.size();
    const auto& proto = a[0][0];
    JetMatrix inv(n, JetVector(n, proto.constant(0.0)));
    for (std::size_t i = 0; i < n; ++i) inv[i][i] = proto.constant(1.0);
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(a[r][c].value()) > std::abs(a[p][c].value())) p = r;
        if (a[p][c].value() == 0.0) throw SingularMetric("fundamental tensor is degenerate");
        std::swap(a[p], a[c]);
        std::swap(inv[p], inv[c]);
        const JetScalar r = reciprocal(a[c][c]);
        for (std::size_t j = 0; j < n; ++j) {
            a[c][j] = a[c][j] * r;
            inv[c][j] = inv[c][j] * r;
        }
        for (std::size_t row = 0; row < n; ++row) {
            if (row == c) continue;
            const JetScalar f = a[row][c];
            for (std::size_t j = 0; j < n; ++j) {
                a[row][j] -= f * a[c][j];
                inv[row][j] -= f * inv[c][j];
            }
        }
    }
    return inv;
}

} // namespace

LocalGeometry local_geometry(const MetricDefinition& m, const TangentSample& v, LocalGeometry::Level level) {
    require_admissible(m, v);
    const int n = m.dimension();
    const int k = static_cast<int>(level);
    const auto N_ = static_cast<std::size_t>(n);
    auto X = [](int i) { return i; };
    auto Y = [n](int i) { return n + i; };

    const auto vars = seed(v, k);
    const JetScalar L = m.body().evaluate<JetScalar>(vars);

    LocalGeometry out;
    out.basepoint = v;
    out.level = level;

    JetVector Ly, Lx;
    for (int i = 0; i < n; ++i) {
        Ly.push_back(differentiate(L, Y(i)));
        Lx.push_back(differentiate(L, X(i)));
    }
    JetMatrix g(N_, JetVector(N_, L.constant(0.0)));
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            g[i][j] = differentiate(Ly[i], Y(j)) * 0.5;
            g[j][i] = g[i][j];
        }
    out.g.resize(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out.g(i, j) = g[i][j].value();
    if (!(nondegeneracy(out.g) > kNondegeneracyTolerance)) throw SingularMetric("fundamental tensor is degenerate");
    const JetMatrix ginv = invert(g);
    out.g_inv.resize(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out.g_inv(i, j) = ginv[i][j].value();

    // Spray.
    JetVector rhs;
    for (int l = 0; l < n; ++l) {
        JetScalar r = -Lx[l].truncated(k - 2);
        for (int q = 0; q < n; ++q) r += differentiate(Ly[l], X(q)) * vars[Y(q)].truncated(k - 2);
        rhs.push_back(r);
    }
    JetVector G;
    for (int i = 0; i < n; ++i) {
        JetScalar s = L.constant(0.0).truncated(k - 2);
        for (int l = 0; l < n; ++l) s += ginv[i][l] * rhs[l];
        G.push_back(s * 0.25);
    }
    out.G.resize(n);
    for (int i = 0; i < n; ++i) out.G[i] = G[i].value();
    if (k < 3) return out;

    // Nonlinear connection and Christoffel symbols.
    JetMatrix Nj(N_);
    out.N.resize(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            Nj[i].push_back(differentiate(G[i], Y(j)));
            out.N(i, j) = Nj[i][j].value();
        }
    // dg[q][i][j] = delta g_ij / delta x^q
    std::vector<JetMatrix> dg(N_, JetMatrix(N_));
    for (int q = 0; q < n; ++q)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                JetScalar d = differentiate(g[i][j], X(q));
                for (int p = 0; p < n; ++p) d -= Nj[p][q] * differentiate(g[i][j], Y(p));
                dg[q][i].push_back(d);
            }
    std::vector<JetMatrix> gam(N_, JetMatrix(N_));
    out.christoffel.basepoint = v;
    out.christoffel.gamma.assign(N_, Matrix::Zero(n, n));
    double drift = 0.0;
    for (int c = 0; c < n; ++c)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                JetScalar s = dg[0][0][0].constant(0.0);
                for (int l = 0; l < n; ++l) s += ginv[c][l] * (dg[i][l][j] + dg[j][i][l] - dg[l][i][j]);
                gam[c][i].push_back(s * 0.5);
            }
    for (int c = 0; c < n; ++c)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                drift = std::max(drift, std::abs(gam[c][i][j].value() - gam[c][j][i].value()));
                out.christoffel.gamma[c](i, j) = 0.5 * (gam[c][i][j].value() + gam[c][j][i].value());
            }
    out.christoffel.symmetry_drift = drift;
    if (k < 4) return out;

    // Spray curvature: R^i_k = 2 dG^i/dx^k - y^j d2G^i/dx^j dy^k + 2 G^j d2G^i/dy^j dy^k - N^i_j N^j_k.
    const Vector& y = v.y;
    Matrix R(n, n);
    for (int i = 0; i < n; ++i) {
        std::vector<JetScalar> dGy;
        for (int q = 0; q < n; ++q) dGy.push_back(differentiate(G[i], Y(q)));
        for (int c = 0; c < n; ++c) {
            double r = 2.0 * derivative(G[i], {X(c)});
            for (int j = 0; j < n; ++j) {
                r -= y[j] * derivative(dGy[c], {X(j)});
                r += 2.0 * out.G[j] * derivative(dGy[c], {Y(j)});
                r -= out.N(i, j) * out.N(j, c);
            }
            R(i, c) = r;
        }
    }
    out.jacobi = -R;

    // Full curvature R^l_kij = dGamma^l_jk/dx^i - dGamma^l_ik/dx^j + Gamma^l_im Gamma^m_jk - Gamma^l_jm Gamma^m_ik,
    // with horizontal derivatives delta/delta x^i = d/dx^i - N^m_i d/dy^m.
    auto hd = [&](int l, int a, int b, int i) {
        double d = derivative(gam[l][a][b], {X(i)});
        for (int p = 0; p < n; ++p) d -= out.N(p, i) * derivative(gam[l][a][b], {Y(p)});
        return d;
    };
    const auto& Gm = out.christoffel.gamma;
    out.curvature.assign(N_, Matrix::Zero(n, n * n));
    for (int l = 0; l < n; ++l)
        for (int c = 0; c < n; ++c)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    double r = 0.5 * (hd(l, j, c, i) + hd(l, c, j, i)) - 0.5 * (hd(l, i, c, j) + hd(l, c, i, j));
                    for (int q = 0; q < n; ++q) r += Gm[l](i, q) * Gm[q](j, c) - Gm[l](j, q) * Gm[q](i, c);
                    out.curvature[l](c, i * n + j) = r;
                }
    return out;
}

SprayValue spray(const MetricDefinition& m, const TangentSample& v) {
    const auto geo = local_geometry(m, v, LocalGeometry::Level::connection);
    return {geo.G, geo.N};
}

Vector spray_coefficients(const MetricDefinition& m, const TangentSample& v) {
    return local_geometry(m, v, LocalGeometry::Level::spray).G;
}

ChristoffelField christoffel(const MetricDefinition& m, const TangentSample& v) {
    return local_geometry(m, v, LocalGeometry::Level::connection).christoffel;
}

Vector jacobi_operator(const MetricDefinition& m, const TangentSample& v, const Vector& w) {
    return local_geometry(m, v, LocalGeometry::Level::curvature).jacobi * w;
}

Vector chern_curvature(const MetricDefinition& m, const TangentSample& v, const Vector& X, const Vector& Y,
                       const Vector& Z) {
    const auto geo = local_geometry(m, v, LocalGeometry::Level::curvature);
    const int n = m.dimension();
    Vector out = Vector::Zero(n);
    for (int l = 0; l < n; ++l)
        for (int c = 0; c < n; ++c)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) out[l] += geo.curvature[l](c, i * n + j) * X[i] * Y[j] * Z[c];
    return out;
}

ScalarDerivatives scalar_derivatives(const MetricDefinition& f, const TangentSample& v) {
    require_admissible(f, v);
    const int n = f.dimension();
    const JetScalar j = f.jet(v, 2);
    ScalarDerivatives out{j.value(), Vector(n), Vector(n)};
    for (int i = 0; i < n; ++i) {
        out.dx[i] = derivative(j, {i});
        out.dy[i] = derivative(j, {n + i});
    }
    return out;
}

Vector horizontal_covector(const MetricDefinition& f, const TangentSample& v, const MetricDefinition& m) {
    if (f.dimension() != m.dimension()) throw DimensionMismatch("scalar and metric dimensions differ");
    const auto d = scalar_derivatives(f, v);
    const auto sp = spray(m, v);
    return d.dx - sp.N.transpose() * d.dy;
}

double horizontal_derivative(const MetricDefinition& f, const Vector& X, const TangentSample& v,
                             const MetricDefinition& m) {
    return horizontal_covector(f, v, m).dot(X);
}

Vector vertical_gradient(const MetricDefinition& f, const TangentSample& v, const MetricDefinition& m) {
    if (f.dimension() != m.dimension()) throw DimensionMismatch("scalar and metric dimensions differ");
    const auto geo = local_geometry(m, v, LocalGeometry::Level::spray);
    return geo.g_inv * scalar_derivatives(f, v).dy;
}

Vector horizontal_gradient(const MetricDefinition& f, const TangentSample& v, const MetricDefinition& m) {
    const auto geo = local_geometry(m, v, LocalGeometry::Level::connection);
    const auto d = scalar_derivatives(f, v);
    return geo.g_inv * (d.dx - geo.N.transpose() * d.dy);
}

} // namespace finslab
