#pragma once

// Variations of the energy of lambda L along lightlike curves, Jacobi fields,
// second fundamental forms of submanifolds and focal points.

#include "finslab/curve.hpp"
#include "finslab/expr.hpp"
#include "finslab/geodesics.hpp"
#include "finslab/metric.hpp"

#include <optional>
#include <string>
#include <vector>

namespace finslab {

/// An immersed patch u -> p(u) of dimension d in an n-dimensional chart,
/// given by expressions in u0..u{d-1}, around the parameter value u0.
class SubmanifoldPatch {
public:
    SubmanifoldPatch(int n, std::vector<Expr> immersion, Vector u0, std::string name = {});

    /// The zero-dimensional patch {p}.
    static SubmanifoldPatch point(const Vector& p);
    /// Components are DSL expressions in u0..u{d-1}.
    static SubmanifoldPatch parse(const std::vector<std::string>& components, const Vector& u0, std::string name = {});

    int ambient_dimension() const noexcept { return n_; }
    int dimension() const noexcept { return static_cast<int>(u0_.size()); }
    const Vector& parameters() const noexcept { return u0_; }
    const std::string& name() const noexcept { return name_; }
    const std::vector<Expr>& immersion() const noexcept { return immersion_; }

    /// p(u0).
    const Vector& point() const noexcept { return point_; }
    /// n x d matrix of dp/du_a.
    const Matrix& tangent_basis() const noexcept { return tangent_; }
    /// second[k](a, b) = d^2 p^k / du_a du_b.
    const std::vector<Matrix>& second_derivatives() const noexcept { return second_; }

    /// Coefficients c with tangent_basis() c = X. Throws PreconditionFailure
    /// when X is not tangent.
    Vector tangent_coordinates(const Vector& X) const;

private:
    int n_;
    std::vector<Expr> immersion_;
    Vector u0_;
    std::string name_;
    Vector point_;
    Matrix tangent_;
    std::vector<Matrix> second_;
};

/// Checks the focal preconditions at P's basepoint for reference vector N:
/// N admissible, g_N(N, T_a) = 0 for every tangent basis vector and g_N
/// restricted to TP nondegenerate. Throws PreconditionFailure.
void require_normal(const SubmanifoldPatch& P, const Vector& N, const MetricDefinition& m);

/// Tangential part of X with respect to g (restricted-metric projection onto TP).
Vector tangential_part(const SubmanifoldPatch& P, const Matrix& g, const Vector& X);
inline Vector normal_part(const SubmanifoldPatch& P, const Matrix& g, const Vector& X) {
    return X - tangential_part(P, g, X);
}

/// S_N(U, W) = nor_N(grad^N_U W), with W extended along P by constant
/// coefficients in the tangent basis.
Vector second_fundamental_form(const SubmanifoldPatch& P, const Vector& N, const Vector& U, const Vector& W,
                               const MetricDefinition& m);

/// The tangent vector S with g_N(S, X) = -g_N(N, S_N(U, X)) for every X in TP,
/// which is tan_N(grad^N_U N) for any normal extension of N.
Vector normal_second_fundamental_form(const SubmanifoldPatch& P, const Vector& N, const Vector& U,
                                      const MetricDefinition& m);

// ---------------------------------------------------------------------------

struct VariationField {
    FieldAlongCurve W;
    /// D_beta' beta' at s = 0; empty means zero.
    std::vector<Vector> transverse_acceleration;
};

/// The chart-linear variation gamma(t) + s W(t). Its transverse acceleration
/// is Gamma_{gamma'}(W, W).
VariationField linear_variation(const DiscreteCurve& gamma, FieldAlongCurve W, const MetricDefinition& m);

/// E_lambda of the chart-linear variation gamma + s W at s, by Simpson.
double energy_of_linear_variation(const DiscreteCurve& gamma, const FieldAlongCurve& W, double s,
                                  const MetricDefinition& lambda, const MetricDefinition& m);

/// int g(W, -D(lambda(gamma') gamma')) dt + [lambda(gamma') g_gamma'(gamma', W)] for a lightlike gamma.
double first_variation(const DiscreteCurve& gamma, const VariationField& W, const MetricDefinition& lambda,
                       const MetricDefinition& m);

/// Second derivative of E_lambda along a variation of a lightlike geodesic of lambda L.
double second_variation(const DiscreteCurve& gamma, const VariationField& W, const MetricDefinition& lambda,
                        const MetricDefinition& m);

/// Index form of a lightlike geodesic of lambda L joining P and Q, including
/// both second fundamental form boundary terms.
double index_form(const DiscreteCurve& gamma, const FieldAlongCurve& V, const FieldAlongCurve& W,
                  const SubmanifoldPatch& P, const SubmanifoldPatch& Q, const MetricDefinition& lambda,
                  const MetricDefinition& m);

// ---------------------------------------------------------------------------

/// A vector field along a curve together with its covariant derivative
/// D_{gamma'} J and the chart derivatives of both.
struct JacobiSolution {
    std::vector<double> t;
    std::vector<Vector> J;
    std::vector<Vector> DJ;
    std::vector<Vector> J_dot;
    std::vector<Vector> DJ_dot;

    std::size_t size() const noexcept { return t.size(); }
    /// Values with chart derivatives, for the curve utilities.
    FieldAlongCurve field() const;
    FieldAlongCurve derivative_field() const;
    /// Hermite interpolation of J and DJ.
    Vector value_at(double s) const;
    Vector derivative_at(double s) const;
};

/// n Jacobi fields integrated together; column k of every matrix is field k.
struct JacobiBasis {
    std::vector<double> t;
    std::vector<Matrix> J;
    std::vector<Matrix> DJ;
    std::vector<Matrix> J_dot;
    std::vector<Matrix> DJ_dot;

    int count() const { return J.empty() ? 0 : static_cast<int>(J.front().cols()); }
    /// Field sum_k c_k J_k.
    JacobiSolution combination(const Vector& c) const;
    JacobiSolution column(int k) const;
    /// Hermite interpolation of the value matrix.
    Matrix value_at(double s) const;
};

/// RK4 on J' = Y - Gamma(J, gamma'), Y' = R(gamma', J)gamma' - Gamma(Y, gamma'),
/// where Y = D_{gamma'} J. Connection and curvature are evaluated at the
/// dense-output state of the geodesic at every stage.
JacobiBasis integrate_jacobi_basis(const DiscreteCurve& geodesic, const MetricDefinition& m, const Matrix& J0,
                                   const Matrix& DJ0);
JacobiSolution integrate_jacobi(const DiscreteCurve& geodesic, const MetricDefinition& m, const Vector& J0,
                                const Vector& DJ0);

/// Relative singular value threshold for rank decisions.
inline constexpr double kRankTolerance = 1e-7;

struct FocalPoint {
    double parameter = 0.0;
    int multiplicity = 0;
    /// Smallest singular value over the largest at the parameter.
    double relative_singular_value = 0.0;
    /// Columns span the coefficient vectors of the vanishing basis combinations.
    Matrix kernel;
};

struct FocalSearch {
    JacobiBasis basis;
    /// Columns 0..d-1 start tangent to P; the remaining n-d start at zero.
    int tangent_fields = 0;
    std::vector<FocalPoint> points;
};

/// Initial data of a P-Jacobi basis along a geodesic leaving P with velocity N.
void p_jacobi_initial_data(const SubmanifoldPatch& P, const Vector& N, const MetricDefinition& m, Matrix& J0,
                           Matrix& DJ0);

/// P-focal points on (t_begin, t_end]: zeros of det of the basis matrix,
/// bracketed on the grid and bisected, plus near-zero minima of the relative
/// smallest singular value refined by golden section.
FocalSearch find_focal_points(const DiscreteCurve& geodesic, const SubmanifoldPatch& P, const MetricDefinition& m);

// ---------------------------------------------------------------------------

struct TransferResult {
    /// J(t) = Jtilde(phi^{-1}(t)) with J' = D_{gamma'} J.
    JacobiSolution pulled;
    /// J + h gamma'.
    JacobiSolution transferred;
    std::vector<double> h;
    std::vector<double> h_dot;
    /// g(J, grad^h lambda) + g(J', grad^v lambda).
    std::vector<double> source;
};

/// Moves a Jacobi field of the L-geodesic gamma o phi onto gamma, a lightlike
/// geodesic of lambda L, and adds h gamma' with h(a) = h(b) = 0.
TransferResult transfer_jacobi(const JacobiSolution& Jtilde, const DiscreteCurve& gamma, const Reparametrization& phi,
                               const MetricDefinition& lambda, const MetricDefinition& m);

/// max over interior nodes of the Euclidean norm of
/// lambda R(gamma', V)gamma' - (lambda V')' + g(V', gamma') grad^h lambda
/// - (g(V, grad^h lambda) gamma')' - (g(V', gamma') grad^v lambda)' - (g(V', grad^v lambda) gamma')'.
double jacobi_characterization_residual(const DiscreteCurve& gamma, const JacobiSolution& V,
                                        const MetricDefinition& lambda, const MetricDefinition& m);

/// Endpoint pairing lambda g(V' - S(V), W) + g(V', gamma') g(grad^v lambda, W)
/// over the tangent basis of P at gamma(a) and of Q at gamma(b); the maximum
/// absolute value. Q may be omitted (a point).
double boundary_residual(const DiscreteCurve& gamma, const JacobiSolution& V, const SubmanifoldPatch& P,
                         const std::optional<SubmanifoldPatch>& Q, const MetricDefinition& lambda,
                         const MetricDefinition& m);

/// max over interior nodes of |(lambda J')' - lambda R(gamma', J)gamma'|.
double conformal_jacobi_residual(const DiscreteCurve& gamma, const JacobiSolution& J, const MetricDefinition& lambda,
                                 const MetricDefinition& m);

/// max over nodes of |g_{gamma'}(D J, gamma')|.
double kernel_pairing(const DiscreteCurve& geodesic, const JacobiSolution& J, const MetricDefinition& m);

// ---------------------------------------------------------------------------

struct FocalRecord {
    /// "L" or "lambdaL".
    std::string side;
    double parameter = 0.0;
    int multiplicity = 0;
    /// Image of the parameter on the other side (phi for L, phi^{-1} for lambda L); NaN when unpaired.
    double paired_parameter = 0.0;
    double pairing_error = 0.0;
};

struct CorrespondenceReport {
    std::vector<FocalRecord> records;
    FocalSearch base;
    FocalSearch scaled;
    ConformalReparametrization reparametrization;
    double max_pairing_error = 0.0;
    bool multiplicities_match = true;
    bool pass = false;
};

inline constexpr double kPairingTolerance = 1e-4;

/// gamma is a lightlike geodesic of lambda L leaving P orthogonally. Focal
/// points of gamma o phi under L and of gamma under lambda L are paired
/// through phi.
CorrespondenceReport verify_focal_correspondence(const DiscreteCurve& gamma, const SubmanifoldPatch& P,
                                                 const MetricDefinition& lambda, const MetricDefinition& m);

} // namespace finslab
