#pragma once

#include <Eigen/Core>

namespace finslab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A point x of the chart together with a fiber vector y at x.
struct TangentSample {
    Vector x;
    Vector y;

    int dimension() const noexcept { return static_cast<int>(x.size()); }
};

} // namespace finslab
