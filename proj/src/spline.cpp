#include "gssl/spline.hpp"

#include <cmath>
#include <sstream>

#include "gssl/error.hpp"

namespace gssl {

double polyharmonic_kernel(double r, int order) {
  if (r <= 0.0) return 0.0;
  if (order % 2 == 1) return std::pow(r, order);
  return std::pow(r, order) * std::log(r);
}

PolyharmonicSpline PolyharmonicSpline::fit(const Points2& centers, const Points2& values,
                                           int order) {
  const auto n = centers.rows();
  if (order < 1) throw ConfigError("spline order must be positive");
  if (n < 3) throw ConfigError("polyharmonic spline needs at least 3 centers");
  if (values.rows() != n) throw ShapeError("spline values must match centers");

  // [ K  P ] [w]   [v]
  // [ P' 0 ] [a] = [0]
  const auto size = n + 3;
  Eigen::MatrixXd system = Eigen::MatrixXd::Zero(size, size);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      system(i, j) = polyharmonic_kernel((centers.row(i) - centers.row(j)).norm(), order);
    }
    system(i, n) = 1.0;
    system(i, n + 1) = centers(i, 0);
    system(i, n + 2) = centers(i, 1);
    system(n, i) = 1.0;
    system(n + 1, i) = centers(i, 0);
    system(n + 2, i) = centers(i, 1);
  }
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(size, 2);
  rhs.topRows(n) = values;

  Eigen::FullPivLU<Eigen::MatrixXd> lu(system);
  const double rcond = lu.rcond();
  if (!lu.isInvertible() || !(rcond > 1e-13)) {
    std::ostringstream msg;
    msg << "singular polyharmonic system: rank " << lu.rank() << " of " << size
        << ", rcond " << rcond << " (duplicate or collinear centers?)";
    throw SingularSystemError(msg.str(), rcond);
  }
  Eigen::MatrixXd solution = lu.solve(rhs);

  PolyharmonicSpline spline;
  spline.centers_ = centers;
  spline.weights_ = solution.topRows(n);
  spline.affine_ = solution.bottomRows(3);
  spline.order_ = order;
  spline.rcond_ = rcond;
  return spline;
}

Points2 PolyharmonicSpline::evaluate(const Points2& queries) const {
  Points2 out(queries.rows(), 2);
  for (Eigen::Index q = 0; q < queries.rows(); ++q) {
    const double x = queries(q, 0);
    const double y = queries(q, 1);
    Eigen::RowVector2d acc = affine_.row(0) + x * affine_.row(1) + y * affine_.row(2);
    for (Eigen::Index i = 0; i < centers_.rows(); ++i) {
      const double r = std::hypot(x - centers_(i, 0), y - centers_(i, 1));
      acc += polyharmonic_kernel(r, order_) * weights_.row(i);
    }
    out.row(q) = acc;
  }
  return out;
}

Points2 polyharmonic_interpolate(const Points2& centers, const Points2& values,
                                 const Points2& queries, int order) {
  return PolyharmonicSpline::fit(centers, values, order).evaluate(queries);
}

}  // namespace gssl
