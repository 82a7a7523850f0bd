#pragma once

#include <Eigen/Dense>

namespace gssl {

using Points2 = Eigen::Matrix<double, Eigen::Dynamic, 2>;

// Radial basis of the polyharmonic spline of the given order:
// r^k for odd k, r^k log r for even k, with phi(0) = 0.
double polyharmonic_kernel(double r, int order);

// Polyharmonic spline interpolant f: R^2 -> R^2 made of a radial part plus an
// affine polynomial,
//
//   f(q) = sum_i w_i phi(|q - c_i|) + a_0 + a_1 q_x + a_2 q_y,
//
// with coefficients chosen so that f(c_i) = values_i exactly and the weights
// are orthogonal to affine functions. No smoothing term.
class PolyharmonicSpline {
 public:
  // Throws ConfigError for fewer than three centers or a non-positive order,
  // SingularSystemError when the system cannot be solved (duplicate or
  // collinear centers); its message reports the condition estimate.
  static PolyharmonicSpline fit(const Points2& centers, const Points2& values, int order);

  Points2 evaluate(const Points2& queries) const;

  const Points2& centers() const { return centers_; }
  const Points2& weights() const { return weights_; }
  // Rows: constant, x, y.
  const Eigen::Matrix<double, 3, 2>& affine() const { return affine_; }
  int order() const { return order_; }
  // Reciprocal condition estimate of the solved system.
  double rcond() const { return rcond_; }

 private:
  Points2 centers_;
  Points2 weights_;
  Eigen::Matrix<double, 3, 2> affine_;
  int order_ = 2;
  double rcond_ = 0.0;
};

Points2 polyharmonic_interpolate(const Points2& centers, const Points2& values,
                                 const Points2& queries, int order);

}  // namespace gssl
