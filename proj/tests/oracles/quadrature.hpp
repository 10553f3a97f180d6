#pragma once

#include <cmath>
#include <functional>

#include <boost/math/quadrature/tanh_sinh.hpp>

namespace oracle {

// Integral of f over [a, b] by tanh-sinh (handles the square-root endpoint singularities).
inline double integrate(const std::function<double(double)>& f, double a, double b) {
  boost::math::quadrature::tanh_sinh<double> ts;
  return ts.integrate(f, a, b);
}

// Area enclosed by p^2/2 + V(q) = b between turning points q_lo < q_hi.
inline double well_action(const std::function<double(double)>& V, double b, double q_lo, double q_hi) {
  return 2.0 * integrate([&](double q) { return std::sqrt(std::max(0.0, 2.0 * (b - V(q)))); }, q_lo, q_hi);
}

}  // namespace oracle
