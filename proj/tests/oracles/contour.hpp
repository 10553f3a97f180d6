#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "semioverlap/levelcurve.hpp"

namespace oracle {

// Marching squares on an n x n grid over [-R, R]^2 in (p, q).  Returns the
// crossing points of F = 0 on cell edges; enough to estimate enclosed area
// (fraction of negative cells) and vertical tangencies (sign changes of the
// q-extent), independent of the tracer.
struct ContourSummary {
  double negative_area = 0.0;  // area where F < 0
  int vertical_tangencies = 0; // local extrema of q along the curve (turning points)
  int edge_crossings = 0;
};

inline ContourSummary marching_squares(const std::function<double(double, double)>& F, double R, int n) {
  ContourSummary s;
  const double d = 2.0 * R / n;
  std::vector<double> v((n + 1) * (n + 1));
  auto at = [&](int i, int j) -> double& { return v[i * (n + 1) + j]; };
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j) at(i, j) = F(-R + i * d, -R + j * d);  // i: p, j: q
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      // cell area fraction by corner averaging at sub-cell resolution
      const double c = 0.25 * (at(i, j) + at(i + 1, j) + at(i, j + 1) + at(i + 1, j + 1));
      if (c < 0) s.negative_area += d * d;
      if ((at(i, j) < 0) != (at(i + 1, j) < 0)) ++s.edge_crossings;
    }
  // Turning points: p-columns where the set of crossings in q changes, counted as
  // rows j where the number of sign changes along p differs from row j+1.
  std::vector<int> count(n + 1, 0);
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i < n; ++i)
      if ((at(i, j) < 0) != (at(i + 1, j) < 0)) ++count[j];
  for (int j = 0; j < n; ++j) s.vertical_tangencies += std::abs(count[j + 1] - count[j]) / 2;
  return s;
}

}  // namespace oracle
