#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "semioverlap/levelcurve.hpp"

namespace oracle {

// Area of the intersection of two discs of radius r at centre distance d.
inline double lens_area(double r, double d) {
  return 2.0 * r * r * std::acos(d / (2.0 * r)) - 0.5 * d * std::sqrt(4.0 * r * r - d * d);
}

// Common zeros of F1, F2 on [-R, R]^2 found by scanning an n x n grid for cells
// where both functions change sign, then polishing with Newton on the pair
// (Jacobian by central differences).  Deduplicated at radius dedupe.
inline std::vector<semioverlap::Point> grid_scan_intersections(const std::function<double(double, double)>& F1,
                                                               const std::function<double(double, double)>& F2,
                                                               double R, int n, double dedupe = 1e-7) {
  std::vector<semioverlap::Point> out;
  const double d = 2.0 * R / n;
  auto changes = [&](const std::function<double(double, double)>& F, double p, double q) {
    const double a = F(p, q), b = F(p + d, q), c = F(p, q + d), e = F(p + d, q + d);
    const double lo = std::min({a, b, c, e}), hi = std::max({a, b, c, e});
    return lo <= 0.0 && hi >= 0.0;
  };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double p0 = -R + i * d, q0 = -R + j * d;
      if (!changes(F1, p0, q0) || !changes(F2, p0, q0)) continue;
      double p = p0 + 0.5 * d, q = q0 + 0.5 * d;
      bool ok = false;
      for (int it = 0; it < 60; ++it) {
        const double f1 = F1(p, q), f2 = F2(p, q), e = 1e-7;
        const double a = (F1(p + e, q) - F1(p - e, q)) / (2 * e), b = (F1(p, q + e) - F1(p, q - e)) / (2 * e);
        const double c = (F2(p + e, q) - F2(p - e, q)) / (2 * e), g = (F2(p, q + e) - F2(p, q - e)) / (2 * e);
        const double det = a * g - b * c;
        if (det == 0.0) break;
        const double dp = (f1 * g - b * f2) / det, dq = (a * f2 - c * f1) / det;
        p -= dp;
        q -= dq;
        if (std::hypot(dp, dq) < 1e-14) {
          ok = true;
          break;
        }
      }
      if (!ok || std::abs(F1(p, q)) > 1e-10 || std::abs(F2(p, q)) > 1e-10) continue;
      if (p < p0 - d || p > p0 + 2 * d || q < q0 - d || q > q0 + 2 * d) continue;
      bool dup = false;
      for (const auto& x : out)
        if (std::hypot(x.p - p, x.q - q) < dedupe) dup = true;
      if (!dup) out.push_back({p, q});
    }
  return out;
}

}  // namespace oracle
