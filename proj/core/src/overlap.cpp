#include "semioverlap/overlap.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>

#include <boost/math/tools/toms748_solve.hpp>

#include "semioverlap/errors.hpp"

namespace semioverlap {

namespace {

constexpr double kPi = std::numbers::pi;

int sgn(double x) { return x < 0.0 ? -1 : 1; }

double wrap_angle(double a) {
  while (a > kPi) a -= 2.0 * kPi;
  while (a <= -kPi) a += 2.0 * kPi;
  return a;
}

// Loop coordinates along a path, at most 1/sub apart, in traversal order.
std::vector<double> dense_taus(const CurvePath& path, int sub = 8) {
  const double s = path.span();
  const int n = std::max(2, static_cast<int>(std::ceil(s * sub)) + 1);
  std::vector<double> taus(n + 1);
  for (int k = 0; k <= n; ++k) taus[k] = path.level_set->wrap(path.start + path.direction * s * k / n);
  taus[n] = path.end;
  return taus;
}

// Angle swept by the Hamiltonian vector field of H2 along a path.
double field_rotation(const HamiltonianJet& J2, const CurvePath& path) {
  double total = 0.0, prev = 0.0;
  bool first = true;
  for (double tau : dense_taus(path)) {
    const Point x = path.level_set->point_at(tau);
    const double a = std::atan2(J2.Hp(x.p, x.q), -J2.Hq(x.p, x.q));
    if (!first) total += wrap_angle(a - prev);
    prev = a;
    first = false;
  }
  return total;
}

Point newton2(const PolyHamiltonian& H1, double b1, const PolyHamiltonian& H2, double b2, Point x) {
  const HamiltonianJet J1(H1), J2(H2);
  for (int it = 0; it < 60; ++it) {
    const double f1 = J1.H(x.p, x.q) - b1, f2 = J2.H(x.p, x.q) - b2;
    const double a = J1.Hp(x.p, x.q), b = J1.Hq(x.p, x.q);
    const double c = J2.Hp(x.p, x.q), d = J2.Hq(x.p, x.q);
    const double det = a * d - b * c;
    if (det == 0.0) throw Error(ErrorKind::TangentialIntersection, "singular intersection Jacobian");
    const double dp = (d * f1 - b * f2) / det, dq = (a * f2 - c * f1) / det;
    double damp = 1.0;
    const double step = std::hypot(dp, dq);
    if (step > 0.1) damp = 0.1 / step;
    x.p -= damp * dp;
    x.q -= damp * dq;
    if (step <= 1e-15 * (1.0 + std::hypot(x.p, x.q))) break;
  }
  return x;
}

double line_action(Point from, Point to) { return 0.5 * (from.p + to.p) * (to.q - from.q); }

}  // namespace

SecondFiber::SecondFiber(const PolyHamiltonian& H2, double b2, const LevelCurveOptions& opt) : H2_(H2), b2_(b2) {
  if (H2.is_linear()) {
    if (H2.coeff(1, 0) == 0.0 && H2.coeff(0, 1) == 0.0)
      throw Error(ErrorKind::InvalidInput, "second Hamiltonian is constant");
  } else {
    loop_.emplace(trace_well_level(H2, b2, opt));
  }
}

SecondFiber::SecondFiber(const LevelSet& loop) : H2_(loop.hamiltonian()), b2_(loop.b()), loop_(loop) {}

CurvePath gamma1_path(const IntersectionPoint& c, const IntersectionPoint& c0, const LevelSet& L1, ArcChoice choice) {
  const double t0 = L1.locate(c0.c), t1 = L1.locate(c.c);
  const CurvePath ccw = make_path(L1, t0, t1, 1), cw = make_path(L1, t0, t1, -1);
  if (t0 == t1) return choice == ArcChoice::Short ? ccw : full_loop(L1, t0);
  const double total = L1.length();
  double lccw = L1.length_at(t1) - L1.length_at(t0);
  if (lccw < 0.0) lccw += total;
  const double lcw = total - lccw;
  bool ccw_short;
  if (std::abs(lccw - lcw) > 1e-12 * total) {
    ccw_short = lccw < lcw;
  } else {
    // Equal halves: the short arc is the one whose midpoint has larger q (then p).
    const Point m1 = L1.point_at(L1.wrap(t0 + 0.5 * ccw.span()));
    const Point m2 = L1.point_at(L1.wrap(t0 - 0.5 * cw.span()));
    ccw_short = m1.q != m2.q ? m1.q > m2.q : m1.p > m2.p;
  }
  const bool use_ccw = (choice == ArcChoice::Short) == ccw_short;
  return use_ccw ? ccw : cw;
}

double action_difference(const IntersectionPoint& c, const IntersectionPoint& c0, const LevelSet& L1,
                         const SecondFiber& F2, ArcChoice choice) {
  const CurvePath g1 = gamma1_path(c, c0, L1, choice);
  const double s1 = action_along(g1);
  if (F2.is_line()) return s1 + line_action(c.c, c0.c);
  const HamiltonianJet J2(F2.hamiltonian());
  const double rot1 = field_rotation(J2, g1);
  const LevelSet& L2 = F2.loop();
  const double u0 = L2.locate(c0.c), u1 = L2.locate(c.c);
  double best_gap = 1e300, s2 = 0.0;
  for (int dir : {1, -1}) {
    const CurvePath back = make_path(L2, u0, u1, dir);  // gamma2 reversed
    const double gap = std::abs(field_rotation(J2, back) - rot1);
    if (gap < best_gap) {
      best_gap = gap;
      s2 = -action_along(back);
    }
  }
  if (best_gap > 0.5 * kPi)
    throw Error(ErrorKind::CurveTraceFailure, "no arc of the second fibre closes gamma1 without winding");
  return s1 + s2;
}

double action_difference(const IntersectionPoint& c, const IntersectionPoint& c0, const LevelSet& L1,
                         const LevelSet& L2, ArcChoice choice) {
  return action_difference(c, c0, L1, SecondFiber(L2), choice);
}

int relative_maslov(const IntersectionPoint& c, const IntersectionPoint& c0, const LevelSet& L1,
                    const PolyHamiltonian& H2, ArcChoice choice, double tol_trans) {
  const HamiltonianJet J1(L1.hamiltonian()), J2(H2);
  const PolyHamiltonian f = poisson_bracket(L1.hamiltonian(), H2);
  if (tol_trans <= 0.0) {
    double m = 0.0;
    for (const Point& x : L1.closed_loop()) m = std::max(m, std::abs(f(x.p, x.q)));
    tol_trans = 1e-6 * m;
  }
  if (std::abs(f(c.c.p, c.c.q)) <= tol_trans || std::abs(f(c0.c.p, c0.c.q)) <= tol_trans)
    throw Error(ErrorKind::TangencyAtEndpoint, "gamma1 is tangent to the second foliation at an endpoint");
  const CurvePath g1 = gamma1_path(c, c0, L1, choice);
  const double span = g1.span();
  auto f_at = [&](double u) {
    const Point x = L1.point_at(L1.wrap(g1.start + g1.direction * u));
    return f(x.p, x.q);
  };
  const int n = std::max(2, static_cast<int>(std::ceil(span * 8)) + 1);
  int mu = 0;
  double u_prev = 0.0, f_prev = f_at(0.0);
  for (int k = 1; k <= n; ++k) {
    const double u = span * k / n;
    const double fu = f_at(u);
    if (sgn(fu) != sgn(f_prev)) {
      std::uintmax_t iters = 200;
      const auto r = boost::math::tools::toms748_solve(f_at, u_prev, u, f_prev, fu,
                                                      boost::math::tools::eps_tolerance<double>(50), iters);
      const double uz = 0.5 * (r.first + r.second);
      const Point x = L1.point_at(L1.wrap(g1.start + g1.direction * uz));
      const double dotg = J1.Hp(x.p, x.q) * J2.Hp(x.p, x.q) + J1.Hq(x.p, x.q) * J2.Hq(x.p, x.q);
      mu += -sgn(fu - f_prev) * sgn(dotg);
    }
    u_prev = u;
    f_prev = fu;
  }
  return mu;
}

std::vector<IntersectionPoint> intersect_level_sets(const LevelSet& L1, const SecondFiber& F2,
                                                    const OverlapOptions& opt) {
  const PolyHamiltonian& H1 = L1.hamiltonian();
  const PolyHamiltonian& H2 = F2.hamiltonian();
  const double b1 = L1.b(), b2 = F2.b();
  const PolyHamiltonian bracket = poisson_bracket(H1, H2);
  const auto& loop = L1.closed_loop();

  double fmax = 0.0;
  for (const Point& x : loop) fmax = std::max(fmax, std::abs(bracket(x.p, x.q)));
  const double tol_trans = opt.tangency_rel * fmax;

  std::vector<IntersectionPoint> pts;
  for (std::size_t i = 0; i + 1 < loop.size(); ++i) {
    const double g0 = H2(loop[i].p, loop[i].q) - b2, g1 = H2(loop[i + 1].p, loop[i + 1].q) - b2;
    if (sgn(g0) == sgn(g1)) continue;
    auto g = [&](double t) {
      const Point x = L1.point_at(static_cast<double>(i) + t);
      return H2(x.p, x.q) - b2;
    };
    double t;
    if (g0 == 0.0) {
      t = 0.0;
    } else if (g1 == 0.0) {
      t = 1.0;
    } else {
      std::uintmax_t iters = 200;
      const auto r = boost::math::tools::toms748_solve(g, 0.0, 1.0, g0, g1,
                                                      boost::math::tools::eps_tolerance<double>(50), iters);
      t = 0.5 * (r.first + r.second);
    }
    const Point x = newton2(H1, b1, H2, b2, L1.point_at(static_cast<double>(i) + t));
    const bool dup = std::any_of(pts.begin(), pts.end(), [&](const IntersectionPoint& y) {
      return std::hypot(y.c.p - x.p, y.c.q - x.q) < opt.dedupe_radius;
    });
    if (dup) continue;
    IntersectionPoint ip;
    ip.c = x;
    ip.bracket = bracket(x.p, x.q);
    ip.tau1 = L1.locate(x);
    if (std::abs(ip.bracket) <= tol_trans)
      throw Error(ErrorKind::TangentialIntersection, "level sets meet tangentially");
    pts.push_back(ip);
  }
  std::sort(pts.begin(), pts.end(), [](const IntersectionPoint& a, const IntersectionPoint& b) {
    return a.c.q != b.c.q ? a.c.q > b.c.q : a.c.p > b.c.p;
  });
  if (pts.empty()) return pts;
  const IntersectionPoint c0 = pts.front();
  for (auto& ip : pts) {
    ip.action_diff = action_difference(ip, c0, L1, F2);
    ip.rel_maslov = relative_maslov(ip, c0, L1, H2, ArcChoice::Short, tol_trans);
  }
  return pts;
}

std::vector<IntersectionPoint> intersect_level_sets(const PolyHamiltonian& H1, double b1, const PolyHamiltonian& H2,
                                                    double b2, const OverlapOptions& opt) {
  const LevelSet L1 = trace_well_level(H1, b1, opt.curve);
  return intersect_level_sets(L1, SecondFiber(H2, b2, opt.curve), opt);
}

double OverlapAsymptotic::normalized_modulus() const {
  if (spacing1 <= 0.0 || spacing2 <= 0.0)
    throw Error(ErrorKind::InvalidInput, "normalisation needs two compact fibres");
  return modulus * std::sqrt(spacing1 * spacing2);
}

namespace {
void check_closure(const LevelSet& ls, double h, double tol) {
  const int mu = maslov_index(full_loop(ls));
  const double r = std::abs(std::polar(1.0, ls.cycle_action() / h - 0.5 * kPi * mu) - 1.0);
  if (r > tol)
    throw Error(ErrorKind::NotBohrSommerfeld, "fibre H=" + std::to_string(ls.b()) +
                                                  " violates the Bohr-Sommerfeld condition (residual " +
                                                  std::to_string(r) + ")");
}
}  // namespace

OverlapAsymptotic overlap_asymptotic(const PolyHamiltonian& H1, double b1, const PolyHamiltonian& H2, double b2,
                                     double h, const OverlapOptions& opt) {
  if (!(h > 0.0)) throw Error(ErrorKind::InvalidInput, "h must be positive");
  const LevelSet L1 = trace_well_level(H1, b1, opt.curve);
  const SecondFiber F2(H2, b2, opt.curve);
  check_closure(L1, h, opt.closure_tol);
  if (!F2.is_line()) check_closure(F2.loop(), h, opt.closure_tol);

  OverlapAsymptotic out;
  out.b1 = b1;
  out.b2 = b2;
  out.h = h;
  out.points = intersect_level_sets(L1, F2, opt);
  const double pref = 1.0 / std::sqrt(2.0 * kPi * h);
  for (const auto& ip : out.points) {
    const std::complex<double> term =
        pref / std::sqrt(std::abs(ip.bracket)) * std::polar(1.0, ip.action_diff / h - 0.5 * kPi * ip.rel_maslov);
    out.contributions.push_back(term);
    out.total += term;
  }
  out.modulus = std::abs(out.total);
  out.spacing1 = 2.0 * kPi * h / std::abs(L1.action_derivative());
  out.spacing2 = F2.is_line() ? 0.0 : 2.0 * kPi * h / std::abs(F2.loop().action_derivative());
  return out;
}

std::complex<double> overlap_exact(const PolyHamiltonian& H1, int n1, const PolyHamiltonian& H2, int n2,
                                   const QuantumGrid& grid) {
  if (n1 < 0 || n2 < 0) throw Error(ErrorKind::InvalidInput, "level index must be non-negative");
  auto s1 = SpectrumCache::global().get(H1, grid, n1 + 1);
  auto s2 = SpectrumCache::global().get(H2, grid, n2 + 1);
  const Eigen::VectorXcd& v1 = (*s1)[n1].vector;
  const Eigen::VectorXcd& v2 = (*s2)[n2].vector;
  return v2.dot(v1) * grid.dq();  // Eigen's dot conjugates the left operand
}

namespace {

// A reference point on a fibre that depends on its level only: the point with a
// fixed coordinate on the branch followed by continuity.
struct Anchor {
  bool fixed_q = true;
  double coord = 0.0;  // the fixed coordinate
  double other = 0.0;  // the other coordinate at the unperturbed level
};

Anchor choose_anchor(const HamiltonianJet& J, const std::vector<Point>& samples, Point c) {
  double diam = 0.0;
  for (const Point& x : samples) diam = std::max(diam, std::hypot(x.p - c.p, x.q - c.q));
  double best = -1.0;
  Anchor a;
  for (const Point& x : samples) {
    const double hp = std::abs(J.Hp(x.p, x.q));
    const double score = hp * std::min(1.0, std::hypot(x.p - c.p, x.q - c.q) / (0.25 * diam + 1e-300));
    if (score > best) {
      best = score;
      a = {true, x.q, x.p};
    }
  }
  return a;
}

Point anchor_point(const PolyHamiltonian& H, double b, const Anchor& a) {
  if (a.fixed_q) {
    const auto roots = solve_branches(H, b, a.coord);
    if (roots.empty()) throw Error(ErrorKind::CurveTraceFailure, "anchor lost under perturbation");
    double p = roots[0];
    for (double r : roots)
      if (std::abs(r - a.other) < std::abs(p - a.other)) p = r;
    return {p, a.coord};
  }
  // H linear with no p dependence: H = c00 + c01 q.
  return {a.coord, (b - H.coeff(0, 0)) / H.coeff(0, 1)};
}

}  // namespace

double verify_hessian_identity(const PolyHamiltonian& H1, const PolyHamiltonian& H2, const IntersectionPoint& c,
                               const LevelSet& L1, const SecondFiber& F2, const OverlapOptions& opt) {
  const double bracket = poisson_bracket(H1, H2)(c.c.p, c.c.q);
  double fmax = 0.0;
  const PolyHamiltonian f = poisson_bracket(H1, H2);
  for (const Point& x : L1.closed_loop()) fmax = std::max(fmax, std::abs(f(x.p, x.q)));
  if (std::abs(bracket) <= opt.tangency_rel * fmax)
    throw Error(ErrorKind::TangentialIntersection, "intersection is not transversal");

  const double b1 = L1.b(), b2 = F2.b();
  const double d1 = 1e-4 * std::max(std::abs(b1), 1.0), d2 = 1e-4 * std::max(std::abs(b2), 1.0);
  const HamiltonianJet J1(H1), J2(H2);
  const Anchor a1 = choose_anchor(J1, L1.closed_loop(), c.c);
  Anchor a2;
  if (F2.is_line()) {
    if (H2.coeff(1, 0) != 0.0)
      a2 = {true, c.c.q + 1.0, 0.0};
    else
      a2 = {false, c.c.p + 1.0, 0.0};
  } else {
    a2 = choose_anchor(J2, F2.loop().closed_loop(), c.c);
  }

  std::vector<LevelSet> l1s, l2s;
  for (int s : {1, -1}) {
    const double bb1 = b1 + s * d1;
    l1s.push_back(trace_level_curve(H1, bb1, anchor_point(H1, bb1, a1), opt.curve));
    if (!F2.is_line()) {
      const double bb2 = b2 + s * d2;
      l2s.push_back(trace_level_curve(H2, bb2, anchor_point(H2, bb2, a2), opt.curve));
    }
  }
  auto S = [&](int i1, int i2) {
    const double bb1 = b1 + (i1 == 0 ? d1 : -d1), bb2 = b2 + (i2 == 0 ? d2 : -d2);
    const Point cp = newton2(H1, bb1, H2, bb2, c.c);
    const LevelSet& A = l1s[i1];
    const Point r1 = anchor_point(H1, bb1, a1);
    double s = action_along(make_path(A, A.locate(r1), A.locate(cp), 1));
    const Point r2 = anchor_point(H2, bb2, a2);
    if (F2.is_line()) {
      s += line_action(cp, r2);
    } else {
      const LevelSet& B = l2s[i2];
      s += action_along(make_path(B, B.locate(cp), B.locate(r2), 1));
    }
    return s;
  };
  const double fd = (S(0, 0) - S(0, 1) - S(1, 0) + S(1, 1)) / (4.0 * d1 * d2);
  return std::abs(fd * bracket - 1.0);
}

double verify_hessian_identity(const PolyHamiltonian& H1, const PolyHamiltonian& H2, const IntersectionPoint& c,
                               const LevelSet& L1, const LevelSet& L2, const OverlapOptions& opt) {
  return verify_hessian_identity(H1, H2, c, L1, SecondFiber(L2), opt);
}

}  // namespace semioverlap
