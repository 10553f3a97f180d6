#include "semioverlap/levelcurve.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>

#include <Eigen/Dense>
#include <boost/math/tools/toms748_solve.hpp>

#include "semioverlap/errors.hpp"

namespace semioverlap {

namespace {

constexpr std::array<std::array<double, 2>, 10> kGauss = {{
    {-0.97390652851717174, 0.066671344308688069},
    {-0.86506336668898454, 0.14945134915058036},
    {-0.67940956829902444, 0.21908636251598201},
    {-0.43339539412924721, 0.26926671930999652},
    {-0.14887433898163122, 0.29552422471475298},
    {0.14887433898163122, 0.29552422471475298},
    {0.43339539412924721, 0.26926671930999652},
    {0.67940956829902444, 0.21908636251598201},
    {0.86506336668898454, 0.14945134915058036},
    {0.97390652851717174, 0.066671344308688069},
}};

Point operator+(Point a, Point b) { return {a.p + b.p, a.q + b.q}; }
Point operator-(Point a, Point b) { return {a.p - b.p, a.q - b.q}; }
Point operator*(double s, Point a) { return {s * a.p, s * a.q}; }
double dot(Point a, Point b) { return a.p * b.p + a.q * b.q; }
double norm(Point a) { return std::hypot(a.p, a.q); }
int sgn(double x) { return x < 0.0 ? -1 : 1; }

double horner(const std::vector<double>& a, double x) {
  double r = 0.0;
  for (std::size_t k = a.size(); k-- > 0;) r = r * x + a[k];
  return r;
}

double horner_derivative(const std::vector<double>& a, double x) {
  double r = 0.0;
  for (std::size_t k = a.size(); k-- > 1;) r = r * x + k * a[k];
  return r;
}

// Newton projection along the gradient back onto H = b.
Point project(const HamiltonianJet& J, double b, Point x) {
  for (int it = 0; it < 40; ++it) {
    const double g = J.H(x.p, x.q) - b;
    const double hp = J.Hp(x.p, x.q), hq = J.Hq(x.p, x.q);
    const double n2 = hp * hp + hq * hq;
    if (n2 == 0.0) throw Error(ErrorKind::StepCollapse, "gradient vanishes on the level curve");
    const double s = g / n2;
    x.p -= s * hp;
    x.q -= s * hq;
    if (std::abs(s) * std::sqrt(n2) <= 1e-15 * (1.0 + std::abs(x.p) + std::abs(x.q))) break;
  }
  return x;
}

// Unit vector along the Hamiltonian flow, components (dp, dq) = (-Hq, Hp)/|grad H|.
Point flow_tangent(const HamiltonianJet& J, Point x) {
  const double hp = J.Hp(x.p, x.q), hq = J.Hq(x.p, x.q);
  const double n = std::hypot(hp, hq);
  if (n == 0.0) throw Error(ErrorKind::StepCollapse, "critical point on the level curve");
  return {-hq / n, hp / n};
}

double curvature(const HamiltonianJet& J, Point x) {
  const double hp = J.Hp(x.p, x.q), hq = J.Hq(x.p, x.q);
  const double hpp = J.Hpp(x.p, x.q), hpq = J.Hpq(x.p, x.q), hqq = J.Hqq(x.p, x.q);
  const double n = std::hypot(hp, hq);
  return std::abs(hpp * hq * hq - 2.0 * hpq * hp * hq + hqq * hp * hp) / (n * n * n);
}

}  // namespace

std::vector<double> solve_branches(const PolyHamiltonian& H, double b, double q,
                                   const LevelCurveOptions& opt) {
  require_momentum_dependent(H);
  std::vector<double> a = H.coefficients_in_p(q);
  a[0] -= b;
  double scale = 0.0;
  for (double v : a) scale = std::max(scale, std::abs(v));
  while (a.size() > 1 && std::abs(a.back()) <= 1e-14 * scale) a.pop_back();
  const int d = static_cast<int>(a.size()) - 1;
  std::vector<double> roots;
  if (d == 0) return roots;
  if (d == 1) {
    roots.push_back(-a[0] / a[1]);
    return roots;
  }
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(d, d);
  for (int i = 1; i < d; ++i) C(i, i - 1) = 1.0;
  for (int i = 0; i < d; ++i) C(i, d - 1) = -a[i] / a[d];
  Eigen::EigenSolver<Eigen::MatrixXd> es(C, false);
  for (int i = 0; i < d; ++i) {
    const std::complex<double> z = es.eigenvalues()[i];
    if (std::abs(z.imag()) > 1e-7 * (1.0 + std::abs(z))) continue;
    double p = z.real();
    for (int it = 0; it < 50; ++it) {
      const double f = horner(a, p), df = horner_derivative(a, p);
      if (df == 0.0) break;
      const double step = f / df;
      p -= step;
      if (std::abs(step) <= 1e-16 * (1.0 + std::abs(p))) break;
    }
    roots.push_back(p);
  }
  std::sort(roots.begin(), roots.end(), std::greater<>());
  for (std::size_t i = 1; i < roots.size(); ++i)
    if (std::abs(roots[i - 1] - roots[i]) < opt.tol_turn)
      throw Error(ErrorKind::NearTangency, "two roots of H(.,q)=b coincide at q=" + std::to_string(q));
  return roots;
}

int crossing_sign(const TurningPoint& tp, int direction) {
  return sgn(tp.alpha) * tp.dp_sign * direction;
}

LevelSet::LevelSet(const PolyHamiltonian& H, double b, const LevelCurveOptions& opt)
    : H_(H), jet_(H), b_(b), opt_(opt) {}

double LevelSet::wrap(double tau) const {
  const double M = static_cast<double>(segments());
  double t = std::fmod(tau, M);
  if (t < 0.0) t += M;
  if (t >= M) t = 0.0;
  return t;
}

Point LevelSet::on_segment(std::size_t seg, double t, double* ddelta) const {
  const Point P = loop_[seg], Q = loop_[seg + 1];
  const Point d = Q - P;
  const double L = norm(d);
  const Point n{-d.q / L, d.p / L};
  const Point base = P + t * d;
  double delta = 0.0;
  Point x = base;
  for (int it = 0; it < 50; ++it) {
    const double g = jet_.H(x.p, x.q) - b_;
    const double gn = jet_.Hp(x.p, x.q) * n.p + jet_.Hq(x.p, x.q) * n.q;
    const double step = g / gn;
    delta -= step;
    x = base + delta * n;
    if (std::abs(step) <= 1e-16 * (L + std::abs(delta) + 1e-300)) break;
  }
  if (ddelta) {
    const double hp = jet_.Hp(x.p, x.q), hq = jet_.Hq(x.p, x.q);
    *ddelta = -(hp * d.p + hq * d.q) / (hp * n.p + hq * n.q);
  }
  return x;
}

double LevelSet::segment_action(std::size_t seg, double t) const {
  if (t <= 0.0) return 0.0;
  const Point d = loop_[seg + 1] - loop_[seg];
  const double L = norm(d);
  const double nq = d.p / L;
  double acc = 0.0;
  for (const auto& [x, w] : kGauss) {
    double dd = 0.0;
    const Point pt = on_segment(seg, 0.5 * t * (1.0 + x), &dd);
    acc += w * pt.p * (d.q + dd * nq);
  }
  return 0.5 * t * acc;
}

double LevelSet::segment_period(std::size_t seg, double t) const {
  if (t <= 0.0) return 0.0;
  const Point d = loop_[seg + 1] - loop_[seg];
  const double L = norm(d);
  double acc = 0.0;
  for (const auto& [x, w] : kGauss) {
    double dd = 0.0;
    const Point pt = on_segment(seg, 0.5 * t * (1.0 + x), &dd);
    const double speed = std::hypot(L, dd);  // |d + dd n| with n orthogonal to d
    acc += w * speed / std::hypot(jet_.Hp(pt.p, pt.q), jet_.Hq(pt.p, pt.q));
  }
  return 0.5 * t * acc;
}

double LevelSet::segment_length(std::size_t seg, double t) const {
  if (t <= 0.0) return 0.0;
  const double L = norm(loop_[seg + 1] - loop_[seg]);
  double acc = 0.0;
  for (const auto& [x, w] : kGauss) {
    double dd = 0.0;
    on_segment(seg, 0.5 * t * (1.0 + x), &dd);
    acc += w * std::hypot(L, dd);
  }
  return 0.5 * t * acc;
}

namespace {
std::pair<std::size_t, double> split(double tau, std::size_t M) {
  if (tau >= static_cast<double>(M)) return {M - 1, 1.0};
  if (tau <= 0.0) return {0, 0.0};
  const auto seg = static_cast<std::size_t>(std::floor(tau));
  return {seg, tau - static_cast<double>(seg)};
}
}  // namespace

Point LevelSet::point_at(double tau) const {
  const auto [seg, t] = split(tau, segments());
  if (t == 0.0) return loop_[seg];
  if (t == 1.0) return loop_[seg + 1];
  return on_segment(seg, t);
}

double LevelSet::action_at(double tau) const {
  const auto [seg, t] = split(tau, segments());
  return cum_action_[seg] + segment_action(seg, t);
}

double LevelSet::length_at(double tau) const {
  const auto [seg, t] = split(tau, segments());
  return cum_length_[seg] + segment_length(seg, t);
}

Point LevelSet::tangent_at(double tau) const {
  const Point x = point_at(tau);
  const Point t = flow_tangent(jet_, x);
  return static_cast<double>(flow_sign_) * t;
}

double LevelSet::locate(Point x) const {
  const std::size_t M = segments();
  std::size_t best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < M; ++i) {
    const double d = norm(loop_[i] - x);
    if (d < bd) {
      bd = d;
      best = i;
    }
  }
  double best_tau = static_cast<double>(best), best_dist = bd;
  for (std::size_t seg : {(best + M - 1) % M, best}) {
    const Point P = loop_[seg], d = loop_[seg + 1] - P;
    double t = std::clamp(dot(x - P, d) / dot(d, d), 0.0, 1.0);
    for (int it = 0; it < 8; ++it) {
      double dd = 0.0;
      const Point g = on_segment(seg, t, &dd);
      const double L = norm(d);
      const Point gp = d + dd * Point{-d.q / L, d.p / L};
      t = std::clamp(t - dot(g - x, gp) / dot(gp, gp), 0.0, 1.0);
    }
    const double dist = norm(on_segment(seg, t) - x);
    if (dist < best_dist) {
      best_dist = dist;
      best_tau = static_cast<double>(seg) + t;
    }
  }
  return wrap(best_tau);
}

void LevelSet::finalize() {
  const std::size_t M = segments();
  cum_action_.assign(M + 1, 0.0);
  cum_period_.assign(M + 1, 0.0);
  cum_length_.assign(M + 1, 0.0);
  for (std::size_t i = 0; i < M; ++i) {
    cum_action_[i + 1] = cum_action_[i] + segment_action(i, 1.0);
    cum_period_[i + 1] = cum_period_[i] + segment_period(i, 1.0);
    cum_length_[i + 1] = cum_length_[i] + segment_length(i, 1.0);
  }

  tps_.clear();
  for (std::size_t i = 0; i < M; ++i) {
    const double h0 = jet_.Hp(loop_[i].p, loop_[i].q);
    const double h1 = jet_.Hp(loop_[i + 1].p, loop_[i + 1].q);
    if (sgn(h0) == sgn(h1)) continue;
    auto f = [&](double t) {
      const Point x = on_segment(i, t);
      return jet_.Hp(x.p, x.q);
    };
    double t = 0.0;
    if (h0 == 0.0) {
      t = 0.0;
    } else if (h1 == 0.0) {
      t = 1.0;
    } else {
      std::uintmax_t iters = 200;
      const auto r = boost::math::tools::toms748_solve(f, 0.0, 1.0, h0, h1,
                                                      boost::math::tools::eps_tolerance<double>(50), iters);
      t = 0.5 * (r.first + r.second);
    }
    TurningPoint tp;
    tp.point = point_at(static_cast<double>(i) + t);
    tp.tau = wrap(static_cast<double>(i) + t);
    tp.hq = jet_.Hq(tp.point.p, tp.point.q);
    tp.hpp = jet_.Hpp(tp.point.p, tp.point.q);
    tp.simple = std::abs(tp.hq) > opt_.tol_simple && std::abs(tp.hpp) > opt_.tol_simple;
    tp.alpha = tp.hpp != 0.0 ? -tp.hq / tp.hpp : 0.0;
    if (tp.hq < 0.0)
      tp.kind = tp.hpp > 0.0 ? TurningKind::A : TurningKind::B;
    else
      tp.kind = tp.hpp < 0.0 ? TurningKind::C : TurningKind::D;
    tp.dp_sign = sgn(loop_[i + 1].p - loop_[i].p);
    tps_.push_back(tp);
  }
  std::sort(tps_.begin(), tps_.end(), [](const auto& a, const auto& b) { return a.tau < b.tau; });

  branches_.clear();
  const std::size_t nt = tps_.size();
  for (std::size_t k = 0; k < nt; ++k) {
    const TurningPoint& a = tps_[k];
    const TurningPoint& c = tps_[(k + 1) % nt];
    double span = c.tau - a.tau;
    if (span <= 0.0) span += static_cast<double>(M);
    Branch br;
    br.q_lo = std::min(a.point.q, c.point.q);
    br.q_hi = std::max(a.point.q, c.point.q);
    for (std::size_t i = 0; i < M; ++i) {
      double off = static_cast<double>(i) - a.tau;
      if (off < 0.0) off += static_cast<double>(M);
      if (off > 0.0 && off < span) br.samples.push_back(loop_[i]);
    }
    std::sort(br.samples.begin(), br.samples.end(), [](Point x, Point y) { return x.q < y.q; });
    const Point mid = point_at(wrap(a.tau + 0.5 * span));
    br.branch_id = -1;
    try {
      const auto roots = solve_branches(H_, b_, mid.q, opt_);
      double bd = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < roots.size(); ++r)
        if (std::abs(roots[r] - mid.p) < bd) {
          bd = std::abs(roots[r] - mid.p);
          br.branch_id = static_cast<int>(r);
        }
    } catch (const Error&) {
    }
    branches_.push_back(std::move(br));
  }
}

LevelSet trace_level_curve(const PolyHamiltonian& H, double b, Point seed, const LevelCurveOptions& opt) {
  require_momentum_dependent(H);
  LevelSet ls(H, b, opt);
  const HamiltonianJet& J = ls.jet_;

  if (std::abs(J.H(seed.p, seed.q) - b) > 1e-3 * (1.0 + std::abs(b)))
    throw Error(ErrorKind::CurveTraceFailure, "seed is not on the level curve");
  Point x0 = project(J, b, seed);
  {
    // Start away from vertical tangents so no sample sits exactly on a turning point.
    const double hp = J.Hp(x0.p, x0.q), hq = J.Hq(x0.p, x0.q);
    if (std::abs(hp) < 1e-3 * std::hypot(hp, hq)) {
      const double ds = 0.2 * std::min(opt.max_step, opt.max_turn / std::max(curvature(J, x0), 1e-12));
      x0 = project(J, b, x0 + ds * flow_tangent(J, x0));
    }
  }
  if (std::abs(J.H(x0.p, x0.q) - b) > opt.tol_curve)
    throw Error(ErrorKind::CurveTraceFailure, "cannot project the seed onto the level curve");

  const Point t0 = flow_tangent(J, x0);
  std::vector<Point> pts{x0};
  Point x = x0;
  bool closed = false;
  double travelled = 0.0;
  for (std::size_t step = 0; step < opt.max_steps; ++step) {
    const Point tx = flow_tangent(J, x);
    double ds = std::min(opt.max_step, opt.max_turn / std::max(curvature(J, x), 1e-12));
    Point xn;
    for (;;) {
      if (ds < opt.eps_step)
        throw Error(ErrorKind::StepCollapse, "adaptive step fell below eps_step");
      const Point k1 = flow_tangent(J, x);
      const Point k2 = flow_tangent(J, x + 0.5 * ds * k1);
      const Point k3 = flow_tangent(J, x + 0.5 * ds * k2);
      const Point k4 = flow_tangent(J, x + ds * k3);
      xn = project(J, b, x + (ds / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
      const Point tn = flow_tangent(J, xn);
      const double turn = std::acos(std::clamp(dot(tx, tn), -1.0, 1.0));
      if (turn <= 2.0 * opt.max_turn && std::abs(J.H(xn.p, xn.q) - b) <= opt.tol_curve) break;
      ds *= 0.5;
    }
    if (std::abs(xn.p) > opt.box || std::abs(xn.q) > opt.box)
      throw Error(ErrorKind::NotClosed, "level curve leaves the bounding box");
    travelled += ds;
    const double before = dot(x - x0, t0), after = dot(xn - x0, t0);
    if (pts.size() >= 3 && before < 0.0 && after >= 0.0 && norm(xn - x0) < 2.0 * ds + 1e-12) {
      if (norm(x - x0) < 1e-9 * (1.0 + travelled)) pts.pop_back();
      pts.push_back(x0);
      closed = true;
      break;
    }
    pts.push_back(xn);
    x = xn;
  }
  if (!closed) throw Error(ErrorKind::CurveTraceFailure, "step budget exhausted before the loop closed");

  if (shoelace_action(pts) < 0.0) {
    std::reverse(pts.begin(), pts.end());
    ls.flow_sign_ = -1;
  }
  ls.loop_ = std::move(pts);
  ls.finalize();
  return ls;
}

LevelSet trace_level_curve_at(const PolyHamiltonian& H, double b, double q, const LevelCurveOptions& opt) {
  const auto roots = solve_branches(H, b, q, opt);
  if (roots.empty())
    throw Error(ErrorKind::CurveTraceFailure, "no point of the level curve over q=" + std::to_string(q));
  return trace_level_curve(H, b, Point{roots.front(), q}, opt);
}

double CurvePath::span() const {
  const double M = static_cast<double>(level_set->segments());
  const double d = direction > 0 ? level_set->wrap(end - start) : level_set->wrap(start - end);
  return d + winds * M;
}

bool CurvePath::passes(double tau) const {
  const double d = direction > 0 ? level_set->wrap(tau - start) : level_set->wrap(start - tau);
  return d > 0.0 && d < span();
}

std::vector<Point> CurvePath::arc() const {
  const LevelSet& ls = *level_set;
  const auto M = static_cast<long>(ls.segments());
  std::vector<Point> out{start_point()};
  const double total = span();
  if (direction > 0) {
    long i = static_cast<long>(std::floor(start)) + 1;
    for (; static_cast<double>(i) - start < total; ++i) {
      if (static_cast<double>(i) - start <= 0.0) continue;
      out.push_back(ls.closed_loop()[static_cast<std::size_t>(((i % M) + M) % M)]);
    }
  } else {
    long i = static_cast<long>(std::ceil(start)) - 1;
    for (; start - static_cast<double>(i) < total; --i) {
      if (start - static_cast<double>(i) <= 0.0) continue;
      out.push_back(ls.closed_loop()[static_cast<std::size_t>(((i % M) + M) % M)]);
    }
  }
  out.push_back(end_point());
  return out;
}

CurvePath make_path(const LevelSet& ls, double start, double end, int direction, int winds) {
  if (direction != 1 && direction != -1) throw Error(ErrorKind::InvalidInput, "direction must be +1 or -1");
  if (winds < 0) throw Error(ErrorKind::InvalidInput, "winds must be non-negative");
  return CurvePath{&ls, ls.wrap(start), ls.wrap(end), direction, winds};
}

CurvePath full_loop(const LevelSet& ls, double start) { return make_path(ls, start, start, 1, 1); }

double action_along(const CurvePath& path) {
  const LevelSet& ls = *path.level_set;
  const double A = ls.cycle_action();
  auto forward = [&](double a, double b) {
    double v = ls.action_at(b) - ls.action_at(a);
    if (b < a) v += A;
    return v;
  };
  if (path.direction > 0) return forward(path.start, path.end) + path.winds * A;
  return -forward(path.end, path.start) - path.winds * A;
}

double cycle_action(const LevelSet& ls) { return ls.cycle_action(); }

int maslov_index(const CurvePath& path) {
  const LevelSet& ls = *path.level_set;
  const Point a = path.start_point(), e = path.end_point();
  const double tol = ls.options().tol_turn;
  const double M = static_cast<double>(ls.segments());
  int mu = 0;
  for (const auto& tp : ls.turning_points()) {
    if (norm(a - tp.point) <= tol || norm(e - tp.point) <= tol)
      throw Error(ErrorKind::EndpointAtTurningPoint, "path endpoint sits on a turning point");
    const double d = path.direction > 0 ? ls.wrap(tp.tau - path.start) : ls.wrap(path.start - tp.tau);
    int count = 0;
    for (double off = d; off < path.span(); off += M)
      if (off > 0.0) ++count;
    mu += count * crossing_sign(tp, path.direction);
  }
  return mu;
}

double shoelace_action(const std::vector<Point>& closed) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < closed.size(); ++i)
    s += 0.5 * (closed[i].p + closed[i + 1].p) * (closed[i + 1].q - closed[i].q);
  return s;
}

std::string to_csv(const LevelSet& ls) {
  std::ostringstream os;
  os.precision(16);
  os << std::scientific << "idx,q,p,is_turning_point\n";
  const auto& loop = ls.closed_loop();
  const auto& tps = ls.turning_points();
  std::size_t idx = 0, k = 0;
  for (std::size_t i = 0; i < loop.size(); ++i) {
    os << idx++ << ',' << loop[i].q << ',' << loop[i].p << ",0\n";
    for (; k < tps.size() && tps[k].tau < static_cast<double>(i + 1); ++k)
      os << idx++ << ',' << tps[k].point.q << ',' << tps[k].point.p << ",1\n";
  }
  return os.str();
}

}  // namespace semioverlap
