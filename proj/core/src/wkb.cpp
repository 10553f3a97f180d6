#include "semioverlap/wkb.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "semioverlap/errors.hpp"
#include "semioverlap/quantize.hpp"

namespace semioverlap {

namespace {
constexpr double kPi = std::numbers::pi;
}

double turning_exclusion_radius(double h, double alpha) {
  return 5.0 * std::cbrt(h * h / std::abs(alpha));
}

WKBEvaluator::WKBEvaluator(const PolyHamiltonian& H, double b, double h, std::optional<Point> ref_point,
                           const LevelCurveOptions& opt)
    : H_(H), b_(b), h_(h), ls_(trace_well_level(H, b, opt)) {
  if (!(h > 0.0)) throw Error(ErrorKind::InvalidInput, "h must be positive");
  const auto& tps = ls_.turning_points();
  if (tps.empty()) throw Error(ErrorKind::CurveTraceFailure, "level curve has no turning points");
  for (const auto& tp : tps)
    if (!tp.simple) throw Error(ErrorKind::NonSimpleTurningPoint, "level curve has a degenerate turning point");

  if (ref_point) {
    ref_tau_ = ls_.locate(*ref_point);
    const Point on = ls_.point_at(ref_tau_);
    if (std::hypot(on.p - ref_point->p, on.q - ref_point->q) > 1e-6)
      throw Error(ErrorKind::InvalidInput, "reference point is not on the level curve");
    ref_ = on;
  } else {
    std::size_t right = 0;
    for (std::size_t k = 1; k < tps.size(); ++k)
      if (tps[k].point.q > tps[right].point.q) right = k;
    ref_tau_ = ls_.wrap(std::floor(tps[right].tau) + 1.0);
    ref_ = ls_.point_at(ref_tau_);
  }

  const int mu = maslov_index(full_loop(ls_, ref_tau_));
  closure_ = std::abs(std::polar(1.0, ls_.cycle_action() / h_ - 0.5 * kPi * mu) - 1.0);
  if (closure_ > 1e-6)
    throw Error(ErrorKind::NotBohrSommerfeld,
                "b does not satisfy the Bohr-Sommerfeld condition (closure residual " + std::to_string(closure_) + ")");
}

double WKBEvaluator::level_spacing() const { return 2.0 * kPi * h_ / std::abs(ls_.action_derivative()); }

bool WKBEvaluator::evaluable(double q) const {
  for (const auto& tp : ls_.turning_points())
    if (std::abs(q - tp.point.q) < turning_exclusion_radius(h_, tp.alpha)) return false;
  try {
    return !solve_branches(H_, b_, q, ls_.options()).empty();
  } catch (const Error&) {
    return false;
  }
}

WKBDensity WKBEvaluator::density(double q) const {
  for (const auto& tp : ls_.turning_points())
    if (std::abs(q - tp.point.q) < turning_exclusion_radius(h_, tp.alpha))
      throw Error(ErrorKind::TooCloseToTurningPoint, "q lies inside a turning-point boundary layer");
  std::vector<double> roots;
  try {
    roots = solve_branches(H_, b_, q, ls_.options());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::NearTangency) throw Error(ErrorKind::TooCloseToTurningPoint, e.what());
    throw;
  }
  if (roots.empty()) throw Error(ErrorKind::OutsideClassicalRegion, "no real branch over q");

  const HamiltonianJet J(H_);
  WKBDensity out;
  out.b = b_;
  out.h = h_;
  out.q = q;
  out.ref_point = ref_;
  const double pref = 1.0 / std::sqrt(2.0 * kPi * h_);
  for (double p : roots) {
    BranchContribution c;
    c.point = {p, q};
    c.tau = ls_.locate(c.point);
    const Point on = ls_.point_at(c.tau);
    if (std::hypot(on.p - p, on.q - q) > 1e-6)
      throw Error(ErrorKind::InvalidInput, "branch point lies on another component of the level set");
    const CurvePath path = make_path(ls_, ref_tau_, c.tau, 1);
    c.action = action_along(path);
    c.maslov = maslov_index(path);
    c.amplitude = 1.0 / std::sqrt(std::abs(J.Hp(p, q)));
    c.value = pref * c.amplitude * std::polar(1.0, c.action / h_ - 0.5 * kPi * c.maslov);
    out.value += c.value;
    out.branch_data.push_back(c);
  }
  return out;
}

std::complex<double> wkb_eval(const PolyHamiltonian& H, double b, double h, double q, std::optional<Point> ref_point) {
  return WKBEvaluator(H, b, h, ref_point)(q);
}

namespace {

// DLMF 9.7.2: u_k = Gamma(3k+1/2) / (54^k k! Gamma(k+1/2)), via the ratio recurrence.
double airy_u(int k) {
  double u = 1.0;
  for (int j = 1; j <= k; ++j) {
    // Gamma(3j+1/2)/Gamma(3j-5/2) = (3j-1/2)(3j-3/2)(3j-5/2)
    const double r = (3.0 * j - 0.5) * (3.0 * j - 1.5) * (3.0 * j - 2.5) / (54.0 * j * (j - 0.5));
    u *= r;
  }
  return u;
}

long double airy_maclaurin(long double z) {
  // Ai(z) = c1 f(z) - c2 g(z)
  const long double c1 = 0.355028053887817239260063186004183176L;
  const long double c2 = 0.258819403792806798405183560189203963L;
  const long double z3 = z * z * z;
  long double f = 1.0L, g = z, tf = 1.0L, tg = z;
  for (int k = 1; k < 200; ++k) {
    tf *= z3 / ((3.0L * k - 1.0L) * (3.0L * k));
    tg *= z3 / ((3.0L * k) * (3.0L * k + 1.0L));
    f += tf;
    g += tg;
    if (std::abs(tf) + std::abs(tg) < 1e-22L * (std::abs(f) + std::abs(g))) break;
  }
  return c1 * f - c2 * g;
}

}  // namespace

double airy_ai(double z) {
  if (std::abs(z) <= 6.0) return static_cast<double>(airy_maclaurin(z));
  if (z > 0.0) {
    const double zeta = 2.0 / 3.0 * z * std::sqrt(z);
    double sum = 0.0, prev = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 60; ++k) {
      const double t = airy_u(k) / std::pow(zeta, k);
      if (t > prev) break;
      sum += (k % 2 ? -t : t);
      prev = t;
      if (t < 1e-17) break;
    }
    return std::exp(-zeta) / (2.0 * std::sqrt(kPi) * std::pow(z, 0.25)) * sum;
  }
  const double x = -z;
  const double zeta = 2.0 / 3.0 * x * std::sqrt(x);
  double even = 0.0, odd = 0.0, prev = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 60; ++k) {
    const double t = airy_u(k) / std::pow(zeta, k);
    if (t > prev) break;
    const double sign = (k / 2) % 2 ? -1.0 : 1.0;
    (k % 2 ? odd : even) += sign * t;
    prev = t;
    if (t < 1e-17) break;
  }
  const double phase = zeta + 0.25 * kPi;
  return (std::sin(phase) * even - std::cos(phase) * odd) / (std::sqrt(kPi) * std::pow(x, 0.25));
}

double airy(double alpha, double x) {
  if (alpha == 0.0) throw Error(ErrorKind::AlphaZero, "Airy coefficient alpha is zero");
  const double s = std::cbrt(2.0 * std::abs(alpha));
  return airy_ai(alpha > 0.0 ? s * x : -s * x);
}

double airy_contour(double alpha, double x) {
  return 2.0 * kPi * std::cbrt(2.0 * std::abs(alpha)) * airy(alpha, x);
}

std::complex<double> connection_ratio(double airy_alpha) {
  if (airy_alpha == 0.0) throw Error(ErrorKind::AlphaZero, "Airy coefficient alpha is zero");
  return airy_alpha > 0.0 ? std::complex<double>(0.0, 1.0) : std::complex<double>(0.0, -1.0);
}

std::complex<double> connection_ratio(const TurningPoint& tp) {
  if (!tp.simple || tp.alpha == 0.0)
    throw Error(ErrorKind::NonSimpleTurningPoint, "turning point is not simple");
  return connection_ratio(-tp.alpha);
}

std::complex<double> loop_connection_phase(const LevelSet& ls) {
  std::complex<double> z = 1.0;
  for (const auto& tp : ls.turning_points()) {
    const std::complex<double> r = connection_ratio(tp);
    z *= tp.dp_sign > 0 ? r : std::conj(r);
  }
  return z;
}

}  // namespace semioverlap
