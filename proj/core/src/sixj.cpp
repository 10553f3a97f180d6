#include "semioverlap/sixj.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <mutex>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "semioverlap/errors.hpp"

namespace semioverlap {

using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;

namespace {

// n! for n up to whatever has been requested so far.  Entries never move once
// created, so references stay valid while other threads extend the table.
const cpp_int& factorial(int n) {
  static std::mutex mu;
  static std::deque<cpp_int> table{cpp_int(1)};
  std::lock_guard<std::mutex> lock(mu);
  while (static_cast<int>(table.size()) <= n) table.push_back(table.back() * static_cast<unsigned>(table.size()));
  return table[n];
}

bool triad(int x, int y, int z) {
  return (x + y + z) % 2 == 0 && z >= std::abs(x - y) && z <= x + y;
}

// Delta^2(abc) with doubled arguments.
cpp_rational delta_sq(int x, int y, int z) {
  const int s1 = (x + y - z) / 2, s2 = (x - y + z) / 2, s3 = (-x + y + z) / 2, s = (x + y + z) / 2;
  return cpp_rational(factorial(s1) * factorial(s2) * factorial(s3), factorial(s + 1));
}

// Vertex pairs of the six edges in input order: a=P1P2, b=P2P3, d=P3P4, e=P1P4, c=P1P3, f=P2P4.
constexpr std::array<std::array<int, 2>, 6> kEdgeVertices = {{{0, 1}, {1, 2}, {2, 3}, {0, 3}, {0, 2}, {1, 3}}};

}  // namespace

SixJInput SixJInput::from_doubled(std::array<int, 6> twice) {
  for (int t : twice)
    if (t < 0) throw Error(ErrorKind::InvalidInput, "spins must be non-negative");
  SixJInput s;
  s.twice = twice;
  return s;
}

SixJInput SixJInput::from_j(std::array<double, 6> j) {
  std::array<int, 6> t{};
  for (int i = 0; i < 6; ++i) {
    const double d = 2.0 * j[i];
    if (d < 0.0 || std::abs(d - std::round(d)) > 1e-12)
      throw Error(ErrorKind::InvalidInput, "spins must be non-negative half-integers");
    t[i] = static_cast<int>(std::lround(d));
  }
  return from_doubled(t);
}

SixJInput SixJInput::scaled(int lambda) const {
  SixJInput s = *this;
  for (int& t : s.twice) t *= lambda;
  return s;
}

std::string SixJInput::to_string() const {
  std::ostringstream os;
  for (int i = 0; i < 6; ++i) {
    if (i) os << ' ';
    if (twice[i] % 2 == 0)
      os << twice[i] / 2;
    else
      os << twice[i] << "/2";
  }
  return os.str();
}

bool SixJInput::admissible() const {
  const auto& [a, b, d, e, c, f] = twice;
  return triad(a, b, c) && triad(d, e, c) && triad(b, d, f) && triad(a, e, f);
}

double SixJValue::to_double() const {
  if (sign == 0) return 0.0;
  using big = boost::multiprecision::cpp_bin_float_50;
  const big v = sqrt(big(square));
  return sign * static_cast<double>(v);
}

SixJValue racah_6j_exact(const SixJInput& input) {
  SixJValue out;
  if (!input.admissible()) return out;
  const auto& [A, B, D, E, C, F] = input.twice;
  const int a1 = (A + B + C) / 2, a2 = (A + E + F) / 2, a3 = (D + B + F) / 2, a4 = (D + E + C) / 2;
  const int b1 = (A + B + D + E) / 2, b2 = (A + C + D + F) / 2, b3 = (B + C + E + F) / 2;
  const int tmin = std::max({a1, a2, a3, a4}), tmax = std::min({b1, b2, b3});
  cpp_rational sum = 0;
  for (int t = tmin; t <= tmax; ++t) {
    const cpp_int den = factorial(t - a1) * factorial(t - a2) * factorial(t - a3) * factorial(t - a4) *
                        factorial(b1 - t) * factorial(b2 - t) * factorial(b3 - t);
    cpp_rational term(factorial(t + 1), den);
    if (t % 2) term = -term;
    sum += term;
  }
  if (sum == 0) return out;
  out.sign = sum > 0 ? 1 : -1;
  out.square = sum * sum * delta_sq(A, B, C) * delta_sq(A, E, F) * delta_sq(D, B, F) * delta_sq(D, E, C);
  return out;
}

double racah_6j(const SixJInput& input) { return racah_6j_exact(input).to_double(); }

double orthogonality_defect(const std::array<int, 4>& t) {
  const auto [a, b, d, e] = t;
  auto window = [](int x, int y) { return std::pair{std::abs(x - y), x + y}; };
  const auto [c_lo, c_hi] = window(a, b);
  const auto [f_lo, f_hi] = window(b, d);
  std::vector<int> cs;
  for (int c = c_lo; c <= c_hi; c += 2)
    if (triad(d, e, c)) cs.push_back(c);
  if (cs.empty()) throw Error(ErrorKind::InvalidInput, "no admissible intermediate spin");
  std::vector<int> fs;
  for (int f = f_lo; f <= f_hi; f += 2)
    if (triad(a, e, f)) fs.push_back(f);
  std::vector<std::vector<double>> w(fs.size(), std::vector<double>(cs.size()));
  for (std::size_t i = 0; i < fs.size(); ++i)
    for (std::size_t k = 0; k < cs.size(); ++k) w[i][k] = racah_6j(SixJInput::from_doubled({a, b, d, e, cs[k], fs[i]}));
  double worst = 0.0;
  for (std::size_t i = 0; i < fs.size(); ++i)
    for (std::size_t l = 0; l < fs.size(); ++l) {
      double sum = 0.0;
      for (std::size_t k = 0; k < cs.size(); ++k) sum += (cs[k] + 1.0) * w[i][k] * w[l][k];
      sum *= fs[i] + 1.0;
      worst = std::max(worst, std::abs(sum - (i == l ? 1.0 : 0.0)));
    }
  return worst;
}

Tetrahedron tetrahedron_from_lengths(const std::array<double, 6>& L) {
  Tetrahedron t;
  t.edge_lengths = L;
  std::array<std::array<double, 4>, 4> d2{};
  for (int i = 0; i < 6; ++i) {
    const auto [u, v] = kEdgeVertices[i];
    d2[u][v] = d2[v][u] = L[i] * L[i];
  }
  Eigen::Matrix<long double, 5, 5> cm;
  cm.setOnes();
  cm(0, 0) = 0.0L;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) cm(i + 1, j + 1) = d2[i][j];
  t.cayley_menger = static_cast<double>(cm.determinant());
  const double lmax = *std::max_element(L.begin(), L.end());
  if (!(t.cayley_menger > 1e-12 * std::pow(lmax, 6)))
    throw Error(ErrorKind::NotRealizable, "edge lengths do not span a Euclidean tetrahedron");
  t.volume = std::sqrt(t.cayley_menger / 288.0);

  // Explicit coordinates: P1 at the origin, P2 on the x axis, P3 in the xy plane.
  std::array<Eigen::Vector3d, 4> P;
  P[0].setZero();
  P[1] = {L[0], 0.0, 0.0};
  const double x3 = (d2[0][1] + d2[0][2] - d2[1][2]) / (2.0 * L[0]);
  const double y3sq = d2[0][2] - x3 * x3;
  if (!(y3sq > 0.0)) throw Error(ErrorKind::NotRealizable, "degenerate face");
  const double y3 = std::sqrt(y3sq);
  P[2] = {x3, y3, 0.0};
  const double x4 = (d2[0][1] + d2[0][3] - d2[1][3]) / (2.0 * L[0]);
  const double y4 = (d2[0][3] - d2[2][3] + d2[0][2] - 2.0 * x3 * x4) / (2.0 * y3);
  const double z4 = 6.0 * t.volume / (L[0] * y3);  // V = |P2 x P3 . P4| / 6 = L0 y3 z4 / 6
  P[3] = {x4, y4, z4};

  for (int i = 0; i < 6; ++i) {
    const auto [u, v] = kEdgeVertices[i];
    int k = -1, l = -1;
    for (int w = 0; w < 4; ++w)
      if (w != u && w != v) (k < 0 ? k : l) = w;
    const Eigen::Vector3d e = (P[v] - P[u]).normalized();
    Eigen::Vector3d a = P[k] - P[u], b = P[l] - P[u];
    a -= a.dot(e) * e;
    b -= b.dot(e) * e;
    const double interior = std::atan2(a.cross(b).norm(), a.dot(b));
    t.dihedral[i] = std::numbers::pi - interior;
  }
  return t;
}

Tetrahedron tetrahedron_geometry(const SixJInput& input) {
  std::array<double, 6> L{};
  for (int i = 0; i < 6; ++i) L[i] = input.j(i) + 0.5;
  return tetrahedron_from_lengths(L);
}

double ponzano_regge(const SixJInput& input) {
  const Tetrahedron t = tetrahedron_geometry(input);
  double phase = 0.0;
  for (int i = 0; i < 6; ++i) phase += t.edge_lengths[i] * t.dihedral[i];
  return std::cos(phase + 0.25 * std::numbers::pi) / std::sqrt(12.0 * std::numbers::pi * t.volume);
}

std::vector<ConvergenceRow> convergence_study(const SixJInput& base, const std::vector<int>& scales, double trim) {
  if (trim < 0.0 || trim >= 0.5) throw Error(ErrorKind::InvalidInput, "trim must lie in [0, 0.5)");
  std::vector<ConvergenceRow> rows;
  for (int lambda : scales) {
    if (lambda < 1) throw Error(ErrorKind::InvalidInput, "scales must be positive");
    const SixJInput s = base.scaled(lambda);
    ConvergenceRow row;
    row.lambda = lambda;
    const int lo = std::max(std::abs(s.twice[0] - s.twice[1]), std::abs(s.twice[2] - s.twice[3]));
    const int hi = std::min(s.twice[0] + s.twice[1], s.twice[2] + s.twice[3]);
    for (int t = lo; t <= hi; t += 2) {
      SixJInput x = s;
      x.twice[4] = t;
      if (!x.admissible()) continue;
      double pr;
      try {
        pr = ponzano_regge(x);
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::NotRealizable) continue;
        throw;
      }
      row.samples.push_back({t, racah_6j(x), pr});
    }
    if (row.samples.empty()) throw Error(ErrorKind::NotRealizable, "no realizable j12 at scale " + std::to_string(lambda));
    const double first = row.samples.front().twice_j12, last = row.samples.back().twice_j12;
    const double w = trim * (last - first);
    row.window_lo = static_cast<int>(std::ceil(first + w - 1e-9));
    row.window_hi = static_cast<int>(std::floor(last - w + 1e-9));
    double se = 0.0, sx = 0.0, fe = 0.0, fx = 0.0;
    for (const auto& smp : row.samples) {
      const double e2 = (smp.exact - smp.pr) * (smp.exact - smp.pr), x2 = smp.exact * smp.exact;
      fe += e2;
      fx += x2;
      if (smp.twice_j12 >= row.window_lo && smp.twice_j12 <= row.window_hi) {
        se += e2;
        sx += x2;
        ++row.window_count;
      }
    }
    if (row.window_count == 0) throw Error(ErrorKind::InvalidInput, "trimmed window is empty");
    row.rms_abs_err = std::sqrt(se / row.window_count);
    row.rms_exact = std::sqrt(sx / row.window_count);
    row.ratio = row.rms_abs_err / row.rms_exact;
    row.ratio_full = std::sqrt(fe / fx);
    rows.push_back(std::move(row));
  }
  return rows;
}

int parse_twice_j(const std::string& text) {
  auto fail = [&]() -> int { throw Error(ErrorKind::Parse, "not a non-negative half-integer: '" + text + "'"); };
  if (text.empty()) return fail();
  const auto slash = text.find('/');
  try {
    std::size_t used = 0;
    if (slash != std::string::npos) {
      const int num = std::stoi(text.substr(0, slash), &used);
      if (used != slash) return fail();
      const std::string ds = text.substr(slash + 1);
      const int den = std::stoi(ds, &used);
      if (used != ds.size() || num < 0) return fail();
      if (den == 1) return 2 * num;
      if (den == 2) return num;
      return fail();
    }
    const double v = std::stod(text, &used);
    if (used != text.size() || v < 0.0 || std::abs(2.0 * v - std::round(2.0 * v)) > 1e-12) return fail();
    return static_cast<int>(std::lround(2.0 * v));
  } catch (const std::logic_error&) {
    return fail();
  }
}

}  // namespace semioverlap
