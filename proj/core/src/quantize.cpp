#include "semioverlap/quantize.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include <lapacke.h>

#include "semioverlap/errors.hpp"

namespace semioverlap {

using cd = std::complex<double>;

Point well_bottom(const PolyHamiltonian& H, Point start) {
  // Newton on grad H, with the Hessian shifted to be positive definite where it is not
  // and an Armijo backtrack on H, so every step descends.
  const HamiltonianJet J(H);
  Point x = start;
  for (int it = 0; it < 400; ++it) {
    const double gp = J.Hp(x.p, x.q), gq = J.Hq(x.p, x.q);
    if (std::hypot(gp, gq) <= 1e-14) break;
    double a = J.Hpp(x.p, x.q), c = J.Hpq(x.p, x.q), d = J.Hqq(x.p, x.q);
    const double lmin = 0.5 * (a + d) - std::hypot(0.5 * (a - d), c);
    const double scale = std::abs(a) + std::abs(c) + std::abs(d) + std::hypot(gp, gq);
    if (lmin <= 1e-10 * scale) {
      const double shift = -lmin + 1e-3 * scale;
      a += shift;
      d += shift;
    }
    const double det = a * d - c * c;
    const double sp = (d * gp - c * gq) / det, sq = (a * gq - c * gp) / det;
    const double h0 = H(x.p, x.q), slope = gp * sp + gq * sq;
    double t = 1.0;
    for (int k = 0; k < 60 && H(x.p - t * sp, x.q - t * sq) > h0 - 1e-4 * t * slope; ++k) t *= 0.5;
    x.p -= t * sp;
    x.q -= t * sq;
    if (t * std::hypot(sp, sq) <= 1e-15 * (1.0 + std::hypot(x.p, x.q))) break;
  }
  if (!std::isfinite(x.p) || !std::isfinite(x.q)) throw Error(ErrorKind::InvalidInput, "no well bottom found");
  return x;
}

LevelSet trace_well_level(const PolyHamiltonian& H, double b, const LevelCurveOptions& opt) {
  const Point bottom = well_bottom(H);
  return trace_level_curve_at(H, b, bottom.q, opt);
}

namespace {

struct ActionSample {
  double A, dA;
  int mu;
};

ActionSample action_sample(const PolyHamiltonian& H, double b, double q_bottom, const LevelCurveOptions& opt) {
  const LevelSet ls = trace_level_curve_at(H, b, q_bottom, opt);
  return {ls.cycle_action(), ls.action_derivative(), maslov_index(full_loop(ls))};
}

}  // namespace

BSpectrum bohr_sommerfeld(const PolyHamiltonian& H, double h, int n_max, double seed_b,
                          const LevelCurveOptions& opt) {
  if (!(h > 0.0)) throw Error(ErrorKind::InvalidInput, "h must be positive");
  require_momentum_dependent(H);
  const Point bottom = well_bottom(H);
  const double b_min = H(bottom.p, bottom.q);
  BSpectrum out;
  out.h = h;
  const double unit = 2.0 * std::numbers::pi * h;
  double lo = b_min, A_lo = 0.0;
  for (int n = 0; n <= n_max; ++n) {
    auto target = [&](int mu) { return unit * (n + 0.25 * mu); };
    double hi = std::max(seed_b, lo + (lo - b_min) + 1e-3 * std::max(1.0, std::abs(b_min)));
    ActionSample s_hi = action_sample(H, hi, bottom.q, opt);
    for (int k = 0; s_hi.A < target(s_hi.mu); ++k) {
      if (k > 60) throw Error(ErrorKind::NonMonotoneAction, "cannot bracket the quantization condition");
      const double next = lo + 2.0 * (hi - lo);
      const ActionSample s = action_sample(H, next, bottom.q, opt);
      if (s.A <= s_hi.A) throw Error(ErrorKind::NonMonotoneAction, "action is not increasing in b");
      hi = next;
      s_hi = s;
    }
    double a = lo, fa = A_lo - target(s_hi.mu);
    double c = hi, fc = s_hi.A - target(s_hi.mu);
    if (fa > 0.0) throw Error(ErrorKind::NonMonotoneAction, "quantization bracket is inverted");
    // Newton with dA/db = period, safeguarded by the bracket [a, c].
    double b = c - fc * (c - a) / (fc - fa);
    BSEntry e;
    bool done = false;
    for (int it = 0; it < 100 && !done; ++it) {
      const ActionSample s = action_sample(H, b, bottom.q, opt);
      const double f = s.A - target(s.mu);
      e = {n, b, s.mu, f};
      if (std::abs(f) <= 1e-12 * unit) {
        done = true;
        A_lo = s.A;
        break;
      }
      if (f < 0.0) {
        a = b;
        fa = f;
      } else {
        c = b;
        fc = f;
      }
      double next = b - f / s.dA;
      if (!(next > a && next < c) || !std::isfinite(next)) next = 0.5 * (a + c);
      if (c - a <= 1e-15 * std::max(1.0, std::abs(b))) {
        done = true;
        A_lo = s.A;
      }
      b = next;
    }
    if (!done) throw Error(ErrorKind::NonMonotoneAction, "quantization condition did not converge");
    if (!out.entries.empty() && e.b <= out.entries.back().b)
      throw Error(ErrorKind::NonMonotoneAction, "levels are not increasing");
    out.entries.push_back(e);
    lo = e.b;
  }
  return out;
}

double QuantumGrid::nyquist_momentum() const { return h * std::numbers::pi / dq(); }

void QuantumGrid::validate() const {
  if (!(q_max > q_min)) throw Error(ErrorKind::InvalidInput, "grid needs q_max > q_min");
  if (!(h > 0.0)) throw Error(ErrorKind::InvalidInput, "h must be positive");
  if (N < 64 || (N & (N - 1)) != 0) throw Error(ErrorKind::InvalidInput, "grid size must be a power of two >= 64");
}

Eigen::MatrixXcd weyl_quantize(const PolyHamiltonian& H, const QuantumGrid& grid, double max_abs_p) {
  grid.validate();
  if (H.deg_p() > 8) throw Error(ErrorKind::InvalidInput, "deg_p > 8 is not supported by the grid quantizer");
  if (max_abs_p > 0.0 && grid.nyquist_momentum() < 2.0 * max_abs_p)
    throw Error(ErrorKind::GridTooCoarse, "Nyquist momentum below twice the largest classical momentum");
  const int N = grid.N;
  const double L = grid.q_max - grid.q_min;
  std::vector<cd> twiddle(N);
  for (int m = 0; m < N; ++m) twiddle[m] = std::polar(1.0, 2.0 * std::numbers::pi * m / N);

  // g_k(d) = (1/N) sum_n w_n^k e^{2 pi i n d / N}: first column of the circulant P^k.
  const int K = H.deg_p();
  std::vector<std::vector<cd>> g(K + 1, std::vector<cd>(N));
  std::vector<double> w(N);
  for (int n = 0; n < N; ++n) {
    const int ns = n < N / 2 ? n : n - N;
    w[n] = grid.h * 2.0 * std::numbers::pi * ns / L;
  }
  for (int k = 0; k <= K; ++k) {
    std::vector<double> weight(N);
    for (int n = 0; n < N; ++n) weight[n] = std::pow(w[n], k);
    // The Nyquist mode has no sign; average the two choices.
    weight[N / 2] = 0.5 * (std::pow(w[N / 2], k) + std::pow(-w[N / 2], k));
    for (int d = 0; d < N; ++d) {
      cd acc = 0.0;
      for (int n = 0; n < N; ++n) acc += weight[n] * twiddle[(static_cast<long>(n) * d) % N];
      acc /= static_cast<double>(N);
      // Even powers give a real symmetric kernel, odd powers a purely imaginary one.
      g[k][d] = k % 2 == 0 ? cd(acc.real(), 0.0) : cd(0.0, acc.imag());
    }
  }

  // The midpoint (q_i + q_j)/2 depends on i + j only.
  std::vector<std::vector<double>> V(2 * N - 1);
  for (int s = 0; s < 2 * N - 1; ++s) V[s] = H.coefficients_in_p(grid.q_min + 0.5 * s * grid.dq());

  Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(N, N);
  for (int j = 0; j < N; ++j)
    for (int i = 0; i < N; ++i) {
      const std::vector<double>& Vk = V[i + j];
      const int d = ((i - j) % N + N) % N;
      cd acc = 0.0;
      for (int k = 0; k <= K; ++k)
        if (Vk[k] != 0.0) acc += Vk[k] * g[k][d];
      M(i, j) = acc;
    }
  Eigen::MatrixXcd S = 0.5 * (M + M.adjoint());
  return S;
}

std::vector<EigenPair> exact_spectrum(const Eigen::MatrixXcd& M, int k, double dq) {
  const int n = static_cast<int>(M.rows());
  if (M.cols() != n) throw Error(ErrorKind::InvalidInput, "matrix is not square");
  if (k < 1 || k > n) throw Error(ErrorKind::InvalidInput, "requested eigenpair count out of range");
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  if ((M - M.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw Error(ErrorKind::InvalidInput, "matrix is not Hermitian");

  std::vector<double> values(n);
  Eigen::MatrixXcd Z(n, k);
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(std::max(1, k)));
  lapack_int found = 0;
  const double abstol = LAPACKE_dlamch('S');
  const bool real = M.imag().cwiseAbs().maxCoeff() == 0.0;
  if (real) {
    Eigen::MatrixXd A = M.real();
    Eigen::MatrixXd Zr(n, k);
    const lapack_int info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'I', 'U', n, A.data(), n, 0.0, 0.0, 1, k,
                                           abstol, &found, values.data(), Zr.data(), n, support.data());
    if (info != 0) throw Error(ErrorKind::InvalidInput, "dsyevr failed with info " + std::to_string(info));
    Z = Zr.cast<cd>();
  } else {
    Eigen::MatrixXcd A = M;
    const lapack_int info = LAPACKE_zheevr(LAPACK_COL_MAJOR, 'V', 'I', 'U', n, reinterpret_cast<lapack_complex_double*>(A.data()), n,
                                           0.0, 0.0, 1, k, abstol, &found, values.data(),
                                           reinterpret_cast<lapack_complex_double*>(Z.data()), n, support.data());
    if (info != 0) throw Error(ErrorKind::InvalidInput, "zheevr failed with info " + std::to_string(info));
  }

  std::vector<EigenPair> out;
  out.reserve(k);
  for (int c = 0; c < found; ++c) {
    Eigen::VectorXcd v = Z.col(c);
    v /= std::sqrt(v.squaredNorm() * dq);
    const double vmax = v.cwiseAbs().maxCoeff();
    int at = 0;
    while (std::abs(v[at]) < (1.0 - 1e-9) * vmax) ++at;
    v *= std::conj(v[at]) / std::abs(v[at]);
    v[at] = std::abs(v[at]);
    out.push_back({values[c], std::move(v)});
  }
  return out;
}

double max_abs_momentum(const LevelSet& ls) {
  double m = 0.0;
  for (const Point& x : ls.closed_loop()) m = std::max(m, std::abs(x.p));
  return m;
}

std::shared_ptr<const std::vector<EigenPair>> SpectrumCache::get(const PolyHamiltonian& H, const QuantumGrid& grid,
                                                                 int k) {
  Key key{H.coeffs(), grid};
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cache_.find(key);
    if (it != cache_.end() && static_cast<int>(it->second->size()) >= k) return it->second;
  }
  auto value = std::make_shared<const std::vector<EigenPair>>(
      exact_spectrum(weyl_quantize(H, grid), k, grid.dq()));
  std::lock_guard<std::mutex> lock(mu_);
  auto& slot = cache_[key];
  if (!slot || slot->size() < value->size()) slot = value;
  return slot;
}

SpectrumCache& SpectrumCache::global() {
  static SpectrumCache cache;
  return cache;
}

}  // namespace semioverlap
