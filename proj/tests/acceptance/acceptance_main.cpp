// One PASS/FAIL line per acceptance criterion.  Tolerances are pinned here.
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "oracles/airy_oracle.hpp"
#include "semioverlap/errors.hpp"
#include "semioverlap/overlap.hpp"
#include "semioverlap/quantize.hpp"
#include "semioverlap/sixj.hpp"
#include "semioverlap/wkb.hpp"

using namespace semioverlap;
using std::numbers::pi;

namespace {

namespace tol {
constexpr double kHarmonicBS = 1e-8;           // 1
constexpr double kQuarticRateFactor = 3.0;     // 2
constexpr double kWkbRelErr = 0.10;            // 3
constexpr double kWkbMonotoneSlack = 0.20;     // 3
constexpr double kAiryPhase = 1e-3;            // 4
constexpr double kHessian = 1e-3;              // 5
constexpr double kOverlapRelErr = 0.15;        // 6
constexpr double kInterferenceAgreement = 0.9; // 6
constexpr double kFibreReduction = 1e-10;      // 7
constexpr double kOrthogonality = 1e-12;       // 8
constexpr double kPrTotalFactor = 4.0;         // 9
}  // namespace tol

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i]);
  return s;
}

// Grid for the HO levels up to n = 9: the eigenfunctions are negligible beyond 12 sqrt(h).
QuantumGrid oscillator_grid(double h) { return {-12 * std::sqrt(h), 12 * std::sqrt(h), 512, h}; }

Verdict harmonic_bs() {
  double worst = 0.0;
  std::vector<double> per_h;
  for (double h : {1.0, 0.1, 0.01}) {
    const auto bs = bohr_sommerfeld(harmonic_oscillator(), h, 9, h);
    const QuantumGrid g = oscillator_grid(h);
    const auto ex = exact_spectrum(weyl_quantize(harmonic_oscillator(), g), 10, g.dq());
    double e = 0.0;
    for (int n = 0; n < 10; ++n) e = std::max(e, std::abs(bs.entries[n].b - ex[n].value));
    per_h.push_back(e);
    worst = std::max(worst, e);
  }
  return {worst <= tol::kHarmonicBS, "max |b_bs - b_exact| per h (1, 0.1, 0.01) = " + join(per_h) +
                                         ", tolerance " + fmt(tol::kHarmonicBS)};
}

Verdict quartic_rate() {
  std::vector<double> err;
  for (double h : {0.2, 0.1, 0.05}) {
    const auto bs = bohr_sommerfeld(quartic_well(), h, 9, h);
    const QuantumGrid g{-4.0, 4.0, 512, h};
    const auto ex = exact_spectrum(weyl_quantize(quartic_well(), g), 10, g.dq());
    double e = 0.0;
    for (int n = 0; n < 10; ++n) e = std::max(e, std::abs(bs.entries[n].b - ex[n].value));
    err.push_back(e);
  }
  const double r1 = err[0] / err[1], r2 = err[1] / err[2];
  return {r1 >= tol::kQuarticRateFactor && r2 >= tol::kQuarticRateFactor,
          "max error (h = 0.2, 0.1, 0.05) = " + join(err) + ", shrink factors " + fmt(r1) + ", " + fmt(r2) +
              ", required >= " + fmt(tol::kQuarticRateFactor)};
}

// Aggregate L2 relative error of |psi|^2 at the level nearest b = 1, over the
// evaluable grid points (first) and over the fixed window |q| < 1/2 (second, for information).
std::pair<double, double> wkb_density_error(const PolyHamiltonian& H, double h) {
  const auto bs = bohr_sommerfeld(H, h, static_cast<int>(std::ceil(2.0 / h)), h);
  int n = 0;
  for (const auto& e : bs.entries)
    if (std::abs(e.b - 1.0) < std::abs(bs.entries[n].b - 1.0)) n = e.n;
  const WKBEvaluator w(H, bs.entries[n].b, h);
  const QuantumGrid g{-5.0, 5.0, 1024, h};
  const auto ex = exact_spectrum(weyl_quantize(H, g), n + 1, g.dq());
  double num = 0.0, den = 0.0, num_fixed = 0.0, den_fixed = 0.0;
  for (int i = 0; i < g.N; ++i) {
    const double q = g.q(i);
    if (!w.evaluable(q)) continue;
    const double a = std::norm(w(q)) * w.level_spacing(), e = std::norm(ex[n].vector[i]);
    num += (a - e) * (a - e);
    den += e * e;
    if (std::abs(q) < 0.5) num_fixed += (a - e) * (a - e), den_fixed += e * e;
  }
  return {std::sqrt(num / den), std::sqrt(num_fixed / den_fixed)};
}

Verdict wkb_pointwise() {
  bool ok = true;
  std::string detail;
  for (const auto& [name, H] : {std::pair{"oscillator", harmonic_oscillator()}, std::pair{"quartic", quartic_well()}}) {
    std::vector<double> e, fixed;
    for (double h : {0.1, 0.05, 0.025}) {
      const auto [outside_layers, window] = wkb_density_error(H, h);
      e.push_back(outside_layers);
      fixed.push_back(window);
    }
    ok = ok && e[2] <= tol::kWkbRelErr;
    for (int k = 1; k < 3; ++k) ok = ok && e[k] <= (1 + tol::kWkbMonotoneSlack) * e[k - 1];
    detail += std::string(detail.empty() ? "" : "; ") + name + " L2 rel err of |psi|^2 (h = 0.1, 0.05, 0.025) = " +
              join(e) + " [fixed window |q| < 0.5: " + join(fixed) + "]";
  }
  return {ok, detail + "; required <= " + fmt(tol::kWkbRelErr) + " at 0.025, non-increasing within 20%"};
}

double wrap_angle(double a) { return std::remainder(a, 2 * pi); }

Verdict airy_connection() {
  // For airy_alpha > 0 the allowed side is x < 0: the positive-momentum wave carries
  // phase +pi/4 and the negative-momentum wave -pi/4; for airy_alpha < 0 they swap.
  double worst = 0.0;
  for (double alpha : {-3.0, -1.0, -0.5, 0.5, 1.0, 3.0}) {
    const auto fit = oracle::integrate_airy(alpha);
    const double s = alpha > 0 ? 1.0 : -1.0;
    worst = std::max(worst, std::abs(wrap_angle(std::arg(fit.c_plus) - s * pi / 4)));
    worst = std::max(worst, std::abs(wrap_angle(std::arg(fit.c_minus) + s * pi / 4)));
    worst = std::max(worst, std::abs(wrap_angle(std::arg(fit.c_plus / fit.c_minus) - std::arg(connection_ratio(alpha)))));
  }
  return {worst <= tol::kAiryPhase, "max phase deviation over alpha in {+-0.5, +-1, +-3} = " + fmt(worst) +
                                        " rad, tolerance " + fmt(tol::kAiryPhase)};
}

Verdict hessian_identity() {
  struct Pair {
    PolyHamiltonian H1, H2;
    double b1, b2;
  };
  std::vector<Pair> pairs;
  for (double b1 : {0.6, 1.0, 1.7})
    for (double b2 : {0.8, 1.3}) pairs.push_back({harmonic_oscillator(), harmonic_oscillator(2.0), b1, b2});
  for (double b1 : {0.4, 0.7, 1.3})
    for (double b2 : {0.5, 0.8, 1.5}) pairs.push_back({quartic_well(), tilted_oscillator(0.3), b1, b2});
  double worst = 0.0;
  int count = 0;
  for (const auto& p : pairs) {
    const LevelSet L1 = trace_well_level(p.H1, p.b1);
    const SecondFiber F2(p.H2, p.b2);
    for (const auto& c : intersect_level_sets(L1, F2)) {
      worst = std::max(worst, verify_hessian_identity(p.H1, p.H2, c, L1, F2));
      ++count;
    }
  }
  return {count > 0 && worst <= tol::kHessian,
          std::to_string(count) + " intersections, max residual " + fmt(worst) + ", tolerance " + fmt(tol::kHessian)};
}

Verdict main_theorem() {
  const double d = 2.0, E = 1.0;
  const QuantumGrid base{-6.0, 8.0, 1024, 1.0};
  std::vector<double> l2err;
  int agree = 0, cells = 0;
  for (double h : {0.1, 0.05, 0.025}) {
    QuantumGrid g = base;
    g.h = h;
    const int n0 = static_cast<int>(std::lround(E / h - 0.5));
    std::vector<double> asym, exact;
    // n1 = n0 - 2 .. n0 + 3: five cells plus one step beyond for the interference pattern.
    for (int k = -2; k <= 3; ++k) {
      const int n1 = n0 + k, n2 = n0;
      const auto o = overlap_asymptotic(harmonic_oscillator(), h * (n1 + 0.5), harmonic_oscillator(d), h * (n2 + 0.5), h);
      asym.push_back(o.normalized_modulus());
      exact.push_back(std::abs(overlap_exact(harmonic_oscillator(), n1, harmonic_oscillator(d), n2, g)));
    }
    // Aggregate L2 relative error over the cells; per-cell ratios blow up at interference zeros.
    double num = 0.0, den = 0.0;
    for (int k = 0; k < 5; ++k) num += std::pow(asym[k] - exact[k], 2), den += exact[k] * exact[k];
    l2err.push_back(std::sqrt(num / den));
    for (int k = 0; k < 5; ++k) {
      ++cells;
      agree += (asym[k + 1] > asym[k]) == (exact[k + 1] > exact[k]);
    }
  }
  const double frac = static_cast<double>(agree) / cells;
  const bool ok = l2err[2] <= tol::kOverlapRelErr && l2err[1] < l2err[0] && l2err[2] < l2err[1] &&
                  frac >= tol::kInterferenceAgreement;
  return {ok, "L2 rel err of |overlap| over 5 cells (h = 0.1, 0.05, 0.025) = " + join(l2err) + ", interference agreement " +
                  std::to_string(agree) + "/" + std::to_string(cells) + "; required <= " + fmt(tol::kOverlapRelErr) +
                  " at 0.025, decreasing, agreement >= 90%"};
}

Verdict fibre_reduction() {
  double worst = 0.0;
  int count = 0;
  for (double h : {0.1, 0.05, 0.025}) {
    const int n = static_cast<int>(std::lround(1.0 / h - 0.5));
    const double b = h * (n + 0.5);
    const WKBEvaluator w(harmonic_oscillator(), b, h);
    for (double x = -1.2; x <= 1.2; x += 0.1) {
      if (!w.evaluable(x)) continue;
      const auto o = overlap_asymptotic(harmonic_oscillator(), b, PolyHamiltonian::momentum(), x, h);
      const double ref = std::abs(w(x));
      worst = std::max(worst, std::abs(o.modulus - ref) / ref);
      ++count;
    }
  }
  return {count > 0 && worst <= tol::kFibreReduction,
          std::to_string(count) + " fibre points, max relative deviation " + fmt(worst) + ", tolerance " +
              fmt(tol::kFibreReduction)};
}

Verdict sixj_orthogonality() {
  // Every outer configuration with 2j <= 12 that admits at least one j12.
  std::vector<std::array<int, 4>> configs;
  for (int a = 0; a <= 12; ++a)
    for (int b = 0; b <= 12; ++b)
      for (int c = 0; c <= 12; ++c)
        for (int d = 0; d <= 12; ++d)
          if ((a + b + c + d) % 2 == 0) configs.push_back({a, b, c, d});
  const unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  std::vector<double> worst(workers, 0.0);
  std::vector<long> counted(workers, 0);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < configs.size(); i += workers) {
        try {
          worst[w] = std::max(worst[w], orthogonality_defect(configs[i]));
          ++counted[w];
        } catch (const Error&) {
          // no admissible j12
        }
      }
    });
  for (auto& t : pool) t.join();
  const double m = *std::max_element(worst.begin(), worst.end());
  long n = 0;
  for (long c : counted) n += c;
  return {n > 0 && m <= tol::kOrthogonality, std::to_string(n) + " configurations with j <= 6, max defect " + fmt(m) +
                                                 ", tolerance " + fmt(tol::kOrthogonality)};
}

Verdict pr_convergence() {
  const auto rows = convergence_study(SixJInput::from_j({4, 4, 4, 4, 4, 4}), {1, 2, 4, 8});
  std::vector<double> r;
  for (const auto& row : rows) r.push_back(row.ratio);
  bool ok = r.size() == 4;
  for (std::size_t i = 1; ok && i < r.size(); ++i) ok = r[i] < r[i - 1];
  const double factor = r.front() / r.back();
  ok = ok && factor >= tol::kPrTotalFactor;
  return {ok, "RMS|exact - PR| / RMS|exact| (lambda = 1, 2, 4, 8) = " + join(r) + ", total factor " + fmt(factor) +
                  ", required monotone and >= " + fmt(tol::kPrTotalFactor)};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Verdict determinism(const std::string& tool) {
  if (tool.empty()) return {false, "no --tool given"};
  const auto dir = std::filesystem::temp_directory_path() / ("semioverlap_acceptance_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  const auto out = dir / "out.csv";
  const std::vector<std::string> configs = {
      "spectrum --model builtin:quartic --hbar 0.05 --levels 10 --box 5 --grid 512",
      "wkb-eval --model builtin:quartic --hbar 0.05 --level 12 --box 5 --grid 512 --stride 4",
      "overlap --model builtin:ho --model2 builtin:ho:2 --sweep-h 0.1,0.05 --qmin -6 --qmax 8 --grid 1024",
      "sixj --converge --base 4 4 4 4 4 4 --scales 1,2,4",
      "validate --seed 3",
  };
  int identical = 0;
  std::string detail;
  for (const auto& cfg : configs) {
    std::vector<std::string> outputs;
    for (const char* threads : {"1", "1", "4"}) {
      const std::string cmd =
          "SEMIOVERLAP_THREADS=" + std::string(threads) + " " + tool + " " + cfg + " -o " + out.string() + " >/dev/null";
      if (std::system(cmd.c_str()) != 0) {
        detail += " [" + cfg + ": tool failed]";
        outputs.clear();
        break;
      }
      outputs.push_back(slurp(out));
    }
    if (outputs.size() == 3 && !outputs[0].empty() && outputs[0] == outputs[1] && outputs[1] == outputs[2])
      ++identical;
    else if (!outputs.empty())
      detail += " [" + cfg + ": outputs differ]";
  }
  std::filesystem::remove_all(dir);
  return {identical == static_cast<int>(configs.size()),
          std::to_string(identical) + "/" + std::to_string(configs.size()) +
              " configs byte-identical over two runs and 1 vs 4 threads" + detail};
}

const char* kNames[] = {"",
                        "harmonic Bohr-Sommerfeld exactness",
                        "Bohr-Sommerfeld convergence order (quartic)",
                        "WKB pointwise accuracy",
                        "Airy connection phases",
                        "Hessian identity",
                        "asymptotic overlap vs exact",
                        "H2 = p reduction to WKB",
                        "6j orthogonality",
                        "Ponzano-Regge convergence",
                        "determinism"};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  int criterion = 0;
  std::string tool;
  app.add_option("--criterion", criterion, "criterion number (0: all)")->check(CLI::Range(0, 10));
  app.add_option("--tool", tool, "path to the semioverlap executable");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::function<Verdict()>> checks = {
      [] { return Verdict{}; }, harmonic_bs,     quartic_rate,       wkb_pointwise,  airy_connection,
      hessian_identity,         main_theorem,    fibre_reduction,    sixj_orthogonality,
      pr_convergence,           [&] { return determinism(tool); }};
  bool all = true;
  for (int n = 1; n <= 10; ++n) {
    if (criterion && n != criterion) continue;
    Verdict v;
    try {
      v = checks[n]();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (v.pass ? "[PASS] " : "[FAIL] ") << "criterion " << n << " (" << kNames[n] << "): " << v.detail
              << std::endl;
    all = all && v.pass;
  }
  return all ? 0 : 1;
}
