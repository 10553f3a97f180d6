#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "semioverlap/errors.hpp"
#include "semioverlap/levelcurve.hpp"
#include "semioverlap/overlap.hpp"
#include "semioverlap/quantize.hpp"
#include "semioverlap/sixj.hpp"
#include "semioverlap/wkb.hpp"

namespace semioverlap::cli {

namespace {

const char* command_name(Command c) {
  switch (c) {
    case Command::Spectrum: return "spectrum";
    case Command::WkbEval: return "wkb-eval";
    case Command::Overlap: return "overlap";
    case Command::SixJ: return "sixj";
    case Command::Validate: return "validate";
  }
  return "?";
}

const char* sixj_mode_name(SixJMode m) {
  switch (m) {
    case SixJMode::Exact: return "exact";
    case SixJMode::PonzanoRegge: return "pr";
    case SixJMode::Converge: return "converge";
  }
  return "?";
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) os << ',';
    if constexpr (std::is_floating_point_v<T>)
      os << format_double(v[i]);
    else
      os << v[i];
  }
  return os.str();
}

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

void check_config(const RunConfig& c) {
  auto bad = [](const std::string& m) { throw Error(ErrorKind::Parse, m); };
  if (!(c.h > 0.0) || !std::isfinite(c.h)) bad("--hbar must be positive");
  for (double h : c.sweep_h)
    if (!(h > 0.0) || !std::isfinite(h)) bad("--sweep-h values must be positive");
  if (!power_of_two(c.grid_n) || c.grid_n < 64) bad("--grid must be a power of two >= 64");
  if (!(c.q_max > c.q_min)) bad("grid interval is empty");
  if (c.levels < 1) bad("--levels must be >= 1");
  if (c.level < 0) bad("--level must be >= 0");
  if (c.stride < 1) bad("--stride must be >= 1");
  for (int n : c.n1)
    if (n < 0) bad("--n1 values must be >= 0");
  for (int n : c.n2)
    if (n < 0) bad("--n2 values must be >= 0");
  if (!(c.trim >= 0.0 && c.trim < 0.5)) bad("--trim must lie in [0, 0.5)");
  for (int s : c.scales)
    if (s < 1) bad("--scales values must be >= 1");
  const bool needs_model = c.command == Command::Spectrum || c.command == Command::WkbEval ||
                           c.command == Command::Overlap;
  if (needs_model && c.model.empty()) bad("--model is required");
  if (c.command == Command::Overlap) {
    if (c.model2.empty()) bad("--model2 is required");
    if (c.sweep_h.empty() && (c.n1.empty() || c.n2.empty())) bad("overlap needs --n1 and --n2, or --sweep-h");
  }
  if (c.command == Command::SixJ && c.spins.size() != 6) bad("sixj needs six spins");
}

QuantumGrid make_grid(const RunConfig& c, double h) { return QuantumGrid{c.q_min, c.q_max, c.grid_n, h}; }

int twice_spin(const std::string& s, bool doubled) {
  if (!doubled) return parse_twice_j(s);
  std::size_t used = 0;
  int v = -1;
  try {
    v = std::stoi(s, &used);
  } catch (const std::logic_error&) {
  }
  if (v < 0 || used != s.size()) throw Error(ErrorKind::Parse, "not a non-negative doubled spin: '" + s + "'");
  return v;
}

SixJInput spins_of(const RunConfig& c) {
  std::array<int, 6> t{};
  for (int i = 0; i < 6; ++i) t[i] = twice_spin(c.spins[i], c.doubled);
  return SixJInput::from_doubled(t);
}

// Runs body(i) for i in [0, n) on the worker pool.  Exceptions are collected per
// index and the one with the smallest index is rethrown, so failures are reproducible.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const unsigned workers = std::min<std::size_t>(worker_count(), std::max<std::size_t>(n, 1));
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

double bs_level(const BSpectrum& s, int n) { return s.entries.at(n).b; }

BSpectrum spectrum_of(const PolyHamiltonian& H, double h, int n_max) {
  const Point bottom = well_bottom(H);
  return bohr_sommerfeld(H, h, n_max, H(bottom.p, bottom.q) + h);
}

void require_resolved(const QuantumGrid& grid, double max_p) {
  if (grid.nyquist_momentum() < 2.0 * max_p)
    throw Error(ErrorKind::GridTooCoarse, "grid Nyquist momentum " + format_double(grid.nyquist_momentum()) +
                                              " is below twice the classical momentum " + format_double(max_p));
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> trailer;  // extra comment lines
};

void write_table(std::ostream& os, const RunConfig& c, const Table& t) {
  os << "# config: " << describe(c) << '\n';
  for (std::size_t i = 0; i < t.header.size(); ++i) os << (i ? "," : "") << t.header[i];
  os << '\n';
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
    os << '\n';
  }
  for (const auto& line : t.trailer) os << "# " << line << '\n';
}

Table run_spectrum(const RunConfig& c) {
  const PolyHamiltonian H = resolve_model(c.model);
  const QuantumGrid grid = make_grid(c, c.h);
  const BSpectrum bs = spectrum_of(H, c.h, c.levels - 1);
  const double max_p = max_abs_momentum(trace_well_level(H, bs.entries.back().b));
  const auto ex = exact_spectrum(weyl_quantize(H, grid, max_p), c.levels, grid.dq());
  Table t{{"n", "b_bs", "b_exact", "abs_err", "rel_err"}, {}, {}};
  for (int n = 0; n < c.levels; ++n) {
    const double b = bs.entries[n].b, e = ex[n].value, err = std::abs(b - e);
    t.rows.push_back({std::to_string(n), format_double(b), format_double(e), format_double(err),
                      format_double(err / std::abs(e))});
  }
  return t;
}

Table run_wkb_eval(const RunConfig& c) {
  const PolyHamiltonian H = resolve_model(c.model);
  const QuantumGrid grid = make_grid(c, c.h);
  const BSpectrum bs = spectrum_of(H, c.h, c.level);
  const WKBEvaluator ev(H, bs_level(bs, c.level), c.h);
  const auto ex = exact_spectrum(weyl_quantize(H, grid, max_abs_momentum(ev.level_set())), c.level + 1, grid.dq());
  const Eigen::VectorXcd& v = ex[c.level].vector;
  const double norm = std::sqrt(ev.level_spacing());
  Table t{{"q", "re_psi", "im_psi", "abs_psi", "abs_psi_exact"}, {}, {}};
  for (int i = 0; i < grid.N; i += c.stride) {
    const double q = grid.q(i);
    if (!ev.evaluable(q)) continue;
    const std::complex<double> psi = norm * ev(q);
    t.rows.push_back({format_double(q), format_double(psi.real()), format_double(psi.imag()),
                      format_double(std::abs(psi)), format_double(std::abs(v[i]))});
  }
  return t;
}

struct Cell {
  double h;
  int n1, n2;
};

Table run_overlap(const RunConfig& c) {
  const PolyHamiltonian H1 = resolve_model(c.model), H2 = resolve_model(c.model2);
  if (!H2.is_momentum_dependent() || H2.is_linear())
    throw Error(ErrorKind::InvalidInput, "overlap tables need a confining second model");
  std::vector<Cell> cells;
  const bool sweep = !c.sweep_h.empty();
  if (sweep) {
    for (double h : c.sweep_h) {
      const int n0 = static_cast<int>(std::lround(c.energy / h - 0.5));
      for (int d : c.offsets)
        if (n0 + d >= 0) cells.push_back({h, n0 + d, n0});
    }
  } else {
    for (int a : c.n1)
      for (int b : c.n2) cells.push_back({c.h, a, b});
  }

  // Per-h setup on the orchestrator: BS levels, grid checks and cached grid spectra.
  std::vector<double> hs;
  for (const auto& cell : cells)
    if (std::find(hs.begin(), hs.end(), cell.h) == hs.end()) hs.push_back(cell.h);
  struct Setup {
    BSpectrum s1, s2;
  };
  std::vector<Setup> setups;
  for (double h : hs) {
    int m1 = 0, m2 = 0;
    for (const auto& cell : cells)
      if (cell.h == h) m1 = std::max(m1, cell.n1), m2 = std::max(m2, cell.n2);
    Setup s{spectrum_of(H1, h, m1), spectrum_of(H2, h, m2)};
    const QuantumGrid grid = make_grid(c, h);
    require_resolved(grid, std::max(max_abs_momentum(trace_well_level(H1, bs_level(s.s1, m1))),
                                    max_abs_momentum(trace_well_level(H2, bs_level(s.s2, m2)))));
    SpectrumCache::global().get(H1, grid, m1 + 1);
    SpectrumCache::global().get(H2, grid, m2 + 1);
    setups.push_back(std::move(s));
  }

  std::vector<std::vector<std::string>> rows(cells.size());
  parallel_for(cells.size(), [&](std::size_t i) {
    const Cell& cell = cells[i];
    const Setup& s = setups[std::find(hs.begin(), hs.end(), cell.h) - hs.begin()];
    const double b1 = bs_level(s.s1, cell.n1), b2 = bs_level(s.s2, cell.n2);
    const OverlapAsymptotic oa = overlap_asymptotic(H1, b1, H2, b2, cell.h);
    const double asym = oa.normalized_modulus();
    const double exact = std::abs(overlap_exact(H1, cell.n1, H2, cell.n2, make_grid(c, cell.h)));
    std::vector<std::string> r;
    if (sweep) r.push_back(format_double(cell.h));
    for (std::string x : {std::to_string(cell.n1), std::to_string(cell.n2), format_double(b1), format_double(b2),
                          format_double(asym), format_double(exact), format_double(std::abs(asym - exact) / exact),
                          std::to_string(oa.points.size())})
      r.push_back(std::move(x));
    rows[i] = std::move(r);
  });

  Table t;
  if (sweep) t.header.push_back("h");
  for (const char* name : {"n1", "n2", "b1", "b2", "abs_asym", "abs_exact", "rel_err", "n_intersections"})
    t.header.push_back(name);
  t.rows = std::move(rows);
  return t;
}

Table run_sixj(const RunConfig& c) {
  const SixJInput s = spins_of(c);
  Table t;
  if (c.sixj_mode == SixJMode::Exact) {
    t.header = {"symbol", "exact"};
    t.rows.push_back({s.to_string(), format_double(racah_6j(s))});
    return t;
  }
  if (c.sixj_mode == SixJMode::PonzanoRegge) {
    if (!s.admissible()) throw Error(ErrorKind::NotRealizable, "spins violate a triangle condition");
    const double exact = racah_6j(s), pr = ponzano_regge(s);
    t.header = {"symbol", "exact", "pr", "abs_err"};
    t.rows.push_back({s.to_string(), format_double(exact), format_double(pr), format_double(std::abs(exact - pr))});
    return t;
  }
  const auto rows = convergence_study(s, c.scales, c.trim);
  t.header = {"lambda", "j12", "exact", "pr", "abs_err"};
  for (const auto& row : rows) {
    for (const auto& smp : row.samples)
      t.rows.push_back({std::to_string(row.lambda), format_double(0.5 * smp.twice_j12), format_double(smp.exact),
                        format_double(smp.pr), format_double(std::abs(smp.exact - smp.pr))});
    t.trailer.push_back("lambda=" + std::to_string(row.lambda) + " window_j12=[" +
                        format_double(0.5 * row.window_lo) + "," + format_double(0.5 * row.window_hi) +
                        "] rms_ratio=" + format_double(row.ratio) + " rms_ratio_full=" + format_double(row.ratio_full));
  }
  return t;
}

struct Check {
  std::string name;
  double tolerance;
  std::function<double(std::mt19937_64&)> measure;  // returns the residual; pass iff residual <= tolerance
};

Table run_validate(const RunConfig& c, bool& all_pass) {
  const PolyHamiltonian ho = harmonic_oscillator(), ho2 = harmonic_oscillator(2.0);
  std::vector<Check> checks = {
      {"ho_bohr_sommerfeld_exact", 1e-8,
       [&](std::mt19937_64&) {
         const double h = 0.1;
         const QuantumGrid g{-4.0, 4.0, 256, h};
         const BSpectrum bs = spectrum_of(ho, h, 9);
         const auto ex = exact_spectrum(weyl_quantize(ho, g), 10, g.dq());
         double worst = 0.0;
         for (int n = 0; n < 10; ++n) worst = std::max(worst, std::abs(bs.entries[n].b - ex[n].value));
         return worst;
       }},
      {"ho_cycle_action", 1e-10,
       [&](std::mt19937_64& rng) {
         double worst = 0.0;
         std::uniform_real_distribution<double> U(0.1, 4.0);
         for (int i = 0; i < 5; ++i) {
           const double b = U(rng);
           worst = std::max(worst, std::abs(cycle_action(trace_well_level(ho, b)) - 2.0 * std::numbers::pi * b) / b);
         }
         return worst;
       }},
      {"ho_loop_maslov", 0.0,
       [&](std::mt19937_64&) {
         const LevelSet ls = trace_well_level(ho, 1.0);
         return std::abs(maslov_index(full_loop(ls, 0.5)) - 2.0);
       }},
      {"connection_ratio", 1e-15,
       [&](std::mt19937_64&) {
         return std::max(std::abs(connection_ratio(1.0) - std::complex<double>(0, 1)),
                         std::abs(connection_ratio(-1.0) - std::complex<double>(0, -1)));
       }},
      {"hessian_identity", 1e-3,
       [&](std::mt19937_64& rng) {
         std::uniform_real_distribution<double> U(0.8, 1.6);
         const double b1 = U(rng), b2 = U(rng);
         const LevelSet L1 = trace_well_level(ho, b1);
         const SecondFiber F(ho2, b2);
         double worst = 0.0;
         for (const auto& p : intersect_level_sets(L1, F))
           worst = std::max(worst, verify_hessian_identity(ho, ho2, p, L1, F));
         return worst;
       }},
      {"position_fibre_reduction", 1e-10,
       [&](std::mt19937_64& rng) {
         const double h = 0.05, b = h * 20.5;
         std::uniform_real_distribution<double> U(-0.9, 0.9);
         const double q = U(rng);
         const OverlapAsymptotic oa = overlap_asymptotic(ho, b, PolyHamiltonian::position(), q, h);
         return std::abs(oa.modulus - std::abs(wkb_eval(ho, b, h, q)));
       }},
      {"sixj_orthogonality", 1e-12,
       [&](std::mt19937_64&) {
         double worst = 0.0;
         for (int a = 0; a <= 4; ++a)
           for (int b = 0; b <= 4; ++b)
             for (int d = 0; d <= 4; ++d)
               for (int e = 0; e <= 4; ++e) {
                 if ((a + b + d + e) % 2) continue;
                 try {
                   worst = std::max(worst, orthogonality_defect({a, b, d, e}));
                 } catch (const Error&) {
                 }
               }
         return worst;
       }},
      {"ponzano_regge_convergence", 0.0,
       [&](std::mt19937_64&) {
         const auto rows = convergence_study(SixJInput::from_doubled({8, 8, 8, 8, 8, 8}), {1, 2, 4});
         return (rows[1].ratio < rows[0].ratio && rows[2].ratio < rows[1].ratio) ? 0.0 : 1.0;
       }},
  };
  Table t{{"check", "status", "residual", "tolerance"}, {}, {}};
  all_pass = true;
  std::vector<double> residual(checks.size());
  parallel_for(checks.size(), [&](std::size_t i) {
    std::mt19937_64 rng(c.seed + i);
    residual[i] = checks[i].measure(rng);
  });
  for (std::size_t i = 0; i < checks.size(); ++i) {
    const bool ok = residual[i] <= checks[i].tolerance;
    all_pass = all_pass && ok;
    t.rows.push_back({checks[i].name, ok ? "PASS" : "FAIL", format_double(residual[i]),
                      format_double(checks[i].tolerance)});
  }
  return t;
}

std::vector<double> parse_doubles(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    std::size_t used = 0;
    try {
      v.push_back(std::stod(item, &used));
    } catch (const std::logic_error&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw Error(ErrorKind::Parse, "not a number: '" + item + "'");
  }
  return v;
}

}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", x);
  return buf;
}

unsigned worker_count() {
  if (const char* env = std::getenv("SEMIOVERLAP_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

PolyHamiltonian resolve_model(const std::string& spec) {
  const std::string prefix = "builtin:";
  if (spec.rfind(prefix, 0) != 0) return load_hamiltonian(spec);
  const std::string name = spec.substr(prefix.size());
  const auto colon = name.find(':');
  const std::string base = name.substr(0, colon);
  double arg = 0.0;
  if (colon != std::string::npos) {
    const auto v = parse_doubles(name.substr(colon + 1));
    if (v.size() != 1) throw Error(ErrorKind::Parse, "bad built-in parameter in '" + spec + "'");
    arg = v[0];
  }
  if (base == "ho") return harmonic_oscillator(arg);
  if (base == "quartic" && colon == std::string::npos) return quartic_well();
  if (base == "tilted") return tilted_oscillator(arg);
  if (base == "p" && colon == std::string::npos) return PolyHamiltonian::momentum();
  if (base == "q" && colon == std::string::npos) return PolyHamiltonian::position();
  throw Error(ErrorKind::Parse, "unknown built-in model '" + spec + "'");
}

std::string describe(const RunConfig& c) {
  std::ostringstream os;
  os << "command=" << command_name(c.command);
  switch (c.command) {
    case Command::Spectrum:
    case Command::WkbEval:
    case Command::Overlap:
      os << " model=" << c.model;
      if (c.command == Command::Overlap) os << " model2=" << c.model2;
      os << " hbar=" << format_double(c.h) << " grid=" << c.grid_n << " qmin=" << format_double(c.q_min)
         << " qmax=" << format_double(c.q_max);
      if (c.command == Command::Spectrum) os << " levels=" << c.levels;
      if (c.command == Command::WkbEval) os << " level=" << c.level << " stride=" << c.stride;
      if (c.command == Command::Overlap) {
        os << " n1=" << join(c.n1) << " n2=" << join(c.n2) << " sweep_h=" << join(c.sweep_h)
           << " energy=" << format_double(c.energy) << " offsets=" << join(c.offsets);
      }
      break;
    case Command::SixJ:
      os << " mode=" << sixj_mode_name(c.sixj_mode) << " spins=" << join(c.spins)
         << " doubled=" << (c.doubled ? 1 : 0);
      if (c.sixj_mode == SixJMode::Converge) os << " scales=" << join(c.scales) << " trim=" << format_double(c.trim);
      break;
    case Command::Validate:
      break;
  }
  os << " seed=" << c.seed << " output=" << (c.output.empty() ? "-" : c.output);
  return os.str();
}

std::optional<RunConfig> parse_args(int argc, const char* const* argv, std::ostream& out) {
  RunConfig c;
  CLI::App app{"Semiclassical spectra, WKB eigenfunctions, overlaps of two integrable systems and 6j symbols"};
  app.require_subcommand(1);
  std::string sweep_text, scales_text;
  double box = 0.0;

  auto common = [&](CLI::App* s) {
    s->add_option("--hbar", c.h, "Planck constant h");
    s->add_option("--grid", c.grid_n, "grid points N (power of two)");
    s->add_option("--box", box, "grid interval [-R, R]");
    s->add_option("--qmin", c.q_min, "grid interval start");
    s->add_option("--qmax", c.q_max, "grid interval end");
    s->add_option("--output,-o", c.output, "CSV path (default stdout)");
    s->add_option("--seed", c.seed, "seed for randomized sampling");
  };

  auto* spectrum = app.add_subcommand("spectrum", "Bohr-Sommerfeld levels against the grid spectrum");
  spectrum->add_option("--model", c.model, "model JSON or builtin:<name>")->required();
  spectrum->add_option("--levels", c.levels, "number of levels");
  common(spectrum);

  auto* wkb = app.add_subcommand("wkb-eval", "WKB eigenfunction against the grid eigenvector");
  wkb->add_option("--model", c.model, "model JSON or builtin:<name>")->required();
  wkb->add_option("--level", c.level, "level index n");
  wkb->add_option("--stride", c.stride, "evaluate every stride-th grid point");
  common(wkb);

  auto* overlap = app.add_subcommand("overlap", "asymptotic against exact eigenfunction overlaps");
  overlap->add_option("--model", c.model, "first model")->required();
  overlap->add_option("--model2", c.model2, "second model")->required();
  overlap->add_option("--n1", c.n1, "levels of the first model")->delimiter(',');
  overlap->add_option("--n2", c.n2, "levels of the second model")->delimiter(',');
  overlap->add_option("--sweep-h", sweep_text, "comma-separated h values for a convergence table");
  overlap->add_option("--energy", c.energy, "sweep cells: n0 = round(E/h - 1/2)");
  overlap->add_option("--offsets", c.offsets, "sweep cells: n1 = n0 + offset, n2 = n0")->delimiter(',');
  common(overlap);

  auto* sixj = app.add_subcommand("sixj", "6j symbols and their Ponzano-Regge asymptotics");
  std::vector<std::string> exact, pr, base;
  auto* o_exact = sixj->add_option("--exact", exact, "j1 j2 j3 j4 j12 j23")->expected(6);
  auto* o_pr = sixj->add_option("--pr", pr, "j1 j2 j3 j4 j12 j23")->expected(6);
  auto* o_conv = sixj->add_flag("--converge", "scaling study of the base symbol");
  sixj->add_option("--base", base, "j1 j2 j3 j4 j12 j23 for --converge")->expected(6);
  sixj->add_option("--scales", scales_text, "comma-separated scale factors");
  sixj->add_option("--trim", c.trim, "fraction of the j12 range dropped at each end");
  sixj->add_flag("--doubled", c.doubled, "spins are given as 2j");
  sixj->add_option("--output,-o", c.output, "CSV path (default stdout)");
  o_exact->excludes(o_pr)->excludes(o_conv);
  o_pr->excludes(o_conv);

  auto* validate = app.add_subcommand("validate", "run the invariant suite");
  validate->add_option("--seed", c.seed, "seed for randomized sampling");
  validate->add_option("--output,-o", c.output, "CSV path (default stdout)");

  std::vector<std::string> args;
  for (int i = argc - 1; i > 0; --i) args.emplace_back(argv[i]);
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return std::nullopt;
  } catch (const CLI::ParseError& e) {
    throw Error(ErrorKind::Parse, e.what());
  }

  if (box > 0.0) {
    c.q_min = -box;
    c.q_max = box;
  } else if (box < 0.0) {
    throw Error(ErrorKind::Parse, "--box must be positive");
  }
  if (!sweep_text.empty()) c.sweep_h = parse_doubles(sweep_text);
  if (!scales_text.empty()) {
    c.scales.clear();
    for (double s : parse_doubles(scales_text)) {
      if (s != std::round(s)) throw Error(ErrorKind::Parse, "--scales must be integers");
      c.scales.push_back(static_cast<int>(s));
    }
  }

  if (spectrum->parsed()) {
    c.command = Command::Spectrum;
  } else if (wkb->parsed()) {
    c.command = Command::WkbEval;
  } else if (overlap->parsed()) {
    c.command = Command::Overlap;
  } else if (sixj->parsed()) {
    c.command = Command::SixJ;
    if (!exact.empty()) {
      c.sixj_mode = SixJMode::Exact;
      c.spins = exact;
    } else if (!pr.empty()) {
      c.sixj_mode = SixJMode::PonzanoRegge;
      c.spins = pr;
    } else if (o_conv->count()) {
      c.sixj_mode = SixJMode::Converge;
      c.spins = base;
      if (base.empty()) throw Error(ErrorKind::Parse, "--converge needs --base");
    } else {
      throw Error(ErrorKind::Parse, "sixj needs one of --exact, --pr, --converge");
    }
  } else {
    c.command = Command::Validate;
  }
  check_config(c);
  return c;
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    check_config(config);
    Table table;
    bool ok = true;
    switch (config.command) {
      case Command::Spectrum: table = run_spectrum(config); break;
      case Command::WkbEval: table = run_wkb_eval(config); break;
      case Command::Overlap: table = run_overlap(config); break;
      case Command::SixJ: table = run_sixj(config); break;
      case Command::Validate: table = run_validate(config, ok); break;
    }
    std::ostringstream buf;
    write_table(buf, config, table);
    if (config.output.empty()) {
      out << buf.str();
    } else {
      std::ofstream f(config.output, std::ios::binary);
      if (!f) throw Error(ErrorKind::Io, "cannot open output file '" + config.output + "'");
      f << buf.str();
      if (!f.flush()) throw Error(ErrorKind::Io, "cannot write output file '" + config.output + "'");
    }
    if (!ok) {
      err << "error: one or more invariants failed\n";
      return 1;
    }
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return is_domain_error(e.kind()) ? 1 : 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::optional<RunConfig> config;
  try {
    config = parse_args(argc, argv, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  if (!config) return 0;
  return run(*config, out, err);
}

}  // namespace semioverlap::cli
