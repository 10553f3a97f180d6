#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "cli.hpp"
#include "semioverlap/errors.hpp"

using namespace semioverlap;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "semioverlap");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  for (std::string f; std::getline(in, f, ',');) out.push_back(f);
  return out;
}

// Data rows: everything that is neither a comment nor the header.
std::vector<std::vector<std::string>> rows(const std::string& text) {
  std::vector<std::vector<std::string>> out;
  const auto ls = lines(text);
  bool header = false;
  for (const auto& l : ls) {
    if (l.empty() || l[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    out.push_back(split(l));
  }
  return out;
}

std::string header(const std::string& text) {
  for (const auto& l : lines(text))
    if (!l.empty() && l[0] != '#') return l;
  return {};
}

class ThreadsEnv {
 public:
  explicit ThreadsEnv(const char* value) { ::setenv("SEMIOVERLAP_THREADS", value, 1); }
  ~ThreadsEnv() { ::unsetenv("SEMIOVERLAP_THREADS"); }
};

}  // namespace

TEST(Cli, SpectrumOfTheOscillator) {
  const auto r = run_cli({"spectrum", "--model", "builtin:ho", "--hbar", "0.1", "--levels", "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(lines(r.out).front().rfind("# config: command=spectrum", 0), 0u);
  EXPECT_EQ(header(r.out), "n,b_bs,b_exact,abs_err,rel_err");
  const auto t = rows(r.out);
  ASSERT_EQ(t.size(), 4u);
  for (int n = 0; n < 4; ++n) {
    EXPECT_EQ(std::stoi(t[n][0]), n);
    EXPECT_NEAR(std::stod(t[n][1]), 0.1 * (n + 0.5), 1e-10);
    EXPECT_NEAR(std::stod(t[n][2]), 0.1 * (n + 0.5), 1e-10);
    EXPECT_LE(std::stod(t[n][3]), 1e-10);
  }
}

TEST(Cli, SixJExactAndAsymptotic) {
  const auto r = run_cli({"sixj", "--exact", "1", "1", "1", "1", "1", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(header(r.out), "symbol,exact");
  ASSERT_EQ(rows(r.out).size(), 1u);
  EXPECT_DOUBLE_EQ(std::stod(rows(r.out)[0][1]), 1.0 / 6.0);

  const auto d = run_cli({"sixj", "--doubled", "--exact", "2", "2", "2", "2", "2", "2"});
  ASSERT_EQ(d.code, 0) << d.err;
  EXPECT_EQ(rows(d.out)[0][1], rows(r.out)[0][1]);

  const auto h = run_cli({"sixj", "--exact", "1/2", "1/2", "1/2", "1/2", "1", "1"});
  ASSERT_EQ(h.code, 0) << h.err;

  const auto p = run_cli({"sixj", "--pr", "4", "4", "4", "4", "4", "4"});
  ASSERT_EQ(p.code, 0) << p.err;
  EXPECT_EQ(header(p.out), "symbol,exact,pr,abs_err");
}

TEST(Cli, SixJConvergenceTable) {
  const auto r = run_cli({"sixj", "--converge", "--base", "4", "4", "4", "4", "4", "4", "--scales", "1,2"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(header(r.out), "lambda,j12,exact,pr,abs_err");
  const auto t = rows(r.out);
  ASSERT_FALSE(t.empty());
  EXPECT_EQ(t.front()[0], "1");
  EXPECT_EQ(t.back()[0], "2");
}

TEST(Cli, WkbEvalRowsAreEvaluablePoints) {
  const auto r = run_cli({"wkb-eval", "--model", "builtin:ho", "--hbar", "0.05", "--level", "20", "--box", "5",
                          "--grid", "512", "--stride", "8"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(header(r.out), "q,re_psi,im_psi,abs_psi,abs_psi_exact");
  const auto t = rows(r.out);
  ASSERT_GT(t.size(), 5u);
  for (const auto& row : t) {
    EXPECT_LT(std::abs(std::stod(row[0])), std::sqrt(2 * 0.05 * 20.5));
    EXPECT_NEAR(std::stod(row[3]), std::stod(row[4]), 0.2);
  }
}

TEST(Cli, OverlapCells) {
  const auto r = run_cli({"overlap", "--model", "builtin:ho", "--model2", "builtin:ho:2", "--hbar", "0.1", "--n1",
                          "8", "9", "--n2", "9", "--qmin", "-6", "--qmax", "8", "--grid", "512"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(header(r.out), "n1,n2,b1,b2,abs_asym,abs_exact,rel_err,n_intersections");
  const auto t = rows(r.out);
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t[0][0], "8");
  EXPECT_EQ(t[1][0], "9");
  for (const auto& row : t) EXPECT_EQ(row[7], "2");
}

TEST(Cli, OverlapSweepIsDeterministicAcrossThreadCounts) {
  const std::vector<std::string> args = {"overlap", "--model", "builtin:ho", "--model2", "builtin:ho:2",
                                         "--sweep-h", "0.1,0.05", "--qmin", "-6", "--qmax", "8", "--grid", "512"};
  std::string one, four;
  {
    ThreadsEnv env("1");
    one = run_cli(args).out;
  }
  {
    ThreadsEnv env("4");
    four = run_cli(args).out;
  }
  EXPECT_FALSE(one.empty());
  EXPECT_EQ(one, four);
  EXPECT_EQ(rows(one).size(), 10u);
}

TEST(Cli, ValidatePasses) {
  const auto r = run_cli({"validate", "--seed", "7"});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_EQ(header(r.out), "check,status,residual,tolerance");
  for (const auto& row : rows(r.out)) EXPECT_EQ(row[1], "PASS") << row[0];
}

TEST(Cli, OutputFile) {
  const auto path = std::filesystem::temp_directory_path() / "semioverlap_cli_test.csv";
  const auto r = run_cli({"sixj", "--exact", "1", "1", "1", "1", "1", "1", "-o", path.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  EXPECT_EQ(header(buf.str()), "symbol,exact");
  std::filesystem::remove(path);
}

TEST(CliErrors, MissingModelFileIsAnInputError) {
  const auto r = run_cli({"spectrum", "--model", "/nonexistent/model.json"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("Io"), std::string::npos) << r.err;
}

TEST(CliErrors, BadUsageIsAnInputError) {
  EXPECT_EQ(run_cli({"spectrum", "--model", "builtin:ho", "--grid", "100"}).code, 2);
  EXPECT_EQ(run_cli({"spectrum", "--model", "builtin:ho", "--hbar", "-1"}).code, 2);
  EXPECT_EQ(run_cli({"spectrum"}).code, 2);
  EXPECT_EQ(run_cli({"nonsense"}).code, 2);
  EXPECT_EQ(run_cli({"sixj", "--exact", "1", "1", "1", "1", "1", "1/3"}).code, 2);
  EXPECT_EQ(run_cli({"spectrum", "--model", "builtin:unknown"}).code, 2);
}

TEST(CliErrors, DomainFailuresExitWithOne) {
  const auto pr = run_cli({"sixj", "--pr", "4", "4", "4", "4", "6", "6"});
  EXPECT_EQ(pr.code, 1);
  EXPECT_NE(pr.err.find("NotRealizable"), std::string::npos) << pr.err;
  // The position fibre is not confining, so it has no grid eigenvectors to compare with.
  EXPECT_EQ(run_cli({"overlap", "--model", "builtin:ho", "--model2", "builtin:q", "--n1", "3", "--n2", "3"}).code, 1);
  // h so small that the grid cannot resolve the loop momenta.
  const auto coarse = run_cli({"spectrum", "--model", "builtin:ho", "--hbar", "0.001", "--grid", "64", "--levels", "2"});
  EXPECT_EQ(coarse.code, 1);
  EXPECT_NE(coarse.err.find("GridTooCoarse"), std::string::npos) << coarse.err;
}

TEST(CliErrors, HelpIsNotAnError) {
  const auto r = run_cli({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("spectrum"), std::string::npos);
}

TEST(CliBinary, ExitCodesAndDeterminism) {
  const std::string tool = SEMIOVERLAP_TOOL;
  auto sh = [&](const std::string& args) {
    const int status = std::system((tool + " " + args + " >/dev/null 2>&1").c_str());
    return WEXITSTATUS(status);
  };
  EXPECT_EQ(sh("sixj --exact 1 1 1 1 1 1"), 0);
  EXPECT_EQ(sh("spectrum --model /nonexistent.json"), 2);
  EXPECT_EQ(sh("sixj --pr 4 4 4 4 6 6"), 1);

  // The config line echoes the output path, so both runs write the same file.
  const auto path = std::filesystem::temp_directory_path() / "semioverlap_det.csv";
  const std::string cmd = tool + " spectrum --model builtin:quartic --hbar 0.1 --levels 5 --box 4 --grid 256 -o " + path.string();
  auto slurp = [&] {
    std::ifstream in(path, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
  };
  ASSERT_EQ(std::system(("SEMIOVERLAP_THREADS=1 " + cmd).c_str()), 0);
  const std::string first = slurp();
  ASSERT_EQ(std::system(("SEMIOVERLAP_THREADS=3 " + cmd).c_str()), 0);
  EXPECT_FALSE(first.empty());
  EXPECT_EQ(first, slurp());
  std::filesystem::remove(path);
}

TEST(CliHelpers, FormatAndModels) {
  EXPECT_EQ(cli::format_double(0.1), "1.0000000000000001e-01");
  EXPECT_EQ(cli::resolve_model("builtin:ho"), harmonic_oscillator());
  EXPECT_EQ(cli::resolve_model("builtin:ho:2"), harmonic_oscillator(2.0));
  EXPECT_EQ(cli::resolve_model("builtin:tilted:0.3"), tilted_oscillator(0.3));
  EXPECT_EQ(cli::resolve_model("builtin:p"), PolyHamiltonian::momentum());
}
