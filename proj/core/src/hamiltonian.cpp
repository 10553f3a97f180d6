#include "semioverlap/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "semioverlap/errors.hpp"

namespace semioverlap {

PolyHamiltonian::PolyHamiltonian() : c_{{0.0}} {}

PolyHamiltonian::PolyHamiltonian(Coeffs coeffs) : c_(std::move(coeffs)) {
  if (c_.empty() || c_[0].empty())
    throw Error(ErrorKind::InvalidInput, "coefficient matrix is empty");
  const std::size_t cols = c_[0].size();
  for (const auto& row : c_) {
    if (row.size() != cols)
      throw Error(ErrorKind::InvalidInput, "coefficient matrix is not rectangular");
    for (double v : row)
      if (!std::isfinite(v))
        throw Error(ErrorKind::InvalidInput, "non-finite coefficient");
  }
  trim();
}

void PolyHamiltonian::trim() {
  while (c_.size() > 1 &&
         std::all_of(c_.back().begin(), c_.back().end(), [](double v) { return v == 0.0; }))
    c_.pop_back();
  auto column_zero = [&](std::size_t m) {
    return std::all_of(c_.begin(), c_.end(), [m](const auto& row) { return row[m] == 0.0; });
  };
  std::size_t cols = c_[0].size();
  while (cols > 1 && column_zero(cols - 1)) --cols;
  for (auto& row : c_) row.resize(cols);
}

PolyHamiltonian PolyHamiltonian::constant(double c) { return PolyHamiltonian(PolyHamiltonian::Coeffs{{c}}); }
PolyHamiltonian PolyHamiltonian::momentum() { return PolyHamiltonian(PolyHamiltonian::Coeffs{{0.0}, {1.0}}); }
PolyHamiltonian PolyHamiltonian::position() { return PolyHamiltonian(PolyHamiltonian::Coeffs{{0.0, 1.0}}); }

double PolyHamiltonian::coeff(int k, int m) const {
  if (k < 0 || m < 0 || k > deg_p() || m > deg_q()) return 0.0;
  return c_[k][m];
}

bool PolyHamiltonian::is_zero() const { return c_.size() == 1 && c_[0].size() == 1 && c_[0][0] == 0.0; }

bool PolyHamiltonian::is_linear() const {
  for (int k = 0; k <= deg_p(); ++k)
    for (int m = 0; m <= deg_q(); ++m)
      if (k + m > 1 && c_[k][m] != 0.0) return false;
  return true;
}

std::vector<double> PolyHamiltonian::coefficients_in_p(double q) const {
  std::vector<double> a(c_.size());
  for (std::size_t k = 0; k < c_.size(); ++k) {
    const auto& row = c_[k];
    double r = 0.0;
    for (std::size_t m = row.size(); m-- > 0;) r = r * q + row[m];
    a[k] = r;
  }
  return a;
}

std::vector<double> PolyHamiltonian::coefficients_in_q(double p) const {
  const std::size_t cols = c_[0].size();
  std::vector<double> a(cols);
  for (std::size_t m = 0; m < cols; ++m) {
    double r = 0.0;
    for (std::size_t k = c_.size(); k-- > 0;) r = r * p + c_[k][m];
    a[m] = r;
  }
  return a;
}

double PolyHamiltonian::operator()(double p, double q) const {
  double acc = 0.0;
  for (std::size_t k = c_.size(); k-- > 0;) {
    const auto& row = c_[k];
    double r = 0.0;
    for (std::size_t m = row.size(); m-- > 0;) r = r * q + row[m];
    acc = acc * p + r;
  }
  return acc;
}

double eval(const PolyHamiltonian& H, double p, double q) { return H(p, q); }

PolyHamiltonian partial(const PolyHamiltonian& H, Var var) {
  const auto& c = H.coeffs();
  const int dp = H.deg_p(), dq = H.deg_q();
  if (var == Var::P) {
    if (dp == 0) return PolyHamiltonian();
    PolyHamiltonian::Coeffs out(dp, std::vector<double>(dq + 1));
    for (int k = 1; k <= dp; ++k)
      for (int m = 0; m <= dq; ++m) out[k - 1][m] = k * c[k][m];
    return PolyHamiltonian(std::move(out));
  }
  if (dq == 0) return PolyHamiltonian();
  PolyHamiltonian::Coeffs out(dp + 1, std::vector<double>(dq));
  for (int k = 0; k <= dp; ++k)
    for (int m = 1; m <= dq; ++m) out[k][m - 1] = m * c[k][m];
  return PolyHamiltonian(std::move(out));
}

PolyHamiltonian operator+(const PolyHamiltonian& a, const PolyHamiltonian& b) {
  const int dp = std::max(a.deg_p(), b.deg_p()), dq = std::max(a.deg_q(), b.deg_q());
  PolyHamiltonian::Coeffs out(dp + 1, std::vector<double>(dq + 1));
  for (int k = 0; k <= dp; ++k)
    for (int m = 0; m <= dq; ++m) out[k][m] = a.coeff(k, m) + b.coeff(k, m);
  return PolyHamiltonian(std::move(out));
}

PolyHamiltonian operator*(double s, const PolyHamiltonian& a) {
  auto c = a.coeffs();
  for (auto& row : c)
    for (double& v : row) v *= s;
  return PolyHamiltonian(std::move(c));
}

PolyHamiltonian operator-(const PolyHamiltonian& a, const PolyHamiltonian& b) { return a + (-1.0) * b; }

PolyHamiltonian operator*(const PolyHamiltonian& a, const PolyHamiltonian& b) {
  const int dp = a.deg_p() + b.deg_p(), dq = a.deg_q() + b.deg_q();
  PolyHamiltonian::Coeffs out(dp + 1, std::vector<double>(dq + 1));
  for (int k1 = 0; k1 <= a.deg_p(); ++k1)
    for (int m1 = 0; m1 <= a.deg_q(); ++m1) {
      const double x = a.coeffs()[k1][m1];
      if (x == 0.0) continue;
      for (int k2 = 0; k2 <= b.deg_p(); ++k2)
        for (int m2 = 0; m2 <= b.deg_q(); ++m2) out[k1 + k2][m1 + m2] += x * b.coeffs()[k2][m2];
    }
  return PolyHamiltonian(std::move(out));
}

PolyHamiltonian poisson_bracket(const PolyHamiltonian& H1, const PolyHamiltonian& H2) {
  return partial(H1, Var::P) * partial(H2, Var::Q) - partial(H1, Var::Q) * partial(H2, Var::P);
}

void require_momentum_dependent(const PolyHamiltonian& H) {
  if (!H.is_momentum_dependent())
    throw Error(ErrorKind::InvalidInput, "Hamiltonian does not depend on p");
}

HamiltonianJet::HamiltonianJet(const PolyHamiltonian& h)
    : H(h),
      Hp(partial(h, Var::P)),
      Hq(partial(h, Var::Q)),
      Hpp(partial(Hp, Var::P)),
      Hpq(partial(Hp, Var::Q)),
      Hqq(partial(Hq, Var::Q)) {}

PolyHamiltonian parse_hamiltonian(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, e.what());
  }
  if (!j.is_object() || !j.contains("coeffs") || !j["coeffs"].is_array() || j["coeffs"].empty())
    throw Error(ErrorKind::Parse, "expected an object with a non-empty \"coeffs\" array");
  PolyHamiltonian::Coeffs c;
  std::size_t cols = 0;
  for (const auto& row : j["coeffs"]) {
    if (!row.is_array() || row.empty()) throw Error(ErrorKind::Parse, "each coeffs row must be a non-empty array");
    if (c.empty()) cols = row.size();
    if (row.size() != cols) throw Error(ErrorKind::Parse, "coeffs is not rectangular");
    std::vector<double> r;
    for (const auto& v : row) {
      if (!v.is_number()) throw Error(ErrorKind::Parse, "coefficients must be numbers");
      r.push_back(v.get<double>());
    }
    c.push_back(std::move(r));
  }
  try {
    return PolyHamiltonian(std::move(c));
  } catch (const Error& e) {
    throw Error(ErrorKind::Parse, e.what());
  }
}

PolyHamiltonian load_hamiltonian(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open model file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_hamiltonian(ss.str());
}

std::string to_json(const PolyHamiltonian& H) {
  nlohmann::json j;
  j["coeffs"] = H.coeffs();
  return j.dump();
}

PolyHamiltonian harmonic_oscillator(double shift) {
  return PolyHamiltonian(PolyHamiltonian::Coeffs{{0.5 * shift * shift, -shift, 0.5}, {0.0, 0.0, 0.0}, {0.5, 0.0, 0.0}});
}

PolyHamiltonian quartic_well() {
  return PolyHamiltonian(PolyHamiltonian::Coeffs{{0, 0, 0, 0, 1.0}, {0, 0, 0, 0, 0}, {0.5, 0, 0, 0, 0}});
}

PolyHamiltonian tilted_oscillator(double tilt) {
  return PolyHamiltonian(PolyHamiltonian::Coeffs{{0.0, tilt, 0.5}, {0.0, 0.0, 0.0}, {0.5, 0.0, 0.0}});
}

}  // namespace semioverlap
