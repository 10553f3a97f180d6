#pragma once

#include <string>
#include <vector>

namespace semioverlap {

enum class Var { P, Q };

// H(p,q) = sum_{k,m} c[k][m] p^k q^m. Rows are indexed by the power of p.
// Stored dense and trimmed, so deg_p()/deg_q() are tight; the zero polynomial
// is the 1x1 matrix {{0}}.
class PolyHamiltonian {
 public:
  using Coeffs = std::vector<std::vector<double>>;

  PolyHamiltonian();
  explicit PolyHamiltonian(Coeffs coeffs);  // throws InvalidInput on ragged or non-finite input

  static PolyHamiltonian constant(double c);
  static PolyHamiltonian momentum();  // H = p
  static PolyHamiltonian position();  // H = q

  const Coeffs& coeffs() const { return c_; }
  int deg_p() const { return static_cast<int>(c_.size()) - 1; }
  int deg_q() const { return static_cast<int>(c_[0].size()) - 1; }
  double coeff(int k, int m) const;
  bool is_zero() const;
  bool is_momentum_dependent() const { return deg_p() >= 1; }
  // Total degree <= 1: the level sets are straight lines.
  bool is_linear() const;

  double operator()(double p, double q) const;

  // Coefficients a_k(q) of the univariate polynomial in p at fixed q.
  std::vector<double> coefficients_in_p(double q) const;
  // Coefficients of q^m for fixed p.
  std::vector<double> coefficients_in_q(double p) const;

  friend bool operator==(const PolyHamiltonian&, const PolyHamiltonian&) = default;

 private:
  void trim();
  Coeffs c_;
};

double eval(const PolyHamiltonian& H, double p, double q);
PolyHamiltonian partial(const PolyHamiltonian& H, Var var);
// {H1,H2} = dH1/dp dH2/dq - dH1/dq dH2/dp, so {p,q} = +1.
PolyHamiltonian poisson_bracket(const PolyHamiltonian& H1, const PolyHamiltonian& H2);

PolyHamiltonian operator+(const PolyHamiltonian& a, const PolyHamiltonian& b);
PolyHamiltonian operator-(const PolyHamiltonian& a, const PolyHamiltonian& b);
PolyHamiltonian operator*(const PolyHamiltonian& a, const PolyHamiltonian& b);
PolyHamiltonian operator*(double s, const PolyHamiltonian& a);

// Throws InvalidInput when deg_p == 0.
void require_momentum_dependent(const PolyHamiltonian& H);

// All first and second partials, built once and evaluated many times.
struct HamiltonianJet {
  explicit HamiltonianJet(const PolyHamiltonian& H);
  PolyHamiltonian H, Hp, Hq, Hpp, Hpq, Hqq;
};

// {"coeffs": [[c00, c01, ...], [c10, ...], ...]}
PolyHamiltonian parse_hamiltonian(const std::string& json_text);
PolyHamiltonian load_hamiltonian(const std::string& path);
std::string to_json(const PolyHamiltonian& H);

// Common test systems.
PolyHamiltonian harmonic_oscillator(double shift = 0.0);   // p^2/2 + (q-shift)^2/2
PolyHamiltonian quartic_well();                            // p^2/2 + q^4
PolyHamiltonian tilted_oscillator(double tilt);            // p^2/2 + q^2/2 + tilt q

}  // namespace semioverlap
