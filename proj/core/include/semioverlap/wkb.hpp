#pragma once

#include <complex>
#include <optional>
#include <vector>

#include "semioverlap/hamiltonian.hpp"
#include "semioverlap/levelcurve.hpp"

namespace semioverlap {

struct BranchContribution {
  Point point;            // (p_a(q,b), q)
  double tau = 0.0;       // loop coordinate of the point
  double action = 0.0;    // integral of p dq from the reference point, counter-clockwise
  int maslov = 0;         // maslov_index of the same path
  double amplitude = 0.0; // |dp/db|^{1/2} = |dH/dp|^{-1/2}
  std::complex<double> value;
};

struct WKBDensity {
  double b = 0.0;
  double h = 0.0;
  double q = 0.0;
  Point ref_point;
  std::vector<BranchContribution> branch_data;
  std::complex<double> value;  // coefficient of sqrt|dq db|, C = 1
};

// Airy boundary-layer half width around a turning point: 5 (h^2/|alpha|)^{1/3}.
double turning_exclusion_radius(double h, double alpha);

// Leading-order eigen-half-density of a Bohr-Sommerfeld level:
//   psi(q) = (2 pi h)^{-1/2} sum_a |dp_a/db|^{1/2} exp(i S_a/h - i pi mu_a / 2)
// with S_a and mu_a taken along the loop counter-clockwise from the reference
// point to the branch point a.  The loop is traced once at construction.
class WKBEvaluator {
 public:
  // Default reference: first loop sample after the turning point with the largest q.
  WKBEvaluator(const PolyHamiltonian& H, double b, double h, std::optional<Point> ref_point = std::nullopt,
               const LevelCurveOptions& opt = {});

  const LevelSet& level_set() const { return ls_; }
  Point ref_point() const { return ref_; }
  double ref_tau() const { return ref_tau_; }
  double b() const { return b_; }
  double h() const { return h_; }
  // |exp(i A/h - i pi mu/2) - 1|
  double closure_residual() const { return closure_; }
  // BS level spacing 2 pi h / |dA/db|: multiplying psi by its square root gives a unit-norm wavefunction.
  double level_spacing() const;
  // True when q is classically allowed and outside every turning-point layer.
  bool evaluable(double q) const;

  WKBDensity density(double q) const;
  std::complex<double> operator()(double q) const { return density(q).value; }

 private:
  PolyHamiltonian H_;
  double b_, h_;
  LevelSet ls_;
  Point ref_;
  double ref_tau_ = 0.0;
  double closure_ = 0.0;
};

std::complex<double> wkb_eval(const PolyHamiltonian& H, double b, double h, double q,
                              std::optional<Point> ref_point = std::nullopt);

// Recessive solution of (-1/2 d^2/dx^2 + alpha x) phi = 0 in the standard
// normalisation: Ai((2 alpha)^{1/3} x) for alpha > 0, Ai(-(2|alpha|)^{1/3} x) for alpha < 0.
double airy(double alpha, double x);
// The contour-integral normalisation 2 pi (2|alpha|)^{1/3} airy(alpha, x), whose
// forbidden-side asymptote is sqrt(2 pi) (alpha / 2x)^{1/4} exp(-2/3 sqrt(2 alpha) x^{3/2}).
double airy_contour(double alpha, double x);
// Standard Ai(z): Maclaurin series for |z| <= 6, asymptotic expansions beyond.
double airy_ai(double z);

// Ratio C+/C- of the WKB coefficients on the p > p0 and p < p0 sides of a turning
// point whose local Airy equation has coefficient airy_alpha: i for airy_alpha > 0,
// -i for airy_alpha < 0.  Throws AlphaZero.
std::complex<double> connection_ratio(double airy_alpha);
// For a turning point of a level curve.  The local equation's coefficient is
// Hq/Hpp = -tp.alpha.  Throws NonSimpleTurningPoint.
std::complex<double> connection_ratio(const TurningPoint& tp);
// Product of the connection factors met once around the loop counter-clockwise
// (the ratio when p increases through the point, its inverse otherwise).
std::complex<double> loop_connection_phase(const LevelSet& ls);

}  // namespace semioverlap
