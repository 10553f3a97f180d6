#pragma once

#include <complex>
#include <optional>
#include <vector>

#include "semioverlap/hamiltonian.hpp"
#include "semioverlap/levelcurve.hpp"
#include "semioverlap/quantize.hpp"

namespace semioverlap {

struct IntersectionPoint {
  Point c;
  double bracket = 0.0;      // {H1,H2}(c)
  double action_diff = 0.0;  // area of the disc bounded by gamma1 (c0 -> c) and gamma2 (c -> c0)
  int rel_maslov = 0;
  double tau1 = 0.0;         // loop coordinate on L1
};

// The second fibre: either a traced loop or, for H2 of total degree one, a straight line.
class SecondFiber {
 public:
  SecondFiber(const PolyHamiltonian& H2, double b2, const LevelCurveOptions& opt = {});
  SecondFiber(const LevelSet& loop);
  const PolyHamiltonian& hamiltonian() const { return H2_; }
  double b() const { return b2_; }
  bool is_line() const { return !loop_.has_value(); }
  const LevelSet& loop() const { return *loop_; }

 private:
  PolyHamiltonian H2_;
  double b2_;
  std::optional<LevelSet> loop_;
};

enum class ArcChoice { Short, Long };

struct OverlapOptions {
  LevelCurveOptions curve;
  double closure_tol = 1e-6;   // Bohr-Sommerfeld closure residual allowed on each loop
  double tangency_rel = 1e-6;  // tol_trans = tangency_rel * max |{H1,H2}| on L1
  double dedupe_radius = 1e-7;
};

// Transversal intersections of L1 with {H2 = b2}, ordered by decreasing q
// (ties: decreasing p); the first one is the reference c0.  action_diff and
// rel_maslov are filled relative to it.  Throws TangentialIntersection.
std::vector<IntersectionPoint> intersect_level_sets(const LevelSet& L1, const SecondFiber& F2,
                                                    const OverlapOptions& opt = {});
std::vector<IntersectionPoint> intersect_level_sets(const PolyHamiltonian& H1, double b1, const PolyHamiltonian& H2,
                                                    double b2, const OverlapOptions& opt = {});

// gamma1 from c0 to c on L1: the shorter arc (or the longer one).
CurvePath gamma1_path(const IntersectionPoint& c, const IntersectionPoint& c0, const LevelSet& L1,
                      ArcChoice choice = ArcChoice::Short);

// Integral of p dq around gamma1 (c0 -> c on L1) followed by gamma2 (c -> c0 on
// the second fibre).  gamma2 is the arc along which the field X_H2 turns by the
// same angle as along gamma1, so the contour does not wind around critical points of H2.
double action_difference(const IntersectionPoint& c, const IntersectionPoint& c0, const LevelSet& L1,
                         const SecondFiber& F2, ArcChoice choice = ArcChoice::Short);
double action_difference(const IntersectionPoint& c, const IntersectionPoint& c0, const LevelSet& L1,
                         const LevelSet& L2, ArcChoice choice = ArcChoice::Short);

// Signed count of tangencies of gamma1 (c0 -> c) with the H2 foliation, i.e. zeros of
// {H1,H2} along the arc.  Each counts -sign(d{H1,H2}/dt) sign(grad H1 . grad H2);
// for H2 = q this is maslov_index.  Throws TangencyAtEndpoint.
int relative_maslov(const IntersectionPoint& c, const IntersectionPoint& c0, const LevelSet& L1,
                    const PolyHamiltonian& H2, ArcChoice choice = ArcChoice::Short,
                    double tol_trans = 0.0);

struct OverlapAsymptotic {
  double b1 = 0.0, b2 = 0.0, h = 0.0;
  std::vector<IntersectionPoint> points;
  std::vector<std::complex<double>> contributions;
  std::complex<double> total;
  double modulus = 0.0;
  // Level spacings 2 pi h / |dA/db| (0 for a line); sqrt(db1 db2) * modulus is the
  // overlap of unit-normalised eigenfunctions.
  double spacing1 = 0.0, spacing2 = 0.0;
  double normalized_modulus() const;
};

// (2 pi h)^{-1/2} sum_c |{H1,H2}(c)|^{-1/2} exp(i action_diff/h - i pi rel_maslov/2).
// Loops are checked against the Bohr-Sommerfeld closure (NotBohrSommerfeld).
OverlapAsymptotic overlap_asymptotic(const PolyHamiltonian& H1, double b1, const PolyHamiltonian& H2, double b2,
                                     double h, const OverlapOptions& opt = {});

// <psi2_{n2} | psi1_{n1}> from the grid eigenvectors of both Weyl operators.
std::complex<double> overlap_exact(const PolyHamiltonian& H1, int n1, const PolyHamiltonian& H2, int n2,
                                   const QuantumGrid& grid);

// |FD(d^2 S / db1 db2) {H1,H2}(c) - 1| with a centred four-point stencil,
// delta = 1e-4 max(|b|, 1).  The actions are measured from reference points that
// move with b1 (on L1) and b2 (on the second fibre) only.
double verify_hessian_identity(const PolyHamiltonian& H1, const PolyHamiltonian& H2, const IntersectionPoint& c,
                               const LevelSet& L1, const SecondFiber& F2, const OverlapOptions& opt = {});
double verify_hessian_identity(const PolyHamiltonian& H1, const PolyHamiltonian& H2, const IntersectionPoint& c,
                               const LevelSet& L1, const LevelSet& L2, const OverlapOptions& opt = {});

}  // namespace semioverlap
