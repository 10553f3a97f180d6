#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "semioverlap/hamiltonian.hpp"

namespace semioverlap {

struct Point {
  double p = 0.0;
  double q = 0.0;
};

struct LevelCurveOptions {
  double tol_curve = 1e-10;
  double tol_turn = 1e-8;
  double tol_simple = 1e-8;
  double tol_action = 1e-10;
  double eps_step = 1e-9;
  double box = 10.0;        // tracing aborts outside [-box, box]^2
  double max_turn = 0.05;   // tangent rotation per step, radians
  double max_step = 0.05;   // arc length per step
  std::size_t max_steps = 2'000'000;
};

// Real roots p of H(p,q) = b, descending.  Throws NearTangency when two real
// roots are closer than tol_turn.
std::vector<double> solve_branches(const PolyHamiltonian& H, double b, double q,
                                   const LevelCurveOptions& opt = {});

// Fig. 3 labelling: a (Hq<0,Hpp>0), b (Hq<0,Hpp<0), c (Hq>0,Hpp<0), d (Hq>0,Hpp>0).
enum class TurningKind { A, B, C, D };

struct TurningPoint {
  Point point;
  double alpha = 0.0;  // -Hq/Hpp
  double hq = 0.0;
  double hpp = 0.0;
  TurningKind kind = TurningKind::A;
  bool simple = true;
  double tau = 0.0;    // loop coordinate
  int dp_sign = 0;     // +1 if p increases through the point along the counter-clockwise loop
};

// Maslov weight of passing `tp` with direction +1 (counter-clockwise) or -1.
int crossing_sign(const TurningPoint& tp, int direction);

struct Branch {
  int branch_id = 0;   // index into the descending root list at the branch's midpoint
  double q_lo = 0.0;
  double q_hi = 0.0;
  std::vector<Point> samples;  // strictly increasing in q
};

// A closed level curve H = b sampled counter-clockwise with respect to dp^dq
// (so the loop integral of p dq is positive).  Positions on the loop are given
// by a loop coordinate tau in [0, segments()): segment floor(tau), fraction
// tau - floor(tau).  Inside a segment the curve is parametrised over its chord,
// and every integral is done by Gauss-Legendre quadrature on that
// parametrisation, so actions are accurate to rounding, not to the sampling.
class LevelSet {
 public:
  const PolyHamiltonian& hamiltonian() const { return H_; }
  double b() const { return b_; }
  const LevelCurveOptions& options() const { return opt_; }
  const std::vector<Point>& closed_loop() const { return loop_; }
  std::size_t segments() const { return loop_.size() - 1; }
  const std::vector<TurningPoint>& turning_points() const { return tps_; }
  const std::vector<Branch>& branches() const { return branches_; }

  double cycle_action() const { return cum_action_.back(); }
  // dA/db = loop integral of dq / (dH/dp); the classical period up to sign.
  double action_derivative() const { return cum_period_.back() * flow_sign_; }
  double period() const { return cum_period_.back(); }
  // +1 if the Hamiltonian flow runs counter-clockwise.
  int flow_sign() const { return flow_sign_; }

  double wrap(double tau) const;
  Point point_at(double tau) const;
  // Integral of p dq from tau = 0 counter-clockwise to tau.
  double action_at(double tau) const;
  // Arc length from tau = 0 counter-clockwise to tau.
  double length_at(double tau) const;
  double length() const { return cum_length_.back(); }
  // Unit tangent (dp, dq) in the counter-clockwise direction.
  Point tangent_at(double tau) const;
  // Loop coordinate of the curve point closest to x.
  double locate(Point x) const;

 private:
  friend LevelSet trace_level_curve(const PolyHamiltonian&, double, Point, const LevelCurveOptions&);
  LevelSet(const PolyHamiltonian& H, double b, const LevelCurveOptions& opt);
  void finalize();
  Point on_segment(std::size_t seg, double t, double* ddelta = nullptr) const;
  double segment_action(std::size_t seg, double t) const;
  double segment_period(std::size_t seg, double t) const;
  double segment_length(std::size_t seg, double t) const;

  PolyHamiltonian H_;
  HamiltonianJet jet_;
  double b_;
  LevelCurveOptions opt_;
  std::vector<Point> loop_;
  std::vector<double> cum_action_, cum_period_, cum_length_;
  std::vector<TurningPoint> tps_;
  std::vector<Branch> branches_;
  int flow_sign_ = 1;
};

LevelSet trace_level_curve(const PolyHamiltonian& H, double b, Point seed,
                           const LevelCurveOptions& opt = {});
// Seeds at the largest root of H(., q) = b.
LevelSet trace_level_curve_at(const PolyHamiltonian& H, double b, double q,
                              const LevelCurveOptions& opt = {});

// An arc of a traced loop from `start` to `end` (loop coordinates).  direction
// +1 runs counter-clockwise; `winds` adds whole extra turns.  start == end with
// winds == 0 is the empty path.
struct CurvePath {
  const LevelSet* level_set = nullptr;
  double start = 0.0;
  double end = 0.0;
  int direction = 1;
  int winds = 0;

  Point start_point() const { return level_set->point_at(start); }
  Point end_point() const { return level_set->point_at(end); }
  // Loop-coordinate length of the arc (always >= 0).
  double span() const;
  // start point, interior loop samples, end point, in traversal order.
  std::vector<Point> arc() const;
  // Whether the arc passes loop coordinate tau (strictly inside).
  bool passes(double tau) const;
};

CurvePath make_path(const LevelSet& ls, double start, double end, int direction = 1, int winds = 0);
CurvePath full_loop(const LevelSet& ls, double start = 0.0);

double action_along(const CurvePath& path);
double cycle_action(const LevelSet& ls);
// Signed count of turning points crossed; throws EndpointAtTurningPoint.
int maslov_index(const CurvePath& path);

// Loop integral of p dq by the trapezoid (shoelace) rule.
double shoelace_action(const std::vector<Point>& closed);

// idx,q,p,is_turning_point
std::string to_csv(const LevelSet& ls);

}  // namespace semioverlap
