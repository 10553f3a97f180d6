#pragma once

#include <array>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace semioverlap {

// (j1, j2, j3, j4, j12, j23) stored as 2j.  The symbol is
//   { j1  j2  j12 }
//   { j3  j4  j23 }
// with triads (j1,j2,j12), (j3,j4,j12), (j2,j3,j23), (j1,j4,j23).
struct SixJInput {
  std::array<int, 6> twice{};

  static SixJInput from_doubled(std::array<int, 6> twice);
  static SixJInput from_j(std::array<double, 6> j);  // each j must be a half-integer
  double j(int i) const { return 0.5 * twice[i]; }
  SixJInput scaled(int lambda) const;  // j -> lambda j
  std::string to_string() const;
  // Every triad satisfies the triangle and integer-perimeter conditions.
  bool admissible() const;
  friend bool operator==(const SixJInput&, const SixJInput&) = default;
};

// The symbol's value is sign * sqrt(square), exactly.
struct SixJValue {
  int sign = 0;
  boost::multiprecision::cpp_rational square;
  double to_double() const;
  bool is_zero() const { return sign == 0; }
  friend bool operator==(const SixJValue&, const SixJValue&) = default;
};

SixJValue racah_6j_exact(const SixJInput& input);
double racah_6j(const SixJInput& input);

// max over j23, j23' of |sum_j12 (2 j12 + 1)(2 j23 + 1) {j1 j2 j12; j3 j4 j23}{... j23'} - delta|,
// for the outer spins (2 j1, 2 j2, 2 j3, 2 j4).  Throws InvalidInput if no j12 is admissible.
double orthogonality_defect(const std::array<int, 4>& twice_outer);

// Edges in input order, length j_i + 1/2.  Faces are the four triads, so the
// opposite pairs are (j1, j3), (j2, j4), (j12, j23).
struct Tetrahedron {
  std::array<double, 6> edge_lengths{};
  double cayley_menger = 0.0;  // 288 V^2
  double volume = 0.0;
  std::array<double, 6> dihedral{};  // exterior angles pi - interior, per edge
};

// Throws NotRealizable when 288 V^2 <= 1e-12 L_max^6.
Tetrahedron tetrahedron_from_lengths(const std::array<double, 6>& lengths);
Tetrahedron tetrahedron_geometry(const SixJInput& input);

// (12 pi V)^{-1/2} cos(sum_i L_i theta_i + pi/4).
double ponzano_regge(const SixJInput& input);

struct ConvergenceSample {
  int twice_j12 = 0;
  double exact = 0.0;
  double pr = 0.0;
};

struct ConvergenceRow {
  int lambda = 0;
  std::vector<ConvergenceSample> samples;  // every realizable j12
  int window_lo = 0, window_hi = 0;        // 2 j12 bounds of the trimmed window
  std::size_t window_count = 0;
  double rms_abs_err = 0.0;                // over the window
  double rms_exact = 0.0;
  double ratio = 0.0;
  double ratio_full = 0.0;                 // same ratio over every realizable j12
};

// For each lambda: scale all six spins, sweep j12 over its realizable range and
// compare exact and Ponzano-Regge values.  The error window drops `trim` of the
// realizable range at each end, where the asymptotic form degrades (caustics).
std::vector<ConvergenceRow> convergence_study(const SixJInput& base, const std::vector<int>& scales,
                                              double trim = 0.2);

// "3/2", "1.5" or "3" -> 2j.  Throws Parse on anything that is not a half-integer >= 0.
int parse_twice_j(const std::string& text);

}  // namespace semioverlap
