#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <tuple>
#include <vector>

#include <Eigen/Core>

#include "semioverlap/hamiltonian.hpp"
#include "semioverlap/levelcurve.hpp"

namespace semioverlap {

struct BSEntry {
  int n = 0;
  double b = 0.0;
  int maslov = 0;         // loop Maslov index at b
  double residual = 0.0;  // A(b) - 2 pi h (n + maslov/4)
};

struct BSpectrum {
  double h = 0.0;
  std::vector<BSEntry> entries;
};

// Point where grad H = 0, found by Newton from `start` (the bottom of a single well).
Point well_bottom(const PolyHamiltonian& H, Point start = {});

// Loop through the largest root of H(., q*) = b, q* the well bottom.
LevelSet trace_well_level(const PolyHamiltonian& H, double b, const LevelCurveOptions& opt = {});

// Solves A(b) = 2 pi h (n + mu/4) for n = 0..n_max.  seed_b is the first upper
// bracket guess; the bracket is widened until it contains the root.
BSpectrum bohr_sommerfeld(const PolyHamiltonian& H, double h, int n_max, double seed_b,
                          const LevelCurveOptions& opt = {});

struct QuantumGrid {
  double q_min = -10.0;
  double q_max = 10.0;
  int N = 512;
  double h = 1.0;

  double dq() const { return (q_max - q_min) / N; }
  double q(int i) const { return q_min + i * dq(); }
  double nyquist_momentum() const;
  void validate() const;  // throws InvalidInput
  friend bool operator<(const QuantumGrid& a, const QuantumGrid& b) {
    return std::tie(a.q_min, a.q_max, a.N, a.h) < std::tie(b.q_min, b.q_max, b.N, b.h);
  }
};

// Weyl-ordered operator on the periodic grid, p -> -ih d/dq realised spectrally.
// Every monomial is ordered exactly: Weyl(p^k q^m)_{ij} = (P^k)_{ij} ((q_i+q_j)/2)^m.
// If max_abs_p > 0, throws GridTooCoarse when the Nyquist momentum is below 2 max_abs_p.
Eigen::MatrixXcd weyl_quantize(const PolyHamiltonian& H, const QuantumGrid& grid, double max_abs_p = 0.0);

struct EigenPair {
  double value = 0.0;
  Eigen::VectorXcd vector;  // sum |psi_i|^2 dq = 1, largest component real positive
};

// k lowest eigenpairs of a Hermitian matrix (dense LAPACK solve).
std::vector<EigenPair> exact_spectrum(const Eigen::MatrixXcd& M, int k, double dq = 1.0);

// Largest |p| over a loop.
double max_abs_momentum(const LevelSet& ls);

// Thread-safe memo of exact_spectrum(weyl_quantize(H, grid), k).
class SpectrumCache {
 public:
  std::shared_ptr<const std::vector<EigenPair>> get(const PolyHamiltonian& H, const QuantumGrid& grid, int k);
  static SpectrumCache& global();

 private:
  using Key = std::tuple<PolyHamiltonian::Coeffs, QuantumGrid>;
  std::mutex mu_;
  std::map<Key, std::shared_ptr<const std::vector<EigenPair>>> cache_;
};

}  // namespace semioverlap
