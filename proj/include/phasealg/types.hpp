// Core domain types: point-atom structures, Patterson maps, reflections
// and subtracted-intensity sets. All values are immutable after
// construction and safe to share between threads.

#ifndef PHASEALG_TYPES_HPP_
#define PHASEALG_TYPES_HPP_

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace phasealg {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised when a KH-matrix entry needs an intensity outside the observed set.
struct MissingIntensityError : Error {
  explicit MissingIntensityError(const std::string& msg) : Error(msg) {}
};

// Raised when a basic-set scan needs a reflection outside S1 / the window.
struct WindowExhaustedError : Error {
  explicit WindowExhaustedError(const std::string& msg) : Error(msg) {}
};

// Default tolerances; the CLI can override the rank tolerance.
constexpr double kMergeTol = 1e-9;       // circle distance identifying two deltas
constexpr double kWeightDropRel = 1e-9;  // |nu| below this (relative) is a cancelled centre
constexpr double kRankRelTol = 1e-8;     // singular-value ratio declaring dependence
constexpr double kResidualTol = 1e-6;
// Eigenvalue ratio below which a Gram matrix counts as singular during
// the scan. Symmetric eigenvalues are absolutely well conditioned, so a
// true zero computes as ~1e-14 even on ill-conditioned sets; a tight
// threshold avoids mistaking mere ill-conditioning for dependence.
constexpr double kZeroRelTol = 1e-12;

// A reflection h in Z^D, stored with trailing zero components for D=2.
using Reflection = std::array<int, 3>;
// A fractional coordinate vector in [0,1)^D, trailing zeros for D=2.
using FracVec = std::array<double, 3>;

inline Reflection neg(const Reflection& h) { return {-h[0], -h[1], -h[2]}; }
inline Reflection add(const Reflection& a, const Reflection& b) {
  return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}
inline Reflection sub(const Reflection& a, const Reflection& b) {
  return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}
inline int cheb_norm(const Reflection& h) {
  return std::max({std::abs(h[0]), std::abs(h[1]), std::abs(h[2])});
}

// Canonical Friedel representative: the lexicographically larger of (h, -h).
inline Reflection friedel_canonical(const Reflection& h) {
  Reflection m = neg(h);
  return h < m ? m : h;
}

inline std::string to_string(const Reflection& h, int dim) {
  std::string s = "(" + std::to_string(h[0]);
  for (int d = 1; d < dim; ++d) s += "," + std::to_string(h[d]);
  return s + ")";
}

inline double wrap_unit(double x) {
  double y = x - std::floor(x);
  if (y >= 1.0) y -= 1.0;  // guards against floor rounding at 1-eps
  return y;
}

// Distance on the unit circle between two fractional coordinates.
inline double circle_dist(double a, double b) {
  double d = std::fabs(wrap_unit(a) - wrap_unit(b));
  return std::min(d, 1.0 - d);
}

// Max per-coordinate circle distance; the merge metric for deltas.
inline double frac_dist(const FracVec& a, const FracVec& b, int dim) {
  double m = 0;
  for (int d = 0; d < dim; ++d) m = std::max(m, circle_dist(a[d], b[d]));
  return m;
}

inline FracVec wrap_vec(const FracVec& v, int dim) {
  FracVec w{0, 0, 0};
  for (int d = 0; d < dim; ++d) w[d] = wrap_unit(v[d]);
  return w;
}

struct Atom {
  double charge = 0;  // atomic number or neutron scattering length
  FracVec pos{0, 0, 0};
};

// The (unknown or ground-truth) point-atom configuration of the cell.
struct CrystalStructure {
  int dim = 2;  // 2 or 3
  std::vector<Atom> atoms;

  void validate() const;
};

struct PattersonCentre {
  double weight = 0;  // nu, may be negative for neutron data
  FracVec delta{0, 0, 0};
};

// Off-origin Patterson density: scattering centres at inter-atomic
// difference vectors. Centrosymmetric by construction.
struct PattersonMap {
  int dim = 2;
  std::vector<PattersonCentre> centres;

  int nbar() const { return static_cast<int>(centres.size()); }
  void validate(double merge_tol = kMergeTol) const;
};

// Map h -> subtracted intensity I_h. One canonical representative is
// stored per Friedel pair, so I_h == I_{-h} holds exactly.
struct IntensitySet {
  int dim = 2;
  std::map<Reflection, double> entries;  // keys are Friedel-canonical
  std::optional<double> sum_zsq;         // sum of Z_j^2 when known

  bool has(const Reflection& h) const {
    return entries.count(friedel_canonical(h)) != 0;
  }
  double at(const Reflection& h) const {
    auto it = entries.find(friedel_canonical(h));
    if (it == entries.end())
      throw MissingIntensityError("intensity not available at reflection " +
                                  to_string(h, dim));
    return it->second;
  }
  void set(const Reflection& h, double value) {
    entries[friedel_canonical(h)] = value;
  }
};

}  // namespace phasealg

#endif
