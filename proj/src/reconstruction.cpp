#include "phasealg/reconstruction.hpp"

#include <algorithm>
#include <complex>
#include <limits>
#include <optional>

namespace phasealg {

namespace {

// KH matrix over the basic set factored once; reused for every target h.
struct BasisSolver {
  const BasicSet& b;
  const IntensitySet& i;
  Eigen::MatrixXcd g;
  std::optional<ExtendedLU> lu;  // conditioning can defeat double LU
  Eigen::VectorXd basis_I;

  BasisSolver(const BasicSet& b_, const IntensitySet& i_, double rel_tol)
      : b(b_), i(i_) {
    KHMatrix kh = kh_matrix(i, b.refs);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(kh.m,
                                                      Eigen::EigenvaluesOnly);
    double lo = std::numeric_limits<double>::infinity(), hi = 0;
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
      double a = std::fabs(es.eigenvalues()(k));
      lo = std::min(lo, a);
      hi = std::max(hi, a);
    }
    if (hi == 0 || lo < rel_tol * hi)
      throw Error("KH matrix over the given set is singular: not a basic set");
    g = kh.m.cast<std::complex<double>>();
    lu.emplace(g);
    basis_I.resize(b.nbar());
    for (int j = 0; j < b.nbar(); ++j) basis_I(j) = i.at(b.refs[j]);
  }

  bool row_available(const IntensitySet& known, const Reflection& h) const {
    for (const Reflection& k : b.refs)
      if (!known.has(sub(k, h))) return false;
    return true;
  }

  Eigen::VectorXcd row(const IntensitySet& known, const Reflection& h) const {
    Eigen::VectorXcd rhs(b.nbar());
    for (int l = 0; l < b.nbar(); ++l) rhs(l) = known.at(sub(b.refs[l], h));
    return lu->solve(rhs);
  }

  double intensity_from_row(const Eigen::VectorXcd& a) const {
    std::complex<double> s = 0;
    for (int j = 0; j < b.nbar(); ++j) s += std::conj(a(j)) * basis_I(j);
    return s.real();
  }
};

// Propagates expansion rows through the window. The seed intensities
// over C u F determine the rows of the basic set (unit rows) and of the
// recorded zeros; those rows determine the matrices of the unit-shift
// operators on the N-dimensional lattice-vector space, and every other
// row follows by applying shifts, with no further intensity data.
struct RowPropagator {
  const BasicSet& b;
  const BasisSolver& solver;
  std::array<int, 3> ord;
  int n;
  std::map<Reflection, Eigen::VectorXcd> rows;  // coefficients against b.refs
  std::array<Eigen::MatrixXcd, 3> shift;
  std::array<std::optional<ExtendedLU>, 3> shift_inv;
  std::map<Reflection, Eigen::VectorXcd> memo;

  // spectral form of the commuting shift family: one eigenbasis
  // diagonalizes every shift[d] with (in exact arithmetic) unimodular
  // eigenvalues, so arbitrary powers stay bounded instead of amplifying
  // rounding error multiplicatively along the propagation path
  std::optional<CommutingSpectrum> spectral;
  int origin = -1;

  RowPropagator(const BasicSet& b_, const BasisSolver& solver_,
                const IntensitySet& i0)
      : b(b_), solver(solver_), ord(axis_order(b_.axis, b_.dim)), n(b_.nbar()) {
    for (int j = 0; j < n; ++j)
      rows[b.refs[j]] = Eigen::VectorXcd::Unit(n, j);
    for (const Reflection& z : b.zeros) rows[z] = solver.row(i0, z);

    // shift matrix along an axis: column j holds the row of k_j + e
    for (int d = 0; d < b.dim; ++d) {
      Reflection e{0, 0, 0};
      e[ord[d]] = 1;
      shift[d].resize(n, n);
      for (int j = 0; j < n; ++j)
        shift[d].col(j) = boundary_row(add(b.refs[j], e), d);
      shift_inv[d].emplace(shift[d]);
    }
    build_spectral();
  }

  void build_spectral() {
    for (int j = 0; j < n; ++j)
      if (b.refs[j] == Reflection{0, 0, 0}) origin = j;
    if (origin < 0) return;
    std::vector<Eigen::MatrixXcd> fam(shift.begin(), shift.begin() + b.dim);
    CommutingSpectrum cs(fam);
    if (!cs.ok()) return;
    // eigenvalues of a unit shift are node phases; a modulus far from 1
    // means the family failed to diagonalize jointly
    for (int d = 0; d < b.dim; ++d) {
      Eigen::VectorXcd lam = cs.eigenvalues(d);
      for (int k = 0; k < n; ++k)
        if (!std::isfinite(std::abs(lam(k))) ||
            std::abs(std::abs(lam(k)) - 1.0) > 1e-8)
          return;
    }
    spectral.emplace(std::move(cs));
  }

  // Row of a reflection reachable from a stored member/zero row by
  // shifts along axes of strictly lower rank than `axis_rank`.
  Eigen::VectorXcd boundary_row(const Reflection& g, int axis_rank) {
    auto it = rows.find(g);
    if (it != rows.end()) return it->second;
    if (axis_rank >= 1) {
      // drop to the row start (0, v, l); for axis_rank 2 the start may
      // sit below g when the next plane has fewer rows, so descend until
      // a stored member or zero row appears
      const int h0 = g[ord[0]];
      const int k0 = g[ord[1]];
      Reflection probe = g;
      probe[ord[0]] = 0;
      for (int v = k0; v >= 0; --v) {
        probe[ord[1]] = v;
        auto pit = rows.find(probe);
        if (pit == rows.end()) {
          if (axis_rank < 2) break;  // shift along ord[1] not built yet
          continue;
        }
        Eigen::VectorXcd c = apply_power_dd(shift[1], pit->second, k0 - v);
        c = apply_power_dd(shift[0], c, h0);
        return c;
      }
    }
    throw Error("scan boundary has no recorded row at " +
                to_string(g, b.dim));
  }

  const Eigen::VectorXcd& coefficients(const Reflection& h) {
    auto it = memo.find(h);
    if (it != memo.end()) return it->second;
    auto rit = rows.find(h);
    if (rit != rows.end()) return memo.emplace(h, rit->second).first->second;
    if (spectral) {
      std::array<int, 3> expo{0, 0, 0};
      for (int d = 0; d < b.dim; ++d) expo[d] = h[ord[d]];
      return memo.emplace(h, spectral->propagate(expo, origin)).first->second;
    }
    // step along the highest-rank axis with a nonzero component
    for (int d = b.dim - 1; d >= 0; --d) {
      int v = h[ord[d]];
      if (v == 0) continue;
      Reflection prev = h;
      prev[ord[d]] += (v > 0) ? -1 : 1;
      const Eigen::VectorXcd& base = coefficients(prev);
      Eigen::VectorXcd c = (v > 0) ? Eigen::VectorXcd(shift[d] * base)
                                   : shift_inv[d]->solve(base);
      return memo.emplace(h, std::move(c)).first->second;
    }
    throw Error("origin reflection missing from the basic set");
  }

  double intensity(const Reflection& h) {
    return solver.intensity_from_row(coefficients(h));
  }
};

}  // namespace

ExpansionRow expansion_coefficients(const BasicSet& b, const IntensitySet& i,
                                    const Reflection& h, double rel_tol) {
  BasisSolver solver(b, i, rel_tol);
  return {h, solver.row(i, h)};
}

CompletenessSets completeness_sets(const BasicSet& b) {
  CompletenessSets cs;
  for (const Reflection& a : b.refs)
    for (const Reflection& c : b.refs) {
      cs.complete.insert(sub(a, c));
      cs.complete.insert(sub(c, a));
    }
  for (const Reflection& z : b.zeros)
    for (const Reflection& k : b.refs) {
      Reflection d = sub(z, k);
      if (!cs.complete.count(d)) {
        cs.complementary.insert(d);
        cs.complementary.insert(neg(d));
      }
    }
  return cs;
}

ExtensionResult extend_pattern(const IntensitySet& i0, const BasicSet& b,
                               const std::array<int, 3>& window,
                               double rel_tol) {
  BasisSolver solver(b, i0, rel_tol);
  ExtensionResult res;
  res.intensities = i0;

  // canonical targets ordered by expanding Chebyshev shells
  std::vector<Reflection> targets;
  const int hx = window[0];
  const int hy = b.dim >= 2 ? window[1] : 0;
  const int hz = b.dim >= 3 ? window[2] : 0;
  for (int a = -hx; a <= hx; ++a)
    for (int bb = -hy; bb <= hy; ++bb)
      for (int c = -hz; c <= hz; ++c) {
        Reflection h{a, bb, c};
        if (h == friedel_canonical(h)) targets.push_back(h);
      }
  std::stable_sort(targets.begin(), targets.end(),
                   [](const Reflection& a, const Reflection& b) {
                     return cheb_norm(a) < cheb_norm(b);
                   });

  bool propagated = false;
  try {
    RowPropagator prop(b, solver, i0);
    for (const Reflection& h : targets)
      if (!res.intensities.has(h)) res.intensities.set(h, prop.intensity(h));
    propagated = true;
  } catch (const MissingIntensityError&) {
    // seed does not cover C u F; fall back to the data-limited recursion
  }
  if (!propagated) {
    bool progress = true;
    while (progress) {
      progress = false;
      for (const Reflection& h : targets) {
        if (res.intensities.has(h)) continue;
        if (!solver.row_available(res.intensities, h)) continue;
        Eigen::VectorXcd a = solver.row(res.intensities, h);
        res.intensities.set(h, solver.intensity_from_row(a));
        progress = true;
      }
    }
  }
  for (const Reflection& h : targets)
    if (!res.intensities.has(h)) res.gaps.push_back(h);
  return res;
}

double check_consistency(const BasicSet& b, const IntensitySet& i,
                         const Reflection& h, const Reflection& hp,
                         double rel_tol) {
  BasisSolver solver(b, i, rel_tol);
  const int n = b.nbar();
  Eigen::VectorXcd a_h = solver.row(i, h);
  Eigen::VectorXcd a_hp = solver.row(i, hp);
  Eigen::VectorXcd a_diff = solver.row(i, sub(h, hp));
  std::vector<std::vector<Eigen::VectorXcd>> base(n);
  for (int j = 0; j < n; ++j)
    for (int jp = 0; jp < n; ++jp)
      base[j].push_back(solver.row(i, sub(b.refs[j], b.refs[jp])));
  double max_violation = 0;
  for (int l = 0; l < n; ++l) {
    std::complex<double> s = 0;
    for (int j = 0; j < n; ++j)
      for (int jp = 0; jp < n; ++jp)
        s += std::conj(a_h(j)) * a_hp(jp) * std::conj(base[j][jp](l));
    max_violation =
        std::max(max_violation, std::abs(std::conj(a_diff(l)) - s));
  }
  return max_violation;
}

}  // namespace phasealg
