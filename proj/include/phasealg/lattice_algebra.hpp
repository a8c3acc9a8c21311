// The structured matrix (V) of unimodular nodes, Karle-Hauptman matrices
// of intensities, their determinants (numeric and closed-form) and the
// Bezout subset expansion used as an independent oracle.

#ifndef PHASEALG_LATTICE_ALGEBRA_HPP_
#define PHASEALG_LATTICE_ALGEBRA_HPP_

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <memory>

#include "types.hpp"

namespace phasealg {

// Axis of reciprocal space along which profiles and scans run (0=a,1=b,2=c).
// ord[0] is the scan coordinate, ord[1]/ord[2] the remaining ones.
std::array<int, 3> axis_order(int axis, int dim);

// N x m matrix with entries exp(-i 2 pi k_l . delta_j); rows indexed by
// Patterson centres, columns by the reflection list.
struct LatticeMatrix {
  Eigen::MatrixXcd m;
  std::vector<Reflection> refs;
};

enum class KHKind { intensity, j_quadratic };

// Gram-type matrix D_{i,l} = I_{h_i - h_l} (or J_{h_i,h_l}).
struct KHMatrix {
  Eigen::MatrixXd m;
  KHKind kind = KHKind::intensity;
  std::vector<Reflection> refs;
};

// Column-height / row-width profile of the Patterson centres grouped by
// their projections along an axis, with the grouped node values kept for
// the closed-form determinants.
struct ShapeProfile {
  int dim = 2;
  int axis = 0;
  int nbar = 0;
  std::vector<int> col_heights;  // m_1 >= ... >= m_M   (2D)
  std::vector<int> row_widths;   // mu_1 >= ... >= mu_{m_1}, conjugate of m

  struct SubGroup {             // one distinct (x[,y]) projection
    double proj = 0;            // y value (3D) -- unused in 2D
    std::vector<double> vals;   // y values (2D) or z values (3D)
    std::vector<int> centre_idx;
  };
  struct Group {                // one distinct x projection
    double proj = 0;
    std::vector<SubGroup> subs;  // 2D: exactly one subgroup
    int total() const {
      int t = 0;
      for (const SubGroup& s : subs) t += static_cast<int>(s.vals.size());
      return t;
    }
  };
  std::vector<Group> groups;

  // Centre indices in (group, subgroup, node) order; the row order under
  // which the closed-form determinant matches sign-exactly.
  std::vector<int> row_order() const;

  // True when the per-group diagrams form an inclusion chain in sorted
  // order (always the case in 2D). The product formula for the
  // determinant holds exactly on chains and fails otherwise.
  bool comparable_chain() const;
};

ShapeProfile shape_profile(const PattersonMap& p, int axis,
                           double merge_tol = kMergeTol);

LatticeMatrix build_V(const PattersonMap& p,
                      const std::vector<Reflection>& refs);

KHMatrix kh_matrix(const IntensitySet& i, const std::vector<Reflection>& refs);

// Gram matrix from an arbitrary symmetric pair source (used for J-kind).
KHMatrix kh_matrix(
    const std::function<double(const Reflection&, const Reflection&)>& source,
    const std::vector<Reflection>& refs, KHKind kind);

// Product-formula determinant of (V) over the principal basic set, rows
// ordered per the profile.
std::complex<double> vandermonde_det_closed_form(const ShapeProfile& shape);

// Closed-form determinant of the intensity KH matrix over the principal
// basic set: (prod nu) times squared-modulus node differences.
double kh_det_closed_form(const PattersonMap& p, int axis = 0,
                          double merge_tol = kMergeTol);

// Reflections of the principal basic set in column order (grouped by the
// scan-axis exponent), matching the closed-form column layout.
std::vector<Reflection> principal_basic_refs(const ShapeProfile& shape);

// det(Q_m) via Bezout's theorem: sum over m-row subsets of the weight
// product times the squared minor determinant. Oracle-grade, not fast.
double bezout_expansion(const LatticeMatrix& v,
                        const std::vector<double>& weights);

int numerical_rank(const Eigen::MatrixXcd& m, double rel_tol = kRankRelTol);

// Dense LU factorization carried out entirely in double-double: solves
// systems whose condition number defeats double precision (up to ~1e30)
// given exact-double entries. Factor once, solve many right-hand sides.
class ExtendedLU {
 public:
  explicit ExtendedLU(const Eigen::MatrixXcd& a);
  ~ExtendedLU();
  ExtendedLU(ExtendedLU&&) noexcept;
  ExtendedLU& operator=(ExtendedLU&&) noexcept;
  Eigen::VectorXcd solve(const Eigen::VectorXcd& b) const;
  bool singular() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Shared eigen-decomposition of a family of commuting matrices (the
// unit-shift operators on expansion rows, or the transfer matrices of a
// recovered map). A double eigensolver on a random mix of the family
// seeds Newton iteration on the bordered eigenproblem, carried out in
// double-double; per-matrix eigenvalues are then re-polished against
// each member. This keeps eigenvalues and propagation products accurate
// when the eigenvector matrix is badly conditioned, where a plain double
// eigensolver loses six or more digits.
class CommutingSpectrum {
 public:
  explicit CommutingSpectrum(const std::vector<Eigen::MatrixXcd>& mats);
  ~CommutingSpectrum();
  CommutingSpectrum(CommutingSpectrum&&) noexcept;
  CommutingSpectrum& operator=(CommutingSpectrum&&) noexcept;

  bool ok() const;
  // Eigenvalues of mats[which], ordered consistently across the family.
  Eigen::VectorXcd eigenvalues(int which) const;
  // W diag(prod_d lambda_d^{expo[d]}) W^-1 e_pivot, evaluated entirely in
  // double-double and rounded once at the end.
  Eigen::VectorXcd propagate(const std::array<int, 3>& expo, int pivot) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// m^e v for e >= 0, accumulated in double-double: powers of a non-normal
// matrix with unimodular spectrum can grow transiently by many orders of
// magnitude before cancelling, which loses the cancelled digits in plain
// double arithmetic.
Eigen::VectorXcd apply_power_dd(const Eigen::MatrixXcd& m,
                                const Eigen::VectorXcd& v, int e);

// LU solve with double-double iterative refinement: recovers full double
// accuracy on ill-conditioned (but nonsingular) systems whose entries
// are exact doubles. `lu` must factor `a`.
Eigen::VectorXcd solve_refined(const Eigen::MatrixXcd& a,
                               const Eigen::PartialPivLU<Eigen::MatrixXcd>& lu,
                               const Eigen::VectorXcd& b, int iters = 3);
Eigen::VectorXd solve_refined(const Eigen::MatrixXd& a,
                              const Eigen::PartialPivLU<Eigen::MatrixXd>& lu,
                              const Eigen::VectorXd& b, int iters = 3);

enum class Precision { double_prec, extended };

// Pivoted-LU determinant; the extended path runs in double-double.
std::complex<double> det_lu(const Eigen::MatrixXcd& m,
                            Precision prec = Precision::double_prec);

}  // namespace phasealg

#endif
