// Inverse problem: recover the Patterson map from intensities plus a
// basic set, and deconvolve a Patterson map into atomic configurations.

#ifndef PHASEALG_INVERSION_HPP_
#define PHASEALG_INVERSION_HPP_

#include "basis_search.hpp"

namespace phasealg {

// Monic polynomial whose roots are the phase factors exp(-i 2 pi x_r) of
// the distinct axis projections of the Patterson centres.
struct ResolventPolynomial {
  int degree = 0;
  int axis = 0;
  Eigen::VectorXcd coeffs;  // ascending powers, coeffs(degree) == 1
};

// Builds the resolvent from the first KH zero of the scan row along the
// axis: the dependence of |mu_1,0> on |0,0>..|mu_1-1,0>.
ResolventPolynomial resolvent_from_zero(const BasicSet& b,
                                        const IntensitySet& i,
                                        double rel_tol = kRankRelTol);

// All roots via companion-matrix eigenvalues, projected onto the unit
// circle and sorted by principal argument in [0, 2pi). A root modulus off
// by more than 1e-3 means the data is inconsistent with point atoms.
std::vector<std::complex<double>> roots_on_unit_circle(
    const ResolventPolynomial& p, double unimod_tol = 1e-3);

struct RecoveredPatterson {
  PattersonMap map;
  std::vector<double> residuals;  // fit error of each complete-set intensity
  double max_residual = 0;
};

// Positions via generalized eigenproblems of the axis-shifted KH
// matrices against the KH matrix of the basic set; weights by solving
// the linear intensity system over the complete set.
RecoveredPatterson recover_patterson(const IntensitySet& i, const BasicSet& b,
                                     double residual_tol = kResidualTol,
                                     double rel_tol = kRankRelTol);

// Exhaustive Patterson deconvolution with the chemical composition
// given. Atom 1 sits at the origin; candidate positions come from the
// centre list. All matches are returned, enantiomorphs included.
std::vector<CrystalStructure> deconvolve_to_atoms(
    const PattersonMap& p, int n_atoms, const std::vector<double>& charges,
    double tol = 1e-6);

// Congruence modulo translation and atom permutation; optionally also
// modulo inversion through the origin.
bool structures_equivalent(const CrystalStructure& a,
                           const CrystalStructure& b, double tol = 1e-6,
                           bool allow_inversion = true);

}  // namespace phasealg

#endif
