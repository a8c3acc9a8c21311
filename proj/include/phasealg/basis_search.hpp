// Finding basic sets of reflections: the difference-closed S1 subset,
// the J matrix of quadratic intensity sums, the row-scan enlargement
// search, and the geometric principal basic set.

#ifndef PHASEALG_BASIS_SEARCH_HPP_
#define PHASEALG_BASIS_SEARCH_HPP_

#include <functional>
#include <set>

#include "lattice_algebra.hpp"
#include "types.hpp"

namespace phasealg {

enum class Mode { xray, neutron };

// S_obs plus its largest difference-closed subset S1.
struct ObservedSet {
  int dim = 2;
  std::set<Reflection> s_obs;
  std::vector<Reflection> s1;

  int nbar1() const { return static_cast<int>(s1.size()); }
  bool in_s1(const Reflection& h) const;
};

// Largest subset of s_obs with all pairwise differences inside s_obs.
// Ties are broken towards the subset containing 0, then the smallest
// maximum Chebyshev norm, then the lexicographically largest sorted list.
// Box windows get the closed-form answer; irregular shapes run an exact
// maximum-clique search and are refused above 4096 reflections.
ObservedSet compute_S1(const std::set<Reflection>& s_obs, int dim);

// Both Friedel mates of every stored intensity.
std::set<Reflection> reflections_of(const IntensitySet& i);

// J_{h,k} = sum_r I_{h-h_r} I_{h_r-k} over S1; each term is symmetric
// under (h,k) swap, so the matrix is symmetric exactly.
double j_entry(const IntensitySet& i, const ObservedSet& s,
               const Reflection& h, const Reflection& k);

struct JMatrix {
  Eigen::MatrixXd m;
  std::vector<Reflection> refs;  // the S1 reflections indexing the matrix

  double at(const Reflection& h, const Reflection& k) const;
};

JMatrix j_matrix(const IntensitySet& i, const ObservedSet& s);

// Ordered scan result: reflections in row-scan order plus the recorded
// KH zeros (reflections whose addition made the Gram matrix singular).
struct BasicSet {
  int dim = 2;
  int axis = 0;
  std::vector<Reflection> refs;
  std::vector<Reflection> zeros;

  int nbar() const { return static_cast<int>(refs.size()); }
};

using GramOracle =
    std::function<Eigen::MatrixXd(const std::vector<Reflection>&)>;
using SkipPredicate = std::function<bool(const Reflection&)>;

// Row-scan enlargement: extend along the scan axis until the Gram matrix
// goes singular (a KH zero), then move to the next row; stop when a row
// start is itself a zero. `in_domain` bounds the candidates (S1 for
// neutron mode, the observed window for X-ray mode); running out of
// domain before the scan closes throws WindowExhaustedError. The
// optional skip predicate ends a row early without recording a zero.
BasicSet search_basic_set(const GramOracle& gram, const SkipPredicate& in_domain,
                          int dim, int axis, double rel_tol = kRankRelTol,
                          const SkipPredicate& skip = {});

// Convenience oracles for the two modes.
GramOracle intensity_gram(const IntensitySet& i);
GramOracle j_gram(const IntensitySet& i, const ObservedSet& s);

// The principal basic set read off the centre geometry, in the same
// row-scan order (and with the same zeros) the search would produce.
BasicSet principal_basic_set_from_geometry(const PattersonMap& p, int axis,
                                           double merge_tol = kMergeTol);

}  // namespace phasealg

#endif
