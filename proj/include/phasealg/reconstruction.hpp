// Expansion of arbitrary reflections over a basic set and recursive
// extension of the diffraction pattern beyond the complete and
// complementary sets.

#ifndef PHASEALG_RECONSTRUCTION_HPP_
#define PHASEALG_RECONSTRUCTION_HPP_

#include <set>

#include "basis_search.hpp"

namespace phasealg {

// Coefficients A_{h,j} of |h> against the basic-set vectors |k_j>.
struct ExpansionRow {
  Reflection h{0, 0, 0};
  Eigen::VectorXcd a;
};

struct CompletenessSets {
  std::set<Reflection> complete;       // C: differences of basic-set members
  std::set<Reflection> complementary;  // F: (zero - member) differences not in C
};

// Solves sum_j A_{h,j} I_{k_l-k_j} = I_{k_l-h}; the KH matrix over the
// basic set must be nonsingular.
ExpansionRow expansion_coefficients(const BasicSet& b, const IntensitySet& i,
                                    const Reflection& h,
                                    double rel_tol = kRankRelTol);

CompletenessSets completeness_sets(const BasicSet& b);

struct ExtensionResult {
  IntensitySet intensities;
  std::vector<Reflection> gaps;  // reflections the recursion never reached
};

// Fills the window in expanding Chebyshev shells: an unknown I_h is
// computed from I_h = sum_j conj(A_{h,j}) I_{k_j} once every I_{k_l-h}
// is known. Unreachable reflections are reported, never guessed.
ExtensionResult extend_pattern(const IntensitySet& i0, const BasicSet& b,
                               const std::array<int, 3>& window,
                               double rel_tol = kRankRelTol);

// Max violation of the re-expansion identity relating the rows of
// h - h' to the rows of h and h'.
double check_consistency(const BasicSet& b, const IntensitySet& i,
                         const Reflection& h, const Reflection& hp,
                         double rel_tol = kRankRelTol);

}  // namespace phasealg

#endif
