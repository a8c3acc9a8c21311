// Forward model: diffraction intensities of a point-atom structure and
// the Patterson map they determine.

#ifndef PHASEALG_CRYSTAL_MODEL_HPP_
#define PHASEALG_CRYSTAL_MODEL_HPP_

#include "types.hpp"

namespace phasealg {

// |sum_j Z_j exp(i 2 pi h.r_j)|^2, the observed intensity at h.
double observed_intensity(const CrystalStructure& s, const Reflection& h);

// Distinct wrapped difference vectors (r_j - r_k) with their summed
// charge products. Centres whose weight cancels below drop_rel (relative
// to the largest weight) are removed.
PattersonMap compute_patterson(const CrystalStructure& s,
                               double merge_tol = kMergeTol,
                               double drop_rel = kWeightDropRel);

// Re(sum_jhat nu exp(i 2 pi h.delta)); the residual imaginary part must
// vanish for a centrosymmetric map.
double subtracted_intensity(const PattersonMap& p, const Reflection& h,
                            double imag_tol = 1e-6);

// Subtracted intensities over the box prod_d [-H_d, H_d].
IntensitySet synth_window(const CrystalStructure& s,
                          const std::array<int, 3>& half_widths);

}  // namespace phasealg

#endif
