// Run configuration, deterministic structure generation for test
// corpora, and the end-to-end synth -> search -> reconstruct -> invert
// pipeline.

#ifndef PHASEALG_PIPELINE_HPP_
#define PHASEALG_PIPELINE_HPP_

#include <cstdint>
#include <string>

#include "basis_search.hpp"
#include "lattice_algebra.hpp"

namespace phasealg {

struct RunConfig {
  Mode mode = Mode::neutron;
  int axis = 0;  // 0=a, 1=b, 2=c
  double rank_rel_tol = kRankRelTol;
  double zero_rel_tol = kZeroRelTol;
  double merge_tol = kMergeTol;
  double residual_tol = kResidualTol;
  std::array<int, 3> window{6, 6, 0};
  uint64_t seed = 1;
  Precision precision = Precision::double_prec;

  void validate(int dim) const;
};

// Deterministic 53-bit uniform stream; identical across platforms for a
// fixed seed, unlike the standard distributions.
class UniformRng {
 public:
  explicit UniformRng(uint64_t seed);
  double uniform();                       // [0, 1)
  double uniform(double lo, double hi);   // [lo, hi)
  bool coin();

 private:
  uint64_t next_word();
  uint64_t state_[4];
};

CrystalStructure generate_random_structure(uint64_t seed, int n_atoms,
                                           int dimension,
                                           double min_separation,
                                           double charge_lo, double charge_hi,
                                           Mode mode);

// Pipeline exit codes: 0 full round trip, 2 when the observed window is
// too small to contain a basic set, 1 on any other failure.
struct PipelineResult {
  int exit_code = 1;
  std::string diagnostic;
};

PipelineResult run_pipeline(const RunConfig& cfg,
                            const std::string& structure_path,
                            const std::string& out_prefix,
                            bool write_files = true);

}  // namespace phasealg

#endif
