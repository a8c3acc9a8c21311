#include "phasealg/pipeline.hpp"

#include <cmath>

#include "phasealg/crystal_model.hpp"
#include "phasealg/inversion.hpp"
#include "phasealg/io.hpp"
#include "phasealg/reconstruction.hpp"

namespace phasealg {

void RunConfig::validate(int dim) const {
  for (double t : {rank_rel_tol, zero_rel_tol, merge_tol, residual_tol})
    if (!(t > 0.0 && t < 1.0)) throw Error("tolerances must lie in (0,1)");
  for (int d = 0; d < dim; ++d)
    if (window[d] < 1) throw Error("window half-widths must be positive");
  if (axis < 0 || axis >= dim) throw Error("axis outside structure dimension");
}

namespace {
uint64_t splitmix64(uint64_t& x) {
  x += 0x9e3779b97f4a7c15ull;
  uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}
uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
}  // namespace

UniformRng::UniformRng(uint64_t seed) {
  for (auto& s : state_) s = splitmix64(seed);
}

uint64_t UniformRng::next_word() {
  // xoshiro256**
  uint64_t result = rotl(state_[1] * 5, 7) * 9;
  uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double UniformRng::uniform() {
  return static_cast<double>(next_word() >> 11) * 0x1.0p-53;
}

double UniformRng::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform();
}

bool UniformRng::coin() { return (next_word() & 1u) != 0; }

CrystalStructure generate_random_structure(uint64_t seed, int n_atoms,
                                           int dimension,
                                           double min_separation,
                                           double charge_lo, double charge_hi,
                                           Mode mode) {
  if (n_atoms < 1) throw Error("need at least one atom");
  if (charge_lo < 1e-3 || charge_hi < charge_lo)
    throw Error("charge range must satisfy 1e-3 <= lo <= hi");
  UniformRng rng(seed);
  CrystalStructure s;
  s.dim = dimension;
  int attempts = 0;
  while (static_cast<int>(s.atoms.size()) < n_atoms) {
    if (++attempts > 100000)
      throw Error("separation " + std::to_string(min_separation) +
                  " unreachable for " + std::to_string(n_atoms) + " atoms");
    FracVec pos{0, 0, 0};
    for (int d = 0; d < dimension; ++d) pos[d] = rng.uniform();
    bool ok = true;
    for (const Atom& a : s.atoms)
      for (int d = 0; d < dimension && ok; ++d)
        if (circle_dist(pos[d], a.pos[d]) < min_separation) ok = false;
    if (!ok) continue;
    double z = rng.uniform(charge_lo, charge_hi);
    if (mode == Mode::neutron && rng.coin()) z = -z;
    s.atoms.push_back({z, pos});
  }
  s.validate();
  return s;
}

PipelineResult run_pipeline(const RunConfig& cfg,
                            const std::string& structure_path,
                            const std::string& out_prefix, bool write_files) {
  try {
    CrystalStructure s = load_structure(structure_path);
    cfg.validate(s.dim);

    IntensitySet i = synth_window(s, cfg.window);
    if (write_files) save_intensities(out_prefix + ".intensity", i);

    std::set<Reflection> sobs = reflections_of(i);
    ObservedSet obs = compute_S1(sobs, s.dim);

    BasicSet b;
    if (cfg.mode == Mode::neutron) {
      b = search_basic_set(
          j_gram(i, obs),
          [&obs](const Reflection& h) { return obs.in_s1(h); }, s.dim,
          cfg.axis, cfg.zero_rel_tol);
    } else {
      b = search_basic_set(
          intensity_gram(i),
          [&sobs](const Reflection& h) { return sobs.count(h) != 0; }, s.dim,
          cfg.axis, cfg.zero_rel_tol);
    }
    if (write_files) save_basic_set(out_prefix + ".basis", b);

    // reconstruct the window from the complete + complementary sets only
    CompletenessSets cs = completeness_sets(b);
    IntensitySet seed_set;
    seed_set.dim = s.dim;
    for (const Reflection& h : cs.complete) seed_set.set(h, i.at(h));
    for (const Reflection& h : cs.complementary) seed_set.set(h, i.at(h));
    ExtensionResult ext = extend_pattern(seed_set, b, cfg.window,
                                         cfg.zero_rel_tol);
    if (write_files)
      save_intensities(out_prefix + ".reconstructed", ext.intensities);
    // Coarse sanity gate on the extension: expansion rows inherit the
    // conditioning of the KH system, so near-degenerate maps can lose
    // several digits here even though the recovered structure below is
    // exact to 1e-6. Structure correctness is enforced by the recovered
    // map's data residual and the congruence test, not by this gate.
    double iscale = 0;
    for (const auto& [h, v] : i.entries) iscale = std::max(iscale, std::fabs(v));
    for (const auto& [h, v] : ext.intensities.entries)
      if (std::fabs(v - i.at(h)) > 1e-2 * std::max(1.0, iscale))
        return {1, "reconstructed intensity deviates at " + to_string(h, s.dim)};

    RecoveredPatterson rp =
        recover_patterson(i, b, cfg.residual_tol, cfg.zero_rel_tol);
    if (write_files) save_patterson(out_prefix + ".patterson", rp.map);

    std::vector<double> charges;
    for (const Atom& a : s.atoms) charges.push_back(a.charge);
    std::vector<CrystalStructure> solutions = deconvolve_to_atoms(
        rp.map, static_cast<int>(s.atoms.size()), charges, 1e-6);
    if (write_files)
      for (size_t k = 0; k < solutions.size(); ++k)
        save_structure(out_prefix + ".struct" + std::to_string(k),
                       solutions[k]);

    for (const CrystalStructure& cand : solutions)
      if (structures_equivalent(s, cand, 1e-6)) return {0, ""};
    return {1, "none of " + std::to_string(solutions.size()) +
                   " deconvolution candidates is congruent to the seed "
                   "structure (homometric set or tolerance failure)"};
  } catch (const WindowExhaustedError& e) {
    return {2, e.what()};
  } catch (const MissingIntensityError& e) {
    return {2, e.what()};
  } catch (const std::exception& e) {
    return {1, e.what()};
  }
}

}  // namespace phasealg
