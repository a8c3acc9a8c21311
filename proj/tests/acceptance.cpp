// End-to-end acceptance checks. Each numbered check prints exactly one
// PASS/FAIL line; the process exits nonzero if any check fails. The
// random corpora are seeded, so every run sees the same inputs.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "phasealg/basis_search.hpp"
#include "phasealg/inversion.hpp"
#include "phasealg/io.hpp"
#include "phasealg/lattice_algebra.hpp"
#include "phasealg/pipeline.hpp"
#include "phasealg/reconstruction.hpp"

using namespace phasealg;
using namespace testutil;

namespace {

int g_failures = 0;

void report(int number, const std::string& what, bool ok,
            const std::string& detail = "") {
  std::printf("%2d %-58s %s%s%s\n", number, what.c_str(),
              ok ? "PASS" : "FAIL", detail.empty() ? "" : "  ", detail.c_str());
  if (!ok) ++g_failures;
}

// The shared determinant corpus: 100 planar and 100 spatial maps with
// mixed-sign weights and node separation >= 0.05.
std::vector<PattersonMap> det_corpus() {
  std::vector<PattersonMap> maps;
  for (int t = 0; t < 100; ++t) {
    UniformRng rng(10000 + t);
    maps.push_back(random_symmetric_map(rng, 2, 1 + t % 5, true, 0.4));
  }
  // spatial maps whose projection diagrams nest, the domain of the
  // product formula
  for (int t = 0; t < 100; ++t) {
    UniformRng rng(20000 + t);
    for (;;) {
      PattersonMap p = random_symmetric_map(rng, 3, 1 + t % 4, true, 0.4);
      if (shape_profile(p, 0).comparable_chain()) {
        maps.push_back(std::move(p));
        break;
      }
    }
  }
  return maps;
}

// The lattice matrix over the principal basic set with its rows in the
// grouped order that the product formula assumes.
Eigen::MatrixXcd principal_V(const PattersonMap& p, const ShapeProfile& sh) {
  LatticeMatrix v = build_V(p, principal_basic_refs(sh));
  std::vector<int> ord = sh.row_order();
  Eigen::MatrixXcd m(v.m.rows(), v.m.cols());
  for (Eigen::Index r = 0; r < m.rows(); ++r) m.row(r) = v.m.row(ord[r]);
  return m;
}

IntensitySet pairwise_intensities(const PattersonMap& p,
                                  const std::vector<Reflection>& refs) {
  IntensitySet i;
  i.dim = p.dim;
  for (const Reflection& a : refs)
    for (const Reflection& b : refs)
      i.set(sub(a, b), direct_intensity(p, sub(a, b)));
  return i;
}

void check_1_and_2(const std::vector<PattersonMap>& maps) {
  double worst_v = 0, worst_d = 0;
  bool signs_ok = true;
  for (const PattersonMap& p : maps) {
    ShapeProfile sh = shape_profile(p, 0);
    std::complex<double> closed = vandermonde_det_closed_form(sh);
    std::complex<double> numeric = det_lu(principal_V(p, sh));
    worst_v = std::max(worst_v, rel_err(closed, numeric));

    std::vector<Reflection> refs = principal_basic_refs(sh);
    IntensitySet i = pairwise_intensities(p, refs);
    KHMatrix kh = kh_matrix(i, refs);
    double det_num = det_lu(kh.m.cast<std::complex<double>>()).real();
    double det_closed = kh_det_closed_form(p, 0);
    worst_d = std::max(worst_d, rel_err(det_closed, det_num));
    double prod = 1;
    for (const PattersonCentre& c : p.centres) prod *= c.weight;
    if ((det_num > 0) != (prod > 0)) signs_ok = false;
  }
  report(1, "product formula for the node-matrix determinant",
         worst_v <= 1e-8, "max rel err " + std::to_string(worst_v));
  report(2, "closed-form Gram determinant and its sign",
         worst_d <= 1e-8 && signs_ok,
         "max rel err " + std::to_string(worst_d) +
             (signs_ok ? "" : ", sign mismatch"));
}

void check_3() {
  double worst = 0;
  for (int t = 0; t < 60; ++t) {
    UniformRng rng(30000 + t);
    int dim = t % 2 ? 3 : 2;
    PattersonMap p = random_symmetric_map(rng, dim, 1 + t % 4, true, 0.4);
    ShapeProfile sh = shape_profile(p, 0);
    std::vector<Reflection> refs = principal_basic_refs(sh);
    IntensitySet i = pairwise_intensities(p, refs);
    std::vector<double> w;
    for (const PattersonCentre& c : p.centres) w.push_back(c.weight);
    for (int m = 1; m <= std::min<int>(6, sh.nbar); ++m) {
      std::vector<Reflection> head(refs.begin(), refs.begin() + m);
      double viasum = bezout_expansion(build_V(p, head), w);
      KHMatrix kh = kh_matrix(i, head);
      double numeric = det_lu(kh.m.cast<std::complex<double>>()).real();
      worst = std::max(worst, rel_err(viasum, numeric));
    }
  }
  report(3, "subset-sum expansion of leading Gram determinants",
         worst <= 1e-9, "max rel err " + std::to_string(worst));
}

void check_4(const std::vector<PattersonMap>& maps) {
  bool ok = true;
  for (size_t t = 0; t < 100; ++t) {
    const PattersonMap& p = maps[t];
    ShapeProfile sh = shape_profile(p, 0);
    // a box window of reflections strictly containing the principal set
    int w = 0;
    for (const Reflection& r : principal_basic_refs(sh))
      for (int d = 0; d < p.dim; ++d) w = std::max(w, std::abs(r[d]));
    std::vector<Reflection> window;
    Reflection h{0, 0, 0};
    for (h[0] = 0; h[0] <= w + 1; ++h[0])
      for (h[1] = 0; h[1] <= w + 1; ++h[1])
        for (h[2] = 0; h[2] <= (p.dim == 3 ? w + 1 : 0); ++h[2])
          window.push_back(h);
    if (numerical_rank(build_V(p, window).m) != sh.nbar) ok = false;
  }
  report(4, "lattice-vector rank over a covering window equals N", ok);
}

void check_5_and_6() {
  int found = 0, trials = 100;
  double worst_ratio = 1;
  std::vector<std::string> misses;
  for (int t = 0; t < trials; ++t) {
    UniformRng rng(40000 + t);
    PattersonMap p = random_symmetric_map(rng, 2, 1 + t % 3, true, 0.35);
    int nbar = p.nbar();
    int hw = 2 * nbar + 2;
    IntensitySet i = map_window(p, {hw, hw, 0});
    ObservedSet s = compute_S1(reflections_of(i), 2);
    try {
      BasicSet b = search_basic_set(j_gram(i, s),
                                    [&s](const Reflection& h) {
                                      return s.in_s1(h);
                                    },
                                    2, 0);
      if (b.nbar() == nbar) {
        ++found;
      } else {
        misses.push_back("seed " + std::to_string(40000 + t) + ": found " +
                         std::to_string(b.nbar()) + " of " +
                         std::to_string(nbar));
      }
      // spectral floor of the quadratic Gram form on the accepted set
      JMatrix jm = j_matrix(i, s);
      Eigen::MatrixXd sub(b.nbar(), b.nbar());
      for (int a = 0; a < b.nbar(); ++a)
        for (int c = 0; c < b.nbar(); ++c)
          sub(a, c) = jm.at(b.refs[a], b.refs[c]);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
          sub, Eigen::EigenvaluesOnly);
      double lo = es.eigenvalues().minCoeff();
      double hi = es.eigenvalues().maxCoeff();
      worst_ratio = std::min(worst_ratio, lo / hi);
    } catch (const Error& e) {
      misses.push_back("seed " + std::to_string(40000 + t) + ": " + e.what());
    }
  }
  report(5, "quadratic Gram form positive definite on accepted sets",
         worst_ratio > 1e-10,
         "min eigenvalue ratio " + std::to_string(worst_ratio));
  report(6, "mixed-sign search recovers full cardinality",
         found >= 99, std::to_string(found) + "/100");
  for (const std::string& m : misses) std::printf("   miss: %s\n", m.c_str());
}

void check_7() {
  double worst = 0;
  bool complete = true;
  for (int t = 0; t < 100; ++t) {
    UniformRng rng(50000 + t);
    PattersonMap p = random_symmetric_map(rng, 2, 1 + t % 4, true, 0.45, 0.05,
                                          t % 5 == 0);
    BasicSet b = principal_basic_set_from_geometry(p, 0);
    CompletenessSets cs = completeness_sets(b);
    IntensitySet seed;
    seed.dim = 2;
    for (const Reflection& h : cs.complete) seed.set(h, direct_intensity(p, h));
    for (const Reflection& h : cs.complementary)
      seed.set(h, direct_intensity(p, h));
    ExtensionResult ext = extend_pattern(seed, b, {6, 6, 0});
    if (!ext.gaps.empty()) complete = false;
    double scale = intensity_scale(p);
    for (const auto& [h, v] : ext.intensities.entries)
      worst = std::max(worst, scaled_err(v, direct_intensity(p, h), scale));
  }
  report(7, "pattern extension matches direct synthesis",
         complete && worst <= 1e-6,
         std::string(complete ? "" : "gaps present, ") + "max rel err " +
             std::to_string(worst));
}

void check_8() {
  double worst = 0;
  for (int t = 0; t < 20; ++t) {
    UniformRng rng(60000 + t);
    PattersonMap p = random_symmetric_map(rng, 2, 1 + t % 3, true, 0.4);
    BasicSet b = principal_basic_set_from_geometry(p, 0);
    int hw = 4 * p.nbar() + 4;
    IntensitySet i = map_window(p, {hw, hw, 0});
    for (int k = 0; k < 50; ++k) {
      Reflection h{static_cast<int>(rng.uniform(-4, 5)),
                   static_cast<int>(rng.uniform(-4, 5)), 0};
      Reflection hp{static_cast<int>(rng.uniform(-4, 5)),
                    static_cast<int>(rng.uniform(-4, 5)), 0};
      worst = std::max(worst, check_consistency(b, i, h, hp));
    }
  }
  report(8, "re-expansion consistency relation",
         worst < 1e-8, "max violation " + std::to_string(worst));
}

void check_9_and_10() {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "phasealg_acceptance";
  fs::create_directories(dir);

  auto t0 = std::chrono::steady_clock::now();
  int ok = 0, trials = 100;
  std::vector<std::string> misses;
  for (int t = 0; t < trials; ++t) {
    int n = 2 + t % 4;
    CrystalStructure s = generate_random_structure(70000 + t, n, 2, 0.05,
                                                   0.5, 5.0, Mode::neutron);
    fs::path sp = dir / ("s" + std::to_string(t) + ".txt");
    save_structure(sp.string(), s);
    RunConfig cfg;
    cfg.window = {2 * n * (n - 1), 2, 0};
    PipelineResult r =
        run_pipeline(cfg, sp.string(), (dir / "out").string(), false);
    if (r.exit_code == 0) {
      ++ok;
    } else {
      misses.push_back("trial " + std::to_string(t) + " (N=" +
                       std::to_string(n) + "): exit " +
                       std::to_string(r.exit_code) + ", " + r.diagnostic);
    }
  }
  double secs = std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - t0).count();
  report(9, "round-trip inversion of random mixed-sign structures",
         ok >= 95 && secs <= 300.0,
         std::to_string(ok) + "/100 in " + std::to_string(secs) + "s");
  for (const std::string& m : misses) std::printf("   miss: %s\n", m.c_str());

  int refused = 0;
  for (int t = 0; t < trials; ++t) {
    int n = 2 + t % 4;
    fs::path sp = dir / ("s" + std::to_string(t) + ".txt");
    RunConfig cfg;
    cfg.window = {1, 1, 0};
    PipelineResult r =
        run_pipeline(cfg, sp.string(), (dir / "out").string(), false);
    if (r.exit_code == 2) ++refused;
  }
  report(10, "undersized window is refused, never mis-solved",
         refused == trials, std::to_string(refused) + "/100 refusals");
  fs::remove_all(dir);
}

}  // namespace

int main() {
  std::vector<PattersonMap> maps = det_corpus();
  check_1_and_2(maps);
  check_3();
  check_4(maps);
  check_5_and_6();
  check_7();
  check_8();
  check_9_and_10();
  if (g_failures) std::printf("%d check(s) failed\n", g_failures);
  return g_failures ? 1 : 0;
}
