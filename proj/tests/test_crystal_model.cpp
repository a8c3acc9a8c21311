#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <complex>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "phasealg/crystal_model.hpp"

using namespace phasealg;
using doctest::Approx;

namespace {
CrystalStructure two_atom() {
  CrystalStructure s;
  s.dim = 2;
  s.atoms = {{1.0, {0.0, 0.0, 0}}, {1.0, {0.5, 0.0, 0}}};
  return s;
}
}  // namespace

TEST_CASE("observed intensity of a single atom is the squared charge") {
  CrystalStructure s;
  s.dim = 2;
  s.atoms = {{2.5, {0.3, 0.7, 0}}};
  CHECK(observed_intensity(s, {0, 0, 0}) == Approx(6.25).epsilon(1e-12));
  CHECK(observed_intensity(s, {3, -2, 0}) == Approx(6.25).epsilon(1e-12));
}

TEST_CASE("two equal atoms half a cell apart interfere") {
  CrystalStructure s = two_atom();
  CHECK(std::fabs(observed_intensity(s, {1, 0, 0})) < 1e-12);
  CHECK(observed_intensity(s, {2, 0, 0}) == Approx(4.0).epsilon(1e-12));
}

TEST_CASE("one atom gives an empty Patterson map") {
  CrystalStructure s;
  s.dim = 2;
  s.atoms = {{3.0, {0.1, 0.2, 0}}};
  CHECK(compute_patterson(s).nbar() == 0);
}

TEST_CASE("two-atom Patterson map holds the mirror pair of differences") {
  CrystalStructure s;
  s.dim = 2;
  s.atoms = {{1.0, {0.0, 0.0, 0}}, {2.0, {0.25, 0.0, 0}}};
  PattersonMap p = compute_patterson(s);
  REQUIRE(p.nbar() == 2);
  bool saw25 = false, saw75 = false;
  for (const PattersonCentre& c : p.centres) {
    if (circle_dist(c.delta[0], 0.25) < 1e-12 && c.delta[1] == 0) {
      saw25 = true;
      CHECK(c.weight == Approx(2.0).epsilon(1e-12));
    }
    if (circle_dist(c.delta[0], 0.75) < 1e-12 && c.delta[1] == 0) {
      saw75 = true;
      CHECK(c.weight == Approx(2.0).epsilon(1e-12));
    }
  }
  CHECK(saw25);
  CHECK(saw75);
}

TEST_CASE("cancelled centres are dropped") {
  // charges (1,-1,1,1) on the quarter grid: the weight at delta=(0.25,0)
  // sums to zero over its ordered pairs and the centre must disappear
  CrystalStructure s;
  s.dim = 2;
  s.atoms = {{1.0, {0.0, 0.0, 0}},
             {-1.0, {0.25, 0.0, 0}},
             {1.0, {0.5, 0.0, 0}},
             {1.0, {0.75, 0.0, 0}}};
  // oracle: direct summation over all 12 ordered pairs
  std::map<int, double> expected;  // key = round(4*delta_x)
  for (int j = 0; j < 4; ++j)
    for (int k = 0; k < 4; ++k) {
      if (j == k) continue;
      double dx = wrap_unit(s.atoms[j].pos[0] - s.atoms[k].pos[0]);
      expected[static_cast<int>(std::lround(4 * dx))] +=
          s.atoms[j].charge * s.atoms[k].charge;
    }
  CHECK(std::fabs(expected[1]) < 1e-12);

  PattersonMap p = compute_patterson(s);
  for (const PattersonCentre& c : p.centres) {
    int key = static_cast<int>(std::lround(4 * c.delta[0]));
    CHECK(circle_dist(c.delta[0], key / 4.0) < 1e-12);
    CHECK(key != 1);  // the cancelled centre
    CHECK(c.weight == Approx(expected[key]).epsilon(1e-12));
    CHECK(std::fabs(expected[key]) > 0);
  }
  // every non-cancelled expected centre is present
  int nonzero = 0;
  for (auto& [k, v] : expected)
    if (std::fabs(v) > 1e-12) ++nonzero;
  CHECK(p.nbar() == nonzero);
}

TEST_CASE("subtracted intensity of the quarter-cell pair") {
  PattersonMap p;
  p.dim = 2;
  p.centres = {{2.0, {0.25, 0.0, 0}}, {2.0, {0.75, 0.0, 0}}};
  CHECK(std::fabs(subtracted_intensity(p, {1, 0, 0})) < 1e-12);
  CHECK(subtracted_intensity(p, {2, 0, 0}) == Approx(-4.0).epsilon(1e-12));
  PattersonMap empty;
  empty.dim = 2;
  CHECK(subtracted_intensity(empty, {5, 3, 0}) == 0.0);
}

TEST_CASE("synth window of a single atom is identically zero") {
  CrystalStructure s;
  s.dim = 2;
  s.atoms = {{1.7, {0.3, 0.4, 0}}};
  IntensitySet i = synth_window(s, {3, 3, 0});
  for (const auto& [h, v] : i.entries)
    CHECK(std::fabs(v) < 1e-10);
  CHECK(i.sum_zsq.has_value());
  CHECK(*i.sum_zsq == Approx(1.7 * 1.7).epsilon(1e-12));
}

TEST_CASE("the two synthesis routes agree") {
  CrystalStructure s;
  s.dim = 2;
  s.atoms = {{1.0, {0.0, 0.0, 0}}, {2.0, {0.25, 0.0, 0}}};
  IntensitySet i = synth_window(s, {2, 0, 0});
  PattersonMap p = compute_patterson(s);
  CHECK(std::fabs(i.at({1, 0, 0})) < 1e-10);
  for (const auto& [h, v] : i.entries)
    CHECK(v == Approx(subtracted_intensity(p, h)).epsilon(1e-10));
}

TEST_CASE("friedel symmetry is exact after canonical storage") {
  UniformRng rng(41);
  for (int t = 0; t < 10; ++t) {
    CrystalStructure s = generate_random_structure(
        1000 + t, 4, 2, 0.05, 0.5, 5.0, Mode::neutron);
    IntensitySet i = synth_window(s, {3, 3, 0});
    for (const auto& [h, v] : i.entries) {
      CHECK(i.at(h) == i.at(neg(h)));  // exact, same stored slot
    }
  }
}

TEST_CASE("random structures: route agreement, size bound, translation") {
  for (int t = 0; t < 20; ++t) {
    int dim = (t % 2) ? 3 : 2;
    int n = 2 + t % 4;
    CrystalStructure s = generate_random_structure(500 + t, n, dim, 0.05,
                                                   0.5, 5.0, Mode::neutron);
    PattersonMap p = compute_patterson(s);
    CHECK(p.nbar() <= n * (n - 1));
    p.validate();  // centrosymmetry holds

    std::array<int, 3> w{2, 2, dim == 3 ? 2 : 0};
    IntensitySet i = synth_window(s, w);
    for (const auto& [h, v] : i.entries) {
      double direct = subtracted_intensity(p, h);
      CHECK(std::fabs(v - direct) <=
            1e-10 * std::max({std::fabs(v), std::fabs(direct), 1.0}));
    }

    // translating every atom leaves the map and the intensities unchanged
    CrystalStructure shifted = s;
    FracVec tvec{0.37, 0.81, 0.13};
    for (Atom& a : shifted.atoms)
      for (int d = 0; d < dim; ++d) a.pos[d] = wrap_unit(a.pos[d] + tvec[d]);
    IntensitySet i2 = synth_window(shifted, w);
    for (const auto& [h, v] : i.entries)
      CHECK(std::fabs(v - i2.at(h)) <=
            1e-10 * std::max({std::fabs(v), 1.0}));
  }
}

TEST_CASE("all-positive charges never cancel a centre") {
  for (int t = 0; t < 10; ++t) {
    CrystalStructure s = generate_random_structure(700 + t, 4, 2, 0.05, 0.5,
                                                   5.0, Mode::xray);
    PattersonMap p = compute_patterson(s);
    // distinct-difference count from scratch
    std::vector<FracVec> deltas;
    for (size_t j = 0; j < s.atoms.size(); ++j)
      for (size_t k = 0; k < s.atoms.size(); ++k) {
        if (j == k) continue;
        FracVec d{0, 0, 0};
        for (int dd = 0; dd < 2; ++dd)
          d[dd] = wrap_unit(s.atoms[j].pos[dd] - s.atoms[k].pos[dd]);
        bool fresh = true;
        for (const FracVec& e : deltas)
          if (frac_dist(d, e, 2) <= kMergeTol) fresh = false;
        if (fresh) deltas.push_back(d);
      }
    CHECK(p.nbar() == static_cast<int>(deltas.size()));
  }
}

TEST_CASE("structure validation rejects bad input") {
  CrystalStructure s;
  s.dim = 2;
  s.atoms = {{0.0, {0.1, 0.1, 0}}};
  CHECK_THROWS_AS(s.validate(), Error);  // zero charge
  s.atoms = {{1.0, {0.1, 0.1, 0}}, {2.0, {0.1, 0.1, 0}}};
  CHECK_THROWS_AS(s.validate(), Error);  // duplicate position
  s.atoms = {{1.0, {1.2, 0.1, 0}}};
  CHECK_THROWS_AS(s.validate(), Error);  // out of [0,1)
}
