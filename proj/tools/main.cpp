// Command-line front end for the phase-problem toolkit.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "phasealg/crystal_model.hpp"
#include "phasealg/inversion.hpp"
#include "phasealg/io.hpp"
#include "phasealg/pipeline.hpp"
#include "phasealg/reconstruction.hpp"

namespace pa = phasealg;

namespace {

std::array<int, 3> parse_window(const std::string& s) {
  std::array<int, 3> w{0, 0, 0};
  std::istringstream ss(s);
  std::string tok;
  int d = 0;
  while (std::getline(ss, tok, ',')) {
    if (d >= 3) throw CLI::ValidationError("--window takes at most 3 values");
    try {
      size_t pos = 0;
      w[d] = std::stoi(tok, &pos);
      if (pos != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw CLI::ValidationError("bad window component '" + tok + "'");
    }
    ++d;
  }
  if (d == 0) throw CLI::ValidationError("--window needs at least one value");
  return w;
}

std::vector<double> parse_charges(const std::string& s) {
  std::vector<double> out;
  std::istringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      size_t pos = 0;
      out.push_back(std::stod(tok, &pos));
      if (pos != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw CLI::ValidationError("bad charge '" + tok + "'");
    }
  }
  if (out.empty()) throw CLI::ValidationError("--charges needs values");
  return out;
}

int axis_index(const std::string& s) {
  if (s == "a" || s == "0") return 0;
  if (s == "b" || s == "1") return 1;
  if (s == "c" || s == "2") return 2;
  throw CLI::ValidationError("--axis must be a, b or c");
}

pa::BasicSet run_search(const pa::IntensitySet& in, pa::Mode mode, int axis,
                        double tol) {
  std::set<pa::Reflection> sobs = pa::reflections_of(in);
  if (mode == pa::Mode::neutron) {
    pa::ObservedSet obs = pa::compute_S1(sobs, in.dim);
    return pa::search_basic_set(
        pa::j_gram(in, obs),
        [&obs](const pa::Reflection& h) { return obs.in_s1(h); }, in.dim,
        axis, tol);
  }
  return pa::search_basic_set(
      pa::intensity_gram(in),
      [&sobs](const pa::Reflection& h) { return sobs.count(h) != 0; }, in.dim,
      axis, tol);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Algebraic phase-problem toolkit for point-atom crystals"};
  app.require_subcommand(1);

  double tol = pa::kRankRelTol;
  uint64_t seed = 1;
  std::string mode_s = "neutron";
  std::string axis_s = "a";
  std::string window_s = "6,6";
  std::string precision_s = "double";
  app.add_option("--tol", tol, "relative rank / verification tolerance");
  app.add_option("--seed", seed, "random seed");
  app.add_option("--mode", mode_s, "xray or neutron")
      ->check(CLI::IsMember({"xray", "neutron"}));
  app.add_option("--axis", axis_s, "scan axis: a, b or c");
  app.add_option("--window", window_s, "box half-widths H[,K[,L]]");
  app.add_option("--precision", precision_s, "double or extended")
      ->check(CLI::IsMember({"double", "extended"}));

  // gen
  auto* gen = app.add_subcommand("gen", "generate a random structure");
  int gen_n = 3, gen_dim = 2;
  double gen_sep = 0.05, gen_zlo = 1.0, gen_zhi = 10.0;
  std::string gen_out;
  gen->add_option("--n-atoms", gen_n, "atom count");
  gen->add_option("--dim", gen_dim, "dimension (2 or 3)")
      ->check(CLI::IsMember({2, 3}));
  gen->add_option("--min-sep", gen_sep, "per-coordinate circle separation");
  gen->add_option("--charge-lo", gen_zlo, "smallest |charge|");
  gen->add_option("--charge-hi", gen_zhi, "largest |charge|");
  gen->add_option("output", gen_out, "structure file")->required();

  // synth
  auto* synth = app.add_subcommand("synth", "intensities of a structure");
  std::string synth_in, synth_out;
  synth->add_option("structure", synth_in, "structure file")->required();
  synth->add_option("output", synth_out, "intensity file")->required();

  // patterson
  auto* patt = app.add_subcommand("patterson", "Patterson map of a structure");
  std::string patt_in, patt_out;
  patt->add_option("structure", patt_in, "structure file")->required();
  patt->add_option("output", patt_out, "Patterson file")->required();

  // basis
  auto* basis = app.add_subcommand("basis", "search a basic set");
  std::string basis_in, basis_out;
  basis->add_option("intensities", basis_in, "intensity file")->required();
  basis->add_option("output", basis_out, "basic-set file")->required();

  // reconstruct
  auto* rec = app.add_subcommand("reconstruct", "extend the pattern");
  std::string rec_basis, rec_in, rec_out;
  rec->add_option("basis", rec_basis, "basic-set file")->required();
  rec->add_option("intensities", rec_in, "intensity file")->required();
  rec->add_option("output", rec_out, "intensity file")->required();

  // invert
  auto* inv = app.add_subcommand("invert", "recover map and structures");
  std::string inv_in, inv_basis, inv_out;
  int inv_n = 0;
  std::string inv_charges;
  inv->add_option("intensities", inv_in, "intensity file")->required();
  inv->add_option("out-prefix", inv_out, "output prefix")->required();
  inv->add_option("--basis", inv_basis, "basic-set file (searched if absent)");
  inv->add_option("--n-atoms", inv_n, "atom count for deconvolution");
  inv->add_option("--charges", inv_charges, "comma-separated charges");

  // verify-det
  auto* vdet = app.add_subcommand("verify-det",
                                  "closed-form vs numeric determinant");
  std::string vdet_in;
  vdet->add_option("patterson", vdet_in, "Patterson file")->required();

  // pipeline
  auto* pipe = app.add_subcommand("pipeline", "full round trip");
  std::string pipe_in, pipe_out;
  pipe->add_option("structure", pipe_in, "structure file")->required();
  pipe->add_option("out-prefix", pipe_out, "output prefix")->required();

  for (CLI::App* sc : app.get_subcommands([](CLI::App*) { return true; }))
    sc->fallthrough();  // global flags may follow the subcommand

  CLI11_PARSE(app, argc, argv);

  try {
    pa::Mode mode = mode_s == "xray" ? pa::Mode::xray : pa::Mode::neutron;
    int axis = axis_index(axis_s);
    pa::Precision prec = precision_s == "extended" ? pa::Precision::extended
                                                   : pa::Precision::double_prec;

    if (*gen) {
      pa::CrystalStructure s = pa::generate_random_structure(
          seed, gen_n, gen_dim, gen_sep, gen_zlo, gen_zhi, mode);
      pa::save_structure(gen_out, s);
      return 0;
    }

    if (*synth) {
      pa::CrystalStructure s = pa::load_structure(synth_in);
      std::array<int, 3> w = parse_window(window_s);
      pa::save_intensities(synth_out, pa::synth_window(s, w));
      return 0;
    }

    if (*patt) {
      pa::CrystalStructure s = pa::load_structure(patt_in);
      pa::save_patterson(patt_out, pa::compute_patterson(s));
      return 0;
    }

    if (*basis) {
      pa::IntensitySet in = pa::load_intensities(basis_in);
      pa::BasicSet b = run_search(in, mode, axis, tol);
      pa::save_basic_set(basis_out, b);
      std::cout << "basic set of " << b.nbar() << " reflections, "
                << b.zeros.size() << " zeros\n";
      return 0;
    }

    if (*rec) {
      pa::BasicSet b = pa::load_basic_set(rec_basis, axis);
      pa::IntensitySet in = pa::load_intensities(rec_in);
      std::array<int, 3> w = parse_window(window_s);
      pa::ExtensionResult ext = pa::extend_pattern(in, b, w, tol);
      pa::save_intensities(rec_out, ext.intensities);
      if (!ext.gaps.empty()) {
        std::ofstream os(rec_out, std::ios::app);
        os << "GAPS\n";
        for (const pa::Reflection& h : ext.gaps) {
          for (int d = 0; d < b.dim; ++d) os << (d ? " " : "") << h[d];
          os << '\n';
        }
        std::cout << ext.gaps.size() << " unreachable reflections\n";
      }
      return 0;
    }

    if (*inv) {
      pa::IntensitySet in = pa::load_intensities(inv_in);
      pa::BasicSet b = inv_basis.empty()
                           ? run_search(in, mode, axis, tol)
                           : pa::load_basic_set(inv_basis, axis);
      pa::RecoveredPatterson rp = pa::recover_patterson(in, b);
      pa::save_patterson(inv_out + ".patterson", rp.map);
      std::cout << "recovered " << rp.map.nbar()
                << " centres, max residual " << rp.max_residual << '\n';
      if (inv_n > 0) {
        std::vector<double> charges = parse_charges(inv_charges);
        auto sols = pa::deconvolve_to_atoms(rp.map, inv_n, charges, tol);
        for (size_t k = 0; k < sols.size(); ++k)
          pa::save_structure(inv_out + ".struct" + std::to_string(k), sols[k]);
        std::cout << sols.size() << " candidate structures\n";
      }
      return 0;
    }

    if (*vdet) {
      pa::PattersonMap p = pa::load_patterson(vdet_in);
      p.validate();
      double closed = pa::kh_det_closed_form(p, axis);
      pa::ShapeProfile shape = pa::shape_profile(p, axis);
      std::vector<pa::Reflection> refs = pa::principal_basic_refs(shape);
      pa::LatticeMatrix v = pa::build_V(p, refs);
      Eigen::VectorXd w(p.nbar());
      for (int j = 0; j < p.nbar(); ++j) w(j) = p.centres[j].weight;
      Eigen::MatrixXcd d = v.m.adjoint() * w.asDiagonal() * v.m;
      double numeric = pa::det_lu(d, prec).real();
      double rel = std::fabs(closed - numeric) /
                   std::max({std::fabs(closed), std::fabs(numeric), 1e-300});
      std::printf("closed-form %.17g\nnumeric     %.17g\nrel error   %.3e\n",
                  closed, numeric, rel);
      return rel <= tol ? 0 : 1;
    }

    if (*pipe) {
      pa::RunConfig cfg;
      cfg.mode = mode;
      cfg.axis = axis;
      cfg.rank_rel_tol = tol;
      cfg.window = parse_window(window_s);
      cfg.seed = seed;
      cfg.precision = prec;
      pa::PipelineResult r = pa::run_pipeline(cfg, pipe_in, pipe_out);
      if (!r.diagnostic.empty()) std::cerr << r.diagnostic << '\n';
      return r.exit_code;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
