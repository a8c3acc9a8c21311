#include "phasealg/crystal_model.hpp"

#include <complex>

namespace phasealg {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

std::complex<double> phase(const Reflection& h, const FracVec& r, int dim) {
  double arg = 0;
  for (int d = 0; d < dim; ++d) arg += h[d] * r[d];
  arg *= kTwoPi;
  return {std::cos(arg), std::sin(arg)};
}
}  // namespace

void CrystalStructure::validate() const {
  if (dim != 2 && dim != 3) throw Error("dimension must be 2 or 3");
  if (atoms.empty()) throw Error("structure has no atoms");
  for (const Atom& a : atoms) {
    if (!std::isfinite(a.charge) || a.charge == 0.0)
      throw Error("atom charge must be finite and nonzero");
    for (int d = 0; d < dim; ++d)
      if (!(a.pos[d] >= 0.0 && a.pos[d] < 1.0))
        throw Error("atom coordinate outside [0,1)");
  }
  for (size_t j = 0; j < atoms.size(); ++j)
    for (size_t k = j + 1; k < atoms.size(); ++k)
      if (frac_dist(atoms[j].pos, atoms[k].pos, dim) == 0.0)
        throw Error("two atoms share the same position");
}

void PattersonMap::validate(double merge_tol) const {
  if (dim != 2 && dim != 3) throw Error("dimension must be 2 or 3");
  for (const PattersonCentre& c : centres)
    if (!std::isfinite(c.weight) || c.weight == 0.0)
      throw Error("centre weight must be finite and nonzero");
  for (size_t j = 0; j < centres.size(); ++j)
    for (size_t k = j + 1; k < centres.size(); ++k)
      if (frac_dist(centres[j].delta, centres[k].delta, dim) <= merge_tol)
        throw Error("two Patterson centres coincide");
  // centrosymmetry: every (nu, delta) has its mirror (nu, -delta mod 1)
  for (const PattersonCentre& c : centres) {
    FracVec mirror{0, 0, 0};
    for (int d = 0; d < dim; ++d) mirror[d] = wrap_unit(-c.delta[d]);
    bool found = false;
    for (const PattersonCentre& o : centres)
      if (frac_dist(o.delta, mirror, dim) <= merge_tol &&
          std::fabs(o.weight - c.weight) <=
              1e-9 * std::max(1.0, std::fabs(c.weight))) {
        found = true;
        break;
      }
    if (!found) throw Error("Patterson map is not centrosymmetric");
  }
}

double observed_intensity(const CrystalStructure& s, const Reflection& h) {
  std::complex<double> f = 0;
  for (const Atom& a : s.atoms) f += a.charge * phase(h, a.pos, s.dim);
  return std::norm(f);
}

PattersonMap compute_patterson(const CrystalStructure& s, double merge_tol,
                               double drop_rel) {
  s.validate();
  PattersonMap p;
  p.dim = s.dim;
  const auto& atoms = s.atoms;
  for (size_t j = 0; j < atoms.size(); ++j)
    for (size_t k = 0; k < atoms.size(); ++k) {
      if (j == k) continue;
      FracVec delta{0, 0, 0};
      for (int d = 0; d < s.dim; ++d)
        delta[d] = wrap_unit(atoms[j].pos[d] - atoms[k].pos[d]);
      double w = atoms[j].charge * atoms[k].charge;
      bool merged = false;
      for (PattersonCentre& c : p.centres)
        if (frac_dist(c.delta, delta, s.dim) <= merge_tol) {
          c.weight += w;
          merged = true;
          break;
        }
      if (!merged) p.centres.push_back({w, delta});
    }
  double wmax = 0;
  for (const PattersonCentre& c : p.centres)
    wmax = std::max(wmax, std::fabs(c.weight));
  std::vector<PattersonCentre> kept;
  for (const PattersonCentre& c : p.centres)
    if (std::fabs(c.weight) > drop_rel * wmax) kept.push_back(c);
  p.centres = std::move(kept);
  return p;
}

double subtracted_intensity(const PattersonMap& p, const Reflection& h,
                            double imag_tol) {
  std::complex<double> sum = 0;
  double scale = 0;
  for (const PattersonCentre& c : p.centres) {
    sum += c.weight * phase(h, c.delta, p.dim);
    scale += std::fabs(c.weight);
  }
  if (std::fabs(sum.imag()) > imag_tol * std::max(1.0, scale))
    throw Error("residual imaginary part in subtracted intensity at " +
                to_string(h, p.dim) + "; map is not centrosymmetric");
  return sum.real();
}

IntensitySet synth_window(const CrystalStructure& s,
                          const std::array<int, 3>& half_widths) {
  s.validate();
  double zsq = 0;
  for (const Atom& a : s.atoms) zsq += a.charge * a.charge;
  IntensitySet out;
  out.dim = s.dim;
  out.sum_zsq = zsq;
  const int hx = half_widths[0];
  const int hy = s.dim >= 2 ? half_widths[1] : 0;
  const int hz = s.dim >= 3 ? half_widths[2] : 0;
  for (int a = -hx; a <= hx; ++a)
    for (int b = -hy; b <= hy; ++b)
      for (int c = -hz; c <= hz; ++c) {
        Reflection h{a, b, c};
        if (h != friedel_canonical(h)) continue;
        out.set(h, observed_intensity(s, h) - zsq);
      }
  return out;
}

}  // namespace phasealg
