#include "phasealg/inversion.hpp"

#include <algorithm>
#include <complex>
#include <limits>

#include "phasealg/crystal_model.hpp"
#include "phasealg/reconstruction.hpp"

namespace phasealg {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

std::complex<double> phase_at(const Reflection& h, const FracVec& r, int dim) {
  double arg = 0;
  for (int d = 0; d < dim; ++d) arg += h[d] * r[d];
  arg *= kTwoPi;
  return {std::cos(arg), std::sin(arg)};
}
}  // namespace

ResolventPolynomial resolvent_from_zero(const BasicSet& b,
                                        const IntensitySet& i,
                                        double rel_tol) {
  if (b.zeros.empty()) throw Error("basic set has no recorded KH zeros");
  auto ord = axis_order(b.axis, b.dim);
  const Reflection& z = b.zeros.front();
  if (z[ord[1]] != 0 || z[ord[2]] != 0 || z[ord[0]] < 1)
    throw Error("first recorded zero is not on the scan row");
  const int m = z[ord[0]];  // mu_1, number of distinct axis projections
  Reflection e{0, 0, 0};
  e[ord[0]] = 1;
  auto row_ref = [&](int s) {
    Reflection r{0, 0, 0};
    r[ord[0]] = s;
    return r;
  };
  Eigen::MatrixXd g(m, m);
  Eigen::VectorXd rhs(m);
  for (int l = 0; l < m; ++l) {
    for (int s = 0; s < m; ++s) g(l, s) = i.at(sub(row_ref(l), row_ref(s)));
    rhs(l) = i.at(sub(row_ref(l), row_ref(m)));
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(g);
  lu.setThreshold(rel_tol);
  if (lu.rank() < m)
    throw Error("restricted KH system is singular; cannot form resolvent");
  ExtendedLU xlu(g.cast<std::complex<double>>());
  Eigen::VectorXd beta = xlu.solve(rhs.cast<std::complex<double>>()).real();
  ResolventPolynomial poly;
  poly.degree = m;
  poly.axis = b.axis;
  poly.coeffs.resize(m + 1);
  for (int s = 0; s < m; ++s) poly.coeffs(s) = -beta(s);
  poly.coeffs(m) = 1.0;
  return poly;
}

std::vector<std::complex<double>> roots_on_unit_circle(
    const ResolventPolynomial& p, double unimod_tol) {
  const int m = p.degree;
  if (m < 1) throw Error("resolvent degree must be at least 1");
  Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(m, m);
  for (int r = 1; r < m; ++r) comp(r, r - 1) = 1.0;
  for (int r = 0; r < m; ++r) comp(r, m - 1) = -p.coeffs(r);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp, false);
  std::vector<std::complex<double>> roots;
  for (int r = 0; r < m; ++r) {
    std::complex<double> z = es.eigenvalues()(r);
    double mod = std::abs(z);
    if (std::fabs(mod - 1.0) > unimod_tol)
      throw Error("resolvent root modulus " + std::to_string(mod) +
                  " deviates from 1: data inconsistent with point atoms");
    roots.push_back(z / mod);
  }
  std::sort(roots.begin(), roots.end(), [](const auto& a, const auto& b) {
    double pa = std::arg(a), pb = std::arg(b);
    if (pa < 0) pa += kTwoPi;
    if (pb < 0) pb += kTwoPi;
    return pa < pb;
  });
  return roots;
}

RecoveredPatterson recover_patterson(const IntensitySet& i, const BasicSet& b,
                                     double residual_tol, double rel_tol) {
  const int n = b.nbar();
  KHMatrix d0 = kh_matrix(i, b.refs);
  {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(d0.m,
                                                      Eigen::EigenvaluesOnly);
    double lo = std::numeric_limits<double>::infinity(), hi = 0;
    for (int k = 0; k < n; ++k) {
      double a = std::fabs(es.eigenvalues()(k));
      lo = std::min(lo, a);
      hi = std::max(hi, a);
    }
    if (hi == 0 || lo < rel_tol * hi)
      throw Error("KH matrix singular: not a basic set");
  }
  ExtendedLU lu(d0.m.cast<std::complex<double>>());

  // X_d = D0^{-1} D_d = V^{-1} diag(exp(i 2 pi delta_d)) V; the X_d
  // commute, so a generic fixed linear combination separates all centres
  // even when one coordinate's projections collide.
  std::vector<Eigen::MatrixXd> xs;
  for (int d = 0; d < b.dim; ++d) {
    Reflection e{0, 0, 0};
    e[d] = 1;
    Eigen::MatrixXd dd(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c)
        dd(r, c) = i.at(add(sub(b.refs[r], b.refs[c]), e));
    Eigen::MatrixXd x(n, n);
    for (int c = 0; c < n; ++c)
      x.col(c) =
          lu.solve(dd.col(c).cast<std::complex<double>>()).real();
    xs.push_back(std::move(x));
  }
  // joint eigenvalues of the commuting family, Newton-polished in
  // double-double: each eigenvalue is a node phase, so its argument
  // gives one coordinate of a Patterson centre
  std::vector<Eigen::MatrixXcd> fam;
  for (int d = 0; d < b.dim; ++d)
    fam.push_back(xs[d].cast<std::complex<double>>());
  CommutingSpectrum cspec(fam);

  std::vector<Eigen::VectorXcd> lam(b.dim);
  if (cspec.ok()) {
    for (int d = 0; d < b.dim; ++d) lam[d] = cspec.eigenvalues(d);
  } else {
    // fallback: double eigensolver on a mixed operator plus a two-sided
    // similarity W^-1 X_d W for the per-axis eigenvalues
    const double mix[3] = {1.0, 0.7320508075688772, 0.5477225575051661};
    Eigen::MatrixXcd combined = Eigen::MatrixXcd::Zero(n, n);
    for (int d = 0; d < b.dim; ++d) combined += mix[d] * fam[d];
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(combined, true);
    const Eigen::MatrixXcd& wmat = es.eigenvectors();
    Eigen::PartialPivLU<Eigen::MatrixXcd> wlu(wmat);
    for (int d = 0; d < b.dim; ++d) {
      Eigen::MatrixXcd xw = fam[d] * wmat;
      lam[d].resize(n);
      for (int c = 0; c < n; ++c)
        lam[d](c) = solve_refined(wmat, wlu, xw.col(c))(c);
    }
  }

  RecoveredPatterson out;
  out.map.dim = b.dim;
  for (int k = 0; k < n; ++k) {
    FracVec delta{0, 0, 0};
    for (int d = 0; d < b.dim; ++d) {
      std::complex<double> l = lam[d](k);
      double mod = std::abs(l);
      if (std::fabs(mod - 1.0) > 1e-3)
        throw Error("shifted-KH eigenvalue modulus " + std::to_string(mod) +
                    " deviates from 1: inconsistent intensities");
      delta[d] = wrap_unit(std::arg(l) / kTwoPi);
    }
    out.map.centres.push_back({0.0, delta});
  }

  // weights from the linear intensity system over the complete set
  CompletenessSets cs = completeness_sets(b);
  std::vector<Reflection> crefs;
  for (const Reflection& h : cs.complete)
    if (h == friedel_canonical(h)) crefs.push_back(h);
  const int m = static_cast<int>(crefs.size());
  Eigen::MatrixXd a(2 * m, n);
  Eigen::VectorXd rhs(2 * m);
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c < n; ++c) {
      std::complex<double> ph =
          phase_at(crefs[r], out.map.centres[c].delta, b.dim);
      a(r, c) = ph.real();
      a(m + r, c) = ph.imag();
    }
    rhs(r) = i.at(crefs[r]);
    rhs(m + r) = 0.0;
  }
  Eigen::VectorXd nu = a.colPivHouseholderQr().solve(rhs);
  for (int c = 0; c < n; ++c) out.map.centres[c].weight = nu(c);

  // Gauss-Newton polish of (weight, position) against every observed
  // intensity: the eigenvalue route locates centres to roughly the
  // eigenproblem's conditioning, while the data itself is exact to
  // double precision, so a few Newton steps on the full nonlinear model
  // gain several digits on ill-conditioned maps.
  {
    std::vector<Reflection> orefs;
    for (const auto& [h, v] : i.entries)
      if (h == friedel_canonical(h)) orefs.push_back(h);
    const int q = static_cast<int>(orefs.size());
    const int p = n * (1 + b.dim);
    if (2 * q >= p) {
      auto pack_residual = [&](Eigen::VectorXd& r) {
        double sq = 0;
        for (int s = 0; s < q; ++s) {
          std::complex<double> fit = 0;
          for (int c = 0; c < n; ++c)
            fit += out.map.centres[c].weight *
                   phase_at(orefs[s], out.map.centres[c].delta, b.dim);
          r(s) = fit.real() - i.at(orefs[s]);
          r(q + s) = fit.imag();
          sq += r(s) * r(s) + r(q + s) * r(q + s);
        }
        return sq;
      };
      Eigen::VectorXd r(2 * q);
      double best = pack_residual(r);
      PattersonMap best_map = out.map;
      for (int it = 0; it < 4; ++it) {
        Eigen::MatrixXd jac(2 * q, p);
        for (int s = 0; s < q; ++s)
          for (int c = 0; c < n; ++c) {
            const PattersonCentre& pc = out.map.centres[c];
            std::complex<double> ph = phase_at(orefs[s], pc.delta, b.dim);
            jac(s, c) = ph.real();
            jac(q + s, c) = ph.imag();
            for (int d = 0; d < b.dim; ++d) {
              double f = kTwoPi * orefs[s][d] * pc.weight;
              jac(s, n + c * b.dim + d) = -f * ph.imag();
              jac(q + s, n + c * b.dim + d) = f * ph.real();
            }
          }
        Eigen::VectorXd step = jac.colPivHouseholderQr().solve(-r);
        if (!step.allFinite()) break;
        for (int c = 0; c < n; ++c) {
          out.map.centres[c].weight += step(c);
          for (int d = 0; d < b.dim; ++d)
            out.map.centres[c].delta[d] =
                wrap_unit(out.map.centres[c].delta[d] +
                          step(n + c * b.dim + d));
        }
        double sq = pack_residual(r);
        if (sq < best) {
          best = sq;
          best_map = out.map;
        }
      }
      out.map = best_map;
    }
  }

  double iscale = 1.0;
  for (int r = 0; r < m; ++r) iscale = std::max(iscale, std::fabs(rhs(r)));
  for (int r = 0; r < m; ++r) {
    std::complex<double> fit = 0;
    for (int c = 0; c < n; ++c)
      fit += out.map.centres[c].weight *
             phase_at(crefs[r], out.map.centres[c].delta, b.dim);
    double res = std::abs(fit - std::complex<double>(rhs(r), 0.0));
    out.residuals.push_back(res);
    out.max_residual = std::max(out.max_residual, res);
  }
  if (out.max_residual > residual_tol * iscale)
    throw Error("recovered Patterson map does not reproduce the complete-set "
                "intensities (max residual " +
                std::to_string(out.max_residual) + ")");
  return out;
}

namespace {

// greedy multiset match of (charge, position) pairs within tolerance
bool atoms_match(const std::vector<Atom>& a, const std::vector<Atom>& b,
                 int dim, double tol) {
  if (a.size() != b.size()) return false;
  std::vector<bool> used(b.size(), false);
  for (const Atom& x : a) {
    bool found = false;
    for (size_t k = 0; k < b.size(); ++k) {
      if (used[k]) continue;
      if (std::fabs(b[k].charge - x.charge) <= tol &&
          frac_dist(b[k].pos, x.pos, dim) <= tol) {
        used[k] = true;
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

std::vector<Atom> transform(const CrystalStructure& s, const FracVec& shift,
                            int sign) {
  std::vector<Atom> out;
  for (const Atom& a : s.atoms) {
    FracVec p{0, 0, 0};
    for (int d = 0; d < s.dim; ++d)
      p[d] = wrap_unit(sign * (a.pos[d] - shift[d]));
    out.push_back({a.charge, p});
  }
  return out;
}

bool map_matches(const PattersonMap& cand, const PattersonMap& target,
                 double tol) {
  if (cand.nbar() != target.nbar()) return false;
  double wmax = 0;
  for (const auto& c : target.centres) wmax = std::max(wmax, std::fabs(c.weight));
  std::vector<bool> used(target.centres.size(), false);
  for (const auto& c : cand.centres) {
    bool found = false;
    for (size_t k = 0; k < target.centres.size(); ++k) {
      if (used[k]) continue;
      if (frac_dist(c.delta, target.centres[k].delta, cand.dim) <= tol &&
          std::fabs(c.weight - target.centres[k].weight) <= tol * wmax) {
        used[k] = true;
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

}  // namespace

bool structures_equivalent(const CrystalStructure& a,
                           const CrystalStructure& b, double tol,
                           bool allow_inversion) {
  if (a.dim != b.dim || a.atoms.size() != b.atoms.size()) return false;
  std::vector<Atom> ra = transform(a, a.atoms[0].pos, 1);
  for (int sign : {1, -1}) {
    if (sign == -1 && !allow_inversion) continue;
    for (const Atom& anchor : b.atoms) {
      std::vector<Atom> rb = transform(b, anchor.pos, sign);
      if (atoms_match(ra, rb, a.dim, tol)) return true;
    }
  }
  return false;
}

std::vector<CrystalStructure> deconvolve_to_atoms(
    const PattersonMap& p, int n_atoms, const std::vector<double>& charges,
    double tol) {
  if (n_atoms < 1) throw Error("need at least one atom");
  if (n_atoms > 6) throw Error("deconvolution guard: more than 6 atoms");
  if (static_cast<int>(charges.size()) != n_atoms)
    throw Error("charge multiset size does not match atom count");

  std::vector<CrystalStructure> results;
  if (n_atoms == 1) {
    CrystalStructure s;
    s.dim = p.dim;
    s.atoms.push_back({charges[0], {0, 0, 0}});
    if (p.centres.empty()) results.push_back(s);
    return results;
  }
  if (p.centres.empty()) return results;

  auto has_delta = [&](const FracVec& d) {
    for (const auto& c : p.centres)
      if (frac_dist(c.delta, d, p.dim) <= tol) return true;
    return false;
  };

  std::vector<double> charge_perm = charges;
  std::sort(charge_perm.begin(), charge_perm.end());

  std::vector<FracVec> positions{{0, 0, 0}};
  std::vector<int> chosen;

  auto try_candidate = [&]() {
    std::vector<double> cp = charge_perm;
    do {
      CrystalStructure s;
      s.dim = p.dim;
      for (int t = 0; t < n_atoms; ++t) s.atoms.push_back({cp[t], positions[t]});
      try {
        PattersonMap cand = compute_patterson(s);
        if (map_matches(cand, p, tol)) {
          bool dup = false;
          for (const auto& r : results)
            if (structures_equivalent(r, s, tol, /*allow_inversion=*/false)) {
              dup = true;
              break;
            }
          if (!dup) results.push_back(s);
        }
      } catch (const Error&) {
        // coincident atoms etc.: candidate rejected
      }
    } while (std::next_permutation(cp.begin(), cp.end()));
  };

  // backtracking over centre indices; every pairwise difference of a
  // viable position set must itself be a centre
  std::function<void(int)> extend = [&](int start) {
    if (static_cast<int>(positions.size()) == n_atoms) {
      try_candidate();
      return;
    }
    for (int idx = start; idx < p.nbar(); ++idx) {
      const FracVec& cand = p.centres[idx].delta;
      bool ok = true;
      for (const FracVec& q : positions) {
        FracVec diff{0, 0, 0};
        for (int d = 0; d < p.dim; ++d) diff[d] = wrap_unit(cand[d] - q[d]);
        if (!has_delta(diff)) {
          ok = false;
          break;
        }
        for (int d = 0; d < p.dim; ++d) diff[d] = wrap_unit(q[d] - cand[d]);
        if (!has_delta(diff)) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      positions.push_back(cand);
      chosen.push_back(idx);
      extend(idx + 1);
      positions.pop_back();
      chosen.pop_back();
    }
  };
  extend(0);
  return results;
}

}  // namespace phasealg
