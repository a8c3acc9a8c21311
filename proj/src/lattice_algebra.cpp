#include "phasealg/lattice_algebra.hpp"

#include <algorithm>
#include <numeric>

#include "phasealg/dd.hpp"

namespace phasealg {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

std::complex<double> unit_phase(double frac) {
  double arg = -kTwoPi * frac;
  return {std::cos(arg), std::sin(arg)};
}

// Cluster fractional values on the unit circle; returns (representative,
// member indices) clusters. Values inside one cluster differ by <= tol.
struct Cluster {
  double rep;
  std::vector<int> members;
};

std::vector<Cluster> cluster_circle(const std::vector<double>& vals,
                                    const std::vector<int>& idx, double tol) {
  std::vector<int> order(idx.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return wrap_unit(vals[a]) < wrap_unit(vals[b]);
  });
  std::vector<Cluster> out;
  for (int o : order) {
    double v = wrap_unit(vals[o]);
    if (!out.empty() && circle_dist(out.back().rep, v) <= tol) {
      out.back().members.push_back(idx[o]);
    } else {
      out.push_back({v, {idx[o]}});
    }
  }
  // wrap-around: first and last cluster may touch across 0
  if (out.size() > 1 && circle_dist(out.front().rep, out.back().rep) <= tol) {
    for (int m : out.back().members) out.front().members.push_back(m);
    out.pop_back();
  }
  return out;
}

uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}
}  // namespace

std::array<int, 3> axis_order(int axis, int dim) {
  if (axis < 0 || axis >= dim) throw Error("axis index out of range");
  if (dim == 2) return {axis, 1 - axis, 2};
  return {axis, (axis + 1) % 3, (axis + 2) % 3};
}

std::vector<int> ShapeProfile::row_order() const {
  std::vector<int> order;
  for (const Group& g : groups)
    for (const SubGroup& s : g.subs)
      for (int i : s.centre_idx) order.push_back(i);
  return order;
}

bool ShapeProfile::comparable_chain() const {
  if (dim == 2) return true;
  for (size_t i = 0; i + 1 < groups.size(); ++i) {
    const auto& wide = groups[i].subs;
    const auto& narrow = groups[i + 1].subs;
    for (size_t r = 0; r < narrow.size(); ++r)
      if (r >= wide.size() || narrow[r].vals.size() > wide[r].vals.size())
        return false;
  }
  return true;
}

ShapeProfile shape_profile(const PattersonMap& p, int axis, double merge_tol) {
  if (p.centres.empty()) throw Error("empty Patterson map has no profile");
  auto ord = axis_order(axis, p.dim);
  ShapeProfile sp;
  sp.dim = p.dim;
  sp.axis = axis;
  sp.nbar = p.nbar();

  std::vector<double> xs(p.centres.size());
  std::vector<int> all(p.centres.size());
  for (size_t i = 0; i < p.centres.size(); ++i) {
    xs[i] = p.centres[i].delta[ord[0]];
    all[i] = static_cast<int>(i);
  }
  auto x_clusters = cluster_circle(xs, all, merge_tol);

  for (const Cluster& xc : x_clusters) {
    ShapeProfile::Group g;
    g.proj = xc.rep;
    if (p.dim == 2) {
      ShapeProfile::SubGroup s;
      std::vector<std::pair<double, int>> ys;
      for (int i : xc.members)
        ys.emplace_back(wrap_unit(p.centres[i].delta[ord[1]]), i);
      std::sort(ys.begin(), ys.end());
      for (auto& [y, i] : ys) {
        s.vals.push_back(y);
        s.centre_idx.push_back(i);
      }
      g.subs.push_back(std::move(s));
    } else {
      std::vector<double> ys;
      ys.reserve(xc.members.size());
      for (int i : xc.members) ys.push_back(p.centres[i].delta[ord[1]]);
      auto y_clusters = cluster_circle(ys, xc.members, merge_tol);
      for (const Cluster& yc : y_clusters) {
        ShapeProfile::SubGroup s;
        s.proj = yc.rep;
        std::vector<std::pair<double, int>> zs;
        for (int i : yc.members)
          zs.emplace_back(wrap_unit(p.centres[i].delta[ord[2]]), i);
        std::sort(zs.begin(), zs.end());
        for (auto& [z, i] : zs) {
          s.vals.push_back(z);
          s.centre_idx.push_back(i);
        }
        g.subs.push_back(std::move(s));
      }
      // q_{i,1} >= q_{i,2} >= ..., ties by ascending y
      std::stable_sort(g.subs.begin(), g.subs.end(),
                       [](const auto& a, const auto& b) {
                         if (a.vals.size() != b.vals.size())
                           return a.vals.size() > b.vals.size();
                         return a.proj < b.proj;
                       });
    }
    sp.groups.push_back(std::move(g));
  }

  if (p.dim == 2) {
    // m_1 >= ... >= m_M, ties by ascending x
    std::stable_sort(sp.groups.begin(), sp.groups.end(),
                     [](const auto& a, const auto& b) {
                       if (a.total() != b.total()) return a.total() > b.total();
                       return a.proj < b.proj;
                     });
    for (const auto& g : sp.groups) sp.col_heights.push_back(g.total());
  } else {
    // p_1 >= ... >= p_M, ties by descending total then ascending x
    std::stable_sort(sp.groups.begin(), sp.groups.end(),
                     [](const auto& a, const auto& b) {
                       if (a.subs.size() != b.subs.size())
                         return a.subs.size() > b.subs.size();
                       if (a.total() != b.total()) return a.total() > b.total();
                       return a.proj < b.proj;
                     });
    for (const auto& g : sp.groups)
      sp.col_heights.push_back(static_cast<int>(g.subs.size()));
  }
  // conjugate partition
  int m1 = sp.col_heights.empty() ? 0 : sp.col_heights[0];
  for (int s = 1; s <= m1; ++s) {
    int mu = 0;
    for (int m : sp.col_heights)
      if (m >= s) ++mu;
    sp.row_widths.push_back(mu);
  }
  return sp;
}

LatticeMatrix build_V(const PattersonMap& p,
                      const std::vector<Reflection>& refs) {
  if (refs.empty()) throw Error("build_V needs at least one reflection");
  LatticeMatrix v;
  v.refs = refs;
  v.m.resize(p.nbar(), static_cast<Eigen::Index>(refs.size()));
  for (int j = 0; j < p.nbar(); ++j)
    for (size_t l = 0; l < refs.size(); ++l) {
      double frac = 0;
      for (int d = 0; d < p.dim; ++d)
        frac += refs[l][d] * p.centres[j].delta[d];
      v.m(j, static_cast<Eigen::Index>(l)) = unit_phase(frac);
    }
  return v;
}

KHMatrix kh_matrix(const IntensitySet& i, const std::vector<Reflection>& refs) {
  KHMatrix kh;
  kh.kind = KHKind::intensity;
  kh.refs = refs;
  const int n = static_cast<int>(refs.size());
  kh.m.resize(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = r; c < n; ++c) {
      double val = i.at(sub(refs[r], refs[c]));
      kh.m(r, c) = val;
      kh.m(c, r) = val;
    }
  return kh;
}

KHMatrix kh_matrix(
    const std::function<double(const Reflection&, const Reflection&)>& source,
    const std::vector<Reflection>& refs, KHKind kind) {
  KHMatrix kh;
  kh.kind = kind;
  kh.refs = refs;
  const int n = static_cast<int>(refs.size());
  kh.m.resize(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = r; c < n; ++c) {
      double val = source(refs[r], refs[c]);
      kh.m(r, c) = val;
      kh.m(c, r) = val;
    }
  return kh;
}

std::complex<double> vandermonde_det_closed_form(const ShapeProfile& shape) {
  std::complex<double> det = 1.0;
  const auto& g = shape.groups;
  const int M = static_cast<int>(g.size());
  if (shape.dim == 2) {
    for (int l1 = 0; l1 < M; ++l1)
      for (int l2 = l1 + 1; l2 < M; ++l2) {
        std::complex<double> diff =
            unit_phase(g[l2].proj) - unit_phase(g[l1].proj);
        int e = std::min(g[l1].total(), g[l2].total());
        for (int k = 0; k < e; ++k) det *= diff;
      }
    for (int i = 0; i < M; ++i) {
      const auto& ys = g[i].subs[0].vals;
      for (size_t j1 = 0; j1 < ys.size(); ++j1)
        for (size_t j2 = j1 + 1; j2 < ys.size(); ++j2)
          det *= unit_phase(ys[j2]) - unit_phase(ys[j1]);
    }
    return det;
  }
  // D = 3: the product formula requires the group diagrams to nest; for
  // incomparable diagrams the determinant does not factor.
  if (!shape.comparable_chain())
    throw Error(
        "profile diagrams are not totally ordered by inclusion; the "
        "determinant has no product form for this shape");
  for (int i = 0; i < M; ++i)
    for (const auto& s : g[i].subs)
      for (size_t s1 = 0; s1 < s.vals.size(); ++s1)
        for (size_t s2 = s1 + 1; s2 < s.vals.size(); ++s2)
          det *= unit_phase(s.vals[s2]) - unit_phase(s.vals[s1]);
  for (int i1 = 0; i1 < M; ++i1)
    for (int i2 = i1 + 1; i2 < M; ++i2) {
      std::complex<double> diff =
          unit_phase(g[i2].proj) - unit_phase(g[i1].proj);
      int e = std::min(g[i1].total(), g[i2].total());
      for (int k = 0; k < e; ++k) det *= diff;
    }
  for (int i = 0; i < M; ++i)
    for (size_t r1 = 0; r1 < g[i].subs.size(); ++r1)
      for (size_t r2 = r1 + 1; r2 < g[i].subs.size(); ++r2) {
        std::complex<double> diff =
            unit_phase(g[i].subs[r2].proj) - unit_phase(g[i].subs[r1].proj);
        int e = std::min(static_cast<int>(g[i].subs[r1].vals.size()),
                         static_cast<int>(g[i].subs[r2].vals.size()));
        for (int k = 0; k < e; ++k) det *= diff;
      }
  return det;
}

double kh_det_closed_form(const PattersonMap& p, int axis, double merge_tol) {
  if (p.centres.empty()) throw Error("empty Patterson map");
  ShapeProfile shape = shape_profile(p, axis, merge_tol);
  double prod_nu = 1;
  for (const PattersonCentre& c : p.centres) prod_nu *= c.weight;
  std::complex<double> v = vandermonde_det_closed_form(shape);
  return prod_nu * std::norm(v);
}

std::vector<Reflection> principal_basic_refs(const ShapeProfile& shape) {
  auto ord = axis_order(shape.axis, shape.dim);
  std::vector<Reflection> refs;
  const int M = static_cast<int>(shape.groups.size());
  if (shape.dim == 2) {
    for (int h = 0; h < M; ++h)
      for (int k = 0; k < shape.groups[h].total(); ++k) {
        Reflection r{0, 0, 0};
        r[ord[0]] = h;
        r[ord[1]] = k;
        refs.push_back(r);
      }
  } else {
    for (int h = 0; h < M; ++h)
      for (size_t k = 0; k < shape.groups[h].subs.size(); ++k)
        for (size_t l = 0; l < shape.groups[h].subs[k].vals.size(); ++l) {
          Reflection r{0, 0, 0};
          r[ord[0]] = h;
          r[ord[1]] = static_cast<int>(k);
          r[ord[2]] = static_cast<int>(l);
          refs.push_back(r);
        }
  }
  return refs;
}

double bezout_expansion(const LatticeMatrix& v,
                        const std::vector<double>& weights) {
  const int nbar = static_cast<int>(v.m.rows());
  const int m = static_cast<int>(v.m.cols());
  if (m > nbar) throw Error("subset size exceeds number of centres");
  if (static_cast<int>(weights.size()) != nbar)
    throw Error("weight count does not match rows of V");
  if (binomial(nbar, m) > 10000000ull)
    throw Error("Bezout expansion refused: C(" + std::to_string(nbar) + "," +
                std::to_string(m) + ") exceeds 1e7 subsets");
  std::vector<int> sel(m);
  std::iota(sel.begin(), sel.end(), 0);
  double total = 0;
  Eigen::MatrixXcd minor(m, m);
  while (true) {
    double w = 1;
    for (int i = 0; i < m; ++i) {
      w *= weights[sel[i]];
      minor.row(i) = v.m.row(sel[i]);
    }
    total += w * std::norm(minor.fullPivLu().determinant());
    // next lexicographic m-subset
    int i = m - 1;
    while (i >= 0 && sel[i] == nbar - m + i) --i;
    if (i < 0) break;
    ++sel[i];
    for (int j = i + 1; j < m; ++j) sel[j] = sel[j - 1] + 1;
  }
  return total;
}

int numerical_rank(const Eigen::MatrixXcd& m, double rel_tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > rel_tol * sv(0)) ++rank;
  return rank;
}

struct ExtendedLU::Impl {
  int n = 0;
  bool singular = false;
  std::vector<int> perm;
  std::vector<std::vector<DDComplex>> a;  // row-permuted LU factors
};

ExtendedLU::ExtendedLU(const Eigen::MatrixXcd& m) : impl_(new Impl) {
  if (m.rows() != m.cols()) throw Error("LU of a non-square matrix");
  const int n = static_cast<int>(m.rows());
  impl_->n = n;
  impl_->a.assign(n, std::vector<DDComplex>(n));
  impl_->perm.resize(n);
  for (int r = 0; r < n; ++r) {
    impl_->perm[r] = r;
    for (int c = 0; c < n; ++c)
      impl_->a[r][c] = DDComplex(m(r, c).real(), m(r, c).imag());
  }
  auto& a = impl_->a;
  for (int col = 0; col < n; ++col) {
    int piv = col;
    double best = abs2(a[col][col]);
    for (int r = col + 1; r < n; ++r)
      if (abs2(a[r][col]) > best) {
        best = abs2(a[r][col]);
        piv = r;
      }
    if (best == 0.0) {
      impl_->singular = true;
      return;
    }
    if (piv != col) {
      std::swap(a[piv], a[col]);
      std::swap(impl_->perm[piv], impl_->perm[col]);
    }
    for (int r = col + 1; r < n; ++r) {
      DDComplex f = a[r][col] / a[col][col];
      a[r][col] = f;
      for (int c = col + 1; c < n; ++c) a[r][c] = a[r][c] - f * a[col][c];
    }
  }
}

ExtendedLU::~ExtendedLU() = default;
ExtendedLU::ExtendedLU(ExtendedLU&&) noexcept = default;
ExtendedLU& ExtendedLU::operator=(ExtendedLU&&) noexcept = default;
bool ExtendedLU::singular() const { return impl_->singular; }

Eigen::VectorXcd ExtendedLU::solve(const Eigen::VectorXcd& b) const {
  if (impl_->singular) throw Error("extended LU: matrix is exactly singular");
  const int n = impl_->n;
  if (static_cast<int>(b.size()) != n)
    throw Error("extended LU: right-hand side has wrong length");
  const auto& a = impl_->a;
  std::vector<DDComplex> y(n);
  for (int r = 0; r < n; ++r) {
    DDComplex acc(b(impl_->perm[r]).real(), b(impl_->perm[r]).imag());
    for (int c = 0; c < r; ++c) acc = acc - a[r][c] * y[c];
    y[r] = acc;
  }
  std::vector<DDComplex> xs(n);
  for (int r = n - 1; r >= 0; --r) {
    DDComplex acc = y[r];
    for (int c = r + 1; c < n; ++c) acc = acc - a[r][c] * xs[c];
    xs[r] = acc / a[r][r];
  }
  Eigen::VectorXcd x(n);
  for (int r = 0; r < n; ++r) x(r) = {xs[r].re.value(), xs[r].im.value()};
  return x;
}

namespace {

using DDMat = std::vector<std::vector<DDComplex>>;
using DDVec = std::vector<DDComplex>;

// in-place partial-pivot LU; returns false on an exactly singular matrix
bool dd_lu_factor(DDMat& a, std::vector<int>& perm) {
  const int n = static_cast<int>(a.size());
  perm.resize(n);
  for (int r = 0; r < n; ++r) perm[r] = r;
  for (int col = 0; col < n; ++col) {
    int piv = col;
    double best = abs2(a[col][col]);
    for (int r = col + 1; r < n; ++r)
      if (abs2(a[r][col]) > best) {
        best = abs2(a[r][col]);
        piv = r;
      }
    if (best == 0.0) return false;
    if (piv != col) {
      std::swap(a[piv], a[col]);
      std::swap(perm[piv], perm[col]);
    }
    for (int r = col + 1; r < n; ++r) {
      DDComplex f = a[r][col] / a[col][col];
      a[r][col] = f;
      for (int c = col + 1; c < n; ++c) a[r][c] = a[r][c] - f * a[col][c];
    }
  }
  return true;
}

DDVec dd_lu_solve(const DDMat& a, const std::vector<int>& perm,
                  const DDVec& b) {
  const int n = static_cast<int>(a.size());
  DDVec y(n);
  for (int r = 0; r < n; ++r) {
    DDComplex acc = b[perm[r]];
    for (int c = 0; c < r; ++c) acc = acc - a[r][c] * y[c];
    y[r] = acc;
  }
  DDVec x(n);
  for (int r = n - 1; r >= 0; --r) {
    DDComplex acc = y[r];
    for (int c = r + 1; c < n; ++c) acc = acc - a[r][c] * x[c];
    x[r] = acc / a[r][r];
  }
  return x;
}

DDComplex dd_ipow(const DDComplex& z, int e) {
  if (e == 0) return DDComplex(1.0, 0.0);
  DDComplex base = z;
  int k = e;
  if (k < 0) {
    base = DDComplex(1.0, 0.0) / z;
    k = -k;
  }
  DDComplex out(1.0, 0.0);
  while (k) {
    if (k & 1) out = out * base;
    base = base * base;
    k >>= 1;
  }
  return out;
}

bool dd_finite(const DDComplex& z) {
  return std::isfinite(z.re.value()) && std::isfinite(z.im.value());
}

// Newton iteration on the bordered system
//   [ T - mu I   -w ] [dw ]   [ -(T - mu I) w ]
//   [   v^H       0 ] [dmu] = [   1 - v^H w   ]
// with v the fixed normalization anchor; converges quadratically to an
// exact eigenpair of the double matrix T from a double-accurate seed.
bool dd_polish_eigenpair(const Eigen::MatrixXcd& t,
                         const std::vector<std::complex<double>>& anchor,
                         DDVec& w, DDComplex& mu, int iters) {
  const int n = static_cast<int>(t.rows());
  for (int it = 0; it < iters; ++it) {
    DDMat b(n + 1, DDVec(n + 1));
    DDVec rhs(n + 1);
    for (int r = 0; r < n; ++r) {
      DDComplex res(0.0, 0.0);
      for (int c = 0; c < n; ++c) {
        DDComplex trc(t(r, c).real(), t(r, c).imag());
        b[r][c] = (r == c) ? trc - mu : trc;
        res = res - b[r][c] * w[c];
      }
      b[r][n] = DDComplex(0.0, 0.0) - w[r];
      rhs[r] = res;
    }
    DDComplex vw(0.0, 0.0);
    for (int c = 0; c < n; ++c) {
      b[n][c] = DDComplex(anchor[c].real(), -anchor[c].imag());
      vw = vw + b[n][c] * w[c];
    }
    b[n][n] = DDComplex(0.0, 0.0);
    rhs[n] = DDComplex(1.0, 0.0) - vw;
    std::vector<int> perm;
    if (!dd_lu_factor(b, perm)) return false;
    DDVec d = dd_lu_solve(b, perm, rhs);
    for (int r = 0; r < n; ++r) {
      w[r] = w[r] + d[r];
      if (!dd_finite(w[r])) return false;
    }
    mu = mu + d[n];
    if (!dd_finite(mu)) return false;
  }
  return true;
}

}  // namespace

struct CommutingSpectrum::Impl {
  int n = 0;
  bool good = false;
  std::vector<DDVec> wcols;           // eigenvectors, one column per entry
  std::vector<std::vector<DDComplex>> lam;  // lam[d][k]
  DDMat wlu;                          // dd LU factors of W
  std::vector<int> wperm;
};

CommutingSpectrum::CommutingSpectrum(const std::vector<Eigen::MatrixXcd>& mats)
    : impl_(new Impl) {
  if (mats.empty() || mats.size() > 3) return;
  const int n = static_cast<int>(mats[0].rows());
  for (const auto& m : mats)
    if (m.rows() != n || m.cols() != n) return;
  impl_->n = n;

  // irrational mix keeps the combined spectrum simple whenever the node
  // set itself is simple
  const double mix[3] = {1.0, 0.7320508075688772, 0.5477225575051661};
  Eigen::MatrixXcd combined = Eigen::MatrixXcd::Zero(n, n);
  for (size_t d = 0; d < mats.size(); ++d) combined += mix[d] * mats[d];
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(combined, true);
  if (es.info() != Eigen::Success) return;

  impl_->wcols.assign(n, DDVec(n));
  std::vector<DDComplex> mu(n);
  for (int k = 0; k < n; ++k) {
    Eigen::VectorXcd v0 = es.eigenvectors().col(k);
    double nrm = v0.norm();
    if (!(nrm > 0) || !std::isfinite(nrm)) return;
    v0 /= nrm;
    std::vector<std::complex<double>> anchor(n);
    DDVec w(n);
    for (int r = 0; r < n; ++r) {
      anchor[r] = v0(r);
      w[r] = DDComplex(v0(r).real(), v0(r).imag());
    }
    DDComplex m(es.eigenvalues()(k).real(), es.eigenvalues()(k).imag());
    if (!dd_polish_eigenpair(combined, anchor, w, m, 4)) return;
    impl_->wcols[k] = std::move(w);
    mu[k] = m;
  }

  // clustered mixed eigenvalues defeat the pairing; bail out to let the
  // caller use its non-spectral path
  double scale = 0;
  for (int k = 0; k < n; ++k) scale = std::max(scale, std::sqrt(abs2(mu[k])));
  for (int k = 0; k < n; ++k)
    for (int j = k + 1; j < n; ++j)
      if (std::sqrt(abs2(mu[k] - mu[j])) < 1e-9 * std::max(scale, 1.0)) return;

  // per-matrix eigenvalues: seed with a component quotient on the shared
  // eigenvector, then polish against the member itself
  impl_->lam.assign(mats.size(), std::vector<DDComplex>(n));
  for (size_t d = 0; d < mats.size(); ++d)
    for (int k = 0; k < n; ++k) {
      const DDVec& wk = impl_->wcols[k];
      int m = 0;
      double best = 0;
      std::vector<std::complex<double>> anchor(n);
      for (int r = 0; r < n; ++r) {
        anchor[r] = {wk[r].re.value(), wk[r].im.value()};
        if (abs2(wk[r]) > best) {
          best = abs2(wk[r]);
          m = r;
        }
      }
      DDComplex tw(0.0, 0.0);
      for (int c = 0; c < n; ++c)
        tw = tw + DDComplex(mats[d](m, c).real(), mats[d](m, c).imag()) * wk[c];
      DDComplex l = tw / wk[m];
      DDVec w = wk;
      if (!dd_polish_eigenpair(mats[d], anchor, w, l, 3)) return;
      impl_->lam[d][k] = l;
    }

  impl_->wlu.assign(n, DDVec(n));
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) impl_->wlu[r][c] = impl_->wcols[c][r];
  if (!dd_lu_factor(impl_->wlu, impl_->wperm)) return;
  impl_->good = true;
}

CommutingSpectrum::~CommutingSpectrum() = default;
CommutingSpectrum::CommutingSpectrum(CommutingSpectrum&&) noexcept = default;
CommutingSpectrum& CommutingSpectrum::operator=(CommutingSpectrum&&) noexcept =
    default;

bool CommutingSpectrum::ok() const { return impl_->good; }

Eigen::VectorXcd CommutingSpectrum::eigenvalues(int which) const {
  if (!impl_->good) throw Error("commuting spectrum unavailable");
  if (which < 0 || which >= static_cast<int>(impl_->lam.size()))
    throw Error("commuting spectrum: matrix index out of range");
  Eigen::VectorXcd out(impl_->n);
  for (int k = 0; k < impl_->n; ++k)
    out(k) = {impl_->lam[which][k].re.value(),
              impl_->lam[which][k].im.value()};
  return out;
}

Eigen::VectorXcd CommutingSpectrum::propagate(const std::array<int, 3>& expo,
                                              int pivot) const {
  if (!impl_->good) throw Error("commuting spectrum unavailable");
  const int n = impl_->n;
  if (pivot < 0 || pivot >= n)
    throw Error("commuting spectrum: pivot index out of range");
  DDVec e(n, DDComplex(0.0, 0.0));
  e[pivot] = DDComplex(1.0, 0.0);
  DDVec t = dd_lu_solve(impl_->wlu, impl_->wperm, e);
  for (size_t d = 0; d < impl_->lam.size(); ++d) {
    if (expo[d] == 0) continue;
    for (int k = 0; k < n; ++k)
      t[k] = t[k] * dd_ipow(impl_->lam[d][k], expo[d]);
  }
  Eigen::VectorXcd out(n);
  for (int r = 0; r < n; ++r) {
    DDComplex acc(0.0, 0.0);
    for (int k = 0; k < n; ++k) acc = acc + impl_->wcols[k][r] * t[k];
    out(r) = {acc.re.value(), acc.im.value()};
  }
  return out;
}

Eigen::VectorXcd apply_power_dd(const Eigen::MatrixXcd& m,
                                const Eigen::VectorXcd& v, int e) {
  if (m.rows() != m.cols() || m.rows() != v.size())
    throw Error("apply_power_dd: dimension mismatch");
  if (e < 0) throw Error("apply_power_dd: negative exponent");
  const int n = static_cast<int>(m.rows());
  DDVec x(n);
  for (int r = 0; r < n; ++r) x[r] = DDComplex(v(r).real(), v(r).imag());
  DDVec y(n);
  for (int step = 0; step < e; ++step) {
    for (int r = 0; r < n; ++r) {
      DDComplex acc(0.0, 0.0);
      for (int c = 0; c < n; ++c)
        acc = acc + DDComplex(m(r, c).real(), m(r, c).imag()) * x[c];
      y[r] = acc;
    }
    std::swap(x, y);
  }
  Eigen::VectorXcd out(n);
  for (int r = 0; r < n; ++r) out(r) = {x[r].re.value(), x[r].im.value()};
  return out;
}

Eigen::VectorXcd solve_refined(const Eigen::MatrixXcd& a,
                               const Eigen::PartialPivLU<Eigen::MatrixXcd>& lu,
                               const Eigen::VectorXcd& b, int iters) {
  Eigen::VectorXcd x = lu.solve(b);
  const Eigen::Index n = a.rows();
  for (int it = 0; it < iters; ++it) {
    Eigen::VectorXcd r(n);
    for (Eigen::Index row = 0; row < n; ++row) {
      DDComplex acc(b(row).real(), b(row).imag());
      for (Eigen::Index col = 0; col < n; ++col)
        acc = acc - DDComplex(a(row, col).real(), a(row, col).imag()) *
                        DDComplex(x(col).real(), x(col).imag());
      r(row) = {acc.re.value(), acc.im.value()};
    }
    x += lu.solve(r);
  }
  return x;
}

Eigen::VectorXd solve_refined(const Eigen::MatrixXd& a,
                              const Eigen::PartialPivLU<Eigen::MatrixXd>& lu,
                              const Eigen::VectorXd& b, int iters) {
  Eigen::VectorXd x = lu.solve(b);
  const Eigen::Index n = a.rows();
  for (int it = 0; it < iters; ++it) {
    Eigen::VectorXd r(n);
    for (Eigen::Index row = 0; row < n; ++row) {
      DD acc(b(row));
      for (Eigen::Index col = 0; col < n; ++col)
        acc = acc - DD(a(row, col)) * DD(x(col));
      r(row) = acc.value();
    }
    x += lu.solve(r);
  }
  return x;
}

std::complex<double> det_lu(const Eigen::MatrixXcd& m, Precision prec) {
  if (m.rows() != m.cols()) throw Error("determinant of non-square matrix");
  if (prec == Precision::double_prec) {
    return Eigen::PartialPivLU<Eigen::MatrixXcd>(m).determinant();
  }
  const int n = static_cast<int>(m.rows());
  std::vector<std::vector<DDComplex>> a(n, std::vector<DDComplex>(n));
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c)
      a[r][c] = DDComplex(m(r, c).real(), m(r, c).imag());
  DDComplex det(1.0, 0.0);
  for (int col = 0; col < n; ++col) {
    int piv = col;
    double best = abs2(a[col][col]);
    for (int r = col + 1; r < n; ++r)
      if (abs2(a[r][col]) > best) {
        best = abs2(a[r][col]);
        piv = r;
      }
    if (best == 0.0) return 0.0;
    if (piv != col) {
      std::swap(a[piv], a[col]);
      det = det * DDComplex(-1.0, 0.0);
    }
    det = det * a[col][col];
    for (int r = col + 1; r < n; ++r) {
      DDComplex f = a[r][col] / a[col][col];
      for (int c = col; c < n; ++c) a[r][c] = a[r][c] - f * a[col][c];
    }
  }
  return {det.re.value(), det.im.value()};
}

}  // namespace phasealg
