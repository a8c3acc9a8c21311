#include "phasealg/basis_search.hpp"

#include <algorithm>
#include <limits>

namespace phasealg {

bool ObservedSet::in_s1(const Reflection& h) const {
  return std::binary_search(s1.begin(), s1.end(), h);
}

std::set<Reflection> reflections_of(const IntensitySet& i) {
  std::set<Reflection> out;
  for (const auto& [h, v] : i.entries) {
    out.insert(h);
    out.insert(neg(h));
  }
  return out;
}

namespace {

// Preference order among candidate S1 sets (better == true).
bool better_subset(const std::vector<Reflection>& a,
                   const std::vector<Reflection>& b) {
  if (a.size() != b.size()) return a.size() > b.size();
  const Reflection zero{0, 0, 0};
  bool az = std::binary_search(a.begin(), a.end(), zero);
  bool bz = std::binary_search(b.begin(), b.end(), zero);
  if (az != bz) return az;
  int am = 0, bm = 0;
  for (const auto& h : a) am = std::max(am, cheb_norm(h));
  for (const auto& h : b) bm = std::max(bm, cheb_norm(h));
  if (am != bm) return am < bm;
  return a > b;  // lexicographically largest sorted list
}

struct CliqueSearch {
  const std::vector<Reflection>* verts;
  std::vector<std::vector<uint64_t>> adj;
  int n = 0, words = 0;
  std::vector<Reflection> best;

  bool edge(int a, int b) const {
    return (adj[a][b >> 6] >> (b & 63)) & 1u;
  }

  void run(std::vector<int>& cur, std::vector<int>& cand) {
    if (cand.empty()) {
      std::vector<Reflection> clique;
      for (int i : cur) clique.push_back((*verts)[i]);
      std::sort(clique.begin(), clique.end());
      if (best.empty() || better_subset(clique, best)) best = clique;
      return;
    }
    for (size_t idx = 0; idx < cand.size(); ++idx) {
      if (cur.size() + (cand.size() - idx) < best.size()) return;
      int v = cand[idx];
      std::vector<int> next;
      for (size_t j = idx + 1; j < cand.size(); ++j)
        if (edge(v, cand[j])) next.push_back(cand[j]);
      cur.push_back(v);
      run(cur, next);
      cur.pop_back();
    }
  }
};

}  // namespace

ObservedSet compute_S1(const std::set<Reflection>& s_obs, int dim) {
  if (s_obs.empty()) throw Error("compute_S1: empty observed set");
  ObservedSet out;
  out.dim = dim;
  out.s_obs = s_obs;

  std::array<int, 3> lo{0, 0, 0}, hi{0, 0, 0};
  for (int d = 0; d < 3; ++d) {
    lo[d] = std::numeric_limits<int>::max();
    hi[d] = std::numeric_limits<int>::min();
  }
  for (const Reflection& h : s_obs)
    for (int d = 0; d < 3; ++d) {
      lo[d] = std::min(lo[d], h[d]);
      hi[d] = std::max(hi[d], h[d]);
    }
  uint64_t volume = 1;
  bool symmetric = true;
  for (int d = 0; d < 3; ++d) {
    if (lo[d] != -hi[d]) symmetric = false;
    volume *= static_cast<uint64_t>(hi[d] - lo[d] + 1);
  }
  if (symmetric && volume == s_obs.size()) {
    // full box prod [-H_d, H_d]: the maximal difference-closed subset is
    // the product of integer intervals of length floor(H_d/2)+ceil(H_d/2)+1
    for (int a = -(hi[0] / 2); a <= (hi[0] + 1) / 2; ++a)
      for (int b = -(hi[1] / 2); b <= (hi[1] + 1) / 2; ++b)
        for (int c = -(hi[2] / 2); c <= (hi[2] + 1) / 2; ++c)
          out.s1.push_back({a, b, c});
    std::sort(out.s1.begin(), out.s1.end());
    return out;
  }

  if (s_obs.size() > 4096)
    throw Error("compute_S1: exact search refused for irregular sets "
                "larger than 4096 reflections");
  // Difference-closure is a pairwise condition, so S1 is a maximum clique
  // of the graph with an edge when the difference is observed.
  CliqueSearch cs;
  std::vector<Reflection> verts(s_obs.begin(), s_obs.end());
  cs.verts = &verts;
  cs.n = static_cast<int>(verts.size());
  cs.words = (cs.n + 63) / 64;
  cs.adj.assign(cs.n, std::vector<uint64_t>(cs.words, 0));
  for (int a = 0; a < cs.n; ++a)
    for (int b = a + 1; b < cs.n; ++b)
      if (s_obs.count(sub(verts[a], verts[b])) &&
          s_obs.count(sub(verts[b], verts[a]))) {
        cs.adj[a][b >> 6] |= 1ull << (b & 63);
        cs.adj[b][a >> 6] |= 1ull << (a & 63);
      }
  std::vector<int> cur, cand(cs.n);
  for (int i = 0; i < cs.n; ++i) cand[i] = i;
  cs.run(cur, cand);
  out.s1 = cs.best;
  std::sort(out.s1.begin(), out.s1.end());
  return out;
}

double j_entry(const IntensitySet& i, const ObservedSet& s, const Reflection& h,
               const Reflection& k) {
  double sum = 0;
  for (const Reflection& r : s.s1) sum += i.at(sub(h, r)) * i.at(sub(r, k));
  return sum;
}

double JMatrix::at(const Reflection& h, const Reflection& k) const {
  auto idx = [this](const Reflection& r) {
    auto it = std::lower_bound(refs.begin(), refs.end(), r);
    if (it == refs.end() || *it != r)
      throw Error("reflection " + to_string(r, 3) + " not in S1");
    return static_cast<Eigen::Index>(it - refs.begin());
  };
  return m(idx(h), idx(k));
}

JMatrix j_matrix(const IntensitySet& i, const ObservedSet& s) {
  JMatrix j;
  j.refs = s.s1;
  const int n = s.nbar1();
  j.m.resize(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = r; c < n; ++c) {
      double v = j_entry(i, s, s.s1[r], s.s1[c]);
      j.m(r, c) = v;
      j.m(c, r) = v;
    }
  return j;
}

namespace {

bool gram_dependent(const Eigen::MatrixXd& g, double rel_tol) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g,
                                                    Eigen::EigenvaluesOnly);
  double lo = std::numeric_limits<double>::infinity(), hi = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    double a = std::fabs(es.eigenvalues()(i));
    lo = std::min(lo, a);
    hi = std::max(hi, a);
  }
  return hi == 0 || lo < rel_tol * hi;
}

Reflection scan_ref(const std::array<int, 3>& ord, int h, int k, int l) {
  Reflection r{0, 0, 0};
  r[ord[0]] = h;
  r[ord[1]] = k;
  r[ord[2]] = l;
  return r;
}

}  // namespace

BasicSet search_basic_set(const GramOracle& gram, const SkipPredicate& in_domain,
                          int dim, int axis, double rel_tol,
                          const SkipPredicate& skip) {
  auto ord = axis_order(axis, dim);
  BasicSet bs;
  bs.dim = dim;
  bs.axis = axis;
  const Reflection origin{0, 0, 0};
  if (!in_domain(origin))
    throw WindowExhaustedError("origin reflection not inside the window");
  bs.refs.push_back(origin);
  if (gram_dependent(gram({origin}), rel_tol))
    throw Error("Gram matrix vanishes at the origin reflection");

  bool scan_done = false;
  for (int l = 0; !scan_done; ++l) {
    bool plane_done = false;
    for (int k = 0; !plane_done; ++k) {
      const int h0 = (l == 0 && k == 0) ? 1 : 0;
      for (int h = h0;; ++h) {
        Reflection cand = scan_ref(ord, h, k, l);
        if (skip && skip(cand)) break;  // quadrant hook: row ends silently
        if (!in_domain(cand))
          throw WindowExhaustedError(
              "scan needs reflection " + to_string(cand, dim) +
              " outside S1/window; the observed set cannot contain a "
              "basic set");
        std::vector<Reflection> trial = bs.refs;
        trial.push_back(cand);
        bool dep;
        try {
          dep = gram_dependent(gram(trial), rel_tol);
        } catch (const MissingIntensityError& e) {
          throw WindowExhaustedError(std::string(e.what()) +
                                     "; window too small for the scan");
        }
        if (!dep) {
          bs.refs.push_back(cand);
          continue;
        }
        bs.zeros.push_back(cand);
        if (h == 0) {  // a row start is itself a zero
          plane_done = true;
          if (k == 0) scan_done = true;
        }
        break;
      }
      if (dim == 2 && plane_done) scan_done = true;
    }
    if (dim == 2) scan_done = true;
  }
  return bs;
}

GramOracle intensity_gram(const IntensitySet& i) {
  return [&i](const std::vector<Reflection>& refs) {
    return kh_matrix(i, refs).m;
  };
}

GramOracle j_gram(const IntensitySet& i, const ObservedSet& s) {
  return [&i, &s](const std::vector<Reflection>& refs) {
    for (const Reflection& r : refs)
      if (!s.in_s1(r))
        throw WindowExhaustedError("reflection " + to_string(r, s.dim) +
                                   " outside S1");
    auto src = [&](const Reflection& a, const Reflection& b) {
      return j_entry(i, s, a, b);
    };
    return kh_matrix(src, refs, KHKind::j_quadratic).m;
  };
}

BasicSet principal_basic_set_from_geometry(const PattersonMap& p, int axis,
                                           double merge_tol) {
  ShapeProfile sp = shape_profile(p, axis, merge_tol);
  auto ord = axis_order(axis, p.dim);
  BasicSet bs;
  bs.dim = p.dim;
  bs.axis = axis;
  if (p.dim == 2) {
    const int m1 = sp.col_heights[0];
    for (int k = 0; k < m1; ++k) {
      for (int h = 0; h < sp.row_widths[k]; ++h)
        bs.refs.push_back(scan_ref(ord, h, k, 0));
      bs.zeros.push_back(scan_ref(ord, sp.row_widths[k], k, 0));
    }
    bs.zeros.push_back(scan_ref(ord, 0, m1, 0));
    return bs;
  }
  // run length of scan row (k,l): groups with p > k and q_{.,k+1} > l
  auto run = [&sp](int k, int l) {
    int n = 0;
    for (const auto& g : sp.groups)
      if (static_cast<int>(g.subs.size()) > k &&
          static_cast<int>(g.subs[k].vals.size()) > l)
        ++n;
    return n;
  };
  for (int l = 0;; ++l) {
    if (run(0, l) == 0) {
      bs.zeros.push_back(scan_ref(ord, 0, 0, l));
      break;
    }
    int k = 0;
    for (; run(k, l) > 0; ++k) {
      for (int h = 0; h < run(k, l); ++h)
        bs.refs.push_back(scan_ref(ord, h, k, l));
      bs.zeros.push_back(scan_ref(ord, run(k, l), k, l));
    }
    bs.zeros.push_back(scan_ref(ord, 0, k, l));
  }
  return bs;
}

}  // namespace phasealg
