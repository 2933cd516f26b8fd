#pragma once

// Independent oracles shared by unit tests and the acceptance binary.

#include <map>
#include <vector>

#include "ncpit/automata.hpp"

namespace ncpit::oracle {

// Leaves of the times-tree under g, left to right (stops at plus and input gates).
inline std::vector<int> product_leaves(const Circuit& c, int g) {
  const Gate& gate = c.gates[static_cast<std::size_t>(g)];
  if (gate.kind != GateKind::Times) return {g};
  auto l = product_leaves(c, gate.args[0].gate);
  auto r = product_leaves(c, gate.args[1].gate);
  l.insert(l.end(), r.begin(), r.end());
  return l;
}

// Value of the linear form at gate g when every variable x is replaced by val(x).
inline u64 linear_value(const Circuit& c, int g, const std::function<u64(int)>& val) {
  const Gate& gate = c.gates[static_cast<std::size_t>(g)];
  if (gate.kind == GateKind::Input) return c.field.reduce(val(gate.var));
  u64 r = 0;
  for (const auto& a : gate.args) r = c.field.fma(r, a.scale, linear_value(c, a.gate, val));
  return r;
}

// Sum over I of Q_I * xi_I for one depth-3 factor, following the automaton's edge labels:
// forward moves at positions in I carry y_{rank}, all others carry z.
inline NcPolynomial structured_factor(const Circuit& c, int q, int s, const ScalarSource& yz, const VarSet& xi) {
  const Field& f = c.field;
  NcPolynomial out(f, xi);
  for (const auto& term : c.gates[static_cast<std::size_t>(q)].args) {
    auto L = product_leaves(c, term.gate);
    const int D1 = static_cast<int>(L.size());
    // choose I = positions of the s-1 forward moves, increasing
    std::vector<int> I;
    std::function<void(int)> pick = [&](int from) {
      if (static_cast<int>(I.size()) == s - 1) {
        u64 coef = term.scale;
        Word w;
        int rank = 0;
        for (int t = 1; t <= D1; ++t) {
          bool fwd = rank < s - 1 && I[static_cast<std::size_t>(rank)] == t;
          w.push_back(rank);
          if (fwd) {
            ++rank;
            coef = f.mul(coef, linear_value(c, L[static_cast<std::size_t>(t - 1)], [&](int x) { return yz("y" + std::to_string(rank) + "_" + c.vars.name(x)); }));
          } else {
            coef = f.mul(coef, linear_value(c, L[static_cast<std::size_t>(t - 1)], [&](int x) { return yz("z_" + c.vars.name(x)); }));
          }
        }
        out.add_term(w, coef);
        return;
      }
      for (int t = from; t <= D1; ++t) {
        I.push_back(t);
        pick(t + 1);
        I.pop_back();
      }
    };
    pick(1);
  }
  return out;
}

// Closed form sum_i prod_j sum_I Q_{i,j,I} xi_I for a depth-5 circuit.
inline NcPolynomial structured_closed_form(const Circuit& c, int s, const ScalarSource& yz) {
  VarSet xi = VarSet::numbered("xi", s);
  NcPolynomial total(c.field, xi);
  for (const auto& top : c.gates[static_cast<std::size_t>(c.output)].args) {
    NcPolynomial prod = NcPolynomial::constant(c.field, xi, top.scale);
    for (int q : product_leaves(c, top.gate)) prod = nc_mul(prod, structured_factor(c, q, s, yz, xi));
    total += prod;
  }
  return total;
}

struct StructuredSplit {
  NcPolynomial fhat, spurious;
  bool spurious_sums_differ = true;  // every boundary-violating path has some pattern length != D1
};

// Split the step-1 image of expand(c) into boundary-respecting and violating paths.
inline StructuredSplit split_by_paths(const Circuit& c, int s, int D1, const ScalarSource& yz) {
  VarSet xi = VarSet::numbered("xi", s);
  StructuredSplit r{NcPolynomial(c.field, xi), NcPolynomial(c.field, xi)};
  const NcPolynomial full = expand(c);
  for (const auto& [w, coef] : full.terms()) {
    for (const auto& t : classify_paths(s, c.vars, c.field, yz, w, D1)) {
      NcPolynomial m = NcPolynomial::monomial(c.field, xi, t.output, c.field.mul(coef, t.coef));
      if (t.case1) {
        r.fhat += m;
      } else {
        r.spurious += m;
        if (t.sums_equal) r.spurious_sums_differ = false;
      }
    }
  }
  return r;
}

// Hand-shaped depth-5 circuit: sum over `top` products of D2 factors, each a sum of
// `inner` products of D1 linear forms.
inline Circuit small_depth5(int n, int D1, int D2, int top, int inner, SeededRng& rng, Field f) {
  Circuit c(f, VarSet::numbered("x", n));
  std::vector<int> in;
  for (int i = 0; i < n; ++i) in.push_back(c.add_input(i));
  std::vector<int> lin;
  for (int k = 0; k < 3; ++k) {
    std::vector<Arg> a;
    for (int i = 0; i < n; ++i) a.push_back({in[static_cast<std::size_t>(i)], sample_uniform(f, rng)});
    lin.push_back(c.add_plus(a, 1));
  }
  std::vector<int> q;
  for (int k = 0; k < 2; ++k) {
    std::vector<Arg> a;
    for (int t = 0; t < inner; ++t) {
      int g = lin[rng.below(lin.size())];
      for (int j = 1; j < D1; ++j) g = c.add_times(g, lin[rng.below(lin.size())]);
      a.push_back({g, sample_nonzero(f, rng)});
    }
    q.push_back(c.add_plus(a, 2));
  }
  std::vector<Arg> out;
  for (int t = 0; t < top; ++t) {
    int g = q[rng.below(q.size())];
    for (int j = 1; j < D2; ++j) g = c.add_times(g, q[rng.below(q.size())]);
    out.push_back({g, sample_nonzero(f, rng)});
  }
  c.output = c.add_plus(out, 3);
  c.degrees = {D1, D2};
  return c;
}

// Random family over f: entries are sparse affine forms in the next stage's variables.
inline SubstMatrixFamily random_family(const VarSet& in, const VarSet& out, int d, SeededRng& rng, bool affine, Field f) {
  SubstMatrixFamily fam{"R", f, in, out, d, static_cast<int>(rng.below(static_cast<u64>(d))), {}, {}};
  for (int a = 0; a < d; ++a)
    if (rng.coin()) fam.accepts.push_back(a);
  if (fam.accepts.empty()) fam.accepts.push_back(d - 1);
  for (int x = 0; x < in.size(); ++x) {
    Matrix m(d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        if (rng.below(3) == 0) continue;
        AffineForm a;
        if (affine && rng.below(3) == 0) a.c0 = sample_uniform(f, rng);
        for (int k = 0; k < out.size(); ++k)
          if (rng.coin()) a = af_add(f, a, AffineForm::var(k, sample_uniform(f, rng)));
        m.add(f, i, j, a);
      }
    fam.mats.push_back(m);
  }
  return fam;
}

inline NcPolynomial random_poly(const VarSet& v, int max_deg, int terms, SeededRng& rng, Field f) {
  NcPolynomial p(f, v);
  for (int t = 0; t < terms; ++t) {
    Word w(static_cast<std::size_t>(rng.range(0, max_deg)));
    for (int& x : w) x = rng.range(0, v.size() - 1);
    p.add_term(w, sample_uniform(f, rng));
  }
  return p;
}

// Accept entries of each stage pushed through the next, one stage at a time.
inline std::vector<NcPolynomial> sequential_accepts(const std::vector<SubstMatrixFamily>& st, const NcPolynomial& p) {
  std::vector<NcPolynomial> cur{p};
  for (const auto& fam : st) {
    std::vector<NcPolynomial> next;
    for (const auto& g : cur) {
      auto row = family_row(fam, g);
      for (int a : fam.accepts) next.push_back(row[static_cast<std::size_t>(a)]);
    }
    cur = std::move(next);
  }
  return cur;
}

inline std::vector<NcPolynomial> composed_accepts(const ComposedFamily& c, const NcPolynomial& p) {
  auto row = family_row(c, p);
  std::vector<NcPolynomial> r;
  for (int a : c.accepts) r.push_back(row[static_cast<std::size_t>(a)]);
  return r;
}

}  // namespace ncpit::oracle
