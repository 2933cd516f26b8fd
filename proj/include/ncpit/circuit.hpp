#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ncpit/ncpoly.hpp"

namespace ncpit {

enum class GateKind { Input, Const, Plus, Times };

struct Arg {
  int gate = -1;
  u64 scale = 1;
};

struct Gate {
  int id = -1;
  GateKind kind = GateKind::Const;
  int var = -1;
  u64 value = 0;
  std::vector<Arg> args;  // times: exactly (left, right), scales ignored
};

// Gates are stored in topological order; arguments refer to earlier positions.
struct Circuit {
  Field field;
  VarSet vars;
  std::vector<Gate> gates;
  int output = -1;
  std::map<int, int> layer;  // plus gate position -> 1-based layer
  std::vector<int> degrees;  // optional hints D1, D2, ...
  int declared_size = 0;

  Circuit() = default;
  Circuit(Field f, VarSet v) : field(f), vars(std::move(v)) {}

  int size() const { return declared_size > 0 ? declared_size : static_cast<int>(gates.size()); }

  int add_input(int v) {
    gates.push_back({static_cast<int>(gates.size()), GateKind::Input, v, 0, {}});
    return static_cast<int>(gates.size()) - 1;
  }
  int add_const(u64 c) {
    gates.push_back({static_cast<int>(gates.size()), GateKind::Const, -1, field.reduce(c), {}});
    return static_cast<int>(gates.size()) - 1;
  }
  int add_plus(std::vector<Arg> args, int lay = 0) {
    for (auto& a : args) a.scale = field.reduce(a.scale);
    gates.push_back({static_cast<int>(gates.size()), GateKind::Plus, -1, 0, std::move(args)});
    int g = static_cast<int>(gates.size()) - 1;
    if (lay > 0) layer[g] = lay;
    return g;
  }
  int add_times(int l, int r) {
    gates.push_back({static_cast<int>(gates.size()), GateKind::Times, -1, 0, {{l, 1}, {r, 1}}});
    return static_cast<int>(gates.size()) - 1;
  }
  int plus_depth() const {
    int m = 0;
    for (const auto& [g, l] : layer) m = std::max(m, l);
    return m;
  }
  int depth() const { return 2 * plus_depth() - 1; }
};

inline std::vector<int> syntactic_degrees(const Circuit& c) {
  std::vector<int> deg(c.gates.size(), 0);
  for (std::size_t i = 0; i < c.gates.size(); ++i) {
    const Gate& g = c.gates[i];
    switch (g.kind) {
      case GateKind::Input: deg[i] = 1; break;
      case GateKind::Const: deg[i] = 0; break;
      case GateKind::Plus:
        for (const auto& a : g.args) deg[i] = std::max(deg[i], deg[static_cast<std::size_t>(a.gate)]);
        break;
      case GateKind::Times:
        deg[i] = deg[static_cast<std::size_t>(g.args[0].gate)] + deg[static_cast<std::size_t>(g.args[1].gate)];
        break;
    }
  }
  return deg;
}

inline int syntactic_degree(const Circuit& c, int g) { return syntactic_degrees(c).at(static_cast<std::size_t>(g)); }

struct Violation {
  int item;  // property number of the plus-regular definition
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  bool has(int item) const {
    return std::any_of(violations.begin(), violations.end(), [&](const Violation& v) { return v.item == item; });
  }
};

inline ValidationReport validate_plus_regular(const Circuit& c) {
  ValidationReport rep;
  auto add = [&](int item, std::string m) { rep.violations.push_back({item, "item " + std::to_string(item) + ": " + std::move(m)}); };
  auto gid = [&](int g) { return std::to_string(c.gates[static_cast<std::size_t>(g)].id); };
  const auto deg = syntactic_degrees(c);
  const std::size_t n = c.gates.size();

  for (std::size_t i = 0; i < n; ++i) {
    const Gate& g = c.gates[i];
    if (g.kind == GateKind::Plus) {
      if (g.args.empty()) add(1, "plus gate " + gid(static_cast<int>(i)) + " has no inputs");
      std::set<int> ds;
      for (const auto& a : g.args) ds.insert(deg[static_cast<std::size_t>(a.gate)]);
      if (ds.size() > 1) add(1, "plus gate " + gid(static_cast<int>(i)) + " sums children of different syntactic degrees");
      if (!c.layer.count(static_cast<int>(i))) add(2, "plus gate " + gid(static_cast<int>(i)) + " has no layer");
    } else if (g.kind == GateKind::Times && g.args.size() != 2) {
      add(1, "times gate " + gid(static_cast<int>(i)) + " does not have fan-in 2");
    }
  }

  std::map<int, std::set<int>> layer_deg;
  for (const auto& [g, l] : c.layer) layer_deg[l].insert(deg[static_cast<std::size_t>(g)]);
  for (const auto& [l, ds] : layer_deg)
    if (ds.size() > 1) add(3, "layer " + std::to_string(l) + " mixes syntactic degrees");

  if (c.output < 0 || c.gates[static_cast<std::size_t>(c.output)].kind != GateKind::Plus) add(4, "output gate is not a plus gate");

  // last[g] = set of the last plus-layer index seen along input-to-g paths (0 = none yet)
  std::vector<std::set<int>> last(n);
  std::set<int> item2, item5;
  for (std::size_t i = 0; i < n; ++i) {
    const Gate& g = c.gates[i];
    if (g.kind == GateKind::Input) {
      last[i] = {0};
      continue;
    }
    std::set<int> in;
    for (const auto& a : g.args) in.insert(last[static_cast<std::size_t>(a.gate)].begin(), last[static_cast<std::size_t>(a.gate)].end());
    auto it = c.layer.find(static_cast<int>(i));
    if (g.kind == GateKind::Plus && it != c.layer.end()) {
      int L = it->second;
      for (int v : in) {
        if (v == L) item2.insert(static_cast<int>(i));
        else if (v != L - 1) item5.insert(static_cast<int>(i));
      }
      last[i] = {L};
    } else {
      last[i] = std::move(in);
    }
  }
  for (int g : item2) add(2, "directed path between plus gates of the same layer into gate " + gid(g));
  for (int g : item5) add(5, "a path into gate " + gid(g) + " does not cross the previous layer exactly once");
  if (c.output >= 0) {
    int top = c.plus_depth();
    for (int v : last[static_cast<std::size_t>(c.output)])
      if (v != top) {
        add(5, "a path to the output misses layer " + std::to_string(top));
        break;
      }
  }
  return rep;
}

// Ring interface used by evaluate: zero(), one(), add, mul, scale.
struct ScalarRing {
  using Elem = u64;
  Field f;
  Elem zero() const { return 0; }
  Elem one() const { return 1; }
  Elem add(const Elem& a, const Elem& b) const { return f.add(a, b); }
  Elem mul(const Elem& a, const Elem& b) const { return f.mul(a, b); }
  Elem scale(u64 c, const Elem& a) const { return f.mul(c, a); }
};

struct DenseMatrix {
  int dim = 0;
  std::vector<u64> a;
  DenseMatrix() = default;
  explicit DenseMatrix(int d) : dim(d), a(static_cast<std::size_t>(d) * static_cast<std::size_t>(d), 0) {}
  u64& at(int i, int j) { return a[static_cast<std::size_t>(i) * static_cast<std::size_t>(dim) + static_cast<std::size_t>(j)]; }
  u64 at(int i, int j) const { return a[static_cast<std::size_t>(i) * static_cast<std::size_t>(dim) + static_cast<std::size_t>(j)]; }
  bool is_zero() const { return std::all_of(a.begin(), a.end(), [](u64 v) { return v == 0; }); }
  bool operator==(const DenseMatrix& o) const { return dim == o.dim && a == o.a; }
};

struct MatrixRing {
  using Elem = DenseMatrix;
  Field f;
  int dim;
  Elem zero() const { return DenseMatrix(dim); }
  Elem one() const {
    DenseMatrix m(dim);
    for (int i = 0; i < dim; ++i) m.at(i, i) = 1;
    return m;
  }
  void check(const Elem& a) const {
    if (a.dim != dim) throw Error(Errc::DimensionMismatch, "matrix of dimension " + std::to_string(a.dim) + ", expected " + std::to_string(dim));
  }
  Elem add(const Elem& a, const Elem& b) const {
    check(a);
    check(b);
    DenseMatrix r(dim);
    for (std::size_t i = 0; i < r.a.size(); ++i) r.a[i] = f.add(a.a[i], b.a[i]);
    return r;
  }
  Elem scale(u64 c, const Elem& a) const {
    check(a);
    DenseMatrix r(dim);
    for (std::size_t i = 0; i < r.a.size(); ++i) r.a[i] = f.mul(c, a.a[i]);
    return r;
  }
  Elem mul(const Elem& a, const Elem& b) const {
    check(a);
    check(b);
    DenseMatrix r(dim);
    for (int i = 0; i < dim; ++i)
      for (int k = 0; k < dim; ++k) {
        u64 x = a.at(i, k);
        if (!x) continue;
        for (int j = 0; j < dim; ++j) r.at(i, j) = f.fma(r.at(i, j), x, b.at(k, j));
      }
    return r;
  }
};

struct PolyRing {
  using Elem = NcPolynomial;
  Field f;
  VarSet vars;
  std::size_t cap = kDefaultMonomialCap;
  Elem zero() const { return NcPolynomial(f, vars); }
  Elem one() const { return NcPolynomial::constant(f, vars, 1); }
  Elem add(const Elem& a, const Elem& b) const {
    Elem r = a + b;
    if (r.size() > cap) throw Error(Errc::CapExceeded, "sum exceeds " + std::to_string(cap) + " monomials");
    return r;
  }
  Elem mul(const Elem& a, const Elem& b) const { return nc_mul(a, b, cap); }
  Elem scale(u64 c, const Elem& a) const { return a.scaled(c); }
};

// Gate-by-gate evaluation; only gates feeding the output are touched.
template <class Ring>
typename Ring::Elem evaluate(const Circuit& c, const Ring& ring, const std::vector<typename Ring::Elem>& inputs) {
  if (static_cast<int>(inputs.size()) < c.vars.size())
    throw Error(Errc::DimensionMismatch, "assignment does not cover all variables");
  std::vector<char> live(c.gates.size(), 0);
  live[static_cast<std::size_t>(c.output)] = 1;
  for (std::size_t i = c.gates.size(); i-- > 0;)
    if (live[i])
      for (const auto& a : c.gates[i].args) live[static_cast<std::size_t>(a.gate)] = 1;
  std::vector<std::optional<typename Ring::Elem>> val(c.gates.size());
  for (std::size_t i = 0; i < c.gates.size(); ++i) {
    if (!live[i]) continue;
    const Gate& g = c.gates[i];
    switch (g.kind) {
      case GateKind::Input: val[i] = inputs[static_cast<std::size_t>(g.var)]; break;
      case GateKind::Const: val[i] = ring.scale(g.value, ring.one()); break;
      case GateKind::Plus: {
        typename Ring::Elem acc = ring.zero();
        for (const auto& a : g.args) acc = ring.add(acc, ring.scale(a.scale, *val[static_cast<std::size_t>(a.gate)]));
        val[i] = std::move(acc);
        break;
      }
      case GateKind::Times:
        val[i] = ring.mul(*val[static_cast<std::size_t>(g.args[0].gate)], *val[static_cast<std::size_t>(g.args[1].gate)]);
        break;
    }
  }
  return *val[static_cast<std::size_t>(c.output)];
}

inline NcPolynomial expand(const Circuit& c, std::size_t cap = kDefaultMonomialCap) {
  PolyRing ring{c.field, c.vars, cap};
  std::vector<NcPolynomial> in;
  for (int i = 0; i < c.vars.size(); ++i) in.push_back(NcPolynomial::variable(c.field, c.vars, i));
  return evaluate(c, ring, in);
}

// Number of leaf visits of the formula obtained by unfolding the DAG (saturating).
inline double formula_size(const Circuit& c) {
  std::vector<double> sz(c.gates.size(), 0);
  for (std::size_t i = 0; i < c.gates.size(); ++i) {
    const Gate& g = c.gates[i];
    if (g.kind == GateKind::Input || g.kind == GateKind::Const) sz[i] = 1;
    else
      for (const auto& a : g.args) sz[i] += sz[static_cast<std::size_t>(a.gate)];
  }
  return sz[static_cast<std::size_t>(c.output)];
}

// Left row query: returns v * f(M) where apply(var, w) computes w * M_var.
// Walks the unfolded formula so memory stays at one vector per recursion level.
using RowVec = std::vector<u64>;
using RowApply = std::function<RowVec(int, const RowVec&)>;

inline RowVec evaluate_row(const Circuit& c, const RowVec& v, const RowApply& apply) {
  const Field& f = c.field;
  std::function<RowVec(int, const RowVec&)> rec = [&](int gi, const RowVec& x) -> RowVec {
    const Gate& g = c.gates[static_cast<std::size_t>(gi)];
    switch (g.kind) {
      case GateKind::Input: return apply(g.var, x);
      case GateKind::Const: {
        RowVec r(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) r[i] = f.mul(g.value, x[i]);
        return r;
      }
      case GateKind::Plus: {
        if (g.args.size() == 1 && g.args[0].scale == 1) return rec(g.args[0].gate, x);
        RowVec acc(x.size(), 0);
        for (const auto& a : g.args) {
          RowVec t = rec(a.gate, x);
          for (std::size_t i = 0; i < x.size(); ++i)
            if (t[i]) acc[i] = f.fma(acc[i], a.scale, t[i]);
        }
        return acc;
      }
      case GateKind::Times: return rec(g.args[1].gate, rec(g.args[0].gate, x));
    }
    return x;
  };
  return rec(c.output, v);
}

// Adds fan-in-1 plus gates so the bottom and top layers are plus layers.
inline Circuit normalize_layers(const Circuit& c) {
  const auto deg = syntactic_degrees(c);
  for (const Gate& g : c.gates)
    if (g.kind == GateKind::Plus) {
      std::set<int> ds;
      for (const auto& a : g.args) ds.insert(deg[static_cast<std::size_t>(a.gate)]);
      if (ds.size() > 1) throw Error(Errc::NotHomogeneous, "gate " + std::to_string(g.id) + " is not homogeneous");
    }

  bool bottom_ok = true;
  for (std::size_t i = 0; i < c.gates.size(); ++i) {
    const Gate& g = c.gates[i];
    for (const auto& a : g.args) {
      if (c.gates[static_cast<std::size_t>(a.gate)].kind != GateKind::Input) continue;
      auto it = c.layer.find(static_cast<int>(i));
      if (g.kind != GateKind::Plus || it == c.layer.end() || it->second != 1) bottom_ok = false;
    }
  }

  Circuit r(c.field, c.vars);
  r.degrees = c.degrees;
  const int shift = bottom_ok ? 0 : 1;
  std::vector<int> remap(c.gates.size(), -1), wrapper(c.gates.size(), -1);
  auto ref = [&](int src) {
    std::size_t u = static_cast<std::size_t>(src);
    if (bottom_ok || c.gates[u].kind != GateKind::Input) return remap[u];
    if (wrapper[u] < 0) wrapper[u] = r.add_plus({{remap[u], 1}}, 1);
    return wrapper[u];
  };
  for (std::size_t i = 0; i < c.gates.size(); ++i) {
    Gate g = c.gates[i];
    for (auto& a : g.args) a.gate = ref(a.gate);
    g.id = static_cast<int>(r.gates.size());
    r.gates.push_back(g);
    remap[i] = g.id;
    if (auto it = c.layer.find(static_cast<int>(i)); it != c.layer.end()) r.layer[g.id] = it->second + shift;
  }
  r.output = ref(c.output);
  if (r.gates[static_cast<std::size_t>(r.output)].kind != GateKind::Plus) r.output = r.add_plus({{r.output, 1}}, r.plus_depth() + 1);
  return r;
}

inline Circuit build_power_circuit(int n, int k, Field f = Field()) {
  Circuit c(f, VarSet::numbered("x", n));
  std::vector<Arg> lin;
  for (int i = 0; i < n; ++i) lin.push_back({c.add_input(i), 1});
  int g = c.add_plus(lin, 1);
  for (int i = 0; i < k; ++i) g = c.add_times(g, g);
  c.output = c.add_plus({{g, 1}}, 2);
  c.degrees = {1 << k};
  return c;
}

struct CircuitProfile {
  int depth = 3;
  int size_budget = 0;  // 0 = unbounded
  int n = 2;
  std::vector<int> degrees;  // one product length per transition between plus layers
  bool zero_planted = false;
  int max_fanin = 2;  // plus fan-in above the bottom layer (before planting)
  int max_linear_terms = 0;  // 0 = n
  int pool = 2;  // plus gates available per intermediate layer
};

namespace detail {

// product of `base` with itself d times, by square-and-multiply
inline int power_chain(Circuit& c, int base, int d) {
  int acc = base;
  int top = 31 - __builtin_clz(static_cast<unsigned>(d));
  for (int b = top - 1; b >= 0; --b) {
    acc = c.add_times(acc, acc);
    if ((d >> b) & 1) acc = c.add_times(acc, base);
  }
  return acc;
}

inline int product_term(Circuit& c, const std::vector<int>& pool, int d, bool compact, SeededRng& rng) {
  if (compact || d > 6 || rng.range(0, 3) == 0) return power_chain(c, pool[rng.below(pool.size())], d);
  int acc = pool[rng.below(pool.size())];
  for (int j = 1; j < d; ++j) acc = c.add_times(acc, pool[rng.below(pool.size())]);
  return acc;
}

inline int clone_subdag(const Circuit& src, Circuit& dst, int g, std::map<int, int>& memo) {
  if (auto it = memo.find(g); it != memo.end()) return it->second;
  const Gate gate = src.gates[static_cast<std::size_t>(g)];
  int r;
  if (gate.kind == GateKind::Input) {
    r = g;
  } else if (gate.kind == GateKind::Const) {
    r = dst.add_const(gate.value);
  } else if (gate.kind == GateKind::Times) {
    int l = clone_subdag(src, dst, gate.args[0].gate, memo);
    int rr = clone_subdag(src, dst, gate.args[1].gate, memo);
    r = dst.add_times(l, rr);
  } else {
    std::vector<Arg> args;
    for (const auto& a : gate.args) args.push_back({clone_subdag(src, dst, a.gate, memo), a.scale});
    r = dst.add_plus(args, src.layer.at(g));
  }
  memo[g] = r;
  return r;
}

}  // namespace detail

inline Circuit random_circuit(const CircuitProfile& prof, SeededRng& rng, Field f = Field()) {
  const int layers = (prof.depth + 1) / 2;
  if (prof.depth < 3 || prof.depth % 2 == 0) throw Error(Errc::InfeasibleProfile, "depth must be odd and at least 3");
  if (static_cast<int>(prof.degrees.size()) != layers - 1)
    throw Error(Errc::InfeasibleProfile, "need " + std::to_string(layers - 1) + " layer degrees");
  if (prof.n < 1 || prof.max_fanin < 1) throw Error(Errc::InfeasibleProfile, "n and fan-in must be positive");
  for (int d : prof.degrees)
    if (d < 1) throw Error(Errc::InfeasibleProfile, "layer degrees must be positive");

  for (int attempt = 0; attempt < 200; ++attempt) {
    const bool compact = attempt >= 20;
    const int fanin = compact ? 1 : prof.max_fanin;
    Circuit c(f, VarSet::numbered("x", prof.n));
    std::vector<int> input(static_cast<std::size_t>(prof.n), -1);
    auto in = [&](int v) {
      if (input[static_cast<std::size_t>(v)] < 0) input[static_cast<std::size_t>(v)] = c.add_input(v);
      return input[static_cast<std::size_t>(v)];
    };
    const int max_lin = prof.max_linear_terms > 0 ? std::min(prof.max_linear_terms, prof.n) : prof.n;
    std::vector<int> pool;
    int pool_size = compact ? 1 : rng.range(1, std::max(1, prof.pool));
    for (int k = 0; k < pool_size; ++k) {
      std::vector<int> vs(static_cast<std::size_t>(prof.n));
      for (int i = 0; i < prof.n; ++i) vs[static_cast<std::size_t>(i)] = i;
      for (int i = prof.n - 1; i > 0; --i) std::swap(vs[static_cast<std::size_t>(i)], vs[rng.below(static_cast<u64>(i + 1))]);
      int terms = compact ? 1 : rng.range(1, max_lin);
      std::vector<Arg> args;
      for (int t = 0; t < terms; ++t) args.push_back({in(vs[static_cast<std::size_t>(t)]), sample_nonzero(f, rng)});
      pool.push_back(c.add_plus(args, 1));
    }
    std::vector<Arg> top;
    for (int l = 1; l < layers; ++l) {
      const int d = prof.degrees[static_cast<std::size_t>(l - 1)];
      const bool last = l == layers - 1;
      int count = last ? 1 : (compact ? 1 : rng.range(1, std::max(1, prof.pool)));
      std::vector<int> next;
      for (int k = 0; k < count; ++k) {
        int t = rng.range(1, fanin);
        std::vector<Arg> args;
        for (int j = 0; j < t; ++j) args.push_back({detail::product_term(c, pool, d, compact, rng), sample_nonzero(f, rng)});
        if (last) top = args;
        else next.push_back(c.add_plus(args, l + 1));
      }
      if (!last) pool = next;
    }
    if (prof.zero_planted) {
      // a cloned negative copy, or one sharing the same gates when the clone would not fit
      std::set<int> above;
      std::function<void(int)> mark = [&](int g) {
        if (c.gates[static_cast<std::size_t>(g)].kind == GateKind::Input || !above.insert(g).second) return;
        for (const auto& a : c.gates[static_cast<std::size_t>(g)].args) mark(a.gate);
      };
      for (const auto& a : top) mark(a.gate);
      const bool share = prof.size_budget > 0 && static_cast<int>(c.gates.size() + above.size()) + 1 > prof.size_budget;
      std::map<int, int> memo;
      std::vector<Arg> dup;
      for (const auto& a : top) dup.push_back({share ? a.gate : detail::clone_subdag(c, c, a.gate, memo), f.neg(a.scale)});
      top.insert(top.end(), dup.begin(), dup.end());
    }
    c.output = c.add_plus(top, layers);
    c.degrees = prof.degrees;
    if (prof.size_budget > 0 && static_cast<int>(c.gates.size()) > prof.size_budget) continue;
    return c;
  }
  throw Error(Errc::InfeasibleProfile, "no circuit fits the size budget " + std::to_string(prof.size_budget));
}

}  // namespace ncpit
