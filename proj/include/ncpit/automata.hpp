#pragma once

#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ncpit/matring.hpp"

namespace ncpit {

// Named scalars (y, z, zeta, chi ...) are resolved through a source at realization time.
using ScalarSource = std::function<u64(const std::string&)>;

inline ScalarSource unit_scalars() {
  return [](const std::string&) -> u64 { return 1; };
}

// Independent uniform value per label, reproducible from the seed alone.
inline ScalarSource seeded_scalars(Field f, u64 seed) {
  return [f, seed](const std::string& label) -> u64 {
    SeededRng r = SeededRng(seed).split(label);
    return sample_uniform(f, r);
  };
}

struct Term {
  std::vector<std::string> coef;  // product of named scalars
  int out = -1;                   // output variable, or -1 for a pure scalar
};

struct Transition {
  int from = 0, to = 0;
  Term term;
};

struct AutomatonSpec {
  std::string name;
  int states = 0;
  int start = 0;
  std::vector<int> accepts;
  VarSet in, out;
  std::vector<std::vector<Transition>> trans;  // per input variable

  void add(int x, int from, int to, Term t) { trans[static_cast<std::size_t>(x)].push_back({from, to, std::move(t)}); }
};

inline AutomatonSpec make_spec(std::string name, int states, const VarSet& in, const VarSet& out) {
  AutomatonSpec a{std::move(name), states, 0, {}, in, out, {}};
  a.trans.resize(static_cast<std::size_t>(in.size()));
  return a;
}

inline u64 term_scalar(const Field& f, const Term& t, const ScalarSource& src) {
  u64 v = 1;
  for (const auto& l : t.coef) v = f.mul(v, f.reduce(src(l)));
  return v;
}

inline SubstMatrixFamily realize(const AutomatonSpec& a, Field f, const ScalarSource& src = unit_scalars()) {
  SubstMatrixFamily fam{a.name, f, a.in, a.out, a.states, a.start, a.accepts, {}};
  for (const auto& ts : a.trans) {
    Matrix m(a.states);
    for (const auto& t : ts) {
      u64 c = term_scalar(f, t.term, src);
      m.add(f, t.from, t.to, t.term.out >= 0 ? AffineForm::var(t.term.out, c) : AffineForm::scalar(c));
    }
    fam.mats.push_back(std::move(m));
  }
  return fam;
}

inline std::string term_to_string(const Term& t, const VarSet& out) {
  std::string s;
  for (const auto& l : t.coef) s += (s.empty() ? "" : "*") + l;
  if (t.out >= 0) s += (s.empty() ? "" : "*") + out.name(t.out);
  return s.empty() ? "1" : s;
}

inline std::string dump_automaton(const AutomatonSpec& a) {
  std::ostringstream os;
  os << "name " << a.name << "\ndim " << a.states << "\nstart " << a.start << "\naccepts";
  for (int q : a.accepts) os << " " << q;
  os << "\n";
  for (int x = 0; x < a.in.size(); ++x) {
    auto ts = a.trans[static_cast<std::size_t>(x)];
    std::stable_sort(ts.begin(), ts.end(), [](const Transition& l, const Transition& r) { return std::tie(l.from, l.to) < std::tie(r.from, r.to); });
    os << "matrix " << a.in.name(x) << "\n";
    for (const auto& t : ts) os << t.from << " " << t.to << " " << term_to_string(t.term, a.out) << "\n";
  }
  return os.str();
}

// Letters of an ordered power-sum alphabet carry a grade 1..arity. A pattern is a
// maximal run of non-decreasing grades starting at grade 1; `runs` allows repeated
// grades, so a grade-1 letter directly after a grade-1 letter continues the pattern.
struct Alphabet {
  VarSet vars;
  std::vector<int> grade;
  int arity = 1;
  bool runs = true;
  std::set<int> terminal;

  int grade_of(int x) const { return grade.at(static_cast<std::size_t>(x)); }
  bool is_new(int x, bool phase_r) const { return grade_of(x) == 1 && (!phase_r || !runs); }
  bool phase_after(int x) const { return grade_of(x) == 1 && runs; }
  bool is_terminal(int x) const { return terminal.count(grade_of(x)) > 0; }
};

inline Alphabet xi_alphabet(int s) {
  Alphabet a{VarSet::numbered("xi", s), {}, s, true, {}};
  for (int j = 1; j <= s; ++j) a.grade.push_back(j);
  a.terminal = {std::max(1, s - 1), s};
  return a;
}

inline VarSet z_vars(int c, const VarSet& x) {
  std::vector<std::string> v;
  for (int l = 1; l <= c; ++l)
    for (int i = 0; i < x.size(); ++i) v.push_back("z" + std::to_string(l) + "_" + x.name(i));
  return VarSet(std::move(v));
}

inline Alphabet z_alphabet(int c, const VarSet& x) {
  Alphabet a{z_vars(c, x), {}, c, c >= 2, {c}};
  for (int l = 1; l <= c; ++l)
    for (int i = 0; i < x.size(); ++i) a.grade.push_back(l);
  return a;
}

// Output letters of the commutative transform: one per (position a, input letter of matching grade).
inline Alphabet w_alphabet(const Alphabet& in, int s) {
  const int k = in.arity;
  Alphabet a;
  std::vector<std::string> names;
  for (int i = 1; i <= s; ++i)
    for (int g = 1; g <= k; ++g)
      for (int v = 0; v < in.vars.size(); ++v)
        if (in.grade_of(v) == g) {
          int pos = (i - 1) * k + g;
          names.push_back("w" + std::to_string(pos) + "_" + std::to_string(v + 1));
          a.grade.push_back(pos);
        }
  a.vars = VarSet(std::move(names));
  a.arity = s * k;
  a.runs = true;
  for (int i = 1; i <= s; ++i)
    for (int t : in.terminal) a.terminal.insert((i - 1) * k + t);
  return a;
}

// Split a word into patterns by the alphabet's boundary rule.
inline std::vector<Word> split_patterns(const Alphabet& a, const Word& w) {
  std::vector<Word> out;
  bool phase_r = false;
  for (int x : w) {
    if (out.empty() || a.is_new(x, phase_r)) out.emplace_back();
    out.back().push_back(x);
    phase_r = a.phase_after(x);
  }
  return out;
}

// Step-1 automaton: state k loops on z_x xi_{k+1}, moves forward on y_{k+1,x} xi_{k+1};
// q_{s-2} and q_{s-1} return to q0. One-pass drops the returns.
inline AutomatonSpec spec_step1(int s, const VarSet& x, bool one_pass = false) {
  if (s < 2) throw Error(Errc::InfeasibleProfile, "step1 needs s >= 2");
  AutomatonSpec a = make_spec(one_pass ? "step1-one-pass" : "step1", s, x, VarSet::numbered("xi", s));
  for (int v = 0; v < x.size(); ++v) {
    const std::string z = "z_" + x.name(v);
    auto y = [&](int k) { return "y" + std::to_string(k) + "_" + x.name(v); };
    for (int k = 0; k < s; ++k) {
      a.add(v, k, k, {{z}, k});
      if (k + 1 < s) a.add(v, k, k + 1, {{y(k + 1)}, k});
    }
    if (!one_pass) {
      if (s > 2) a.add(v, s - 2, 0, {{y(s - 1)}, s - 2});
      a.add(v, s - 1, 0, {{z}, s - 1});
    }
  }
  a.accepts = {s - 1};
  return a;
}

// Cyclic automaton of length c: x at position l maps to z_{l,x}.
inline AutomatonSpec spec_small_degree(int c, const VarSet& x) {
  if (c < 1) throw Error(Errc::InfeasibleProfile, "small-degree automaton needs c >= 1");
  AutomatonSpec a = make_spec("small-degree", c, x, z_vars(c, x));
  for (int v = 0; v < x.size(); ++v)
    for (int l = 1; l <= c; ++l) a.add(v, l - 1, l % c, {{}, (l - 1) * x.size() + v});
  a.accepts = {0};
  return a;
}

// Product sparsification. State 0/1 = no non-commutative factor yet (phase P/R);
// group k (1..s-1) holds N_k^R, C_k^R, N_k^P, C_k^P: inside a non-commutative
// factor (N) or a commutative one (C) after k non-commutative factors.
inline AutomatonSpec spec_sparsify(int s, const Alphabet& A) {
  if (s < 2) throw Error(Errc::InfeasibleProfile, "sparsify needs s >= 2");
  const int dim = 4 * s - 2;
  AutomatonSpec a = make_spec("sparsify", dim, A.vars, A.vars);
  auto state = [](bool nc, int k, bool r) {
    if (k == 0) return r ? 1 : 0;
    return 2 + 4 * (k - 1) + (r ? 0 : 2) + (nc ? 0 : 1);
  };
  auto zeta = [&](int v) { return "zeta_" + A.vars.name(v); };
  auto chi = [](int k) { return "chi" + std::to_string(k); };
  for (int v = 0; v < A.vars.size(); ++v) {
    for (int from = 0; from < dim; ++from) {
      bool nc, r;
      int k;
      if (from < 2) {
        nc = false, k = 0, r = from == 1;
      } else {
        int o = (from - 2) % 4;
        k = (from - 2) / 4 + 1, r = o < 2, nc = o % 2 == 0;
      }
      const bool r2 = A.phase_after(v);
      if (A.is_new(v, r)) {
        if (k + 1 <= s - 1) a.add(v, from, state(true, k + 1, r2), {{}, v});
        a.add(v, from, state(false, k, r2), {{zeta(v), chi(k + 1)}, -1});
      } else if (nc) {
        a.add(v, from, state(true, k, r2), {{}, v});
      } else {
        a.add(v, from, state(false, k, r2), {{zeta(v)}, -1});
      }
    }
  }
  // every group accepts, one entry per count of non-commutative factors
  const bool r_ok = A.terminal.count(1) > 0;
  for (int k = 0; k <= s - 1; ++k)
    for (bool r : {false, true}) {
      if (r && !r_ok) continue;
      if (k > 0) a.accepts.push_back(state(true, k, r));
      a.accepts.push_back(state(false, k, r));
    }
  std::sort(a.accepts.begin(), a.accepts.end());
  return a;
}

// Commutative transform: state (block i, grade g) emits w_{(i-1)k+g', v}; a new
// pattern moves to the next block.
inline AutomatonSpec spec_comtrans(int s, const Alphabet& A) {
  const int k = A.arity;
  const Alphabet W = w_alphabet(A, s);
  const int dim = s * k + (A.runs ? 0 : 1);
  AutomatonSpec a = make_spec("comtrans", dim, A.vars, W.vars);
  auto st = [&](int i, int g) { return (i - 1) * k + (g - 1); };
  auto wvar = [&](int pos, int v) { return W.vars.index("w" + std::to_string(pos) + "_" + std::to_string(v + 1)); };
  for (int v = 0; v < A.vars.size(); ++v) {
    const int g2 = A.grade_of(v);
    for (int i = 1; i <= s; ++i)
      for (int g = 1; g <= k; ++g) {
        const bool phase_r = g == 1 && A.runs;
        if (A.is_new(v, phase_r)) {
          if (i + 1 <= s) a.add(v, st(i, g), st(i + 1, 1), {{}, wvar(i * k + 1, v)});
        } else if (g2 > g || (g2 == g && A.runs)) {
          a.add(v, st(i, g), st(i, g2), {{}, wvar((i - 1) * k + g2, v)});
        }
      }
    if (!A.runs && g2 == 1) a.add(v, s * k, st(1, 1), {{}, wvar(1, v)});
  }
  a.start = A.runs ? st(1, 1) : s * k;
  for (int i = 1; i <= s; ++i)
    for (int t : A.terminal) a.accepts.push_back(st(i, t));
  std::sort(a.accepts.begin(), a.accepts.end());
  return a;
}

inline std::vector<int> counter_accepts(int lambda, const Alphabet& A) {
  std::vector<int> acc{2 * lambda};
  if (A.terminal.count(1)) acc.push_back(2 * lambda + 1);
  return acc;
}

// Counts patterns mod p; identity substitution.
inline AutomatonSpec spec_pattern_counter(int p, int lambda, const Alphabet& A) {
  if (!is_prime_u64(static_cast<u64>(p))) throw Error(Errc::NotPrime, std::to_string(p) + " is not prime");
  AutomatonSpec a = make_spec("pattern-counter", 2 * p, A.vars, A.vars);
  for (int v = 0; v < A.vars.size(); ++v)
    for (int c = 0; c < p; ++c)
      for (int r = 0; r < 2; ++r) {
        int c2 = A.is_new(v, r == 1) ? (c + 1) % p : c;
        a.add(v, 2 * c + r, 2 * c2 + (A.phase_after(v) ? 1 : 0), {{}, v});
      }
  a.accepts = counter_accepts(lambda, A);
  return a;
}

// Guesses one pattern and tracks its length mod p; q_f1 when the guessed pattern
// (length = lambda) is followed by another, q_f2 when it is the last one.
inline AutomatonSpec spec_remainder(int p, int lambda, const Alphabet& A) {
  if (!is_prime_u64(static_cast<u64>(p))) throw Error(Errc::NotPrime, std::to_string(p) + " is not prime");
  const int f1 = 2 + 2 * p, f2 = 3 + 2 * p;
  AutomatonSpec a = make_spec("remainder", 2 * p + 4, A.vars, A.vars);
  auto tr = [](int r, bool ph) { return 2 + 2 * r + (ph ? 1 : 0); };
  for (int v = 0; v < A.vars.size(); ++v) {
    const bool r2 = A.phase_after(v);
    const bool term = A.is_terminal(v);
    for (int ph = 0; ph < 2; ++ph) {
      if (A.is_new(v, ph == 1)) {
        a.add(v, ph, r2 ? 1 : 0, {{}, v});
        a.add(v, ph, tr(1 % p, r2), {{}, v});
        if (term && 1 % p == lambda) a.add(v, ph, f2, {{}, v});
      } else {
        a.add(v, ph, r2 ? 1 : 0, {{}, v});
      }
      for (int r = 0; r < p; ++r) {
        if (A.is_new(v, ph == 1)) {
          if (r == lambda) a.add(v, tr(r, ph == 1), f1, {{}, v});
        } else {
          a.add(v, tr(r, ph == 1), tr((r + 1) % p, r2), {{}, v});
          if (term && (r + 1) % p == lambda) a.add(v, tr(r, ph == 1), f2, {{}, v});
        }
      }
    }
    a.add(v, f1, f1, {{}, v});
  }
  a.accepts = {f1, f2};
  return a;
}

// All residues at once: q_f1^r and q_f2^r for every r, read per lambda through remainder_sweep_accepts.
inline AutomatonSpec spec_remainder_sweep(int p, const Alphabet& A) {
  if (!is_prime_u64(static_cast<u64>(p))) throw Error(Errc::NotPrime, std::to_string(p) + " is not prime");
  AutomatonSpec a = make_spec("remainder-sweep", 4 * p + 2, A.vars, A.vars);
  auto tr = [](int r, bool ph) { return 2 + 2 * r + (ph ? 1 : 0); };
  auto f1 = [p](int r) { return 2 + 2 * p + r; };
  auto f2 = [p](int r) { return 2 + 3 * p + r; };
  for (int v = 0; v < A.vars.size(); ++v) {
    const bool r2 = A.phase_after(v);
    const bool term = A.is_terminal(v);
    for (int ph = 0; ph < 2; ++ph) {
      a.add(v, ph, r2 ? 1 : 0, {{}, v});
      if (A.is_new(v, ph == 1)) {
        a.add(v, ph, tr(1 % p, r2), {{}, v});
        if (term) a.add(v, ph, f2(1 % p), {{}, v});
      }
      for (int r = 0; r < p; ++r) {
        if (A.is_new(v, ph == 1)) {
          a.add(v, tr(r, ph == 1), f1(r), {{}, v});
        } else {
          a.add(v, tr(r, ph == 1), tr((r + 1) % p, r2), {{}, v});
          if (term) a.add(v, tr(r, ph == 1), f2((r + 1) % p), {{}, v});
        }
      }
    }
    for (int r = 0; r < p; ++r) a.add(v, f1(r), f1(r), {{}, v});
  }
  a.accepts = {f1(0), f2(0)};
  return a;
}

inline std::vector<int> remainder_sweep_accepts(int p, int lambda) { return {2 + 2 * p + lambda, 2 + 3 * p + lambda}; }

// Convenience wrappers returning realized families
inline SubstMatrixFamily build_step1(int s, const VarSet& x, Field f, const ScalarSource& yz) { return realize(spec_step1(s, x), f, yz); }
inline SubstMatrixFamily build_small_degree(int c, const VarSet& x, Field f) { return realize(spec_small_degree(c, x), f); }
inline SubstMatrixFamily build_sparsify(int s, const Alphabet& A, Field f, const ScalarSource& zc) { return realize(spec_sparsify(s, A), f, zc); }
inline SubstMatrixFamily build_commutative_transform(int s, const Alphabet& A, Field f) { return realize(spec_comtrans(s, A), f); }
inline SubstMatrixFamily build_pattern_counter(int p, int lambda, const Alphabet& A, Field f) { return realize(spec_pattern_counter(p, lambda, A), f); }
inline SubstMatrixFamily build_remainder_nfa(int p, int lambda, const Alphabet& A, Field f) { return realize(spec_remainder(p, lambda, A), f); }

inline NcPolynomial run_on_word(const SubstMatrixFamily& fam, const Word& w) { return accept_sum(fam, family_row_word(fam, w)); }

struct PathTrace {
  Word word;
  std::vector<int> states;
  Word output;
  u64 coef = 1;
  bool case1 = false;       // boundary-respecting
  bool sums_equal = false;  // every pattern has length D1
};

inline std::vector<PathTrace> enumerate_paths(const AutomatonSpec& a, Field f, const ScalarSource& src, const Word& w,
                                              std::size_t cap = 100000) {
  std::vector<PathTrace> out;
  PathTrace cur;
  cur.word = w;
  cur.states = {a.start};
  std::function<void(std::size_t)> dfs = [&](std::size_t t) {
    if (t == w.size()) {
      if (std::find(a.accepts.begin(), a.accepts.end(), cur.states.back()) != a.accepts.end()) {
        if (out.size() >= cap) throw Error(Errc::PathExplosion, "more than " + std::to_string(cap) + " accepting paths");
        out.push_back(cur);
      }
      return;
    }
    for (const auto& tr : a.trans.at(static_cast<std::size_t>(w[t]))) {
      if (tr.from != cur.states.back()) continue;
      u64 c = term_scalar(f, tr.term, src);
      if (!c) continue;
      const u64 saved = cur.coef;
      cur.coef = f.mul(cur.coef, c);
      cur.states.push_back(tr.to);
      if (tr.term.out >= 0) cur.output.push_back(tr.term.out);
      dfs(t + 1);
      if (tr.term.out >= 0) cur.output.pop_back();
      cur.states.pop_back();
      cur.coef = saved;
    }
  };
  dfs(0);
  return out;
}

// Accepting paths of the Step-1 automaton on w, labelled by whether the returns to q0
// fall exactly on the segment boundaries D1, 2*D1, ...
inline std::vector<PathTrace> classify_paths(int s, const VarSet& x, Field f, const ScalarSource& yz, const Word& w, int D1,
                                             std::size_t cap = 100000) {
  if (D1 < 1 || w.size() % static_cast<std::size_t>(D1) != 0) throw Error(Errc::DimensionMismatch, "word length is not a multiple of D1");
  auto traces = enumerate_paths(spec_step1(s, x), f, yz, w, cap);
  std::vector<std::size_t> boundaries;
  for (std::size_t b = static_cast<std::size_t>(D1); b < w.size(); b += static_cast<std::size_t>(D1)) boundaries.push_back(b);
  for (auto& t : traces) {
    std::vector<std::size_t> returns;
    for (std::size_t i = 1; i < t.states.size(); ++i)
      if (t.states[i] == 0 && t.states[i - 1] != 0) returns.push_back(i);
    t.case1 = returns == boundaries;
    try {
      auto pats = xi_pattern_decompose(t.output, s);
      t.sums_equal = std::all_of(pats.begin(), pats.end(), [&](const XiPattern& p) {
        int sum = 0;
        for (int e : p) sum += e;
        return sum == D1;
      });
    } catch (const Error&) {
      t.sums_equal = false;
    }
  }
  return traces;
}

}  // namespace ncpit
