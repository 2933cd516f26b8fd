#pragma once

#include <chrono>
#include <cmath>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "ncpit/automata.hpp"

namespace ncpit {

// Evaluation-only access to a polynomial: dense matrices, or left row queries v * f(M).
struct BlackBox {
  Field field;
  VarSet vars;
  int depth = 3;
  int size = 1;   // gate count (or declared size)
  int width = 1;  // largest plus fan-in above the bottom layer
  std::vector<int> degrees;
  std::function<DenseMatrix(int dim, const std::vector<DenseMatrix>&)> dense;
  std::function<RowVec(const RowVec&, const RowApply&)> row;
};

inline BlackBox make_blackbox(const Circuit& c) {
  BlackBox bb;
  bb.field = c.field;
  bb.vars = c.vars;
  bb.depth = c.depth();
  bb.size = c.size();
  bb.degrees = c.degrees;
  for (const auto& [g, l] : c.layer)
    if (l >= 2) bb.width = std::max(bb.width, static_cast<int>(c.gates[static_cast<std::size_t>(g)].args.size()));
  bb.dense = [c](int dim, const std::vector<DenseMatrix>& ms) { return evaluate(c, MatrixRing{c.field, dim}, ms); };
  bb.row = [c](const RowVec& v, const RowApply& ap) { return evaluate_row(c, v, ap); };
  return bb;
}

inline u64 distinguishing_prime_bound(u64 n) { return static_cast<u64>(std::ceil(4.4 * std::log2(static_cast<double>(std::max<u64>(n, 2))))); }

// Smallest prime separating k and m; warns when it exceeds ceil(4.4 log2 n).
inline u64 find_distinguishing_prime(u64 k, u64 m, u64 n) {
  if (k == m) throw Error(Errc::InfeasibleProfile, "k and m must differ");
  u64 p = 2;
  while (k % p == m % p)
    do ++p;
    while (!is_prime_u64(p));
  if (p > distinguishing_prime_bound(n)) std::clog << "warning: distinguishing prime " << p << " above bound " << distinguishing_prime_bound(n) << "\n";
  return p;
}

// Primes 2, 3, 5, ... taken while the product of the earlier ones is below dbound.
// Any two distinct values up to dbound then differ modulo one of them.
inline std::vector<int> sweep_primes(double dbound) {
  std::vector<int> ps;
  double prod = 1;
  for (int p = 2; ps.empty() || prod < dbound; ++p) {
    if (!is_prime_u64(static_cast<u64>(p))) continue;
    ps.push_back(p);
    prod *= p;
  }
  return ps;
}

inline std::map<std::string, u64> dlsz_scalarize(const VarSet& vars, Field f, SeededRng& rng) {
  std::map<std::string, u64> r;
  for (const auto& n : vars.names()) r[n] = sample_uniform(f, rng);
  return r;
}

struct PitConfig {
  u64 seed = 0;
  int trials = 5;
  int sweep_trials = 1;
  int s_override = 0;
  std::size_t dim_cap = 50'000'000;
  std::size_t monomial_cap = kDefaultMonomialCap;
  int al_dim_cap = 64;
  bool exhaustive_sweep = false;  // evaluate every cell even after a witness
  bool skip_base = false;         // go straight to the coefficient-modification sweep
};

struct SweepCell {
  std::string branch;
  std::string kind;  // base | counter | remainder
  int p = 0;
  int lambda = -1;
  int trial = 0;
  std::size_t N = 0;
  bool nonzero = false;
};

struct Witness {
  std::string branch, kind;
  int p = 0, lambda = -1, trial = 0;
  std::size_t entry = 0;
  u64 value = 0;
  u64 scalar_seed = 0;
};

struct PitReport {
  std::string verdict = "ZERO";
  bool probabilistic = true;
  std::string strategy;
  std::size_t N = 0;
  int s = 0;
  int trials = 0;
  u64 seed = 0;
  std::vector<int> stage_dims;
  std::vector<SweepCell> sweep;
  std::optional<Witness> witness;
  bool nonzero() const { return verdict == "NONZERO"; }
};

inline nlohmann::json report_to_json(const PitReport& r) {
  nlohmann::json j;
  j["verdict"] = r.verdict;
  j["probabilistic"] = r.probabilistic;
  j["strategy"] = r.strategy;
  j["N"] = r.N;
  j["s"] = r.s;
  j["trials"] = r.trials;
  j["seed"] = r.seed;
  j["stage_dims"] = r.stage_dims;
  nlohmann::json sw = nlohmann::json::array();
  for (const auto& c : r.sweep)
    sw.push_back({{"branch", c.branch}, {"case", c.kind}, {"p", c.p}, {"lambda", c.lambda}, {"trial", c.trial}, {"N", c.N}, {"nonzero", c.nonzero}});
  j["sweep"] = sw;
  if (r.witness) {
    const Witness& w = *r.witness;
    j["witness"] = {{"branch", w.branch}, {"case", w.kind},   {"p", w.p},        {"lambda", w.lambda},
                    {"trial", w.trial},   {"entry", w.entry}, {"value", w.value}, {"scalar_seed", w.scalar_seed}};
  } else {
    j["witness"] = nullptr;
  }
  return j;
}

inline PitReport report_from_json(const nlohmann::json& j) {
  PitReport r;
  r.verdict = j.at("verdict").get<std::string>();
  r.probabilistic = j.at("probabilistic").get<bool>();
  r.strategy = j.at("strategy").get<std::string>();
  r.N = j.at("N").get<std::size_t>();
  r.s = j.at("s").get<int>();
  r.trials = j.at("trials").get<int>();
  r.seed = j.at("seed").get<u64>();
  r.stage_dims = j.at("stage_dims").get<std::vector<int>>();
  for (const auto& c : j.at("sweep"))
    r.sweep.push_back({c.at("branch"), c.at("case"), c.at("p"), c.at("lambda"), c.at("trial"), c.at("N"), c.at("nonzero")});
  if (!j.at("witness").is_null()) {
    const auto& w = j.at("witness");
    r.witness = Witness{w.at("branch"), w.at("case"), w.at("p"), w.at("lambda"), w.at("trial"), w.at("entry"), w.at("value"), w.at("scalar_seed")};
  }
  return r;
}

inline PitReport pit_oracle(const Circuit& c, std::size_t cap = kDefaultMonomialCap) {
  PitReport r;
  r.strategy = "oracle";
  r.probabilistic = false;
  r.verdict = expand(c, cap).is_zero() ? "ZERO" : "NONZERO";
  return r;
}

// Depth 3: one-pass Step-1 automaton with Y, Z and xi all scalarized, s x s matrices.
inline PitReport pit_depth3(const BlackBox& bb, const PitConfig& cfg) {
  if (bb.depth != 3) throw Error(Errc::DepthMismatch, "pit_depth3 needs depth 3, got " + std::to_string(bb.depth));
  const int s = std::max(2, bb.size);
  PitReport r;
  r.strategy = "depth3";
  r.s = s;
  r.N = static_cast<std::size_t>(s);
  r.trials = cfg.trials;
  r.seed = cfg.seed;
  r.stage_dims = {s};
  SeededRng root(cfg.seed);
  const AutomatonSpec spec = spec_step1(s, bb.vars, true);
  for (int t = 0; t < cfg.trials; ++t) {
    const u64 sseed = root.split("depth3").split(static_cast<u64>(t)).next();
    ScalarSource src = seeded_scalars(bb.field, sseed);
    std::vector<u64> xi;
    for (int j = 1; j <= s; ++j) xi.push_back(bb.field.reduce(src("xi" + std::to_string(j))));
    auto fam = scalarize(realize(spec, bb.field, src), xi);
    std::vector<DenseMatrix> ms;
    for (const auto& m : fam.mats) ms.push_back(to_dense(m));
    DenseMatrix out = bb.dense(s, ms);
    // the corner entry first; the rest of row q0 covers degrees below s-1
    std::vector<int> cols{s - 1};
    for (int j = 0; j < s - 1; ++j) cols.push_back(j);
    bool hit = false;
    for (int j : cols)
      if (u64 v = out.at(0, j)) {
        r.verdict = "NONZERO";
        r.witness = Witness{"step1-one-pass", "base", 0, -1, t, static_cast<std::size_t>(j), v, sseed};
        hit = true;
        break;
      }
    r.sweep.push_back({"step1-one-pass", "base", 0, -1, t, r.N, hit});
    if (hit) break;
  }
  return r;
}

// A chain of automata plus the wrap positions, before scalarization.
struct PipelinePlan {
  std::string branch;
  int s = 0;
  std::vector<AutomatonSpec> stages;
  std::vector<int> wraps;
  int cm_stage = -1;  // index of the coefficient-modification stage, if any
  std::string cm_kind;
  int p = 0;
  std::size_t N() const {
    std::size_t n = 1;
    for (const auto& a : stages) n *= static_cast<std::size_t>(a.states);
    return n;
  }
  std::vector<int> dims() const {
    std::vector<int> d;
    for (const auto& a : stages) d.push_back(a.states);
    return d;
  }
};

// Size parameter for depth >= 5: the configured value, else max(3, width).
inline int size_parameter(const BlackBox& bb, const PitConfig& cfg) { return cfg.s_override > 0 ? cfg.s_override : std::max(3, bb.width); }

inline AutomatonSpec cm_spec(const std::string& kind, int p, const Alphabet& A) {
  if (kind == "counter") {
    AutomatonSpec a = spec_pattern_counter(p, 0, A);
    a.accepts.clear();
    for (int q = 0; q < a.states; ++q) a.accepts.push_back(q);
    return a;
  }
  return spec_remainder_sweep(p, A);
}

inline std::vector<int> cm_accepts(const std::string& kind, int p, int lambda, const Alphabet& A) {
  return kind == "counter" ? counter_accepts(lambda, A) : remainder_sweep_accepts(p, lambda);
}

// branch: "high" (Step-1 first stage) or "small-c" (cyclic first stage of length c)
inline PipelinePlan plan_depth5(const VarSet& x, int s, const std::string& branch, const std::string& cm_kind = "", int p = 0) {
  PipelinePlan plan;
  plan.branch = branch;
  plan.s = s;
  Alphabet A;
  if (branch == "high") {
    plan.stages.push_back(spec_step1(s, x));
    A = xi_alphabet(s);
  } else {
    int c = std::stoi(branch.substr(6));
    plan.stages.push_back(spec_small_degree(c, x));
    A = z_alphabet(c, x);
  }
  if (!cm_kind.empty()) {
    plan.cm_stage = static_cast<int>(plan.stages.size());
    plan.cm_kind = cm_kind;
    plan.p = p;
    plan.stages.push_back(cm_spec(cm_kind, p, A));
  }
  plan.stages.push_back(spec_sparsify(s, A));
  plan.stages.push_back(spec_comtrans(s, A));
  return plan;
}

inline Alphabet branch_alphabet(const std::string& branch, int s, const VarSet& x) {
  return branch == "high" ? xi_alphabet(s) : z_alphabet(std::stoi(branch.substr(6)), x);
}

// Depth d >= 7: the depth-(d-2) chain, wrapped back to its start, then sparsify and
// commutative transform over its output alphabet. Only the outermost level gets the
// coefficient-modification stage.
inline PipelinePlan plan_general(const VarSet& x, int s, int d, const std::string& cm_kind = "", int p = 0,
                                 const std::string& branch = "high") {
  if (d < 5 || d % 2 == 0) throw Error(Errc::EvenDepth, "plan_general needs odd depth >= 5");
  if (d == 5) return plan_depth5(x, s, branch, cm_kind, p);
  PipelinePlan plan = plan_general(x, s, d - 2, "", 0, branch);
  Alphabet A = branch_alphabet(branch, s, x);
  for (int level = 5; level < d; level += 2) A = w_alphabet(A, s);
  plan.wraps.push_back(static_cast<int>(plan.stages.size()));
  if (!cm_kind.empty()) {
    plan.cm_stage = static_cast<int>(plan.stages.size());
    plan.cm_kind = cm_kind;
    plan.p = p;
    plan.stages.push_back(cm_spec(cm_kind, p, A));
  }
  plan.stages.push_back(spec_sparsify(s, A));
  plan.stages.push_back(spec_comtrans(s, A));
  return plan;
}

// Alphabet read by the coefficient-modification stage of a plan.
inline Alphabet plan_cm_alphabet(const PipelinePlan& plan, const VarSet& x) {
  Alphabet A = branch_alphabet(plan.branch, plan.s, x);
  for (std::size_t w = 0; w < plan.wraps.size(); ++w) A = w_alphabet(A, plan.s);
  return A;
}

struct RealizedPlan {
  std::vector<SubstMatrixFamily> stages;
  std::vector<u64> final_values;
};

// Scalarize every stage (labels prefixed by stage index) and the last stage's outputs.
inline RealizedPlan realize_families(const PipelinePlan& plan, Field f, u64 scalar_seed) {
  ScalarSource src = seeded_scalars(f, scalar_seed);
  RealizedPlan r;
  for (std::size_t t = 0; t < plan.stages.size(); ++t) {
    const std::string pre = "s" + std::to_string(t) + ":";
    r.stages.push_back(realize(plan.stages[t], f, [&src, pre](const std::string& l) { return src(pre + l); }));
  }
  for (const auto& n : plan.stages.back().out.names()) r.final_values.push_back(f.reduce(src("out:" + n)));
  return r;
}

inline ChainOperator realize_plan(const PipelinePlan& plan, Field f, u64 scalar_seed) {
  RealizedPlan r = realize_families(plan, f, scalar_seed);
  return ChainOperator(r.stages, r.final_values, plan.wraps);
}

// Row `start` of f(C) for the realized plan.
inline RowVec evaluate_plan(const BlackBox& bb, const ChainOperator& op) {
  return bb.row(op.unit_start(), [&op](int x, const RowVec& v) { return op.apply(x, v); });
}

namespace detail {

inline std::optional<std::pair<std::size_t, u64>> first_nonzero(const RowVec& row, const std::vector<std::size_t>& entries) {
  for (std::size_t e : entries)
    if (row[e]) return std::make_pair(e, row[e]);
  return std::nullopt;
}

inline std::vector<std::vector<int>> stage_accepts(const PipelinePlan& plan) {
  std::vector<std::vector<int>> acc;
  for (const auto& a : plan.stages) acc.push_back(a.accepts);
  return acc;
}

// Base trials over every branch, then the coefficient-modification sweep.
inline PitReport run_plans(const BlackBox& bb, const PitConfig& cfg, const std::string& strategy, int s,
                           const std::vector<std::function<PipelinePlan(const std::string&, int)>>& builders,
                           const std::vector<std::string>& branch_names, double dbound) {
  PitReport r;
  r.strategy = strategy;
  r.s = s;
  r.trials = cfg.trials;
  r.seed = cfg.seed;
  SeededRng root(cfg.seed);
  auto check_dim = [&](const PipelinePlan& plan) {
    if (plan.N() > cfg.dim_cap)
      throw Error(Errc::CapExceeded, "composed dimension " + std::to_string(plan.N()) + " exceeds cap " + std::to_string(cfg.dim_cap));
    if (plan.N() > r.N) {
      r.N = plan.N();
      r.stage_dims = plan.dims();
    }
  };
  auto record = [&](SweepCell cell, std::optional<std::pair<std::size_t, u64>> hit, u64 sseed) {
    cell.nonzero = hit.has_value();
    r.sweep.push_back(cell);
    if (hit && !r.witness) {
      r.verdict = "NONZERO";
      r.witness = Witness{cell.branch, cell.kind, cell.p, cell.lambda, cell.trial, hit->first, hit->second, sseed};
    }
  };
  auto done = [&] { return r.witness.has_value() && !cfg.exhaustive_sweep; };

  for (int t = 0; t < (cfg.skip_base ? 0 : cfg.trials) && !done(); ++t)
    for (std::size_t b = 0; b < builders.size() && !done(); ++b) {
      PipelinePlan plan = builders[b]("", 0);
      check_dim(plan);
      const u64 sseed = root.split("base").split(branch_names[b]).split(static_cast<u64>(t)).next();
      ChainOperator op = realize_plan(plan, bb.field, sseed);
      RowVec row = evaluate_plan(bb, op);
      record({branch_names[b], "base", 0, -1, t, plan.N(), false}, first_nonzero(row, op.accepts()), sseed);
    }

  for (int p : sweep_primes(dbound))
    for (const std::string kind : {"counter", "remainder"})
      for (std::size_t b = 0; b < builders.size() && !done(); ++b)
        for (int t = 0; t < cfg.sweep_trials && !done(); ++t) {
          PipelinePlan plan = builders[b](kind, p);
          check_dim(plan);
          const u64 sseed = root.split(kind).split(branch_names[b]).split(static_cast<u64>(p)).split(static_cast<u64>(t)).next();
          ChainOperator op = realize_plan(plan, bb.field, sseed);
          RowVec row = evaluate_plan(bb, op);
          auto acc = stage_accepts(plan);
          const Alphabet A = plan_cm_alphabet(plan, bb.vars);
          for (int lambda = 0; lambda < p; ++lambda) {
            acc[static_cast<std::size_t>(plan.cm_stage)] = cm_accepts(kind, p, lambda, A);
            record({branch_names[b], kind, p, lambda, t, plan.N(), false}, first_nonzero(row, op.flatten(acc)), sseed);
            if (done()) break;
          }
        }
  return r;
}

inline double degree_bound(const BlackBox& bb) {
  if (!bb.degrees.empty()) {
    double d = 1;
    for (int x : bb.degrees) d *= x;
    return d;
  }
  return std::pow(2.0, std::min(bb.size, 1000));
}

}  // namespace detail

// D1 >= s-1 takes the Step-1 branch, smaller D1 the cyclic one; without a hint, all of them.
inline std::vector<std::string> depth_branches(const BlackBox& bb, int s) {
  if (!bb.degrees.empty()) {
    const int D1 = bb.degrees[0];
    return {D1 >= s - 1 ? "high" : "small-" + std::to_string(D1)};
  }
  std::vector<std::string> b{"high"};
  for (int c = 1; c <= s - 2; ++c) b.push_back("small-" + std::to_string(c));
  return b;
}

inline PitReport pit_depth5(const BlackBox& bb, const PitConfig& cfg) {
  if (bb.depth != 5) throw Error(Errc::DepthMismatch, "pit_depth5 needs depth 5, got " + std::to_string(bb.depth));
  const int s = size_parameter(bb, cfg);
  const auto branches = depth_branches(bb, s);
  std::vector<std::function<PipelinePlan(const std::string&, int)>> builders;
  for (const auto& b : branches)
    builders.push_back([&bb, s, b](const std::string& kind, int p) { return plan_depth5(bb.vars, s, b, kind, p); });
  return detail::run_plans(bb, cfg, "depth5", s, builders, branches, detail::degree_bound(bb));
}

inline PitReport pit_general(const BlackBox& bb, const PitConfig& cfg) {
  if (bb.depth % 2 == 0) throw Error(Errc::EvenDepth, "depth " + std::to_string(bb.depth) + " is even");
  if (bb.depth < 3) throw Error(Errc::DepthMismatch, "depth must be at least 3");
  if (bb.depth == 3) return pit_depth3(bb, cfg);
  if (bb.depth == 5) return pit_depth5(bb, cfg);
  const int s = size_parameter(bb, cfg);
  const auto branches = depth_branches(bb, s);
  std::vector<std::function<PipelinePlan(const std::string&, int)>> builders;
  for (const auto& b : branches)
    builders.push_back([&bb, s, b](const std::string& kind, int p) { return plan_general(bb.vars, s, bb.depth, kind, p, b); });
  return detail::run_plans(bb, cfg, "general", s, builders, branches, detail::degree_bound(bb));
}

// Stage-wise bounds of the size accounting at depth d:
// inner composite, coefficient modification, sparsification, commutative transform.
inline std::vector<double> size_formula_stages(int d, int s) {
  const int dp = (d + 1) / 2;
  auto M = [](int n) {
    int sum = 0;
    for (int k = 1; k <= n; k += 2) sum += k;
    return sum - 3;
  };
  return {std::pow(18.0, dp - 3) * std::pow(s, M(d - 2)), 4.4 * std::pow(s, dp - 1) + 3, 4.0 * s - 2, std::pow(s, dp - 1)};
}

inline double size_formula(int d, int s) {
  double p = 1;
  for (double v : size_formula_stages(d, s)) p *= v;
  return p;
}

inline PitReport al_baseline(const BlackBox& bb, int D, const PitConfig& cfg) {
  const int dim = D / 2 + 1;
  if (dim > cfg.al_dim_cap) throw Error(Errc::DegreeTooLarge, "dimension " + std::to_string(dim) + " above cap " + std::to_string(cfg.al_dim_cap));
  PitReport r;
  r.strategy = "al";
  r.s = dim;
  r.N = static_cast<std::size_t>(dim);
  r.trials = cfg.trials;
  r.seed = cfg.seed;
  r.stage_dims = {dim};
  SeededRng root(cfg.seed);
  for (int t = 0; t < cfg.trials; ++t) {
    SeededRng rng = root.split("al").split(static_cast<u64>(t));
    std::vector<DenseMatrix> ms;
    for (int v = 0; v < bb.vars.size(); ++v) {
      DenseMatrix m(dim);
      for (auto& e : m.a) e = sample_uniform(bb.field, rng);
      ms.push_back(m);
    }
    DenseMatrix out = bb.dense(dim, ms);
    bool hit = false;
    for (std::size_t i = 0; i < out.a.size(); ++i)
      if (out.a[i]) {
        r.verdict = "NONZERO";
        r.witness = Witness{"random", "base", 0, -1, t, i, out.a[i], 0};
        hit = true;
        break;
      }
    r.sweep.push_back({"random", "base", 0, -1, t, r.N, hit});
    if (hit) break;
  }
  return r;
}

}  // namespace ncpit
