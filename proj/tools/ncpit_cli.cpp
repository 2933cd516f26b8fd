// ncpit command-line front end.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "ncpit/circuit_io.hpp"
#include "ncpit/pit.hpp"

namespace fs = std::filesystem;
using namespace ncpit;

namespace {

constexpr int kExitViolation = 2;
constexpr int kExitCap = 3;
constexpr double kOracleFallback = 4096;  // unfolded formula size below which auto uses the oracle

struct Common {
  u64 field = kMersenne61;
  u64 seed = 0;
  int trials = 5;
  std::size_t monomial_cap = kDefaultMonomialCap;
  std::size_t path_cap = 100000;
  std::size_t dim_cap = 50'000'000;
  std::vector<int> degrees;
  std::string out;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--field", c.field, "prime modulus")->check(CLI::PositiveNumber);
  app->add_option("--seed", c.seed);
  app->add_option("--trials", c.trials)->check(CLI::PositiveNumber);
  app->add_option("--monomial-cap", c.monomial_cap);
  app->add_option("--path-cap", c.path_cap);
  app->add_option("--dim-cap", c.dim_cap);
  app->add_option("--degrees", c.degrees, "layer degree hints D1,D2,...")->delimiter(',');
  app->add_option("--out", c.out, "output file (default stdout)");
}

void emit(const Common& c, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream os(c.out);
  if (!os) throw Error(Errc::ParseError, "cannot write " + c.out);
  os << text;
}

PitConfig pit_config(const Common& c) {
  PitConfig cfg;
  cfg.seed = c.seed;
  cfg.trials = c.trials;
  cfg.dim_cap = c.dim_cap;
  cfg.monomial_cap = c.monomial_cap;
  return cfg;
}

Circuit load_checked(const std::string& path, const Common& c) {
  Circuit circ = load_circuit(path, Field(c.field));
  if (!c.degrees.empty()) circ.degrees = c.degrees;
  return circ;
}

PitReport run_strategy(const Circuit& c, const std::string& strategy, const Common& opt) {
  const PitConfig cfg = pit_config(opt);
  BlackBox bb = make_blackbox(c);
  if (strategy == "oracle") return pit_oracle(c, opt.monomial_cap);
  if (strategy == "depth3") return pit_depth3(bb, cfg);
  if (strategy == "depth5") return pit_depth5(bb, cfg);
  if (strategy == "general") return pit_general(bb, cfg);
  if (strategy == "al") return al_baseline(bb, syntactic_degree(c, c.output), cfg);
  // auto
  if (formula_size(c) <= kOracleFallback) {
    try {
      return pit_oracle(c, opt.monomial_cap);
    } catch (const Error& e) {
      if (e.code() != Errc::CapExceeded) throw;
    }
  }
  return pit_general(bb, cfg);
}

std::string violations_text(const ValidationReport& rep) {
  std::string s;
  for (const auto& v : rep.violations) s += v.message + "\n";
  return s;
}

int cmd_run(const std::string& path, const std::string& strategy, const Common& opt) {
  Circuit c = load_checked(path, opt);
  ValidationReport rep = validate_plus_regular(c);
  if (!rep.ok()) {
    std::cerr << violations_text(rep);
    return kExitViolation;
  }
  emit(opt, report_to_json(run_strategy(c, strategy, opt)).dump(2) + "\n");
  return 0;
}

struct GenOptions {
  int depth = 5;
  int count = 10;
  int n = 2;
  int fanin = 2;
  int max_linear = 0;
  double zero_fraction = 0.5;
  std::string dir = "corpus";
};

int cmd_gen(const GenOptions& g, const Common& opt) {
  fs::create_directories(g.dir);
  const Field f(opt.field);
  SeededRng root(opt.seed);
  nlohmann::json manifest = nlohmann::json::array();
  const int zeros = static_cast<int>(g.zero_fraction * g.count + 0.5);
  for (int i = 0; i < g.count; ++i) {
    SeededRng rng = root.split(static_cast<u64>(i));
    CircuitProfile p;
    p.depth = g.depth;
    p.n = g.n;
    p.max_fanin = g.fanin;
    p.max_linear_terms = g.max_linear;
    p.zero_planted = i < zeros;
    if (!opt.degrees.empty()) {
      p.degrees = opt.degrees;
    } else {
      for (int l = 0; l < (g.depth - 1) / 2; ++l) p.degrees.push_back(rng.range(1, 3));
    }
    Circuit c = random_circuit(p, rng, f);
    char name[32];
    std::snprintf(name, sizeof name, "c%04d.json", i);
    std::ofstream(fs::path(g.dir) / name) << circuit_to_json(c);
    std::string truth = p.zero_planted ? "ZERO" : "unknown";
    if (!p.zero_planted) {
      try {
        truth = expand(c, opt.monomial_cap).is_zero() ? "ZERO" : "NONZERO";
      } catch (const Error& e) {
        if (e.code() != Errc::CapExceeded) throw;
      }
    }
    manifest.push_back({{"file", name}, {"planted_zero", p.zero_planted}, {"truth", truth}, {"depth", g.depth}, {"degrees", p.degrees}});
  }
  std::ofstream(fs::path(g.dir) / "manifest.json") << manifest.dump(2) << "\n";
  std::cout << g.count << " circuits written to " << g.dir << "\n";
  return 0;
}

struct DumpOptions {
  std::string kind;
  int s = 3, c = 2, p = 2, lambda = 0, n = 1;
  std::string alphabet = "xi";
};

AutomatonSpec dump_spec(const DumpOptions& d) {
  const VarSet x = VarSet::numbered("x", d.n);
  auto alpha = [&]() { return d.alphabet == "z" ? z_alphabet(d.c, x) : xi_alphabet(d.s); };
  if (d.kind == "step1") return spec_step1(d.s, x);
  if (d.kind == "step1-one-pass") return spec_step1(d.s, x, true);
  if (d.kind == "small-degree") return spec_small_degree(d.c, x);
  if (d.kind == "sparsify") return spec_sparsify(d.s, alpha());
  if (d.kind == "comtrans") return spec_comtrans(d.s, alpha());
  if (d.kind == "counter") return spec_pattern_counter(d.p, d.lambda, alpha());
  if (d.kind == "remainder") return spec_remainder(d.p, d.lambda, alpha());
  throw Error(Errc::ParseError, "unknown automaton kind " + d.kind);
}

int cmd_bench(const std::vector<std::string>& inputs, const std::vector<std::string>& strategies, const Common& opt) {
  std::vector<std::string> files;
  for (const auto& in : inputs) {
    if (fs::is_directory(in)) {
      for (const auto& e : fs::directory_iterator(in))
        if (e.path().extension() == ".json" && e.path().filename() != "manifest.json") files.push_back(e.path().string());
    } else {
      files.push_back(in);
    }
  }
  std::sort(files.begin(), files.end());
  std::ostringstream csv;
  csv << "instance,strategy,N,verdict,millis\n";
  for (const auto& file : files) {
    Circuit c = load_checked(file, opt);
    for (const auto& st : strategies) {
      auto t0 = std::chrono::steady_clock::now();
      std::string verdict, N = "";
      try {
        PitReport r = run_strategy(c, st, opt);
        verdict = r.verdict;
        N = std::to_string(r.N);
      } catch (const Error& e) {
        verdict = errc_name(e.code());
      }
      const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      csv << fs::path(file).filename().string() << "," << st << "," << N << "," << verdict << "," << static_cast<long long>(ms) << "\n";
    }
  }
  emit(opt, csv.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Black-box identity testing for non-commutative +-regular circuits"};
  app.require_subcommand(1);
  Common opt;

  auto* run = app.add_subcommand("run", "test a circuit file");
  std::string run_path, strategy = "auto";
  run->add_option("circuit", run_path)->required()->check(CLI::ExistingFile);
  run->add_option("--strategy", strategy)->check(CLI::IsMember({"auto", "depth3", "depth5", "general", "oracle", "al"}));
  add_common(run, opt);

  auto* gen = app.add_subcommand("gen", "write a random corpus with a manifest");
  GenOptions g;
  gen->add_option("--depth", g.depth);
  gen->add_option("--count", g.count);
  gen->add_option("--n", g.n);
  gen->add_option("--fanin", g.fanin);
  gen->add_option("--linear-terms", g.max_linear);
  gen->add_option("--zero-fraction", g.zero_fraction)->check(CLI::Range(0.0, 1.0));
  gen->add_option("--dir", g.dir);
  add_common(gen, opt);

  auto* dump = app.add_subcommand("dump-automaton", "print transition triplets");
  DumpOptions d;
  dump->add_option("kind", d.kind)->required()->check(
      CLI::IsMember({"step1", "step1-one-pass", "small-degree", "sparsify", "comtrans", "counter", "remainder"}));
  dump->add_option("--s", d.s);
  dump->add_option("--c", d.c);
  dump->add_option("--p", d.p);
  dump->add_option("--lambda", d.lambda);
  dump->add_option("--n", d.n);
  dump->add_option("--alphabet", d.alphabet)->check(CLI::IsMember({"xi", "z"}));
  add_common(dump, opt);

  auto* ex = app.add_subcommand("expand", "print the canonical polynomial");
  std::string ex_path;
  ex->add_option("circuit", ex_path)->required()->check(CLI::ExistingFile);
  add_common(ex, opt);

  auto* paths = app.add_subcommand("paths", "classify the step-1 accepting paths of a word");
  int ps = 3, pd1 = 2, pn = 1;
  std::vector<int> word;
  paths->add_option("--s", ps);
  paths->add_option("--D1", pd1);
  paths->add_option("--n", pn);
  paths->add_option("--word", word, "0-based variable indices")->delimiter(',')->required();
  add_common(paths, opt);

  auto* bench = app.add_subcommand("bench", "time strategies over files or corpus directories");
  std::vector<std::string> inputs, strategies{"auto"};
  bench->add_option("inputs", inputs)->required();
  bench->add_option("--strategies", strategies)->delimiter(',');
  add_common(bench, opt);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(run_path, strategy, opt);
    if (*gen) return cmd_gen(g, opt);
    if (*dump) {
      emit(opt, dump_automaton(dump_spec(d)));
      return 0;
    }
    if (*ex) {
      emit(opt, expand(load_checked(ex_path, opt), opt.monomial_cap).to_string() + "\n");
      return 0;
    }
    if (*paths) {
      const VarSet x = VarSet::numbered("x", pn);
      const Field f(opt.field);
      std::ostringstream os;
      for (const auto& t : classify_paths(ps, x, f, seeded_scalars(f, opt.seed), word, pd1, opt.path_cap)) {
        os << (t.case1 ? "case1" : "case2") << " states";
        for (int q : t.states) os << " " << q;
        os << " sums_equal " << t.sums_equal << "\n";
      }
      emit(opt, os.str());
      return 0;
    }
    if (*bench) return cmd_bench(inputs, strategies, opt);
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    if (e.code() == Errc::CapExceeded || e.code() == Errc::PathExplosion) return kExitCap;
    return 1;
  }
  return 0;
}
