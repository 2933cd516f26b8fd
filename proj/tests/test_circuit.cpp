#include <gtest/gtest.h>

#include "ncpit/circuit_io.hpp"

using namespace ncpit;

namespace {

Field F101(101);

// x*y as a depth-3 circuit
Circuit xy_circuit(Field f) {
  Circuit c(f, VarSet({"x", "y"}));
  int x = c.add_input(0), y = c.add_input(1);
  int lx = c.add_plus({{x, 1}}, 1), ly = c.add_plus({{y, 1}}, 1);
  c.output = c.add_plus({{c.add_times(lx, ly), 1}}, 2);
  return c;
}

DenseMatrix mat(int d, std::vector<u64> v) {
  DenseMatrix m(d);
  m.a = std::move(v);
  return m;
}

}  // namespace

TEST(Circuit, PowerCircuitIsValid) {
  Circuit c = build_power_circuit(2, 3, F101);
  EXPECT_TRUE(validate_plus_regular(c).ok());
  EXPECT_EQ(c.depth(), 3);
  NcPolynomial p = expand(c);
  EXPECT_EQ(p.size(), 256u);
  for (const auto& [w, coef] : p.terms()) {
    EXPECT_EQ(coef, 1u);
    EXPECT_EQ(w.size(), 8u);
  }
  EXPECT_EQ(syntactic_degree(c, c.output), 8);
}

TEST(Circuit, PowerCircuitSmallCases) {
  Circuit x = build_power_circuit(1, 0, F101);
  EXPECT_TRUE(validate_plus_regular(x).ok());
  EXPECT_EQ(expand(x).to_string(), "1*x1");
  Circuit sq = build_power_circuit(2, 1, F101);
  EXPECT_EQ(expand(sq), parse_nc_polynomial("x1*x1+x1*x2+x2*x1+x2*x2", F101, sq.vars));
}

TEST(Circuit, SyntacticDegree) {
  Circuit c(F101, VarSet({"x"}));
  int x = c.add_input(0);
  int k = c.add_const(5);
  EXPECT_EQ(syntactic_degree(c, x), 1);
  EXPECT_EQ(syntactic_degree(c, k), 0);
  int t = c.add_times(x, k);
  EXPECT_EQ(syntactic_degree(c, t), 1);
}

TEST(Circuit, ValidationDetectsEachProperty) {
  // 1: inhomogeneous plus
  {
    Circuit c(F101, VarSet({"x", "y"}));
    int x = c.add_input(0), y = c.add_input(1);
    int l = c.add_plus({{x, 1}, {y, 1}}, 1);
    int sq = c.add_times(l, l);
    int cube = c.add_times(sq, l);
    c.output = c.add_plus({{sq, 1}, {cube, 1}}, 2);
    auto r = validate_plus_regular(c);
    EXPECT_TRUE(r.has(1));
  }
  // 2: path between two plus gates of one layer
  {
    Circuit c(F101, VarSet({"x"}));
    int x = c.add_input(0);
    int a = c.add_plus({{x, 1}}, 1);
    int b = c.add_plus({{a, 1}}, 1);
    c.output = c.add_plus({{c.add_times(b, b), 1}}, 2);
    EXPECT_TRUE(validate_plus_regular(c).has(2));
  }
  // 3: same layer, different degrees, each gate itself homogeneous
  {
    Circuit c(F101, VarSet({"x"}));
    int x = c.add_input(0);
    int a = c.add_plus({{x, 1}}, 1);
    int b = c.add_plus({{c.add_times(a, a), 1}}, 2);
    int d = c.add_plus({{c.add_times(c.add_times(a, a), a), 1}}, 2);
    c.output = c.add_plus({{c.add_times(b, d), 1}}, 3);
    EXPECT_TRUE(validate_plus_regular(c).has(3));
  }
  // 4: times output
  {
    Circuit c = xy_circuit(F101);
    c.output = c.gates[static_cast<std::size_t>(c.output)].args[0].gate;
    EXPECT_TRUE(validate_plus_regular(c).has(4));
  }
  // 5: a path skips layer 1
  {
    Circuit c(F101, VarSet({"x", "y"}));
    int x = c.add_input(0), y = c.add_input(1);
    int lx = c.add_plus({{x, 1}}, 1);
    c.output = c.add_plus({{c.add_times(lx, y), 1}}, 2);
    auto r = validate_plus_regular(c);
    EXPECT_TRUE(r.has(5));
    EXPECT_FALSE(r.has(3));
  }
}

TEST(Circuit, EvaluateMatrices) {
  Circuit c = xy_circuit(F101);
  MatrixRing ring{F101, 2};
  DenseMatrix out = evaluate(c, ring, {mat(2, {0, 1, 0, 0}), mat(2, {0, 0, 1, 0})});
  EXPECT_EQ(out, mat(2, {1, 0, 0, 0}));
  EXPECT_TRUE(evaluate(c, ring, {DenseMatrix(2), DenseMatrix(2)}).is_zero());
  try {
    evaluate(c, ring, {DenseMatrix(2), DenseMatrix(3)});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::DimensionMismatch);
  }
}

TEST(Circuit, EvaluatePowerScalar) {
  Circuit c = build_power_circuit(2, 3, F101);
  EXPECT_EQ(evaluate(c, ScalarRing{F101}, {1, 1}), 54u);  // 2^8 mod 101
}

TEST(Circuit, ExpandPlantedZero) {
  Circuit c(F101, VarSet({"x", "y"}));
  int x = c.add_input(0), y = c.add_input(1);
  int l = c.add_plus({{x, 1}, {y, 3}}, 1);
  int l2 = c.add_plus({{x, 1}, {y, 3}}, 1);
  c.output = c.add_plus({{c.add_times(l, c.add_times(l, l)), 1}, {c.add_times(l2, c.add_times(l2, l2)), F101.neg(1)}}, 2);
  EXPECT_TRUE(validate_plus_regular(c).ok());
  EXPECT_TRUE(expand(c).is_zero());
}

TEST(Circuit, ExpandCap) {
  Circuit c = build_power_circuit(3, 4, F101);
  try {
    expand(c, 1000);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::CapExceeded);
  }
}

TEST(Circuit, NormalizeLayers) {
  // times output
  Circuit c = xy_circuit(F101);
  c.output = c.gates[static_cast<std::size_t>(c.output)].args[0].gate;
  c.layer.erase(static_cast<int>(c.gates.size()) - 1);
  c.gates.pop_back();
  Circuit n = normalize_layers(c);
  EXPECT_TRUE(validate_plus_regular(n).ok());
  EXPECT_EQ(expand(n), expand(c));
  EXPECT_EQ(n.gates[static_cast<std::size_t>(n.output)].args.size(), 1u);
  EXPECT_EQ(n.gates.size(), c.gates.size() + 1);

  Circuit p = build_power_circuit(2, 2, F101);
  Circuit p2 = normalize_layers(p);
  EXPECT_EQ(p2.gates.size(), p.gates.size());
  EXPECT_EQ(circuit_to_json(p2), circuit_to_json(p));

  Circuit bare(F101, VarSet({"x"}));
  bare.output = bare.add_input(0);
  Circuit b2 = normalize_layers(bare);
  EXPECT_EQ(b2.gates.size(), 2u);
  EXPECT_TRUE(validate_plus_regular(b2).ok());
  EXPECT_EQ(expand(b2), expand(bare));

  // variables feeding times gates directly get bottom wrappers
  Circuit raw(F101, VarSet({"x", "y"}));
  int x = raw.add_input(0), y = raw.add_input(1);
  raw.output = raw.add_times(x, y);
  Circuit r2 = normalize_layers(raw);
  EXPECT_TRUE(validate_plus_regular(r2).ok());
  EXPECT_EQ(expand(r2), expand(raw));
  EXPECT_LE(r2.gates.size(), raw.gates.size() + 3);
  EXPECT_EQ(circuit_to_json(normalize_layers(r2)), circuit_to_json(r2));

  Circuit bad(F101, VarSet({"x"}));
  int bx = bad.add_input(0);
  bad.output = bad.add_plus({{bx, 1}, {bad.add_times(bx, bx), 1}}, 1);
  try {
    normalize_layers(bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NotHomogeneous);
  }
}

TEST(Circuit, GeneratorContracts) {
  SeededRng rng(7);
  Circuit c3 = random_circuit({3, 8, 2, {4}, false}, rng, F101);
  EXPECT_TRUE(validate_plus_regular(c3).ok());
  EXPECT_LE(c3.gates.size(), 8u);
  EXPECT_EQ(expand(c3).degree() <= 4, true);

  Circuit z = random_circuit({5, 0, 2, {2, 3}, true}, rng, F101);
  EXPECT_TRUE(validate_plus_regular(z).ok());
  EXPECT_TRUE(expand(z).is_zero());

  Circuit c5 = random_circuit({5, 10, 3, {3, 4}, false}, rng, F101);
  EXPECT_TRUE(validate_plus_regular(c5).ok());
  EXPECT_LE(c5.gates.size(), 10u);
  NcPolynomial p = expand(c5);
  for (const auto& t : p.terms()) EXPECT_EQ(t.first.size(), 12u);
  EXPECT_EQ(syntactic_degree(c5, c5.output), 12);

  try {
    random_circuit({4, 0, 2, {2}, false}, rng, F101);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::InfeasibleProfile);
  }
  EXPECT_THROW(random_circuit({5, 4, 2, {3, 3}, true}, rng, F101), Error);
}

TEST(Circuit, GeneratorCorpusProperties) {
  SeededRng rng(99);
  for (int i = 0; i < 150; ++i) {
    int depth = 3 + 2 * rng.range(0, 2);
    std::vector<int> degs;
    for (int l = 0; l < (depth - 1) / 2; ++l) degs.push_back(rng.range(1, depth == 7 ? 2 : 3));
    CircuitProfile prof{depth, 0, rng.range(1, 3), degs, rng.coin()};
    Circuit c = random_circuit(prof, rng, F101);
    auto rep = validate_plus_regular(c);
    ASSERT_TRUE(rep.ok()) << rep.violations[0].message;
    auto deg = syntactic_degrees(c);
    std::map<int, int> seen;
    for (const auto& [g, l] : c.layer) {
      auto [it, fresh] = seen.emplace(l, deg[static_cast<std::size_t>(g)]);
      ASSERT_TRUE(fresh || it->second == deg[static_cast<std::size_t>(g)]);
    }
    NcPolynomial p = expand(c);
    if (prof.zero_planted) {
      ASSERT_TRUE(p.is_zero());
    }
    for (const auto& t : p.terms()) ASSERT_EQ(static_cast<int>(t.first.size()), deg[static_cast<std::size_t>(c.output)]);
    // evaluation homomorphism at scalar points
    for (int k = 0; k < 3; ++k) {
      std::vector<u64> pt;
      for (int v = 0; v < c.vars.size(); ++v) pt.push_back(sample_uniform(F101, rng));
      ASSERT_EQ(evaluate(c, ScalarRing{F101}, pt), p.eval(pt));
    }
    Circuit n = normalize_layers(c);
    ASSERT_EQ(expand(n), p);
    ASSERT_EQ(n.gates.size(), c.gates.size());
  }
}

TEST(Circuit, RowQueryMatchesDense) {
  SeededRng rng(4);
  for (int i = 0; i < 30; ++i) {
    Circuit c = random_circuit({5, 0, 2, {2, 2}, false}, rng, F101);
    int d = 3;
    std::vector<DenseMatrix> ms;
    for (int v = 0; v < c.vars.size(); ++v) {
      DenseMatrix m(d);
      for (auto& e : m.a) e = sample_uniform(F101, rng);
      ms.push_back(m);
    }
    DenseMatrix full = evaluate(c, MatrixRing{F101, d}, ms);
    RowVec e0(static_cast<std::size_t>(d), 0);
    e0[1] = 1;
    RowVec row = evaluate_row(c, e0, [&](int v, const RowVec& x) {
      RowVec r(static_cast<std::size_t>(d), 0);
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) r[static_cast<std::size_t>(b)] = F101.fma(r[static_cast<std::size_t>(b)], x[static_cast<std::size_t>(a)], ms[static_cast<std::size_t>(v)].at(a, b));
      return r;
    });
    for (int b = 0; b < d; ++b) ASSERT_EQ(row[static_cast<std::size_t>(b)], full.at(1, b));
  }
}

TEST(CircuitIo, RoundTrip) {
  SeededRng rng(2);
  for (int i = 0; i < 40; ++i) {
    Circuit c = random_circuit({5, 0, 2, {2, 2}, rng.coin()}, rng, F101);
    std::string s = circuit_to_json(c);
    Circuit back = circuit_from_json(s, F101);
    EXPECT_EQ(circuit_to_json(back), s);
    EXPECT_EQ(expand(back), expand(c));
    EXPECT_TRUE(validate_plus_regular(back).ok());
  }
}

TEST(CircuitIo, RejectsDuplicatesAndCycles) {
  std::string dup =
      "{\"vars\":[\"x\"],\n\"gates\":[\n"
      "{\"id\":0,\"kind\":\"input\",\"var\":\"x\"},\n"
      "{\"id\":0,\"kind\":\"plus\",\"args\":[{\"gate\":0}]}\n"
      "],\n\"output\":0}";
  try {
    circuit_from_json(dup);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("duplicate"), std::string::npos);
  }
  std::string cyc =
      "{\"vars\":[\"x\"],\n\"gates\":[\n"
      "{\"id\":0,\"kind\":\"input\",\"var\":\"x\"},\n"
      "{\"id\":1,\"kind\":\"plus\",\"args\":[{\"gate\":2}]},\n"
      "{\"id\":2,\"kind\":\"times\",\"args\":[{\"gate\":1},{\"gate\":0}]}\n"
      "],\n\"output\":1}";
  try {
    circuit_from_json(cyc);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 4"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("cycle"), std::string::npos);
  }
  try {
    circuit_from_json("{\"vars\":[\"x\"],\n\"gates\":[\n{\"id\":0,,}\n]}");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}
