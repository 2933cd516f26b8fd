#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "ncpit/field.hpp"

using namespace ncpit;

TEST(Field, ConstructsPrimes) {
  EXPECT_EQ(make_prime_field(7).modulus(), 7u);
  EXPECT_EQ(make_prime_field(2305843009213693951ull).modulus(), kMersenne61);
  EXPECT_EQ(Field().modulus(), kMersenne61);
}

TEST(Field, RejectsComposite) {
  try {
    make_prime_field(6);
    FAIL() << "6 accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NotPrime);
  }
  EXPECT_THROW(make_prime_field(1), Error);
  EXPECT_THROW(make_prime_field(561), Error);  // Carmichael
  EXPECT_THROW(make_prime_field(kMersenne61 - 2), Error);
}

TEST(Field, PrimalityAgreesWithTrialDivision) {
  for (u64 n = 0; n < 5000; ++n) {
    bool td = n >= 2;
    for (u64 q = 2; q * q <= n; ++q)
      if (n % q == 0) td = false;
    ASSERT_EQ(is_prime_u64(n), td) << n;
  }
}

TEST(Field, SmallExamples) {
  Field f7(7);
  FieldElement a(f7, 5), b(f7, 4);
  EXPECT_EQ(arithmetic(a, b, FieldOp::Add).value(), 2u);
  EXPECT_EQ(FieldElement(f7, 2).inv().value(), 4u);
  EXPECT_EQ(FieldElement(f7, 3).pow(6).value(), 1u);
  EXPECT_EQ(arithmetic(a, b, FieldOp::Div).value(), f7.mul(5, 2));
  try {
    FieldElement(f7, 3) / FieldElement(f7, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::DivisionByZero);
  }
  EXPECT_EQ(f7.from_int(-1), 6u);
  EXPECT_EQ(f7.from_int(-14), 0u);
}

TEST(Field, MersenneReductionMatchesPlain) {
  Field f;
  SeededRng rng(3);
  for (int i = 0; i < 20000; ++i) {
    u64 a = sample_uniform(f, rng), b = sample_uniform(f, rng);
    ASSERT_EQ(f.mul(a, b), detail::mulmod_plain(a, b, kMersenne61));
  }
  EXPECT_EQ(f.mul(kMersenne61 - 1, kMersenne61 - 1), 1u);
}

TEST(Field, RingAxiomsOnSampledTriples) {
  for (u64 p : {u64{101}, u64{65537}, kMersenne61}) {
    Field f(p);
    SeededRng rng(p);
    for (int i = 0; i < 10000; ++i) {
      u64 a = sample_uniform(f, rng), b = sample_uniform(f, rng), c = sample_uniform(f, rng);
      ASSERT_EQ(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
      ASSERT_EQ(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
      ASSERT_EQ(f.add(a, b), f.add(b, a));
      ASSERT_EQ(f.mul(a, b), f.mul(b, a));
      ASSERT_EQ(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
      ASSERT_EQ(f.add(f.sub(a, b), b), a);
    }
  }
}

TEST(Field, InversesExhaustiveSmallPrimes) {
  for (u64 p = 2; p <= 101; ++p) {
    if (!is_prime_u64(p)) continue;
    Field f(p);
    for (u64 a = 1; a < p; ++a) ASSERT_EQ(f.mul(f.inv(a), a), 1u) << p << " " << a;
  }
}

TEST(Rng, DeterministicAndSeedSensitive) {
  Field f7(7);
  SeededRng a(0), b(0), c(1);
  std::vector<u64> sa, sb, sc;
  for (int i = 0; i < 64; ++i) {
    sa.push_back(sample_uniform(f7, a));
    sb.push_back(sample_uniform(f7, b));
    sc.push_back(sample_uniform(f7, c));
  }
  EXPECT_EQ(sa, sb);
  EXPECT_NE(sa, sc);
  for (u64 v : sa) EXPECT_LT(v, 7u);
}

TEST(Rng, SplitStreamsDiffer) {
  SeededRng root(42);
  SeededRng x = root.split("step1"), y = root.split("sparsify"), x2 = root.split("step1");
  EXPECT_EQ(x.next(), x2.next());
  EXPECT_NE(root.split("step1").next(), y.next());
}

TEST(Rng, UniformFrequenciesWithinFiveSigma) {
  Field f(101);
  SeededRng rng(0);
  const int draws = 10000;
  std::vector<int> count(101);
  for (int i = 0; i < draws; ++i) ++count[sample_uniform(f, rng)];
  double mean = draws / 101.0;
  double sigma = std::sqrt(draws * (1.0 / 101) * (100.0 / 101));
  double chi2 = 0;
  for (int c : count) {
    EXPECT_LT(std::abs(c - mean), 5 * sigma);
    chi2 += (c - mean) * (c - mean) / mean;
  }
  // 100 degrees of freedom; 99.9th percentile is about 149.4
  EXPECT_LT(chi2, 149.4);
}
