#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <stdexcept>

#include "oracles.hpp"
#include "sparselut/math/optimizer.hpp"
#include "sparselut/math/quantizer.hpp"
#include "sparselut/math/rng.hpp"

using namespace sparselut;

TEST(Rng, SameSeedSameScalar) {
  Rng a(0);
  Rng b(0);
  EXPECT_EQ(standard_normal_matrix(1, 1, a)(0, 0), standard_normal_matrix(1, 1, b)(0, 0));
}

TEST(Rng, ReplayIsBitIdenticalAcrossDrawKinds) {
  auto trace = [](std::uint64_t seed) {
    Rng r(seed);
    std::vector<double> out;
    for (int i = 0; i < 200; ++i) {
      out.push_back(r.normal());
      out.push_back(r.uniform());
      out.push_back(static_cast<double>(r.uniform_index(7)));
      out.push_back(r.coin() ? 1.0 : 0.0);
    }
    return out;
  };
  EXPECT_EQ(trace(42), trace(42));
  EXPECT_NE(trace(42), trace(43));
}

TEST(Rng, KnownFirstDrawIsStable) {
  // Guards the platform-independence claim: the raw stream comes from
  // std::mt19937_64, whose output is fixed by the standard.
  std::mt19937_64 ref(mix64(12345));
  Rng r(12345);
  EXPECT_EQ(r.next_u64(), ref());
}

TEST(Rng, ForkedStreamsDifferAndDoNotAdvanceParent) {
  Rng parent(9);
  Rng copy(9);
  Rng a = parent.fork(1);
  Rng b = parent.fork(2);
  EXPECT_NE(a.next_u64(), b.next_u64());
  EXPECT_EQ(parent.next_u64(), copy.next_u64());
  EXPECT_EQ(parent.fork(1).next_u64(), Rng(9).fork(1).next_u64());
}

TEST(Rng, UniformIndexCoversRangeWithoutBias) {
  Rng r(3);
  std::vector<int> counts(6, 0);
  const int n = 60000;
  for (int i = 0; i < n; ++i) ++counts[r.uniform_index(6)];
  for (int c : counts) {
    const auto iv = sltest::binomial_interval(1.0 / 6.0, n, 5.0);
    EXPECT_GT(c / double(n), iv.lo);
    EXPECT_LT(c / double(n), iv.hi);
  }
  EXPECT_THROW(r.uniform_index(0), std::invalid_argument);
}

TEST(Rng, StandardNormalMatrixMoments) {
  Rng r(2024);
  const Matrix m = standard_normal_matrix(1000, 1000, r);
  const double mean = m.mean();
  const double var = (m.array() - mean).square().sum() / static_cast<double>(m.size() - 1);
  // 4 sigma: sd(mean) = 1e-3, sd(var) = sqrt(2) * 1e-3
  EXPECT_GT(mean, -0.01);
  EXPECT_LT(mean, 0.01);
  EXPECT_GT(var, 0.98);
  EXPECT_LT(var, 1.02);
}

TEST(Rng, StandardNormalMatrixRejectsEmptyShape) {
  Rng r(1);
  EXPECT_THROW(standard_normal_matrix(0, 5, r), std::invalid_argument);
  EXPECT_THROW(standard_normal_matrix(5, 0, r), std::invalid_argument);
}

TEST(Quantizer, Examples) {
  EXPECT_EQ(quantize(0.3, {2, 0.0, 1.0}), 0.25);
  EXPECT_EQ(quantize(-5.0, {3, 0.0, 1.0}), 0.0);
  EXPECT_EQ(quantize(1.0, {2, 0.0, 1.0}), 0.75);
}

TEST(Quantizer, MatchesDefiningFormula) {
  Rng r(5);
  for (int bits = 1; bits <= 6; ++bits) {
    for (const auto& [lo, hi] : {std::pair{0.0, 1.0}, std::pair{-1.0, 1.0}, std::pair{0.0, 4.0}}) {
      const QuantizerSpec q{bits, lo, hi};
      for (int i = 0; i < 2000; ++i) {
        const double x = lo - 0.5 + (hi - lo + 1.0) * r.uniform();
        ASSERT_EQ(quantize_code(x, q), sltest::ref_quantize_code(x, bits, lo, hi)) << "x=" << x;
      }
    }
  }
}

TEST(Quantizer, LevelBoundariesResolveByFloor) {
  const QuantizerSpec q{2, 0.0, 1.0};
  EXPECT_EQ(quantize_code(0.25, q), 1u);
  EXPECT_EQ(quantize_code(std::nextafter(0.25, 0.0), q), 0u);
  EXPECT_EQ(quantize_code(0.75, q), 3u);
}

TEST(Quantizer, IdempotentMonotoneAndOnGrid) {
  Rng r(11);
  for (int bits = 1; bits <= 8; ++bits) {
    const QuantizerSpec q{bits, -0.5, 1.5};
    std::vector<double> xs;
    for (int i = 0; i < 500; ++i) xs.push_back(-1.0 + 3.0 * r.uniform());
    std::sort(xs.begin(), xs.end());
    double prev = -1e300;
    std::set<double> image;
    for (double x : xs) {
      const double y = quantize(x, q);
      EXPECT_EQ(quantize(y, q), y);
      EXPECT_GE(y, prev);
      prev = y;
      image.insert(y);
      const double k = (y - q.lo) / q.step();
      EXPECT_EQ(k, std::round(k));
    }
    EXPECT_LE(image.size(), std::min<std::size_t>(q.levels(), xs.size()));
  }
}

TEST(Quantizer, ImageHasExactlyAllLevelsOnDenseGrid) {
  const QuantizerSpec q{3, 0.0, 1.0};
  std::set<double> image;
  for (int i = -10; i <= 1010; ++i) image.insert(quantize(i / 1000.0, q));
  EXPECT_EQ(image.size(), 8u);
}

TEST(Quantizer, Validation) {
  EXPECT_THROW((QuantizerSpec{0, 0.0, 1.0}.validate()), std::invalid_argument);
  EXPECT_THROW((QuantizerSpec{2, 1.0, 1.0}.validate()), std::invalid_argument);
  EXPECT_NO_THROW((QuantizerSpec{16, 0.0, 1.0}.validate()));
}

TEST(QuantizerGrad, ClippedStraightThrough) {
  const QuantizerSpec q{2, 0.0, 1.0};
  EXPECT_EQ(quantize_grad(1.0, 0.5, q), 1.0);
  EXPECT_EQ(quantize_grad(1.0, 1.5, q), 0.0);
  EXPECT_EQ(quantize_grad(-2.0, 0.0, q), -2.0);
  EXPECT_EQ(quantize_grad(3.0, 1.0, q), 3.0);
  EXPECT_EQ(quantize_grad(3.0, -1e-9, q), 0.0);
}

TEST(AdamW, ZeroGradientZeroDecayLeavesParams) {
  AdamW opt(2, 2, {1e-2, 0.9, 0.999, 1e-8, 0.0});
  Matrix p{{1.0, -2.0}, {0.5, 3.0}};
  const Matrix before = p;
  for (int i = 0; i < 5; ++i) optimizer_update(p, Matrix::Zero(2, 2), opt);
  EXPECT_EQ(p, before);
  EXPECT_EQ(opt.step_count(), 5);
}

TEST(AdamW, UnitGradientStrictlyDecreases) {
  AdamW opt(1, 1, {1e-3, 0.9, 0.999, 1e-8, 1e-4});
  Matrix p = Matrix::Constant(1, 1, 0.7);
  double prev = p(0, 0);
  for (int i = 0; i < 100; ++i) {
    opt.update(p, Matrix::Ones(1, 1));
    EXPECT_LT(p(0, 0), prev);
    prev = p(0, 0);
  }
}

TEST(AdamW, AgreesWithFormulaTranscription) {
  Rng r(77);
  Matrix p = standard_normal_matrix(3, 3, r);
  Matrix ref = p;
  AdamW opt(3, 3, {3e-3, 0.9, 0.999, 1e-8, 1e-2});
  sltest::RefAdam oracle;
  for (int step = 0; step < 25; ++step) {
    const Matrix g = standard_normal_matrix(3, 3, r);
    opt.update(p, g);
    oracle.step(ref, g, 3e-3, 0.9, 0.999, 1e-8, 1e-2);
    ASSERT_LT((p - ref).cwiseAbs().maxCoeff(), 1e-12) << "step " << step;
  }
}

TEST(AdamW, ShapeMismatchThrows) {
  AdamW opt(2, 3);
  Matrix p = Matrix::Zero(2, 3);
  EXPECT_THROW(opt.update(p, Matrix::Zero(3, 2)), std::invalid_argument);
  EXPECT_THROW(opt.direction(Matrix::Zero(1, 1)), std::invalid_argument);
}

TEST(AdamW, ResetClearsMomentsWhereMasked) {
  AdamW opt(2, 1, {});
  opt.direction(Matrix::Ones(2, 1));
  BoolMatrix keep(2, 1);
  keep << true, false;
  opt.reset_where_not(keep);
  EXPECT_NE(opt.first_moment()(0, 0), 0.0);
  EXPECT_EQ(opt.first_moment()(1, 0), 0.0);
  EXPECT_EQ(opt.second_moment()(1, 0), 0.0);
}
