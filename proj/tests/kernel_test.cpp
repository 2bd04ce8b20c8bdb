#include <cmath>

#include <gtest/gtest.h>

#include "khop/kernel.hpp"
#include "khop/validation.hpp"

namespace khop {
namespace {

TEST(Rbf, SelfSimilarityIsOne) {
  const State x = generate_patterns(64, 1, 1)[0];
  EXPECT_EQ(rbf(x, x, KernelParams{0.3}), 1.0);
}

TEST(Rbf, OneFlippedBit) {
  const State x = generate_patterns(10, 1, 1)[0];
  State y = x;
  y.flip(4);
  EXPECT_NEAR(rbf(x, y, KernelParams{0.02}), 0.9231163463866358, 1e-15);  // exp(-0.08)
}

TEST(Rbf, TypicalRandomPairMatchesDenseDistance) {
  const State x = generate_patterns(100, 1, 3)[0];
  const State y = corrupt(x, 0.0, 4);  // hamming 50
  ASSERT_EQ(hamming(x, y), 50u);
  EXPECT_NEAR(rbf(x, y, KernelParams{0.02}), std::exp(-4.0), 1e-15);
  EXPECT_NEAR(rbf(x, y, KernelParams{0.02}), oracle::dense_rbf(x, y, 0.02), 1e-15);
}

TEST(Rbf, RejectsBadInput) {
  EXPECT_THROW(rbf(State(3), State(4), KernelParams{0.1}), std::invalid_argument);
  EXPECT_THROW(rbf(State(3), State(3), KernelParams{0.0}), std::invalid_argument);
}

TEST(Rbf, SymmetricAndMonotoneInHamming) {
  const State x = generate_patterns(80, 1, 9)[0];
  State y = x;
  double prev = 1.0;
  for (std::size_t d = 1; d <= 80; ++d) {
    y.flip(d - 1);
    const double k = rbf(x, y, KernelParams{0.05});
    EXPECT_EQ(k, rbf(y, x, KernelParams{0.05}));
    EXPECT_LT(k, prev);
    prev = k;
  }
}

TEST(Gram, SinglePattern) {
  const GramMatrix k = gram(generate_patterns(30, 1, 1), KernelParams{0.1});
  ASSERT_EQ(k.rows(), 1);
  EXPECT_EQ(k(0, 0), 1.0);
}

TEST(Gram, SymmetricUnitDiagonalInRange) {
  const GramMatrix k = gram(generate_patterns(50, 40, 2), KernelParams{0.04});
  EXPECT_EQ((k - k.transpose()).cwiseAbs().maxCoeff(), 0.0);
  for (Eigen::Index i = 0; i < k.rows(); ++i) EXPECT_EQ(k(i, i), 1.0);
  EXPECT_GT(k.minCoeff(), 0.0);
  EXPECT_LE(k.maxCoeff(), 1.0);
}

TEST(Gram, OffDiagonalMaxFromClosestPair) {
  const PatternSet pats = generate_patterns(100, 10, 1);
  const GramMatrix k = gram(pats, KernelParams{0.05});
  std::size_t dmin = 1000;
  for (std::size_t a = 0; a < 10; ++a)
    for (std::size_t b = 0; b < 10; ++b)
      if (a != b) {
        std::size_t d = 0;
        for (std::size_t i = 0; i < 100; ++i) d += pats[a][i] != pats[b][i];
        dmin = std::min(dmin, d);
      }
  double off = 0.0;
  for (Eigen::Index a = 0; a < 10; ++a)
    for (Eigen::Index b = 0; b < 10; ++b)
      if (a != b) off = std::max(off, k(a, b));
  EXPECT_NEAR(off, std::exp(-4.0 * 0.05 * static_cast<double>(dmin)), 1e-15);
  EXPECT_LT((k - oracle::naive_gram(pats, 0.05)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Gram, PlusRidgeIsPositiveDefinite) {
  const PatternSet pats = generate_patterns(20, 60, 5);
  for (double lambda : {1e-6, 1e-3, 1e-1}) {
    Eigen::MatrixXd k = gram(pats, KernelParams{0.01});
    k.diagonal().array() += lambda;
    EXPECT_EQ(Eigen::LLT<Eigen::MatrixXd>(k).info(), Eigen::Success);
  }
}

TEST(KernelVector, StoredPatternComponentIsOne) {
  const PatternSet pats = generate_patterns(100, 8, 4);
  const Eigen::VectorXd k = kernel_vector(pats[5], pats, KernelParams{0.02});
  EXPECT_EQ(k(5), 1.0);
  const GramMatrix g = gram(pats, KernelParams{0.02});
  EXPECT_EQ((k - g.row(5).transpose()).cwiseAbs().maxCoeff(), 0.0);
}

TEST(KernelVector, AntipodalState) {
  const PatternSet pats = generate_patterns(100, 3, 4);
  const Eigen::VectorXd k = kernel_vector(pats[1].negated(), pats, KernelParams{0.01});
  EXPECT_NEAR(k(1), std::exp(-4.0), 1e-15);
}

TEST(KernelVector, LengthMismatch) {
  const PatternSet pats = generate_patterns(10, 3, 4);
  EXPECT_THROW(kernel_vector(State(11), pats, KernelParams{0.1}), std::invalid_argument);
}

TEST(KernelParams, ScalingRoundTrip) {
  const auto p = KernelParams::from_scaling(2.0, 100);
  EXPECT_DOUBLE_EQ(p.gamma, 0.02);
  EXPECT_DOUBLE_EQ(p.scaling(100), 2.0);
}

}  // namespace
}  // namespace khop
