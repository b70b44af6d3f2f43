#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "asbim/numcore/dense.hpp"
#include "asbim/numcore/gradcheck.hpp"
#include "asbim/numcore/least_squares.hpp"
#include "asbim/numcore/tape.hpp"

using namespace asbim;
using namespace asbim::numcore;

namespace {

Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

Mat random_mat(Eigen::Index r, Eigen::Index c, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  Mat m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = u(gen);
  return m;
}

}  // namespace

TEST(Dense, IdentityWeights) {
  Mat W(2, 2);
  W << 1, 0, 0, 1;
  EXPECT_EQ(dense_forward(vec({1, 2}), W, vec({0, 0})), vec({1, 2}));
}

TEST(Dense, ForcedByArithmetic) {
  Mat W(1, 2);
  W << 2, 3;
  EXPECT_EQ(dense_forward(vec({1, 1}), W, vec({-5})), vec({0}));
}

TEST(Dense, MatchesElementwiseDotProducts) {
  std::mt19937_64 gen(7);
  const Mat W = random_mat(3, 4, gen);
  const Vec x = random_mat(4, 1, gen);
  const Vec b = random_mat(3, 1, gen);
  const Vec y = dense_forward(x, W, b);
  ASSERT_EQ(y.size(), 3);
  for (int r = 0; r < 3; ++r) {
    double acc = b[r];
    for (int c = 0; c < 4; ++c) acc += W(r, c) * x[c];
    EXPECT_NEAR(y[r], acc, 1e-14);
  }
}

TEST(Dense, AffineInInput) {
  std::mt19937_64 gen(11);
  const Mat W = random_mat(3, 4, gen);
  const Vec x = random_mat(4, 1, gen), z = random_mat(4, 1, gen), b = random_mat(3, 1, gen);
  const double a = 0.7, c = -1.3;
  const Vec lhs = dense_forward(a * x + c * z, W, b);
  const Vec rhs = a * dense_forward(x, W, b) + c * dense_forward(z, W, b) - (a + c - 1.0) * b;
  EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Dense, DimensionMismatchIsConfigError) {
  EXPECT_THROW(dense_forward(vec({1, 2, 3}), Mat::Zero(2, 2), vec({0, 0})), ConfigError);
  EXPECT_THROW(dense_forward(vec({1, 2}), Mat::Zero(2, 2), vec({0})), ConfigError);
}

TEST(Relu, Definition) {
  EXPECT_EQ(relu(vec({-1, 0, 2})), vec({0, 0, 2}));
  EXPECT_EQ(relu(vec({-3, -0.1})), vec({0, 0}));
  EXPECT_EQ(relu(vec({0.5, 4})), vec({0.5, 4}));
}

TEST(Relu, Idempotent) {
  std::mt19937_64 gen(3);
  const Vec x = random_mat(20, 1, gen);
  EXPECT_EQ(relu(relu(x)), relu(x));
}

TEST(Sigmoid, StableAtExtremes) {
  EXPECT_EQ(sigmoid(0.0), 0.5);
  EXPECT_GT(sigmoid(-700.0), 0.0);
  EXPECT_LT(sigmoid(30.0), 1.0);
  EXPECT_TRUE(std::isfinite(sigmoid(-1e6)));
  EXPECT_NEAR(logit(sigmoid(1.25)), 1.25, 1e-12);
}

TEST(MaskedSoftmax, UniformScores) {
  const Vec a = masked_softmax(vec({0, 0, 0}), {true, true, true});
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(a[i], 1.0 / 3.0, 1e-15);
}

TEST(MaskedSoftmax, SingleUnmasked) { EXPECT_EQ(masked_softmax(vec({5, 0}), {true, false}), vec({1, 0})); }

TEST(MaskedSoftmax, MatchesDirectEvaluation) {
  const Vec a = masked_softmax(vec({1, 2, 3}), {true, true, true});
  const double z = std::exp(1.0) + std::exp(2.0) + std::exp(3.0);
  EXPECT_NEAR(a[0], std::exp(1.0) / z, 1e-15);
  EXPECT_NEAR(a[1], std::exp(2.0) / z, 1e-15);
  EXPECT_NEAR(a[2], std::exp(3.0) / z, 1e-15);
}

TEST(MaskedSoftmax, MaskedScoresNeverMatter) {
  const Vec a = masked_softmax(vec({1, 1e300, 2, -1e300}), {true, false, true, false});
  EXPECT_EQ(a[1], 0.0);
  EXPECT_EQ(a[3], 0.0);
  EXPECT_NEAR(a[0] + a[2], 1.0, 1e-12);
}

TEST(MaskedSoftmax, InvariantsOnRandomInput) {
  std::mt19937_64 gen(5);
  std::bernoulli_distribution coin(0.6);
  for (int trial = 0; trial < 50; ++trial) {
    const Vec s = 10.0 * random_mat(12, 1, gen);
    Mask mask(12);
    for (auto&& m : mask) m = coin(gen);
    mask[static_cast<std::size_t>(trial % 12)] = true;
    const Vec a = masked_softmax(s, mask);
    double sum = 0.0;
    for (int i = 0; i < 12; ++i) {
      EXPECT_GE(a[i], 0.0);
      if (!mask[static_cast<std::size_t>(i)]) {
        EXPECT_EQ(a[i], 0.0);
      }
      sum += a[i];
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
    const Vec shifted = masked_softmax((s.array() + 123.0).matrix(), mask);
    EXPECT_LE((shifted - a).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(MaskedSoftmax, NoOverflowForHugeScores) {
  const Vec a = masked_softmax(vec({1000, 1000}), {true, true});
  EXPECT_NEAR(a[0], 0.5, 1e-15);
}

TEST(MaskedSoftmax, AllMaskedIsEmptySequence) {
  EXPECT_THROW(masked_softmax(vec({1, 2}), {false, false}), EmptySequenceError);
}

TEST(LeadingMask, Shape) {
  EXPECT_EQ(leading_mask(3, 5), (Mask{true, true, true, false, false}));
  EXPECT_EQ(leading_mask(7, 5), Mask(5, true));
}

TEST(Tape, SquareDerivative) {
  Tape t;
  const Var theta = t.variable(3.0);
  const Var y = square(theta);
  EXPECT_EQ(y.value(), 9.0);
  EXPECT_EQ(t.gradient(y).wrt(theta), 6.0);
}

TEST(Tape, DeadRelu) {
  Tape t;
  const Var theta = t.variable(-1.0);
  EXPECT_EQ(t.gradient(relu(theta)).wrt(theta), 0.0);
}

TEST(Tape, ChainAndFanOut) {
  Tape t;
  const Var x = t.variable(0.3), y = t.variable(-1.2);
  const Var z = exp(x * y) + sigmoid(x) / y - x;
  const auto g = t.gradient(z);
  const double s = 1.0 / (1.0 + std::exp(-0.3));
  EXPECT_NEAR(g.wrt(x), -1.2 * std::exp(-0.36) + s * (1 - s) / -1.2 - 1.0, 1e-14);
  EXPECT_NEAR(g.wrt(y), 0.3 * std::exp(-0.36) - s / (1.44), 1e-14);
}

TEST(Tape, ForeignOrConstantVarIsInternalError) {
  Tape a, b;
  const Var x = a.variable(1.0);
  const Var c = a.constant(2.0);
  const Var y = b.variable(2.0);
  const auto g = a.gradient(x * c);
  EXPECT_THROW(g.wrt(y), InternalError);
  EXPECT_THROW(g.wrt(c), InternalError);
  EXPECT_THROW(x * y, InternalError);
}

TEST(LeastSquares, MatchesNormalEquations) {
  std::mt19937_64 gen(9);
  const Mat X = random_mat(30, 4, gen);
  const Vec y = random_mat(30, 1, gen);
  const auto fit = least_squares(X, y);
  ASSERT_TRUE(fit.full_rank);
  const Vec oracle = (X.transpose() * X).inverse() * (X.transpose() * y);
  EXPECT_LE((fit.coef - oracle).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_NEAR(fit.residual_sum_squares, (y - X * oracle).squaredNorm(), 1e-10);
}

TEST(LeastSquares, RankDeficientIsFlagged) {
  Mat X(4, 2);
  X << 1, 2, 2, 4, 3, 6, 4, 8;
  const auto fit = least_squares(X, vec({1, 2, 3, 4}));
  EXPECT_FALSE(fit.full_rank);
  EXPECT_EQ(fit.coef, Vec::Zero(2));
}

TEST(FiniteDifference, QuadraticIsExact) {
  ParameterVector p{{0.5, -1.5, 2.0}};
  const auto fn = [](const ParameterVector& v) {
    return 3.0 * v.values[0] * v.values[0] + v.values[0] * v.values[1] - 2.0 * v.values[2] * v.values[2];
  };
  ParameterVector grad{{6.0 * 0.5 - 1.5, 0.5, -4.0 * 2.0}};
  const auto report = finite_difference_check(fn, grad, p, 1e-5);
  EXPECT_LT(report.max_relative_error, 1e-8);
  ASSERT_EQ(report.groups.size(), 1u);
  EXPECT_EQ(report.groups[0].size, 3u);
}

TEST(FiniteDifference, IndependentParameterIsZeroOnBothSides) {
  ParameterVector p{{1.0, 7.0}};
  const auto fn = [](const ParameterVector& v) { return v.values[0] * v.values[0]; };
  const auto report = finite_difference_check(fn, ParameterVector{{2.0, 0.0}}, p, 1e-5);
  EXPECT_LT(report.max_relative_error, 1e-8);
}

TEST(FiniteDifference, DetectsWrongGradient) {
  ParameterVector p{{1.0}};
  const auto fn = [](const ParameterVector& v) { return v.values[0] * v.values[0]; };
  EXPECT_GT(finite_difference_check(fn, ParameterVector{{2.1}}, p, 1e-5).max_relative_error, 1e-2);
}

TEST(FiniteDifference, Errors) {
  ParameterVector p{{1.0}};
  const auto ok = [](const ParameterVector& v) { return v.values[0]; };
  const auto bad = [](const ParameterVector&) { return std::nan(""); };
  EXPECT_THROW(finite_difference_check(ok, p, p, 0.0), ConfigError);
  EXPECT_THROW(finite_difference_check(bad, p, p, 1e-5), NumericalError);
}
