#include <gtest/gtest.h>

#include <cmath>

#include "finer/errors.hpp"
#include "finer/mlp.hpp"
#include "test_support.hpp"

using namespace finer;
using finer::testing::random_matrix;

namespace {

// Sum of squares of outputs weighted by a fixed matrix: L = Σ r ⊙ f(x).
double weighted_output(const Mlp& mlp, const Matrix& x, const Matrix& r) {
  const Matrix y = forward(mlp, x).outputs;
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += y.data()[i] * r.data()[i];
  return s;
}

void expect_gradients_match_fd(const Mlp& base, const Matrix& x) {
  const Matrix r = random_matrix(x.rows(), base.output_dim(), 77);
  const GradientSet g = backward(base, forward(base, x).cache, r);
  const std::vector<double> analytic = g.flatten();
  std::vector<double> theta = base.parameters();
  Mlp probe = base;
  const double h = 1e-6;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double keep = theta[i];
    theta[i] = keep + h;
    probe.set_parameters(theta);
    const double up = weighted_output(probe, x, r);
    theta[i] = keep - h;
    probe.set_parameters(theta);
    const double down = weighted_output(probe, x, r);
    theta[i] = keep;
    const double fd = (up - down) / (2 * h);
    ASSERT_NEAR(analytic[i], fd, 1e-9 + 1e-6 * std::abs(fd)) << "parameter " << i;
  }
}

}  // namespace

TEST(Mlp, ShapesAndParameterCount) {
  const Mlp mlp({2, 5, 4, 3}, Activation::finer());
  ASSERT_EQ(mlp.num_layers(), 3u);
  EXPECT_EQ(mlp.layer(0).weights.rows(), 5u);
  EXPECT_EQ(mlp.layer(0).weights.cols(), 2u);
  EXPECT_EQ(mlp.layer(2).weights.rows(), 3u);
  EXPECT_EQ(mlp.parameter_count(), (2u * 5 + 5) + (5u * 4 + 4) + (4u * 3 + 3));
  EXPECT_THROW(Mlp({3}, Activation::finer()), ContractViolation);
  EXPECT_THROW(Mlp({3, 0, 1}, Activation::finer()), ContractViolation);
}

TEST(Mlp, EncoderWidensFirstLayer) {
  const Mlp mlp({2, 8, 1}, Activation::relu(), PositionalEncoder{4, true});
  EXPECT_EQ(mlp.feature_dim(), 2u * 8 + 2);
  EXPECT_EQ(mlp.layer(0).weights.cols(), 18u);
}

TEST(Mlp, ParameterRoundTrip) {
  Mlp mlp = init_mlp({2, 6, 6, 1}, Activation::finer(), {0.5, 3});
  const auto p = mlp.parameters();
  Mlp other({2, 6, 6, 1}, Activation::finer());
  other.set_parameters(p);
  EXPECT_EQ(other, mlp);
  EXPECT_THROW(other.set_parameters(std::vector<double>(3)), ContractViolation);
}

TEST(Init, RangesFollowRules) {
  const double k = 0.7;
  const auto act = Activation::finer(30.0);
  const Mlp mlp = init_mlp({2, 64, 64, 64, 3}, act, {k, 1});
  for (double w : mlp.layer(0).weights.span()) EXPECT_LE(std::abs(w), 1.0 / 2.0);
  for (std::size_t l = 1; l < 4; ++l)
    for (double w : mlp.layer(l).weights.span()) EXPECT_LE(std::abs(30.0 * w), std::sqrt(6.0 / 64.0));
  double bmax = 0.0;
  for (double b : mlp.layer(0).biases) bmax = std::max(bmax, std::abs(b));
  EXPECT_LE(bmax, k);
  EXPECT_GT(bmax, 0.8 * k);  // 64 draws come close to the edge
  for (double b : mlp.layer(3).biases) EXPECT_EQ(b, 0.0);
}

TEST(Init, AllHiddenScopeUsesKEverywhere) {
  const double k = 3.0;
  const Mlp mlp = init_mlp({1, 64, 64, 1}, Activation::finer(1.0), {k, 2, BiasScope::kAllHidden});
  double bmax = 0.0;
  for (double b : mlp.layer(1).biases) bmax = std::max(bmax, std::abs(b));
  EXPECT_GT(bmax, 1.0);
  EXPECT_LE(bmax, k);
}

TEST(Init, FirstLayerScopeKeepsDeepBiasesNarrow) {
  const Mlp mlp = init_mlp({1, 64, 64, 1}, Activation::finer(1.0), {3.0, 2, BiasScope::kFirstLayer});
  for (double b : mlp.layer(1).biases) EXPECT_LE(std::abs(b), 1.0 / 8.0);
}

TEST(Init, KZeroGivesZeroBiasesEverywhere) {
  const Mlp mlp = init_mlp({1, 16, 16, 1}, Activation::finer(), {0.0, 0});
  for (std::size_t l = 0; l < 3; ++l)
    for (double b : mlp.layer(l).biases) EXPECT_EQ(b, 0.0);
}

TEST(Init, KZeroGivesZeroFirstBias) {
  const Mlp mlp = init_mlp({1, 16, 1}, Activation::finer(), {0.0, 0});
  for (double b : mlp.layer(0).biases) EXPECT_EQ(b, 0.0);
}

TEST(Init, NegativeKRejected) {
  EXPECT_THROW(init_mlp({1, 4, 1}, Activation::finer(), {-1.0, 0}), ContractViolation);
}

TEST(Init, ReproducibleFromSeed) {
  const auto a = init_mlp({2, 16, 16, 3}, Activation::sine(), {1.0, 9});
  const auto b = init_mlp({2, 16, 16, 3}, Activation::sine(), {1.0, 9});
  const auto c = init_mlp({2, 16, 16, 3}, Activation::sine(), {1.0, 10});
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
}

TEST(Init, DrawsAreUniform) {
  const Mlp mlp = init_mlp({1, 20000, 1}, Activation::finer(1.0), {2.0, 4});
  double sum = 0, sq = 0;
  for (double b : mlp.layer(0).biases) {
    sum += b;
    sq += b * b;
  }
  EXPECT_NEAR(sum / 20000, 0.0, 0.05);
  EXPECT_NEAR(sq / 20000, 4.0 / 3.0, 0.05);
}

TEST(Forward, ZeroHiddenLayerIsAffine) {
  Mlp mlp({1, 1}, Activation::finer());
  mlp.layer(0).weights(0, 0) = 2.0;
  mlp.layer(0).biases[0] = -1.0;
  const Matrix y = forward(mlp, Matrix::from_rows({{0.5}, {3.0}})).outputs;
  EXPECT_EQ(y, Matrix::from_rows({{0.0}, {5.0}}));
}

TEST(Forward, HandComputedFinerNeuron) {
  Mlp mlp({1, 1, 1}, Activation::finer(2.0));
  mlp.layer(0).weights(0, 0) = 0.5;
  mlp.layer(0).biases[0] = 0.25;
  mlp.layer(1).weights(0, 0) = 3.0;
  mlp.layer(1).biases[0] = 0.1;
  const double g = 0.5 * 0.8 + 0.25;
  const double expect = 3.0 * std::sin(2.0 * (g + 1.0) * g) + 0.1;
  EXPECT_NEAR(forward(mlp, Matrix::from_rows({{0.8}})).outputs(0, 0), expect, 1e-15);
}

TEST(Forward, RejectsBadInput) {
  const Mlp mlp = init_mlp({2, 4, 1}, Activation::finer(), {1.0, 0});
  EXPECT_THROW(forward(mlp, Matrix(3, 3)), ContractViolation);
  EXPECT_THROW(forward(mlp, Matrix::from_rows({{0.0, NAN}})), NonFiniteError);
}

TEST(Forward, PredictChunksMatchSingleBatch) {
  const Mlp mlp = init_mlp({2, 8, 8, 2}, Activation::finer(), {1.0, 5});
  const Matrix x = random_matrix(50, 2, 6);
  // Small and large products take different kernels, so only near-equality holds.
  EXPECT_LT(finer::testing::max_abs_diff(predict(mlp, x, 7), forward(mlp, x).outputs), 1e-13);
}

TEST(Backward, FiniteDifferencesAllFamilies) {
  const Matrix x = random_matrix(6, 2, 8, -1, 1);
  for (const auto& act : {Activation::finer(3.0), Activation::sine(3.0), Activation::gaussian(0.5)}) {
    SCOPED_TRACE(std::string(to_string(act.kind)));
    expect_gradients_match_fd(init_mlp({2, 8, 8, 2}, act, {1.0, 11}), x);
  }
}

TEST(Backward, FiniteDifferencesWithEncoder) {
  const Matrix x = random_matrix(4, 2, 9, -1, 1);
  expect_gradients_match_fd(init_mlp({2, 6, 1}, Activation::sine(2.0), {0.5, 12}, PositionalEncoder{2, true}), x);
}

TEST(Backward, InputGradient) {
  const Mlp mlp = init_mlp({2, 8, 1}, Activation::finer(2.0), {1.0, 13});
  const Matrix x = Matrix::from_rows({{0.3, -0.2}});
  const Matrix one(1, 1, 1.0);
  const GradientSet g = backward(mlp, forward(mlp, x).cache, one, true);
  ASSERT_TRUE(g.input.has_value());
  const double h = 1e-6;
  for (std::size_t d = 0; d < 2; ++d) {
    Matrix up = x, down = x;
    up(0, d) += h;
    down(0, d) -= h;
    const double fd = (forward(mlp, up).outputs(0, 0) - forward(mlp, down).outputs(0, 0)) / (2 * h);
    EXPECT_NEAR((*g.input)(0, d), fd, 1e-7);
  }
}

TEST(Backward, ShapesMirrorNetwork) {
  const Mlp mlp = init_mlp({3, 7, 5, 2}, Activation::finer(), {1.0, 0});
  const Matrix x = random_matrix(4, 3, 1);
  const GradientSet g = backward(mlp, forward(mlp, x).cache, Matrix(4, 2, 1.0));
  for (std::size_t l = 0; l < mlp.num_layers(); ++l) {
    EXPECT_EQ(g.weights[l].rows(), mlp.layer(l).weights.rows());
    EXPECT_EQ(g.weights[l].cols(), mlp.layer(l).weights.cols());
    EXPECT_EQ(g.biases[l].size(), mlp.layer(l).biases.size());
  }
  EXPECT_FALSE(g.input.has_value());
  EXPECT_THROW(backward(mlp, forward(mlp, x).cache, Matrix(3, 2)), ContractViolation);
}
