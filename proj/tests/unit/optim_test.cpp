#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "finer/errors.hpp"
#include "finer/optim.hpp"
#include "test_support.hpp"

using namespace finer;

TEST(Loss, L2AndL1) {
  const Matrix p = Matrix::from_rows({{1.0, 2.0}, {0.0, -1.0}});
  const Matrix y = Matrix::from_rows({{0.0, 2.0}, {0.5, 1.0}});
  const LossValue l2 = evaluate_loss(Loss::kL2, p, y);
  EXPECT_DOUBLE_EQ(l2.value, (1.0 + 0.0 + 0.25 + 4.0) / 4.0);
  EXPECT_DOUBLE_EQ(l2.output_grad(1, 1), 2.0 * -2.0 / 4.0);
  const LossValue l1 = evaluate_loss(Loss::kL1, p, y);
  EXPECT_DOUBLE_EQ(l1.value, (1.0 + 0.0 + 0.5 + 2.0) / 4.0);
  EXPECT_DOUBLE_EQ(l1.output_grad(0, 0), 0.25);
  EXPECT_DOUBLE_EQ(l1.output_grad(0, 1), 0.0);
  EXPECT_THROW(evaluate_loss(Loss::kL2, p, Matrix(1, 2)), ContractViolation);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  Mlp mlp({1, 1}, Activation::finer());
  mlp.layer(0).weights(0, 0) = 1.0;
  AdamState s = AdamState::for_mlp(mlp, 0.1);
  GradientSet g = GradientSet::zeros_like(mlp);
  g.weights[0](0, 0) = 3.0;
  g.biases[0][0] = -0.5;
  adam_step(mlp, g, s);
  // m̂ = g, v̂ = g², so the step is lr·g/(|g| + eps).
  EXPECT_NEAR(mlp.layer(0).weights(0, 0), 1.0 - 0.1 * 3.0 / (3.0 + 1e-8), 1e-15);
  EXPECT_NEAR(mlp.layer(0).biases[0], 0.1 * 0.5 / (0.5 + 1e-8), 1e-15);
  EXPECT_EQ(s.step, 1u);
}

TEST(Adam, MatchesReferenceRecurrence) {
  Mlp mlp({1, 1}, Activation::finer());
  AdamState s = AdamState::for_mlp(mlp, 0.01, 0.9, 0.999, 1e-8);
  double theta = 0.0, m = 0.0, v = 0.0;
  const double grads[] = {1.0, -2.0, 0.5, 0.25};
  for (int t = 1; t <= 4; ++t) {
    GradientSet g = GradientSet::zeros_like(mlp);
    g.weights[0](0, 0) = grads[t - 1];
    adam_step(mlp, g, s);
    m = 0.9 * m + 0.1 * grads[t - 1];
    v = 0.999 * v + 0.001 * grads[t - 1] * grads[t - 1];
    theta -= 0.01 * (m / (1 - std::pow(0.9, t))) / (std::sqrt(v / (1 - std::pow(0.999, t))) + 1e-8);
    EXPECT_NEAR(mlp.layer(0).weights(0, 0), theta, 1e-15);
  }
}

TEST(Adam, NonFiniteGradientLeavesStateUntouched) {
  Mlp mlp = init_mlp({1, 4, 1}, Activation::finer(), {1.0, 0});
  const Mlp before = mlp;
  AdamState s = AdamState::for_mlp(mlp);
  GradientSet g = GradientSet::zeros_like(mlp);
  g.biases[1][0] = NAN;
  try {
    adam_step(mlp, g, s);
    FAIL() << "expected NonFiniteError";
  } catch (const NonFiniteError& e) {
    EXPECT_EQ(e.layer(), 1);
  }
  EXPECT_EQ(mlp, before);
  EXPECT_EQ(s.step, 0u);
}

TEST(Adam, ShapeMismatch) {
  Mlp mlp = init_mlp({1, 4, 1}, Activation::finer(), {1.0, 0});
  AdamState s = AdamState::for_mlp(mlp);
  const Mlp other({1, 3, 1}, Activation::finer());
  EXPECT_THROW(adam_step(mlp, GradientSet::zeros_like(other), s), ContractViolation);
  EXPECT_THROW(AdamState::for_mlp(mlp, 1e-3, 1.0), ContractViolation);
}

TEST(Train, ReducesLossOnSimpleTarget) {
  Mlp mlp = init_mlp({1, 16, 1}, Activation::finer(5.0), {1.0, 1});
  AdamState s = AdamState::for_mlp(mlp, 1e-2);
  Matrix x(32, 1), y(32, 1);
  for (std::size_t i = 0; i < 32; ++i) {
    x(i, 0) = -1.0 + 2.0 * static_cast<double>(i) / 31.0;
    y(i, 0) = 0.5 * x(i, 0);
  }
  TrainOptions o;
  o.iterations = 300;
  const TrainLog log = train(mlp, [&](std::size_t) { return SampleBatch{x, y}; }, o, s);
  ASSERT_EQ(log.records.size(), 300u);
  EXPECT_LT(log.records.back().loss, 0.01 * log.records.front().loss);
  EXPECT_EQ(s.lr, 1e-2);
}

TEST(Train, CosineDecayRestoresBaseRate) {
  Mlp mlp = init_mlp({1, 4, 1}, Activation::finer(), {1.0, 1});
  AdamState s = AdamState::for_mlp(mlp, 1e-3);
  TrainOptions o;
  o.iterations = 5;
  o.cosine_decay = true;
  const Matrix x(2, 1, 0.5), y(2, 1, 0.0);
  train(mlp, [&](std::size_t) { return SampleBatch{x, y}; }, o, s);
  EXPECT_EQ(s.lr, 1e-3);
}

TEST(Train, NonFiniteTargetsSurfaceWithPartialLog) {
  Mlp mlp = init_mlp({1, 4, 1}, Activation::finer(), {1.0, 1});
  AdamState s = AdamState::for_mlp(mlp, 1e-3);
  TrainOptions o;
  o.iterations = 10;
  const Matrix x(2, 1, 0.5);
  auto sampler = [&](std::size_t it) {
    return SampleBatch{x, Matrix(2, 1, it < 4 ? 0.0 : INFINITY)};
  };
  TrainLog partial;
  EXPECT_THROW(train(mlp, sampler, o, s, &partial), NonFiniteError);
  EXPECT_EQ(partial.records.size(), 3u);
}

TEST(TrainLog, CsvFormat) {
  TrainLog log;
  log.records.push_back({1, 0.5, 12.0, std::nullopt});
  log.records.push_back({2, 0.25, 20.0, 30.5});
  std::ostringstream a, b;
  log.write_csv(a);
  EXPECT_EQ(a.str(), "iter,loss,ms,psnr\n1,0.5,,\n2,0.25,,30.500000\n");
  log.write_csv(b, true);
  EXPECT_EQ(b.str(), "iter,loss,ms,psnr\n1,0.5,12.000,\n2,0.25,20.000,30.500000\n");
}
