#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "finer/diagnostics.hpp"
#include "finer/errors.hpp"

using namespace finer;
constexpr double kPi = std::numbers::pi;

TEST(SubfunctionBoundary, SolvesQuadratic) {
  for (unsigned n = 1; n <= 5; ++n) {
    const double x = subfunction_boundary(n);
    EXPECT_NEAR((x + 1.0) * x, n * kPi, 1e-12);
    EXPECT_NEAR(x, (std::sqrt(4.0 * n * kPi + 1.0) - 1.0) / 2.0, 1e-15);
  }
  EXPECT_NEAR(subfunction_boundary(1), 1.34162, 1e-5);
  EXPECT_THROW(subfunction_boundary(0), ContractViolation);
}

TEST(FrequencyScale, ClosedForms) {
  const auto c = frequency_scale_constants();
  const double r1 = std::sqrt(4 * kPi + 1), r3 = std::sqrt(12 * kPi + 1);
  EXPECT_NEAR(c.first_over_sine, 2 * kPi / (r1 - 1), 1e-14);
  EXPECT_NEAR(c.second_over_first, (r1 - 1) / (r3 - r1), 1e-14);
  EXPECT_NEAR(c.first_over_sine, 2.34163, 1e-5);
  // The second sub-function oscillates faster than the first.
  EXPECT_GT(c.second_over_first, 1.0);
}

TEST(MeanCrossings, CountsSignChanges) {
  std::vector<double> v(1024);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::sin(10 * 2 * kPi * (static_cast<double>(i) + 0.5) / 1024.0);
  EXPECT_EQ(count_mean_crossings(v), 19u);
  EXPECT_EQ(count_mean_crossings(std::vector<double>(8, 1.0)), 0u);
}

TEST(NeuronFrequency, SingleSineNeuronOnUnitInterval) {
  // One neuron computing sin(10·2πx) over [0,1].
  Mlp mlp({1, 1, 1}, Activation::sine(1.0));
  mlp.layer(0).weights(0, 0) = 20 * kPi;
  const auto f = neuron_frequency_map(mlp, CoordinateGrid::line(1024, 0.0, 1.0));
  ASSERT_EQ(f.size(), 1u);
  EXPECT_NEAR(static_cast<double>(f[0].crossings), 20.0, 1.0);
  EXPECT_NEAR(f[0].frequency, 10.0, 1.0);
  EXPECT_EQ(f[0].response.size(), 1024u);
}

TEST(NeuronFrequency, TwoDimensionalCombinesAxes) {
  Mlp mlp({2, 1, 1}, Activation::sine(1.0));
  mlp.layer(0).weights(0, 0) = 2 * kPi * 3;  // 3 cycles/unit along x
  mlp.layer(0).weights(0, 1) = 2 * kPi * 4;  // 4 along y
  const auto f = neuron_frequency_map(mlp, CoordinateGrid::square(256));
  EXPECT_NEAR(f[0].frequency, 5.0, 0.5);
}

TEST(NeuronFrequency, FinerSpreadExceedsSine) {
  const auto grid = CoordinateGrid::line(1024);
  const auto finer_net = init_mlp({1, 64, 1}, Activation::finer(30.0), {1.0, 0});
  const auto sine_net = init_mlp({1, 64, 1}, Activation::sine(30.0), {1.0, 0});
  EXPECT_GT(frequency_spread(neuron_frequency_map(finer_net, grid)),
            frequency_spread(neuron_frequency_map(sine_net, grid)));
}

TEST(CoordinateGrid, Layout) {
  const Matrix c = CoordinateGrid::square(4, 0.0, 3.0).coordinates();
  ASSERT_EQ(c.rows(), 16u);
  EXPECT_EQ(c(1, 0), 1.0);
  EXPECT_EQ(c(1, 1), 0.0);
  EXPECT_EQ(c(4, 1), 1.0);
  EXPECT_EQ(c(15, 0), 3.0);
  EXPECT_THROW(CoordinateGrid::line(3).coordinates(), ContractViolation);
}
