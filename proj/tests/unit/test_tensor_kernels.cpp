#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "rtmd/kernels.hpp"

using namespace rtmd;

namespace {

// |a - b| <= 1e-5 * max(1, |b|): relative for values of unit scale and
// above, absolute below that (cancellation makes pure relative error
// meaningless near zero).
::testing::AssertionResult close_to_oracle(const Tensor& got, const std::vector<double>& want) {
  if (got.size() != want.size()) {
    return ::testing::AssertionFailure() << "size " << got.size() << " vs " << want.size();
  }
  for (std::size_t i = 0; i < want.size(); ++i) {
    const double err = std::abs(got.data()[i] - want[i]);
    if (err > 1e-5 * std::max(1.0, std::abs(want[i]))) {
      return ::testing::AssertionFailure()
             << "index " << i << ": got " << got.data()[i] << ", oracle " << want[i];
    }
  }
  return ::testing::AssertionSuccess();
}

ConvWeights ones_kernel() {
  return {Tensor({1, 1, 3, 3}, 1.0f), {0.0f}};
}

}  // namespace

TEST(Tensor, RejectsZeroExtentAndWrongLength) {
  EXPECT_THROW(Tensor({1, 0, 2, 2}), ShapeError);
  EXPECT_THROW(Tensor({1, 1, 2, 2}, std::vector<float>(3)), ShapeError);
  Tensor t({2, 3, 4, 5});
  EXPECT_EQ(t.size(), 120u);
}

TEST(Conv2d, AllOnesCenterAndCorners) {
  const Tensor x({1, 1, 3, 3}, 1.0f);
  for (auto conv : {&rtmd::conv2d, &rtmd::serial::conv2d}) {
    const Tensor y = conv(x, ones_kernel(), 1);
    EXPECT_EQ(y.at(0, 0, 1, 1), 9.0f);
    EXPECT_EQ(y.at(0, 0, 0, 0), 4.0f);
    EXPECT_EQ(y.at(0, 0, 0, 2), 4.0f);
    EXPECT_EQ(y.at(0, 0, 2, 0), 4.0f);
    EXPECT_EQ(y.at(0, 0, 2, 2), 4.0f);
    EXPECT_EQ(y.at(0, 0, 0, 1), 6.0f);
  }
}

TEST(Conv2d, DeltaKernelIsIdentity) {
  const Tensor x = oracle::random_tensor({2, 1, 7, 9}, 11);
  ConvWeights delta{Tensor({1, 1, 3, 3}, 0.0f), {0.0f}};
  delta.kernel.at(0, 0, 1, 1) = 1.0f;
  EXPECT_EQ(conv2d(x, delta, 1), x);
  EXPECT_EQ(serial::conv2d(x, delta, 1), x);
}

TEST(Conv2d, Stride2MatchesOracleShapeAndValues) {
  const Tensor x = oracle::random_tensor({2, 3, 8, 8}, 5);
  const ConvWeights w = oracle::random_conv(5, 3, 6);
  const Tensor y = conv2d(x, w, 2);
  EXPECT_EQ(y.shape(), (Shape{2, 5, 4, 4}));
  EXPECT_TRUE(close_to_oracle(
      y, oracle::direct_conv(x.values(), 2, 3, 8, 8, w.kernel.values(), w.bias, 5, 2)));
}

TEST(Conv2d, RandomizedShapesAgreeWithOracle) {
  std::mt19937 rng(2024);
  std::uniform_int_distribution<int> batch(1, 2), chans(1, 8), extent(1, 16), stride(1, 2);
  for (int trial = 0; trial < 120; ++trial) {
    const int n = batch(rng), c = chans(rng), o = chans(rng), h = extent(rng), w = extent(rng);
    const int s = stride(rng);
    const Tensor x = oracle::random_tensor({n, c, h, w}, 100 + trial);
    const ConvWeights wt = oracle::random_conv(o, c, 500 + trial);
    const auto want = oracle::direct_conv(x.values(), n, c, h, w, wt.kernel.values(), wt.bias, o, s);
    ASSERT_TRUE(close_to_oracle(conv2d(x, wt, s), want)) << "trial " << trial;
    ASSERT_TRUE(close_to_oracle(serial::conv2d(x, wt, s), want)) << "trial " << trial;
  }
}

TEST(Conv2d, ZeroInputYieldsBiasExactly) {
  const Tensor x({1, 4, 5, 6}, 0.0f);
  const ConvWeights w = oracle::random_conv(3, 4, 9);
  const Tensor y = conv2d(x, w, 2);
  for (int o = 0; o < 3; ++o)
    for (int yy = 0; yy < y.h(); ++yy)
      for (int xx = 0; xx < y.w(); ++xx) EXPECT_EQ(y.at(0, o, yy, xx), w.bias[o]);
}

TEST(Conv2d, DeterministicBitwise) {
  const Tensor x = oracle::random_tensor({1, 8, 24, 40}, 3);
  const ConvWeights w = oracle::random_conv(6, 8, 4);
  EXPECT_EQ(conv2d(x, w, 1), conv2d(x, w, 1));
  EXPECT_EQ(conv2d(x, w, 2), conv2d(x, w, 2));
}

TEST(Conv2d, ChannelMismatchNamesBothExtents) {
  const Tensor x({1, 4, 5, 5});
  const ConvWeights w = oracle::random_conv(2, 3, 1);
  try {
    conv2d(x, w, 1);
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find('4'), std::string::npos);
    EXPECT_NE(msg.find('3'), std::string::npos);
  }
  EXPECT_THROW(conv2d(Tensor({1, 3, 5, 5}), w, 3), ShapeError);
}

TEST(Activation, LeakyReluAndSigmoidValues) {
  EXPECT_EQ(sigmoid(0.0f), 0.5f);
  EXPECT_FLOAT_EQ(leaky_relu(-1.0f), -0.01f);
  EXPECT_EQ(leaky_relu(2.0f), 2.0f);
  for (float big : {-1e4f, -100.0f, 100.0f, 1e4f}) {
    const float s = sigmoid(big);
    EXPECT_GT(s, 0.0f);
    EXPECT_LT(s, 1.0f);
    EXPECT_FALSE(std::isnan(s));
  }
  const Tensor x({1, 1, 1, 3}, std::vector<float>{-1.0f, 0.0f, 2.0f});
  EXPECT_EQ(activation(x, Activation::LeakyRelu), serial::activation(x, Activation::LeakyRelu));
  EXPECT_EQ(activation(x, Activation::Sigmoid), serial::activation(x, Activation::Sigmoid));
}

TEST(Upsample, TwoByTwoExample) {
  const Tensor x({1, 1, 2, 2}, std::vector<float>{1, 2, 3, 4});
  const Tensor want({1, 1, 4, 4},
                    std::vector<float>{1, 1, 2, 2, 1, 1, 2, 2, 3, 3, 4, 4, 3, 3, 4, 4});
  EXPECT_EQ(upsample_nearest2x(x), want);
  EXPECT_EQ(serial::upsample_nearest2x(x), want);
}

TEST(Upsample, ShapeLawMultisetAndSubsampleInverse) {
  const Tensor x = oracle::random_tensor({1, 16, 6, 20}, 8);
  const Tensor y = upsample_nearest2x(x);
  EXPECT_EQ(y.shape(), (Shape{1, 16, 12, 40}));

  std::vector<float> a = x.values(), b = y.values();
  std::vector<float> a4;
  for (float v : a) a4.insert(a4.end(), 4, v);
  std::sort(a4.begin(), a4.end());
  std::sort(b.begin(), b.end());
  EXPECT_EQ(a4, b);

  Tensor back(x.shape());
  for (int c = 0; c < 16; ++c)
    for (int yy = 0; yy < 6; ++yy)
      for (int xx = 0; xx < 20; ++xx) back.at(0, c, yy, xx) = y.at(0, c, 2 * yy, 2 * xx);
  EXPECT_EQ(back, x);
}

TEST(Add, ValuesCommutativityAndMismatch) {
  const Tensor ones({1, 2, 3, 3}, 1.0f), twos({1, 2, 3, 3}, 2.0f);
  EXPECT_EQ(add(ones, twos), Tensor({1, 2, 3, 3}, 3.0f));
  const Tensor a = oracle::random_tensor({1, 8, 4, 4}, 1), b = oracle::random_tensor({1, 8, 4, 4}, 2);
  EXPECT_EQ(add(a, b), add(b, a));
  EXPECT_EQ(add(a, b), serial::add(a, b));
  EXPECT_THROW(add(Tensor({1, 8, 4, 4}), Tensor({1, 16, 4, 4})), ShapeError);
}

TEST(Concat, OrderSliceBackAndMismatch) {
  const Tensor a = oracle::random_tensor({1, 8, 4, 4}, 1), b = oracle::random_tensor({1, 8, 4, 4}, 2);
  const Tensor c = concat_channels(a, b);
  EXPECT_EQ(c.shape(), (Shape{1, 16, 4, 4}));
  for (int k = 0; k < 8; ++k) EXPECT_EQ(c.at(0, k, 2, 3), a.at(0, k, 2, 3));
  EXPECT_EQ(c.slice_channels(0, 8), a);
  EXPECT_EQ(c.slice_channels(8, 16), b);
  EXPECT_EQ(c, serial::concat_channels(a, b));

  const Tensor batched_a = oracle::random_tensor({2, 3, 2, 5}, 3);
  const Tensor batched_b = oracle::random_tensor({2, 4, 2, 5}, 4);
  const Tensor bc = concat_channels(batched_a, batched_b);
  EXPECT_EQ(bc.slice_channels(0, 3), batched_a);
  EXPECT_EQ(bc.slice_channels(3, 7), batched_b);

  EXPECT_THROW(concat_channels(Tensor({1, 8, 4, 4}), Tensor({1, 8, 5, 4})), ShapeError);
}

TEST(Kernels, FiniteOutputsFromFiniteInputs) {
  const Tensor x = oracle::random_tensor({1, 4, 9, 9}, 77, -50.0f, 50.0f);
  const ConvWeights w = oracle::random_conv(4, 4, 78);
  Tensor y = conv2d(x, w, 1);
  EXPECT_TRUE(y.all_finite());
  activation_inplace(y, Activation::Sigmoid);
  EXPECT_TRUE(y.all_finite());
  EXPECT_TRUE(upsample_nearest2x(y).all_finite());
}
