#pragma once

// Test-only reference computations. Nothing here calls into the library's
// kernels or layer planner, so the checks stay independent of the code under
// test.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "rtmd/tensor.hpp"

namespace rtmd::oracle {

inline Tensor random_tensor(Shape s, std::uint64_t seed, float lo = -1.0f, float hi = 1.0f) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> dist(lo, hi);
  Tensor t(s);
  for (float& v : t.data()) v = dist(rng);
  return t;
}

inline ConvWeights random_conv(int out_c, int in_c, std::uint64_t seed) {
  ConvWeights w{random_tensor({out_c, in_c, 3, 3}, seed), std::vector<float>(out_c)};
  std::mt19937_64 rng(seed ^ 0x9E3779B97F4A7C15ull);
  std::uniform_real_distribution<float> dist(-0.5f, 0.5f);
  for (float& b : w.bias) b = dist(rng);
  return w;
}

/// Six nested loops (n, o, y, x, c, tap) with explicit zero padding,
/// accumulated in double.
inline std::vector<double> direct_conv(const std::vector<float>& in, int n_batch, int in_c,
                                       int h, int w, const std::vector<float>& kernel,
                                       const std::vector<float>& bias, int out_c,
                                       int stride) {
  const int oh = (h - 1) / stride + 1;
  const int ow = (w - 1) / stride + 1;
  std::vector<double> out(static_cast<std::size_t>(n_batch) * out_c * oh * ow);
  auto in_at = [&](int n, int c, int y, int x) -> double {
    if (y < 0 || y >= h || x < 0 || x >= w) return 0.0;
    return in[((static_cast<std::size_t>(n) * in_c + c) * h + y) * w + x];
  };
  for (int n = 0; n < n_batch; ++n)
    for (int o = 0; o < out_c; ++o)
      for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x) {
          double acc = bias[o];
          for (int c = 0; c < in_c; ++c)
            for (int t = 0; t < 9; ++t) {
              const int ky = t / 3, kx = t % 3;
              acc += static_cast<double>(kernel[((static_cast<std::size_t>(o) * in_c + c) * 3 + ky) * 3 + kx]) *
                     in_at(n, c, y * stride + ky - 1, x * stride + kx - 1);
            }
          out[((static_cast<std::size_t>(n) * out_c + o) * oh + y) * ow + x] = acc;
        }
  return out;
}

/// Closed-form parameter count written straight from the architecture
/// description: encoder blocks, halving up-convs, optional concat widening,
/// and two-conv heads on the lowest `scales` decoder outputs.
inline std::int64_t analytic_params(const std::vector<int>& ch, int convs,
                                    const std::string& fusion, int scales) {
  auto conv = [](std::int64_t i, std::int64_t o) { return o * i * 9 + o; };
  const int levels = static_cast<int>(ch.size());
  std::int64_t total = 0;
  std::int64_t prev = 3;
  for (int c : ch) {
    total += conv(prev, c) + (convs - 1) * conv(c, c);
    prev = c;
  }
  std::int64_t width = ch.back();
  for (int j = levels; j >= 1; --j) {
    const std::int64_t half = width / 2;
    total += conv(width, half);
    width = half;
    const int scale = j - 1;
    if (scale >= 1 && fusion[levels - j] == 'c') width += ch[scale - 1];
    if (scale < scales) total += conv(width, width) + conv(width, 1);
  }
  return total;
}

struct NaiveMetrics {
  double abs_rel, sq_rel, rmse, rmse_log, d1, d2, d3;
};

/// Per-pixel loop straight from the metric definitions; pred is assumed
/// already scaled and clamped.
inline NaiveMetrics naive_metrics(const std::vector<double>& gt, const std::vector<double>& pred) {
  NaiveMetrics m{0, 0, 0, 0, 0, 0, 0};
  const double n = static_cast<double>(gt.size());
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const double d = gt[i], p = pred[i];
    m.abs_rel += std::fabs(d - p) / d / n;
    m.sq_rel += std::pow(std::fabs(d - p), 2) / d / n;
    m.rmse += std::pow(d - p, 2) / n;
    m.rmse_log += std::pow(std::log10(d) - std::log10(p), 2) / n;
    const double delta = std::max(d / p, p / d);
    m.d1 += (delta < 1.25) / n;
    m.d2 += (delta < 1.5625) / n;
    m.d3 += (delta < 1.953125) / n;
  }
  m.rmse = std::sqrt(m.rmse);
  m.rmse_log = std::sqrt(m.rmse_log);
  return m;
}

}  // namespace rtmd::oracle
