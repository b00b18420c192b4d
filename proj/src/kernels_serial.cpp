#include <algorithm>
#include <cmath>

#include "rtmd/kernels.hpp"

namespace rtmd {

float leaky_relu(float x) { return x >= 0.0f ? x : kLeakySlope * x; }

float sigmoid(float x) {
  const float y = 1.0f / (1.0f + std::exp(-x));
  return std::clamp(y, kSigmoidMin, kSigmoidMax);
}

void check_conv_args(const Tensor& input, const ConvWeights& w, int stride) {
  w.validate();
  if (stride != 1 && stride != 2) {
    throw ShapeError("conv stride must be 1 or 2, got " +
                     std::to_string(stride));
  }
  if (input.c() != w.in_channels()) {
    throw ShapeError("conv input has " + std::to_string(input.c()) +
                     " channels but kernel expects " +
                     std::to_string(w.in_channels()));
  }
}

namespace serial {

Tensor conv2d(const Tensor& input, const ConvWeights& w, int stride) {
  check_conv_args(input, w, stride);
  const int n_batch = input.n(), in_c = input.c(), h = input.h(), wd = input.w();
  const int out_c = w.out_channels();
  const int oh = conv_out_extent(h, stride), ow = conv_out_extent(wd, stride);
  Tensor out({n_batch, out_c, oh, ow});
  for (int n = 0; n < n_batch; ++n) {
    for (int o = 0; o < out_c; ++o) {
      for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
          float acc = w.bias[o];
          for (int c = 0; c < in_c; ++c) {
            for (int ky = 0; ky < 3; ++ky) {
              const int iy = oy * stride + ky - 1;
              if (iy < 0 || iy >= h) continue;
              for (int kx = 0; kx < 3; ++kx) {
                const int ix = ox * stride + kx - 1;
                if (ix < 0 || ix >= wd) continue;
                acc += w.kernel.at(o, c, ky, kx) * input.at(n, c, iy, ix);
              }
            }
          }
          out.at(n, o, oy, ox) = acc;
        }
      }
    }
  }
  return out;
}

Tensor activation(const Tensor& input, Activation kind) {
  Tensor out = input;
  for (float& v : out.data()) {
    v = kind == Activation::LeakyRelu ? leaky_relu(v) : sigmoid(v);
  }
  return out;
}

Tensor upsample_nearest2x(const Tensor& input) {
  const Shape& s = input.shape();
  Tensor out({s.n, s.c, 2 * s.h, 2 * s.w});
  for (int n = 0; n < s.n; ++n)
    for (int c = 0; c < s.c; ++c)
      for (int y = 0; y < 2 * s.h; ++y)
        for (int x = 0; x < 2 * s.w; ++x)
          out.at(n, c, y, x) = input.at(n, c, y / 2, x / 2);
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError("add: extents differ, " + to_string(a.shape()) + " vs " +
                     to_string(b.shape()));
  }
  Tensor out = a;
  auto dst = out.data();
  auto src = b.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  return out;
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  if (sa.n != sb.n || sa.h != sb.h || sa.w != sb.w) {
    throw ShapeError("concat: batch/spatial extents differ, " + to_string(sa) +
                     " vs " + to_string(sb));
  }
  Tensor out({sa.n, sa.c + sb.c, sa.h, sa.w});
  for (int n = 0; n < sa.n; ++n)
    for (int c = 0; c < sa.c + sb.c; ++c)
      for (int y = 0; y < sa.h; ++y)
        for (int x = 0; x < sa.w; ++x)
          out.at(n, c, y, x) =
              c < sa.c ? a.at(n, c, y, x) : b.at(n, c - sa.c, y, x);
  return out;
}

}  // namespace serial
}  // namespace rtmd
