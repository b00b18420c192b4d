#include <algorithm>
#include <cstring>
#include <vector>

#include "rtmd/kernels.hpp"

namespace rtmd {

namespace {

// GCC/Clang vector type; the arithmetic lowers to whatever SIMD the target
// flags allow. The tile is sized so the accumulators fit the register file:
// 8 zmm with AVX-512, 8 ymm otherwise.
#if defined(__AVX512F__)
using Vec = float __attribute__((vector_size(64)));
constexpr int kLanes = 16;
constexpr int kVecs = 1;
constexpr int kTileO = 8;  // output channels held in registers
#else
using Vec = float __attribute__((vector_size(32)));
constexpr int kLanes = 8;
constexpr int kVecs = 2;
constexpr int kTileO = 4;
#endif
constexpr int kTileW = kLanes * kVecs;  // output columns held in registers

inline Vec load(const float* p) {
  Vec v;
  std::memcpy(&v, p, sizeof(v));
  return v;
}
inline Vec broadcast(float x) { return Vec{} + x; }

int round_up(int v, int m) { return (v + m - 1) / m * m; }

// Zero-padded copy of the input laid out so that every 3x3 tap of a
// stride-s conv reads a contiguous run of columns. Each padded row is split
// into `stride` phases; padded column p lives in phase p % stride at index
// p / stride, so tap kx reads phase kx % stride starting at kx / stride.
struct PhaseBuffer {
  std::vector<float> data;
  int rows = 0;        // H + 2
  int phase_len = 0;   // floats per phase
  int stride = 1;

  std::size_t row_offset(int n, int c, int channels, int py) const {
    return ((static_cast<std::size_t>(n) * channels + c) * rows + py) *
           static_cast<std::size_t>(stride) * phase_len;
  }
  const float* row(int n, int c, int channels, int py) const {
    return data.data() + row_offset(n, c, channels, py);
  }
};

PhaseBuffer make_phase_buffer(const Tensor& in, int stride, int padded_ow) {
  PhaseBuffer buf;
  buf.stride = stride;
  buf.rows = in.h() + 2;
  // Tap kx = 2 reads up to index padded_ow - 1 + 2 / stride.
  buf.phase_len = padded_ow + 2 / stride;
  const int n_batch = in.n(), channels = in.c(), h = in.h(), w = in.w();
  buf.data.assign(buf.row_offset(n_batch, 0, channels, 0), 0.0f);
#pragma omp parallel for collapse(2) schedule(static)
  for (int n = 0; n < n_batch; ++n) {
    for (int c = 0; c < channels; ++c) {
      const float* src_plane = in.plane(n, c);
      for (int y = 0; y < h; ++y) {
        float* dst = buf.data.data() + buf.row_offset(n, c, channels, y + 1);
        const float* src = src_plane + static_cast<std::size_t>(y) * w;
        for (int x = 0; x < w; ++x) {
          const int p = x + 1;
          dst[(p % stride) * buf.phase_len + p / stride] = src[x];
        }
      }
    }
  }
  return buf;
}

// Kernel repacked as [o_block][c][tap][kTileO], zero-filled past O.
std::vector<float> pack_kernel(const ConvWeights& w) {
  const int out_c = w.out_channels(), in_c = w.in_channels();
  const int blocks = (out_c + kTileO - 1) / kTileO;
  std::vector<float> packed(static_cast<std::size_t>(blocks) * in_c * 9 *
                                kTileO,
                            0.0f);
  for (int o = 0; o < out_c; ++o) {
    const int ob = o / kTileO, lane = o % kTileO;
    for (int c = 0; c < in_c; ++c) {
      for (int t = 0; t < 9; ++t) {
        packed[((static_cast<std::size_t>(ob) * in_c + c) * 9 + t) * kTileO +
               lane] = w.kernel.at(o, c, t / 3, t % 3);
      }
    }
  }
  return packed;
}

}  // namespace

Tensor conv2d(const Tensor& input, const ConvWeights& w, int stride) {
  check_conv_args(input, w, stride);
  const int n_batch = input.n(), in_c = input.c();
  const int out_c = w.out_channels();
  const int oh = conv_out_extent(input.h(), stride);
  const int ow = conv_out_extent(input.w(), stride);
  const int padded_ow = round_up(ow, kTileW);
  const int o_blocks = (out_c + kTileO - 1) / kTileO;

  const PhaseBuffer buf = make_phase_buffer(input, stride, padded_ow);
  const std::vector<float> packed = pack_kernel(w);
  Tensor out({n_batch, out_c, oh, ow});

#pragma omp parallel for collapse(3) schedule(static)
  for (int n = 0; n < n_batch; ++n) {
    for (int ob = 0; ob < o_blocks; ++ob) {
      for (int oy = 0; oy < oh; ++oy) {
        const int o0 = ob * kTileO;
        const int lanes = std::min(kTileO, out_c - o0);
        float bias[kTileO] = {};
        for (int b = 0; b < lanes; ++b) bias[b] = w.bias[o0 + b];
        const float* wblock =
            packed.data() + static_cast<std::size_t>(ob) * in_c * 9 * kTileO;

        for (int x0 = 0; x0 < padded_ow; x0 += kTileW) {
          Vec acc[kTileO][kVecs];
          for (int b = 0; b < kTileO; ++b)
            for (int v = 0; v < kVecs; ++v) acc[b][v] = broadcast(bias[b]);

          for (int c = 0; c < in_c; ++c) {
            const float* wc = wblock + static_cast<std::size_t>(c) * 9 * kTileO;
            for (int ky = 0; ky < 3; ++ky) {
              const float* row = buf.row(n, c, in_c, oy * stride + ky);
              for (int kx = 0; kx < 3; ++kx) {
                const float* src = row + (kx % stride) * buf.phase_len +
                                   kx / stride + x0;
                const float* wt = wc + (ky * 3 + kx) * kTileO;
                Vec in[kVecs];
                for (int v = 0; v < kVecs; ++v) in[v] = load(src + v * kLanes);
                for (int b = 0; b < kTileO; ++b) {
                  const Vec wv = broadcast(wt[b]);
                  for (int v = 0; v < kVecs; ++v) acc[b][v] += wv * in[v];
                }
              }
            }
          }

          const int cols = std::min(kTileW, ow - x0);
          for (int b = 0; b < lanes; ++b) {
            float* dst = out.plane(n, o0 + b) +
                         static_cast<std::size_t>(oy) * ow + x0;
            std::memcpy(dst, &acc[b][0], sizeof(float) * cols);
          }
        }
      }
    }
  }
  return out;
}

void activation_inplace(Tensor& t, Activation kind) {
  auto v = t.data();
  const std::ptrdiff_t count = static_cast<std::ptrdiff_t>(v.size());
  if (kind == Activation::LeakyRelu) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < count; ++i) v[i] = leaky_relu(v[i]);
  } else {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < count; ++i) v[i] = sigmoid(v[i]);
  }
}

Tensor activation(const Tensor& input, Activation kind) {
  Tensor out = input;
  activation_inplace(out, kind);
  return out;
}

Tensor upsample_nearest2x(const Tensor& input) {
  const Shape& s = input.shape();
  Tensor out({s.n, s.c, 2 * s.h, 2 * s.w});
  const int ow = 2 * s.w;
#pragma omp parallel for collapse(2) schedule(static)
  for (int n = 0; n < s.n; ++n) {
    for (int c = 0; c < s.c; ++c) {
      const float* src = input.plane(n, c);
      float* dst = out.plane(n, c);
      for (int y = 0; y < s.h; ++y) {
        float* r0 = dst + static_cast<std::size_t>(2 * y) * ow;
        const float* srow = src + static_cast<std::size_t>(y) * s.w;
        for (int x = 0; x < s.w; ++x) {
          r0[2 * x] = srow[x];
          r0[2 * x + 1] = srow[x];
        }
        std::memcpy(r0 + ow, r0, sizeof(float) * ow);
      }
    }
  }
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError("add: extents differ, " + to_string(a.shape()) + " vs " +
                     to_string(b.shape()));
  }
  Tensor out(a.shape());
  auto dst = out.data();
  auto x = a.data();
  auto y = b.data();
  const std::ptrdiff_t count = static_cast<std::ptrdiff_t>(dst.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < count; ++i) dst[i] = x[i] + y[i];
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
  const std::size_t plane = sa.plane();
  for (int n = 0; n < sa.n; ++n) {
    std::memcpy(out.plane(n, 0), a.plane(n, 0), sizeof(float) * sa.c * plane);
    std::memcpy(out.plane(n, sa.c), b.plane(n, 0),
                sizeof(float) * sb.c * plane);
  }
  return out;
}

}  // namespace rtmd
