#include "rtmd/selfsup_loss.hpp"

#include <algorithm>
#include <cmath>

namespace rtmd {

namespace {

int reflect(int i, int n) {
  if (n == 1) return 0;
  if (i < 0) return -i;
  if (i >= n) return 2 * n - 2 - i;
  return i;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(what) + ": extents differ, " + to_string(a.shape()) +
                     " vs " + to_string(b.shape()));
  }
}

}  // namespace

void CameraIntrinsics::validate() const {
  if (!(fx > 0) || !(fy > 0)) {
    throw LossError("intrinsics need fx > 0 and fy > 0");
  }
}

CameraIntrinsics CameraIntrinsics::scaled(double sx, double sy) const {
  return {fx * sx, fy * sy, cx * sx, cy * sy};
}

void Pose::validate() const {
  const auto& r = rotation;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double dot = 0;
      for (int k = 0; k < 3; ++k) dot += r[3 * i + k] * r[3 * j + k];
      if (std::abs(dot - (i == j ? 1.0 : 0.0)) > 1e-6) {
        throw LossError("pose rotation is not orthonormal");
      }
    }
  }
  const double det = r[0] * (r[4] * r[8] - r[5] * r[7]) -
                     r[1] * (r[3] * r[8] - r[5] * r[6]) +
                     r[2] * (r[3] * r[7] - r[4] * r[6]);
  if (std::abs(det - 1.0) > 1e-6) {
    throw LossError("pose rotation has determinant " + std::to_string(det) +
                    ", expected +1");
  }
}

float sample_bilinear_clamped(const Tensor& image, int n, int c, double x, double y) {
  const int w = image.w(), h = image.h();
  x = std::clamp(x, 0.0, static_cast<double>(w - 1));
  y = std::clamp(y, 0.0, static_cast<double>(h - 1));
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, w - 1);
  const int y1 = std::min(y0 + 1, h - 1);
  const double ax = x - x0;
  const double ay = y - y0;
  const float* p = image.plane(n, c);
  const auto px = [&](int yy, int xx) {
    return static_cast<double>(p[static_cast<std::size_t>(yy) * w + xx]);
  };
  const double top = px(y0, x0) * (1 - ax) + px(y0, x1) * ax;
  const double bottom = px(y1, x0) * (1 - ax) + px(y1, x1) * ax;
  return static_cast<float>(top * (1 - ay) + bottom * ay);
}

Tensor warp_to_target(const Tensor& source, const Tensor& depth,
                      const CameraIntrinsics& k, const Pose& pose) {
  k.validate();
  if (depth.c() != 1 || depth.n() != source.n() || depth.h() != source.h() ||
      depth.w() != source.w()) {
    throw ShapeError("warp: depth " + to_string(depth.shape()) +
                     " does not match source " + to_string(source.shape()));
  }
  for (float v : depth.data()) {
    if (!(v > 0.0f) || !std::isfinite(v)) {
      throw LossError("warp: depth must be positive and finite everywhere");
    }
  }
  const auto& r = pose.rotation;
  const auto& t = pose.translation;
  const int n_batch = source.n(), channels = source.c(), h = source.h(), w = source.w();
  Tensor out(source.shape());

#pragma omp parallel for collapse(2) schedule(static)
  for (int n = 0; n < n_batch; ++n) {
    for (int y = 0; y < h; ++y) {
      const float* drow = depth.plane(n, 0) + static_cast<std::size_t>(y) * w;
      for (int x = 0; x < w; ++x) {
        // Works on the ray (a, b, 1) scaled by 1/z and writes the projection
        // as an offset from (x, y), so the identity pose maps every pixel
        // onto itself exactly.
        const double z = drow[x];
        const double a = (x - k.cx) / k.fx;
        const double b = (y - k.cy) / k.fy;
        const double qx = r[0] * a + r[1] * b + r[2] + t[0] / z;
        const double qy = r[3] * a + r[4] * b + r[5] + t[1] / z;
        const double qz = std::max(r[6] * a + r[7] * b + r[8] + t[2] / z, 1e-7 / z);
        const double u = x + k.fx * (qx / qz - a);
        const double v = y + k.fy * (qy / qz - b);
        for (int c = 0; c < channels; ++c) {
          out.at(n, c, y, x) = sample_bilinear_clamped(source, n, c, u, v);
        }
      }
    }
  }
  return out;
}

Tensor ssim(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "ssim");
  const Shape& s = a.shape();
  Tensor out(s);
#pragma omp parallel for collapse(2) schedule(static)
  for (int n = 0; n < s.n; ++n) {
    for (int c = 0; c < s.c; ++c) {
      const float* pa = a.plane(n, c);
      const float* pb = b.plane(n, c);
      float* po = out.plane(n, c);
      for (int y = 0; y < s.h; ++y) {
        for (int x = 0; x < s.w; ++x) {
          double mx = 0, my = 0, mxx = 0, myy = 0, mxy = 0;
          for (int dy = -1; dy <= 1; ++dy) {
            const int yy = reflect(y + dy, s.h);
            for (int dx = -1; dx <= 1; ++dx) {
              const std::size_t i =
                  static_cast<std::size_t>(yy) * s.w + reflect(x + dx, s.w);
              const double va = pa[i], vb = pb[i];
              mx += va;
              my += vb;
              mxx += va * va;
              myy += vb * vb;
              mxy += va * vb;
            }
          }
          mx /= 9;
          my /= 9;
          const double sx = mxx / 9 - mx * mx;
          const double sy = myy / 9 - my * my;
          const double sxy = mxy / 9 - mx * my;
          const double num = (2 * mx * my + kSsimC1) * (2 * sxy + kSsimC2);
          const double den = (mx * mx + my * my + kSsimC1) * (sx + sy + kSsimC2);
          po[static_cast<std::size_t>(y) * s.w + x] = static_cast<float>(num / den);
        }
      }
    }
  }
  return out;
}

double combine_photometric(double ssim_value, double l1) {
  return kPhotometricAlpha / 2 * (1 - ssim_value) + (1 - kPhotometricAlpha) * std::abs(l1);
}

Tensor photometric_error(const Tensor& pred, const Tensor& target) {
  require_same_shape(pred, target, "photometric_error");
  const Tensor sim = ssim(pred, target);
  const Shape& s = pred.shape();
  Tensor out({s.n, 1, s.h, s.w});
  for (int n = 0; n < s.n; ++n) {
    float* po = out.plane(n, 0);
    for (std::size_t i = 0; i < s.plane(); ++i) {
      double acc = 0;
      for (int c = 0; c < s.c; ++c) {
        acc += combine_photometric(sim.plane(n, c)[i],
                                   pred.plane(n, c)[i] - target.plane(n, c)[i]);
      }
      po[i] = static_cast<float>(std::max(acc / s.c, 0.0));
    }
  }
  return out;
}

Tensor automask(const Tensor& identity_min, const Tensor& warped_min) {
  require_same_shape(identity_min, warped_min, "automask");
  Tensor mask(identity_min.shape());
  auto m = mask.data();
  auto id = identity_min.data();
  auto wp = warped_min.data();
  for (std::size_t i = 0; i < m.size(); ++i) {
    m[i] = static_cast<double>(id[i]) + kAutomaskEpsilon < wp[i] ? 0.0f : 1.0f;
  }
  return mask;
}

double masked_mean(const Tensor& values, const Tensor& mask) {
  require_same_shape(values, mask, "masked_mean");
  double sum = 0;
  std::size_t count = 0;
  auto v = values.data();
  auto m = mask.data();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (m[i] > 0.5f) {
      sum += v[i];
      ++count;
    }
  }
  return count ? sum / static_cast<double>(count) : 0.0;
}

double smoothness_loss(const Tensor& disp, const Tensor& image) {
  if (disp.c() != 1 || disp.n() != image.n() || disp.h() != image.h() ||
      disp.w() != image.w()) {
    throw ShapeError("smoothness: disparity " + to_string(disp.shape()) +
                     " does not match image " + to_string(image.shape()));
  }
  const int n_batch = disp.n(), h = disp.h(), w = disp.w(), channels = image.c();
  double gx_sum = 0, gy_sum = 0;
  for (int n = 0; n < n_batch; ++n) {
    const float* d = disp.plane(n, 0);
    double mean = 0;
    for (std::size_t i = 0; i < disp.shape().plane(); ++i) mean += d[i];
    mean /= static_cast<double>(disp.shape().plane());
    const double norm = 1.0 / (mean + 1e-7);

    auto img_grad = [&](std::size_t i, std::size_t j) {
      double g = 0;
      for (int c = 0; c < channels; ++c) {
        g += std::abs(static_cast<double>(image.plane(n, c)[i]) - image.plane(n, c)[j]);
      }
      return g / channels;
    };
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x + 1 < w; ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * w + x;
        gx_sum += std::abs(d[i] - d[i + 1]) * norm * std::exp(-img_grad(i, i + 1));
      }
    }
    for (int y = 0; y + 1 < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * w + x;
        gy_sum += std::abs(d[i] - d[i + w]) * norm * std::exp(-img_grad(i, i + w));
      }
    }
  }
  const double nx = static_cast<double>(n_batch) * h * (w - 1);
  const double ny = static_cast<double>(n_batch) * (h - 1) * w;
  return (nx > 0 ? gx_sum / nx : 0.0) + (ny > 0 ? gy_sum / ny : 0.0);
}

Tensor resize_bilinear(const Tensor& input, int height, int width) {
  const Shape& s = input.shape();
  Tensor out({s.n, s.c, height, width});
  const double sy = static_cast<double>(s.h) / height;
  const double sx = static_cast<double>(s.w) / width;
  for (int n = 0; n < s.n; ++n)
    for (int c = 0; c < s.c; ++c)
      for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
          out.at(n, c, y, x) = sample_bilinear_clamped(
              input, n, c, (x + 0.5) * sx - 0.5, (y + 0.5) * sy - 0.5);
  return out;
}

Tensor downsample_area(const Tensor& input, int factor) {
  if (factor == 1) return input;
  const Shape& s = input.shape();
  if (factor < 1 || s.h % factor || s.w % factor) {
    throw ShapeError("cannot downsample " + to_string(s) + " by " + std::to_string(factor));
  }
  Tensor out({s.n, s.c, s.h / factor, s.w / factor});
  const double inv = 1.0 / (factor * factor);
  for (int n = 0; n < s.n; ++n)
    for (int c = 0; c < s.c; ++c)
      for (int y = 0; y < out.h(); ++y)
        for (int x = 0; x < out.w(); ++x) {
          double acc = 0;
          for (int dy = 0; dy < factor; ++dy)
            for (int dx = 0; dx < factor; ++dx)
              acc += input.at(n, c, y * factor + dy, x * factor + dx);
          out.at(n, c, y, x) = static_cast<float>(acc * inv);
        }
  return out;
}

namespace {

Tensor elementwise_min(const Tensor& a, const Tensor& b) {
  Tensor out = a;
  auto o = out.data();
  auto v = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = std::min(o[i], v[i]);
  return out;
}

}  // namespace

ScaleLoss scale_loss(const Tensor& disp, int scale, const Tensor& target,
                     std::span<const Tensor> sources, std::span<const Pose> poses,
                     const CameraIntrinsics& k, const LossOptions& options) {
  if (sources.empty()) throw LossError("loss needs at least one source image");
  if (sources.size() != poses.size()) {
    throw LossError("got " + std::to_string(sources.size()) + " sources but " +
                    std::to_string(poses.size()) + " poses");
  }
  if (target.c() != 3) {
    throw ShapeError("target must be N x 3 x H x W, got " + to_string(target.shape()));
  }
  for (const Tensor& s : sources) require_same_shape(s, target, "source vs target");
  for (const Pose& p : poses) p.validate();
  if (disp.c() != 1 || disp.n() != target.n()) {
    throw ShapeError("disparity " + to_string(disp.shape()) + " does not match target " +
                     to_string(target.shape()));
  }

  const int h = target.h(), w = target.w();
  const Tensor full_disp =
      disp.h() == h && disp.w() == w ? disp : resize_bilinear(disp, h, w);
  const Tensor depth = disp_to_depth(full_disp, options.min_depth, options.max_depth);

  Tensor warped_min, identity_min;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    Tensor warped_err =
        photometric_error(warp_to_target(sources[i], depth, k, poses[i]), target);
    Tensor identity_err = photometric_error(sources[i], target);
    warped_min = i == 0 ? std::move(warped_err) : elementwise_min(warped_min, warped_err);
    identity_min =
        i == 0 ? std::move(identity_err) : elementwise_min(identity_min, identity_err);
  }
  const Tensor mask = automask(identity_min, warped_min);

  ScaleLoss out;
  out.scale = scale;
  out.photometric = masked_mean(warped_min, mask);
  double kept = 0;
  for (float m : mask.data()) kept += m;
  out.masked_fraction = 1.0 - kept / static_cast<double>(mask.size());

  const int factor = 1 << scale;
  const Tensor color = downsample_area(target, factor);
  out.smoothness = smoothness_loss(disp, color);
  out.total = out.photometric + options.smoothness_weight / factor * out.smoothness;
  return out;
}

LossBreakdown total_loss(const DepthOutputs& disp, const Tensor& target,
                         std::span<const Tensor> sources, std::span<const Pose> poses,
                         const CameraIntrinsics& k, const LossOptions& options) {
  if (sources.empty()) throw LossError("loss needs at least one source image");
  if (disp.disp.empty()) throw LossError("loss needs at least the D0 prediction");
  LossBreakdown out;
  for (int s = 0; s < static_cast<int>(disp.disp.size()); ++s) {
    const Tensor& d = disp.disp[s];
    if (d.h() * (1 << s) != target.h() || d.w() * (1 << s) != target.w()) {
      throw ShapeError("D" + std::to_string(s) + " is " + to_string(d.shape()) +
                       ", expected 1/" + std::to_string(1 << s) + " of the target");
    }
    out.scales.push_back(scale_loss(d, s, target, sources, poses, k, options));
    out.total += out.scales.back().total;
  }
  out.total /= static_cast<double>(out.scales.size());
  return out;
}

}  // namespace rtmd
