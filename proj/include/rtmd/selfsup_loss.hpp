#pragma once

#include <array>
#include <span>
#include <stdexcept>
#include <vector>

#include "rtmd/network.hpp"
#include "rtmd/tensor.hpp"

// Forward-only Monodepth2-style self-supervised objective: view synthesis by
// inverse warping, SSIM + L1 photometric error, per-pixel minimum
// reprojection, auto-masking and edge-aware smoothness.

namespace rtmd {

class LossError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Pinhole intrinsics in pixels for one image resolution.
struct CameraIntrinsics {
  double fx = 0, fy = 0, cx = 0, cy = 0;

  void validate() const;
  /// Intrinsics for an image resized by (sx, sy).
  CameraIntrinsics scaled(double sx, double sy) const;
};

/// Rigid transform from target-camera to source-camera coordinates.
struct Pose {
  std::array<double, 9> rotation{1, 0, 0, 0, 1, 0, 0, 0, 1};  // row-major
  std::array<double, 3> translation{0, 0, 0};                // meters

  static Pose identity() { return {}; }
  /// Throws LossError unless the rotation is orthonormal to 1e-6 with det +1.
  void validate() const;
};

inline constexpr double kSsimC1 = 0.01 * 0.01;
inline constexpr double kSsimC2 = 0.03 * 0.03;
inline constexpr double kPhotometricAlpha = 0.85;
inline constexpr double kAutomaskEpsilon = 1e-5;
inline constexpr double kDefaultSmoothnessWeight = 1e-3;

/// Synthesizes the target view: every target pixel is back-projected with
/// `depth` (N x 1 x H x W, meters), moved by `pose`, projected with `k` and
/// bilinearly sampled from `source` with border clamping.
Tensor warp_to_target(const Tensor& source, const Tensor& depth,
                      const CameraIntrinsics& k, const Pose& pose);

/// Bilinear sample of plane (n, c) at (x, y) with coordinates clamped to
/// the image border.
float sample_bilinear_clamped(const Tensor& image, int n, int c, double x, double y);

/// Per-pixel, per-channel SSIM over 3x3 windows (reflection padded).
Tensor ssim(const Tensor& a, const Tensor& b);

/// alpha/2 * (1 - ssim) + (1 - alpha) * |l1| for one channel sample.
double combine_photometric(double ssim_value, double l1);

/// Channel-averaged photometric error, N x 1 x H x W.
Tensor photometric_error(const Tensor& pred, const Tensor& target);

/// mask = 0 where identity_min + kAutomaskEpsilon < warped_min.
Tensor automask(const Tensor& identity_min, const Tensor& warped_min);

/// Mean of masked_values over pixels with mask = 1 (0 if none).
double masked_mean(const Tensor& values, const Tensor& mask);

/// Edge-aware smoothness of mean-normalized disparity, weighted by
/// exp(-|image gradient|). `image` must share disp's spatial extents.
double smoothness_loss(const Tensor& disp, const Tensor& image);

/// Bilinear (half-pixel centers) resize of every plane to h x w.
Tensor resize_bilinear(const Tensor& input, int height, int width);
/// Mean pooling by an integer factor.
Tensor downsample_area(const Tensor& input, int factor);

struct LossOptions {
  double smoothness_weight = kDefaultSmoothnessWeight;
  float min_depth = kDefaultMinDepth;
  float max_depth = kDefaultMaxDepth;
};

struct ScaleLoss {
  int scale = 0;
  double photometric = 0;
  double smoothness = 0;
  double total = 0;  // photometric + smoothness_weight / 2^scale * smoothness
  double masked_fraction = 0;  // share of pixels excluded by the auto-mask
};

struct LossBreakdown {
  std::vector<ScaleLoss> scales;
  double total = 0;  // mean of per-scale totals
};

/// Photometric and smoothness terms of one disparity scale.
ScaleLoss scale_loss(const Tensor& disp, int scale, const Tensor& target,
                     std::span<const Tensor> sources, std::span<const Pose> poses,
                     const CameraIntrinsics& k, const LossOptions& options = {});

/// Sums every scale present in `disp`. `target` and sources are
/// N x 3 x H x W at full resolution; `k` belongs to that resolution.
LossBreakdown total_loss(const DepthOutputs& disp, const Tensor& target,
                         std::span<const Tensor> sources, std::span<const Pose> poses,
                         const CameraIntrinsics& k, const LossOptions& options = {});

}  // namespace rtmd
