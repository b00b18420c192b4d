#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rtmd/tensor.hpp"

namespace rtmd {

/// Metric depth in meters; a value <= 0 marks an invalid pixel.
struct DepthMap {
  int height = 0;
  int width = 0;
  std::vector<float> values;

  DepthMap() = default;
  DepthMap(int h, int w, float fill = 0.0f);
  DepthMap(int h, int w, std::vector<float> v);

  float& at(int y, int x) { return values[static_cast<std::size_t>(y) * width + x]; }
  float at(int y, int x) const { return values[static_cast<std::size_t>(y) * width + x]; }
  bool valid(int y, int x) const { return at(y, x) > 0.0f; }

  /// Plane (n, 0) of an N x 1 x H x W tensor.
  static DepthMap from_tensor(const Tensor& t, int batch = 0);
};

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// KITTI convention: meters = pixel / 256, pixel 0 = invalid.
inline constexpr double kDepthPngScale = 256.0;

DepthMap load_depth_png16(const std::filesystem::path& path);
/// Writes round(depth * 256) clamped to [0, 65535]; invalid pixels become 0.
void save_depth_png16(const DepthMap& depth, const std::filesystem::path& path);

/// Half-open pixel rectangle [y0, y1) x [x0, x1).
struct CropRect {
  int y0 = 0, y1 = 0, x0 = 0, x1 = 0;
};

/// Garg/Eigen crop fractions applied to an H x W map.
CropRect garg_crop(int height, int width);

struct EvalOptions {
  double min_depth = 1e-3;
  double max_depth = 80.0;
  std::optional<CropRect> crop;
  bool median_scale = false;
};

struct DepthMetrics {
  double abs_rel = 0.0;
  double sq_rel = 0.0;
  double rmse = 0.0;
  double rmse_log = 0.0;
  double delta1 = 0.0;
  double delta2 = 0.0;
  double delta3 = 0.0;
  std::size_t n_pixels = 0;  // summed over images by aggregate()
  std::size_t n_images = 1;
};

/// Evaluates on pixels with a valid ground truth in (min_depth, max_depth]
/// inside the crop. Predictions are optionally median-scaled, then clamped
/// to [min_depth, max_depth]. RMSElog uses log10. Throws EvalError when
/// the evaluation set is empty or extents differ.
DepthMetrics compute_metrics(const DepthMap& pred, const DepthMap& gt,
                             const EvalOptions& options = {});

/// Unweighted per-image mean of the seven metrics; pixel and image counts
/// are summed. Throws EvalError on an empty list.
DepthMetrics aggregate(std::span<const DepthMetrics> per_image);

double median(std::vector<double> values);

}  // namespace rtmd
