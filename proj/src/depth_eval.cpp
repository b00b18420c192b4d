#include "rtmd/depth_eval.hpp"

#include <algorithm>
#include <cmath>

#include "rtmd/image_io.hpp"

namespace rtmd {

DepthMap::DepthMap(int h, int w, float fill)
    : height(h), width(w), values(static_cast<std::size_t>(h) * w, fill) {}

DepthMap::DepthMap(int h, int w, std::vector<float> v)
    : height(h), width(w), values(std::move(v)) {
  if (values.size() != static_cast<std::size_t>(h) * w) {
    throw ShapeError("depth map " + std::to_string(h) + "x" + std::to_string(w) +
                     " needs " + std::to_string(h * w) + " values");
  }
}

DepthMap DepthMap::from_tensor(const Tensor& t, int batch) {
  if (t.c() != 1 || batch < 0 || batch >= t.n()) {
    throw ShapeError("depth tensor must be N x 1 x H x W, got " + to_string(t.shape()));
  }
  const float* p = t.plane(batch, 0);
  return DepthMap(t.h(), t.w(), std::vector<float>(p, p + t.shape().plane()));
}

DepthMap load_depth_png16(const std::filesystem::path& path) {
  const Gray16Image img = read_png16(path);
  DepthMap out(img.height, img.width);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    out.values[i] = static_cast<float>(img.pixels[i] / kDepthPngScale);
  }
  return out;
}

void save_depth_png16(const DepthMap& depth, const std::filesystem::path& path) {
  Gray16Image img;
  img.height = depth.height;
  img.width = depth.width;
  img.pixels.resize(depth.values.size());
  for (std::size_t i = 0; i < depth.values.size(); ++i) {
    const double v = depth.values[i];
    const double scaled =
        std::isfinite(v) && v > 0.0 ? std::round(v * kDepthPngScale) : 0.0;
    img.pixels[i] = static_cast<std::uint16_t>(std::clamp(scaled, 0.0, 65535.0));
  }
  write_png16(path, img);
}

CropRect garg_crop(int height, int width) {
  CropRect r;
  r.y0 = static_cast<int>(0.40810811 * height);
  r.y1 = static_cast<int>(0.99189189 * height);
  r.x0 = static_cast<int>(0.03594771 * width);
  r.x1 = static_cast<int>(0.96405229 * width);
  return r;
}

double median(std::vector<double> values) {
  if (values.empty()) throw EvalError("median of an empty set");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + mid);
  return 0.5 * (lower + upper);
}

DepthMetrics compute_metrics(const DepthMap& pred, const DepthMap& gt,
                             const EvalOptions& options) {
  if (pred.height != gt.height || pred.width != gt.width) {
    throw EvalError("prediction is " + std::to_string(pred.height) + "x" +
                    std::to_string(pred.width) + " but ground truth is " +
                    std::to_string(gt.height) + "x" + std::to_string(gt.width));
  }
  CropRect crop{0, gt.height, 0, gt.width};
  if (options.crop) {
    crop = *options.crop;
    crop.y0 = std::max(crop.y0, 0);
    crop.x0 = std::max(crop.x0, 0);
    crop.y1 = std::min(crop.y1, gt.height);
    crop.x1 = std::min(crop.x1, gt.width);
  }

  std::vector<double> d;     // ground truth
  std::vector<double> d_hat;  // prediction
  for (int y = crop.y0; y < crop.y1; ++y) {
    for (int x = crop.x0; x < crop.x1; ++x) {
      const double g = gt.at(y, x);
      if (!(g > 0.0) || !std::isfinite(g)) continue;
      if (g <= options.min_depth || g > options.max_depth) continue;
      d.push_back(g);
      d_hat.push_back(pred.at(y, x));
    }
  }
  if (d.empty()) {
    throw EvalError("no ground-truth pixels inside the evaluation range");
  }

  if (options.median_scale) {
    const double med_pred = median(d_hat);
    if (!(med_pred > 0.0)) {
      throw EvalError("median prediction is not positive; cannot median-scale");
    }
    const double ratio = median(d) / med_pred;
    for (double& v : d_hat) v *= ratio;
  }
  for (double& v : d_hat) {
    if (!std::isfinite(v)) v = options.max_depth;
    v = std::clamp(v, options.min_depth, options.max_depth);
  }

  double abs_rel = 0, sq_rel = 0, sq = 0, sq_log = 0;
  std::size_t a1 = 0, a2 = 0, a3 = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double diff = d[i] - d_hat[i];
    abs_rel += std::abs(diff) / d[i];
    sq_rel += diff * diff / d[i];
    sq += diff * diff;
    const double log_diff = std::log10(d[i]) - std::log10(d_hat[i]);
    sq_log += log_diff * log_diff;
    const double ratio = std::max(d[i] / d_hat[i], d_hat[i] / d[i]);
    if (ratio < 1.25) ++a1;
    if (ratio < 1.25 * 1.25) ++a2;
    if (ratio < 1.25 * 1.25 * 1.25) ++a3;
  }
  const double n = static_cast<double>(d.size());
  DepthMetrics m;
  m.abs_rel = abs_rel / n;
  m.sq_rel = sq_rel / n;
  m.rmse = std::sqrt(sq / n);
  m.rmse_log = std::sqrt(sq_log / n);
  m.delta1 = a1 / n;
  m.delta2 = a2 / n;
  m.delta3 = a3 / n;
  m.n_pixels = d.size();
  m.n_images = 1;
  return m;
}

DepthMetrics aggregate(std::span<const DepthMetrics> per_image) {
  if (per_image.empty()) throw EvalError("cannot aggregate zero images");
  DepthMetrics out;
  out.n_pixels = 0;
  out.n_images = 0;
  for (const DepthMetrics& m : per_image) {
    out.abs_rel += m.abs_rel;
    out.sq_rel += m.sq_rel;
    out.rmse += m.rmse;
    out.rmse_log += m.rmse_log;
    out.delta1 += m.delta1;
    out.delta2 += m.delta2;
    out.delta3 += m.delta3;
    out.n_pixels += m.n_pixels;
    out.n_images += m.n_images;
  }
  const double n = static_cast<double>(per_image.size());
  out.abs_rel /= n;
  out.sq_rel /= n;
  out.rmse /= n;
  out.rmse_log /= n;
  out.delta1 /= n;
  out.delta2 /= n;
  out.delta3 /= n;
  return out;
}

}  // namespace rtmd
