#include "rtmd/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rtmd {

std::string to_string(const Shape& s) {
  std::ostringstream os;
  os << s.n << "x" << s.c << "x" << s.h << "x" << s.w;
  return os.str();
}

namespace {

void check_extents(const Shape& s) {
  if (s.n < 1 || s.c < 1 || s.h < 1 || s.w < 1) {
    throw ShapeError("tensor extents must all be >= 1, got " + to_string(s));
  }
}

}  // namespace

Tensor::Tensor(Shape shape, float fill) : shape_(shape) {
  check_extents(shape_);
  data_.assign(shape_.numel(), fill);
}

Tensor::Tensor(Shape shape, std::vector<float> values)
    : shape_(shape), data_(std::move(values)) {
  check_extents(shape_);
  if (data_.size() != shape_.numel()) {
    throw ShapeError("tensor " + to_string(shape_) + " needs " +
                     std::to_string(shape_.numel()) + " values, got " +
                     std::to_string(data_.size()));
  }
}

Tensor Tensor::slice_channels(int begin, int end) const {
  if (begin < 0 || end > shape_.c || begin >= end) {
    throw ShapeError("channel slice [" + std::to_string(begin) + ", " +
                     std::to_string(end) + ") out of range for " +
                     to_string(shape_));
  }
  Tensor out({shape_.n, end - begin, shape_.h, shape_.w});
  const std::size_t plane_size = shape_.plane();
  for (int n = 0; n < shape_.n; ++n) {
    const float* src = plane(n, begin);
    std::copy(src, src + (end - begin) * plane_size, out.plane(n, 0));
  }
  return out;
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](float v) { return std::isfinite(v); });
}

void ConvWeights::validate() const {
  const Shape& k = kernel.shape();
  if (k.h != 3 || k.w != 3) {
    throw ShapeError("conv kernel must be O x I x 3 x 3, got " + to_string(k));
  }
  if (bias.size() != static_cast<std::size_t>(k.n)) {
    throw ShapeError("conv bias has " + std::to_string(bias.size()) +
                     " values for " + std::to_string(k.n) +
                     " output channels");
  }
}

}  // namespace rtmd
