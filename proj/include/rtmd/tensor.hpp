#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rtmd {

/// Raised when tensor extents are incompatible with an operation.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Extents of a 4-D feature map in N, C, H, W order.
struct Shape {
  int n = 1;
  int c = 1;
  int h = 1;
  int w = 1;

  std::size_t numel() const {
    return static_cast<std::size_t>(n) * c * h * w;
  }
  std::size_t plane() const { return static_cast<std::size_t>(h) * w; }

  friend bool operator==(const Shape&, const Shape&) = default;
};

std::string to_string(const Shape& s);

/// Dense float32 tensor, contiguous N->C->H->W.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, float fill = 0.0f);
  Tensor(Shape shape, std::vector<float> values);

  const Shape& shape() const { return shape_; }
  int n() const { return shape_.n; }
  int c() const { return shape_.c; }
  int h() const { return shape_.h; }
  int w() const { return shape_.w; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }
  const std::vector<float>& values() const { return data_; }

  float& at(int n, int c, int y, int x) { return data_[offset(n, c, y, x)]; }
  float at(int n, int c, int y, int x) const {
    return data_[offset(n, c, y, x)];
  }

  /// Pointer to the start of plane (n, c).
  float* plane(int n, int c) { return data_.data() + plane_offset(n, c); }
  const float* plane(int n, int c) const {
    return data_.data() + plane_offset(n, c);
  }

  /// Copies channels [begin, end) of every batch item.
  Tensor slice_channels(int begin, int end) const;

  bool all_finite() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::size_t plane_offset(int n, int c) const {
    return (static_cast<std::size_t>(n) * shape_.c + c) * shape_.plane();
  }
  std::size_t offset(int n, int c, int y, int x) const {
    return plane_offset(n, c) + static_cast<std::size_t>(y) * shape_.w + x;
  }

  Shape shape_{0, 0, 0, 0};
  std::vector<float> data_;
};

/// 3x3 convolution parameters: kernel is (O, I, 3, 3), bias has O values.
struct ConvWeights {
  Tensor kernel;
  std::vector<float> bias;

  int out_channels() const { return kernel.n(); }
  int in_channels() const { return kernel.c(); }

  /// Throws ShapeError unless kernel is O x I x 3 x 3 and bias has O values.
  void validate() const;
};

}  // namespace rtmd
