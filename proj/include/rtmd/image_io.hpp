#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <vector>

#include "rtmd/tensor.hpp"

namespace rtmd {

/// Raised for unreadable or unsupported image files.
class ImageFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Single-channel 16-bit image, row-major.
struct Gray16Image {
  int height = 0;
  int width = 0;
  std::vector<std::uint16_t> pixels;
};

/// Reads a 16-bit single-channel PNG. Any other bit depth or colour type
/// is rejected.
Gray16Image read_png16(const std::filesystem::path& path);
void write_png16(const std::filesystem::path& path, const Gray16Image& img);

/// Reads an 8-bit RGB image (PNG, or binary PPM "P6") into a 1x3xHxW
/// tensor scaled to [0, 1].
Tensor read_rgb(const std::filesystem::path& path);
/// Writes a 1x3xHxW tensor in [0, 1] as an 8-bit RGB PNG.
void write_rgb_png(const std::filesystem::path& path, const Tensor& image);

}  // namespace rtmd
