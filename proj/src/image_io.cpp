#include "rtmd/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>

namespace rtmd {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) {
    throw ImageFormatError("cannot open " + path.string());
  }
  return f;
}

struct PngReadState {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngReadState() { png_destroy_read_struct(&png, &info, nullptr); }
};

struct PngWriteState {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngWriteState() { png_destroy_write_struct(&png, &info); }
};

bool has_png_signature(std::FILE* f) {
  unsigned char sig[8] = {};
  const std::size_t got = std::fread(sig, 1, 8, f);
  std::rewind(f);
  return got == 8 && png_sig_cmp(sig, 0, 8) == 0;
}

// Decodes a PNG into rows of raw bytes. Returns bit depth and channel count
// as stored in the file (after expanding palettes to RGB).
struct RawPng {
  int height = 0;
  int width = 0;
  int bit_depth = 0;
  int channels = 0;
  int color_type = 0;
  std::vector<std::uint8_t> bytes;
};

RawPng decode_png(const std::filesystem::path& path) {
  FilePtr f = open_file(path, "rb");
  if (!has_png_signature(f.get())) {
    throw ImageFormatError(path.string() + " is not a PNG file");
  }
  PngReadState st;
  st.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!st.png) throw ImageFormatError("libpng: out of memory");
  st.info = png_create_info_struct(st.png);
  if (!st.info) throw ImageFormatError("libpng: out of memory");

  RawPng raw;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(st.png))) {
    throw ImageFormatError("corrupt PNG: " + path.string());
  }
  png_init_io(st.png, f.get());
  png_read_info(st.png, st.info);
  raw.width = static_cast<int>(png_get_image_width(st.png, st.info));
  raw.height = static_cast<int>(png_get_image_height(st.png, st.info));
  raw.color_type = png_get_color_type(st.png, st.info);
  if (raw.color_type == PNG_COLOR_TYPE_PALETTE) {
    png_set_palette_to_rgb(st.png);
  }
  if (png_get_bit_depth(st.png, st.info) == 16) {
    png_set_swap(st.png);  // host little-endian order for uint16 access
  }
  png_read_update_info(st.png, st.info);
  raw.bit_depth = png_get_bit_depth(st.png, st.info);
  raw.channels = png_get_channels(st.png, st.info);
  const std::size_t stride = png_get_rowbytes(st.png, st.info);
  raw.bytes.resize(stride * raw.height);
  rows.resize(raw.height);
  for (int y = 0; y < raw.height; ++y) rows[y] = raw.bytes.data() + stride * y;
  png_read_image(st.png, rows.data());
  png_read_end(st.png, nullptr);
  return raw;
}

void encode_png(const std::filesystem::path& path, int width, int height,
                int bit_depth, int color_type, const std::uint8_t* data,
                std::size_t stride) {
  FilePtr f = open_file(path, "wb");
  PngWriteState st;
  st.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!st.png) throw ImageFormatError("libpng: out of memory");
  st.info = png_create_info_struct(st.png);
  if (!st.info) throw ImageFormatError("libpng: out of memory");
  std::vector<png_bytep> rows(height);
  for (int y = 0; y < height; ++y) {
    rows[y] = const_cast<png_bytep>(data + stride * y);
  }
  if (setjmp(png_jmpbuf(st.png))) {
    throw ImageFormatError("failed writing PNG: " + path.string());
  }
  png_init_io(st.png, f.get());
  png_set_IHDR(st.png, st.info, width, height, bit_depth, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(st.png, st.info);
  if (bit_depth == 16) png_set_swap(st.png);
  png_write_image(st.png, rows.data());
  png_write_end(st.png, nullptr);
}

Tensor read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ImageFormatError("cannot open " + path.string());
  std::string magic;
  in >> magic;
  if (magic != "P6") {
    throw ImageFormatError(path.string() + " is neither PNG nor binary PPM (P6)");
  }
  auto next_int = [&]() {
    int v = 0;
    while (in >> std::ws && in.peek() == '#') {
      std::string comment;
      std::getline(in, comment);
    }
    if (!(in >> v)) throw ImageFormatError("malformed PPM header in " + path.string());
    return v;
  };
  const int width = next_int();
  const int height = next_int();
  const int maxval = next_int();
  if (maxval != 255 || width < 1 || height < 1) {
    throw ImageFormatError("only 8-bit PPM is supported: " + path.string());
  }
  in.get();  // single whitespace before raster
  std::vector<std::uint8_t> raster(static_cast<std::size_t>(width) * height * 3);
  in.read(reinterpret_cast<char*>(raster.data()),
          static_cast<std::streamsize>(raster.size()));
  if (in.gcount() != static_cast<std::streamsize>(raster.size())) {
    throw ImageFormatError("truncated PPM raster in " + path.string());
  }
  Tensor out({1, 3, height, width});
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      for (int c = 0; c < 3; ++c)
        out.at(0, c, y, x) =
            raster[(static_cast<std::size_t>(y) * width + x) * 3 + c] / 255.0f;
  return out;
}

}  // namespace

Gray16Image read_png16(const std::filesystem::path& path) {
  const RawPng raw = decode_png(path);
  if (raw.bit_depth != 16 || raw.channels != 1) {
    throw ImageFormatError(path.string() + ": expected a 16-bit single-channel PNG, got " +
                           std::to_string(raw.bit_depth) + "-bit with " +
                           std::to_string(raw.channels) + " channel(s)");
  }
  Gray16Image img;
  img.height = raw.height;
  img.width = raw.width;
  img.pixels.resize(static_cast<std::size_t>(raw.height) * raw.width);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    img.pixels[i] = static_cast<std::uint16_t>(raw.bytes[2 * i] |
                                               (raw.bytes[2 * i + 1] << 8));
  }
  return img;
}

void write_png16(const std::filesystem::path& path, const Gray16Image& img) {
  if (img.pixels.size() != static_cast<std::size_t>(img.height) * img.width ||
      img.height < 1 || img.width < 1) {
    throw ImageFormatError("invalid 16-bit image extents for " + path.string());
  }
  std::vector<std::uint8_t> bytes(img.pixels.size() * 2);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    bytes[2 * i] = static_cast<std::uint8_t>(img.pixels[i] & 0xFF);
    bytes[2 * i + 1] = static_cast<std::uint8_t>(img.pixels[i] >> 8);
  }
  encode_png(path, img.width, img.height, 16, PNG_COLOR_TYPE_GRAY, bytes.data(),
             static_cast<std::size_t>(img.width) * 2);
}

Tensor read_rgb(const std::filesystem::path& path) {
  {
    FilePtr f = open_file(path, "rb");
    if (!has_png_signature(f.get())) return read_ppm(path);
  }
  const RawPng raw = decode_png(path);
  if (raw.bit_depth != 8 || raw.channels != 3) {
    throw ImageFormatError(path.string() + ": expected an 8-bit RGB PNG, got " +
                           std::to_string(raw.bit_depth) + "-bit with " +
                           std::to_string(raw.channels) + " channel(s)");
  }
  Tensor out({1, 3, raw.height, raw.width});
  for (int y = 0; y < raw.height; ++y)
    for (int x = 0; x < raw.width; ++x)
      for (int c = 0; c < 3; ++c)
        out.at(0, c, y, x) =
            raw.bytes[(static_cast<std::size_t>(y) * raw.width + x) * 3 + c] / 255.0f;
  return out;
}

void write_rgb_png(const std::filesystem::path& path, const Tensor& image) {
  if (image.n() != 1 || image.c() != 3) {
    throw ShapeError("write_rgb_png expects 1x3xHxW, got " + to_string(image.shape()));
  }
  const int h = image.h(), w = image.w();
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(h) * w * 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) {
        const float v = std::clamp(image.at(0, c, y, x), 0.0f, 1.0f);
        bytes[(static_cast<std::size_t>(y) * w + x) * 3 + c] =
            static_cast<std::uint8_t>(std::lround(v * 255.0f));
      }
  encode_png(path, w, h, 8, PNG_COLOR_TYPE_RGB, bytes.data(),
             static_cast<std::size_t>(w) * 3);
}

}  // namespace rtmd
