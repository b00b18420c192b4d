#pragma once

#include "rtmd/tensor.hpp"

// Numeric kernels used by the network. The functions in `rtmd` are the
// OpenMP-parallel production kernels; `rtmd::serial` holds straightforward
// single-threaded versions kept as a reference for tests and benchmarks.
//
// Every 3x3 convolution uses zero padding of 1, so a stride-s conv maps
// H x W to ceil(H/s) x ceil(W/s).

namespace rtmd {

enum class Activation { LeakyRelu, Sigmoid };

inline constexpr float kLeakySlope = 0.01f;

/// Upper clamp of the sigmoid so its output never rounds to exactly 1.
inline constexpr float kSigmoidMax = 1.0f - 5.9604645e-8f;  // 1 - 2^-24
/// Lower clamp of the sigmoid (smallest normal float).
inline constexpr float kSigmoidMin = 1.17549435e-38f;

Tensor conv2d(const Tensor& input, const ConvWeights& w, int stride);
Tensor activation(const Tensor& input, Activation kind);
void activation_inplace(Tensor& t, Activation kind);
Tensor upsample_nearest2x(const Tensor& input);
Tensor add(const Tensor& a, const Tensor& b);
Tensor concat_channels(const Tensor& a, const Tensor& b);

float leaky_relu(float x);
float sigmoid(float x);

/// Output spatial extent of a padded 3x3 conv.
inline int conv_out_extent(int extent, int stride) {
  return (extent + stride - 1) / stride;
}

/// Throws ShapeError if the conv preconditions do not hold.
void check_conv_args(const Tensor& input, const ConvWeights& w, int stride);

namespace serial {

Tensor conv2d(const Tensor& input, const ConvWeights& w, int stride);
Tensor activation(const Tensor& input, Activation kind);
Tensor upsample_nearest2x(const Tensor& input);
Tensor add(const Tensor& a, const Tensor& b);
Tensor concat_channels(const Tensor& a, const Tensor& b);

}  // namespace serial

}  // namespace rtmd
