#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rtmd/arch_config.hpp"
#include "rtmd/kernels.hpp"
#include "rtmd/tensor.hpp"

namespace rtmd {

/// Raised when forward() runs on a network without weights.
class UnboundWeightsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class LayerRole { Encoder, UpConv, Head };

/// One 3x3 conv layer of the graph and the weight slot that feeds it.
struct ConvSpec {
  std::string slot;  // enc{n}.conv{k}, dec{n}.upconv, head{n}.conv{k}
  LayerRole role = LayerRole::Encoder;
  int in_channels = 0;
  int out_channels = 0;
  int stride = 1;
  Activation activation = Activation::LeakyRelu;
  int input_scale = 0;  // input resolution is 1/2^input_scale

  /// Expected (O, I, 3, 3) kernel extents.
  Shape kernel_shape() const { return {out_channels, in_channels, 3, 3}; }
};

/// Per-scale disparity maps in sigmoid space; disp[n] is D_n.
struct DepthOutputs {
  std::vector<Tensor> disp;

  bool has(int scale) const {
    return scale >= 0 && scale < static_cast<int>(disp.size());
  }
  const Tensor& at(int scale) const { return disp.at(scale); }
};

/// Shapes of every intermediate tensor produced by a forward pass.
using ForwardTrace = std::vector<std::pair<std::string, Shape>>;

/// An RT-MonoDepth graph built from an ArchConfig. Immutable once built;
/// binding weights or changing the active head count yields a new value
/// that shares the weight storage.
class Network {
 public:
  explicit Network(ArchConfig cfg);

  const ArchConfig& config() const { return cfg_; }
  const std::vector<ConvSpec>& layers() const { return layers_; }
  const ConvSpec* find_layer(const std::string& slot) const;

  /// Channel width of the fused decoder feature at scale s (0 = full res).
  int decoder_channels(int scale) const { return decoder_channels_.at(scale); }

  int active_heads() const { return active_heads_; }
  /// Keeps heads [0, count) running in forward(); count in [1, scales].
  Network with_active_heads(int count) const;

  bool is_bound() const { return weights_ != nullptr; }
  /// Attaches one ConvWeights per layer, in layers() order. Throws
  /// ShapeError naming the slot on any extent mismatch.
  Network with_weights(std::vector<ConvWeights> weights) const;
  const ConvWeights& weights_for(std::size_t layer_index) const;

  DepthOutputs forward(const Tensor& image, ForwardTrace* trace = nullptr) const;

 private:
  ArchConfig cfg_;
  std::vector<ConvSpec> layers_;
  std::vector<int> decoder_channels_;
  int active_heads_ = 1;
  std::shared_ptr<const std::vector<ConvWeights>> weights_;
};

/// Validates the config (including '+' channel compatibility) and builds
/// the graph with every supervision head active.
Network build_network(const ArchConfig& cfg);

/// Weight elements (kernels + biases) of every layer in the config.
std::int64_t count_params(const ArchConfig& cfg);
/// Multiply-accumulates of one forward pass at batch 1. `heads` limits the
/// prediction heads counted; by default all supervision heads run.
std::int64_t count_flops(const ArchConfig& cfg,
                         std::optional<int> heads = std::nullopt);

struct LayerCost {
  ConvSpec spec;
  int out_height = 0;
  int out_width = 0;
  std::int64_t params = 0;
  std::int64_t macs = 0;
};
std::vector<LayerCost> layer_costs(const ArchConfig& cfg);

/// Monodepth2 reciprocal mapping from sigmoid disparity to metric depth.
inline constexpr float kDefaultMinDepth = 0.1f;
inline constexpr float kDefaultMaxDepth = 100.0f;
float disp_to_depth(float disp, float min_depth, float max_depth);
Tensor disp_to_depth(const Tensor& disp, float min_depth = kDefaultMinDepth,
                     float max_depth = kDefaultMaxDepth);

}  // namespace rtmd
