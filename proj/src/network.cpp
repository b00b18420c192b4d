#include "rtmd/network.hpp"

#include <algorithm>

namespace rtmd {

namespace {

struct Plan {
  std::vector<ConvSpec> layers;
  std::vector<int> decoder_channels;  // indexed by scale 0..levels-1
};

Plan plan_layers(const ArchConfig& cfg) {
  cfg.validate();
  Plan plan;
  const int levels = cfg.levels;

  for (int n = 1; n <= levels; ++n) {
    const int width = cfg.channels[n - 1];
    for (int k = 1; k <= cfg.convs_per_block; ++k) {
      ConvSpec s;
      s.slot = "enc" + std::to_string(n) + ".conv" + std::to_string(k);
      s.role = LayerRole::Encoder;
      s.in_channels = k == 1 ? (n == 1 ? 3 : cfg.channels[n - 2]) : width;
      s.out_channels = width;
      s.stride = k == 1 ? 2 : 1;
      s.input_scale = k == 1 ? n - 1 : n;
      plan.layers.push_back(s);
    }
  }

  plan.decoder_channels.assign(levels, 0);
  int width = cfg.channels[levels - 1];
  for (int j = levels; j >= 1; --j) {
    ConvSpec up;
    up.slot = "dec" + std::to_string(j) + ".upconv";
    up.role = LayerRole::UpConv;
    up.in_channels = width;
    up.out_channels = std::max(1, width / 2);
    up.input_scale = j;
    plan.layers.push_back(up);

    const int scale = j - 1;
    width = up.out_channels;
    if (scale >= 1) {
      const Fusion f = cfg.fusion[levels - j];
      const int skip = cfg.channels[scale - 1];
      if (f == Fusion::Add && width != skip) {
        throw ConfigError("'+' fusion at F" + std::to_string(scale) +
                          " needs equal widths: decoder has " +
                          std::to_string(width) + ", skip has " +
                          std::to_string(skip));
      }
      if (f == Fusion::Concat) width += skip;
    }
    plan.decoder_channels[scale] = width;

    if (scale < cfg.supervision_scales) {
      const std::string head = "head" + std::to_string(scale);
      ConvSpec c1;
      c1.slot = head + ".conv1";
      c1.role = LayerRole::Head;
      c1.in_channels = width;
      c1.out_channels = width;
      c1.input_scale = scale;
      ConvSpec c2 = c1;
      c2.slot = head + ".conv2";
      c2.out_channels = 1;
      c2.activation = Activation::Sigmoid;
      plan.layers.push_back(c1);
      plan.layers.push_back(c2);
    }
  }
  return plan;
}

std::int64_t conv_params(const ConvSpec& s) {
  return static_cast<std::int64_t>(s.out_channels) * s.in_channels * 9 +
         s.out_channels;
}

}  // namespace

Network::Network(ArchConfig cfg) : cfg_(std::move(cfg)) {
  Plan plan = plan_layers(cfg_);
  layers_ = std::move(plan.layers);
  decoder_channels_ = std::move(plan.decoder_channels);
  active_heads_ = cfg_.supervision_scales;
}

Network build_network(const ArchConfig& cfg) { return Network(cfg); }

const ConvSpec* Network::find_layer(const std::string& slot) const {
  for (const ConvSpec& s : layers_) {
    if (s.slot == slot) return &s;
  }
  return nullptr;
}

Network Network::with_active_heads(int count) const {
  if (count < 1 || count > cfg_.supervision_scales) {
    throw ConfigError("active head count must be in [1, " +
                      std::to_string(cfg_.supervision_scales) + "], got " +
                      std::to_string(count));
  }
  Network out = *this;
  out.active_heads_ = count;
  return out;
}

Network Network::with_weights(std::vector<ConvWeights> weights) const {
  if (weights.size() != layers_.size()) {
    throw ShapeError("network has " + std::to_string(layers_.size()) +
                     " layers, got weights for " +
                     std::to_string(weights.size()));
  }
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const Shape want = layers_[i].kernel_shape();
    const Shape& got = weights[i].kernel.shape();
    if (got != want || weights[i].bias.size() !=
                           static_cast<std::size_t>(want.n)) {
      throw ShapeError("slot '" + layers_[i].slot + "': expected kernel " +
                       to_string(want) + ", got " + to_string(got) +
                       " with " + std::to_string(weights[i].bias.size()) +
                       " bias values");
    }
  }
  Network out = *this;
  out.weights_ =
      std::make_shared<const std::vector<ConvWeights>>(std::move(weights));
  return out;
}

const ConvWeights& Network::weights_for(std::size_t layer_index) const {
  if (!weights_) {
    throw UnboundWeightsError("no weights bound for slot '" +
                              layers_.at(layer_index).slot + "'");
  }
  return weights_->at(layer_index);
}

DepthOutputs Network::forward(const Tensor& image, ForwardTrace* trace) const {
  const Resolution& res = cfg_.resolution;
  if (image.c() != 3 || image.h() != res.height || image.w() != res.width) {
    throw ShapeError("input image is " + to_string(image.shape()) +
                     ", network expects N x 3 x " +
                     std::to_string(res.height) + " x " +
                     std::to_string(res.width));
  }
  if (!weights_) {
    throw UnboundWeightsError("no weights bound for slot '" +
                              layers_.front().slot + "'");
  }
  auto record = [trace](const std::string& name, const Tensor& t) {
    if (trace) trace->emplace_back(name, t.shape());
  };

  std::size_t layer = 0;
  auto run = [&](const Tensor& x) {
    const ConvSpec& s = layers_[layer];
    Tensor y = conv2d(x, (*weights_)[layer], s.stride);
    activation_inplace(y, s.activation);
    ++layer;
    return y;
  };

  const int levels = cfg_.levels;
  std::vector<Tensor> features;
  features.reserve(levels + 1);
  features.push_back(image);
  for (int n = 1; n <= levels; ++n) {
    Tensor x = run(features.back());
    for (int k = 1; k < cfg_.convs_per_block; ++k) x = run(x);
    record("F" + std::to_string(n), x);
    features.push_back(std::move(x));
  }

  DepthOutputs out;
  out.disp.resize(active_heads_);
  Tensor x = features[levels];
  for (int j = levels; j >= 1; --j) {
    x = upsample_nearest2x(run(x));
    const int scale = j - 1;
    record("dec" + std::to_string(j) + ".up", x);
    if (scale >= 1) {
      switch (cfg_.fusion[levels - j]) {
        case Fusion::Add:
          x = add(x, features[scale]);
          break;
        case Fusion::Concat:
          x = concat_channels(x, features[scale]);
          break;
        case Fusion::None:
          break;
      }
      record("X" + std::to_string(scale), x);
    }
    if (scale < cfg_.supervision_scales) {
      if (scale < active_heads_) {
        Tensor d = run(run(x));
        record("D" + std::to_string(scale), d);
        out.disp[scale] = std::move(d);
      } else {
        layer += 2;
      }
    }
  }
  return out;
}

std::vector<LayerCost> layer_costs(const ArchConfig& cfg) {
  const Plan plan = plan_layers(cfg);
  std::vector<LayerCost> out;
  for (const ConvSpec& s : plan.layers) {
    LayerCost c;
    c.spec = s;
    const int in_h = cfg.resolution.height >> s.input_scale;
    const int in_w = cfg.resolution.width >> s.input_scale;
    c.out_height = conv_out_extent(in_h, s.stride);
    c.out_width = conv_out_extent(in_w, s.stride);
    c.params = conv_params(s);
    c.macs = static_cast<std::int64_t>(s.out_channels) * s.in_channels * 9 *
             c.out_height * c.out_width;
    out.push_back(c);
  }
  return out;
}

std::int64_t count_params(const ArchConfig& cfg) {
  std::int64_t total = 0;
  for (const LayerCost& c : layer_costs(cfg)) total += c.params;
  return total;
}

std::int64_t count_flops(const ArchConfig& cfg, std::optional<int> heads) {
  const int active = heads.value_or(cfg.supervision_scales);
  std::int64_t total = 0;
  for (const LayerCost& c : layer_costs(cfg)) {
    if (c.spec.role == LayerRole::Head && c.spec.input_scale >= active) {
      continue;
    }
    total += c.macs;
  }
  return total;
}

float disp_to_depth(float disp, float min_depth, float max_depth) {
  const float min_disp = 1.0f / max_depth;
  const float max_disp = 1.0f / min_depth;
  return 1.0f / (min_disp + (max_disp - min_disp) * disp);
}

Tensor disp_to_depth(const Tensor& disp, float min_depth, float max_depth) {
  Tensor out = disp;
  for (float& v : out.data()) v = disp_to_depth(v, min_depth, max_depth);
  return out;
}

}  // namespace rtmd
