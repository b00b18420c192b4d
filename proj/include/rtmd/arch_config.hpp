#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace rtmd {

/// Raised for invalid architecture descriptions.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// How a decoder stage merges the encoder skip feature of matching scale.
enum class Fusion : char { Add = '+', Concat = 'c', None = '.' };

struct Resolution {
  int height = 192;
  int width = 640;

  friend bool operator==(const Resolution&, const Resolution&) = default;
};

/// Parses "WxH" (e.g. "640x192"); throws ConfigError on malformed input.
Resolution parse_resolution(const std::string& text);
std::string format_resolution(const Resolution& r);

/// Complete description of one network variant.
///
/// `fusion` is ordered from the deepest fusion point to the shallowest, so
/// fusion[0] merges F_{levels-1} and fusion[levels-2] merges F_1.
struct ArchConfig {
  std::string variant = "rt-monodepth";
  int levels = 4;
  std::vector<int> channels{32, 64, 128, 256};
  int convs_per_block = 3;
  std::vector<Fusion> fusion{Fusion::Add, Fusion::Add, Fusion::Concat};
  int supervision_scales = 4;
  Resolution resolution{};

  /// Throws ConfigError describing the first violated invariant.
  void validate() const;

  friend bool operator==(const ArchConfig&, const ArchConfig&) = default;
};

/// Full RT-MonoDepth: 4 levels, three convs per block, "++c" fusion.
ArchConfig rt_monodepth();
/// RT-MonoDepth-S: no fusion, two convs per block, narrower widths.
ArchConfig rt_monodepth_s();
/// Looks up a named variant ("rt-monodepth" or "rt-monodepth-s").
ArchConfig variant_by_name(const std::string& name);

/// Channel schedule 32 * 2^(n-1) used for level sweeps.
std::vector<int> default_channels(int levels);

/// Parses a fusion pattern such as "++c". Accepts '.', '-' and the
/// middle dot U+00B7 as the no-fusion symbol.
std::vector<Fusion> parse_fusion(const std::string& text);
std::string format_fusion(const std::vector<Fusion>& pattern);

/// Key-value text form, one `key = value` per line, '#' starts a comment.
std::string serialize_config(const ArchConfig& cfg);
ArchConfig parse_config(const std::string& text);
ArchConfig load_config(const std::filesystem::path& path);
void save_config(const ArchConfig& cfg, const std::filesystem::path& path);

/// Stable 64-bit FNV-1a hash of the serialized config, as 16 hex digits.
std::string config_fingerprint(const ArchConfig& cfg);

std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace rtmd
