#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "rtmd/arch_config.hpp"
#include "rtmd/network.hpp"

namespace rtmd {

enum class DType : std::uint8_t { F32 = 0, F16 = 1 };

/// One named tensor. Exactly one of `f32` / `f16_bits` is populated,
/// according to `dtype`.
struct WeightEntry {
  std::string name;
  DType dtype = DType::F32;
  std::vector<std::uint32_t> extents;
  std::vector<float> f32;
  std::vector<std::uint16_t> f16_bits;

  std::uint64_t element_count() const;
  /// Values widened to f32.
  std::vector<float> as_f32() const;

  friend bool operator==(const WeightEntry&, const WeightEntry&) = default;
};

/// Ordered collection of uniquely named tensors.
class WeightStore {
 public:
  /// Appends an entry; throws std::invalid_argument on a duplicate name or
  /// a payload whose length does not match the extents.
  void add(WeightEntry entry);
  const WeightEntry* find(const std::string& name) const;

  const std::vector<WeightEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  /// Removes an entry by name; returns false if it was not present.
  bool erase(const std::string& name);

  friend bool operator==(const WeightStore& a, const WeightStore& b) {
    return a.entries_ == b.entries_;
  }

 private:
  std::vector<WeightEntry> entries_;
  std::map<std::string, std::size_t> index_;
};

/// Entry names for a conv slot.
std::string weight_name(const std::string& slot);  // "<slot>.weight"
std::string bias_name(const std::string& slot);    // "<slot>.bias"

/// He (fan-in) normal initialization, std = sqrt(2 / (in_channels * 9)),
/// biases zero. Each slot draws from mt19937_64 seeded by (seed, slot name),
/// so a slot's values do not depend on which other slots exist.
WeightStore init_random(const ArchConfig& cfg, std::uint64_t seed);

// --- "RTMD" binary format -------------------------------------------------
//
//   magic   "RTMD" (4 bytes)
//   u16     version = 1
//   u32     entry count
//   per entry:
//     u16   name length, then that many UTF-8 bytes
//     u8    dtype (0 = f32, 1 = f16)
//     u8    rank (0..4)
//     u32   extent x rank
//     data  little-endian, product(extents) elements
//
// All integers are little-endian.

inline constexpr std::uint16_t kFormatVersion = 1;

enum class ParseErrorKind {
  BadMagic,
  UnsupportedVersion,
  Truncated,
  DuplicateName,
  ExtentOverflow,
  BadDType,
  BadRank,
  TrailingBytes,
  Io,
};

const char* to_string(ParseErrorKind kind);

class WeightParseError : public std::runtime_error {
 public:
  WeightParseError(ParseErrorKind kind, const std::string& detail);
  ParseErrorKind kind() const { return kind_; }

 private:
  ParseErrorKind kind_;
};

std::vector<std::uint8_t> serialize_weights(const WeightStore& store);
WeightStore parse_weights(const std::vector<std::uint8_t>& bytes);

void save_weights(const WeightStore& store, const std::filesystem::path& path);
WeightStore load_weights(const std::filesystem::path& path);

// --- binding ----------------------------------------------------------------

class BindError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BindOptions {
  /// Accept entries that match no slot instead of failing.
  bool allow_extra = false;
};

struct BindResult {
  Network network;
  std::vector<std::string> ignored_entries;
};

/// Matches every layer slot of `net` to `<slot>.weight` / `<slot>.bias`
/// with exact extent checks; f16 entries are widened to f32.
BindResult bind_weights(const Network& net, const WeightStore& store,
                        const BindOptions& options = {});
Network bind(const Network& net, const WeightStore& store,
             const BindOptions& options = {});

}  // namespace rtmd
