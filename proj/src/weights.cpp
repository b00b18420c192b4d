#include "rtmd/weights.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>

#include "rtmd/half.hpp"

namespace rtmd {

namespace {

// Declared tensors above this element count are rejected outright.
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 40;

std::string extents_string(const std::vector<std::uint32_t>& e) {
  std::string s;
  for (std::size_t i = 0; i < e.size(); ++i) {
    s += (i ? "x" : "") + std::to_string(e[i]);
  }
  return s.empty() ? "scalar" : s;
}

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) {
    for (int i = 0; i < 2; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : b_(bytes) {}

  std::size_t remaining() const { return b_.size() - pos_; }

  void need(std::size_t n, const char* what) const {
    if (remaining() < n) {
      throw WeightParseError(ParseErrorKind::Truncated,
                             std::string("file ends inside ") + what);
    }
  }
  std::uint8_t u8(const char* what) {
    need(1, what);
    return b_[pos_++];
  }
  std::uint16_t u16(const char* what) {
    need(2, what);
    std::uint16_t v = static_cast<std::uint16_t>(b_[pos_] | (b_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b_[pos_ + i];
    pos_ += 4;
    return v;
  }
  const std::uint8_t* take(std::size_t n, const char* what) {
    need(n, what);
    const std::uint8_t* p = b_.data() + pos_;
    pos_ += n;
    return p;
  }

 private:
  const std::vector<std::uint8_t>& b_;
  std::size_t pos_ = 0;
};

ConvWeights resolve_slot(const ConvSpec& spec, const WeightStore& store) {
  const std::string wname = weight_name(spec.slot);
  const std::string bname = bias_name(spec.slot);
  const WeightEntry* w = store.find(wname);
  const WeightEntry* b = store.find(bname);
  if (!w || !b) {
    throw BindError("missing weights for slot '" + spec.slot + "' (entry '" +
                    (!w ? wname : bname) + "' not found)");
  }
  const Shape ks = spec.kernel_shape();
  const std::vector<std::uint32_t> want_w{
      static_cast<std::uint32_t>(ks.n), static_cast<std::uint32_t>(ks.c), 3, 3};
  const std::vector<std::uint32_t> want_b{static_cast<std::uint32_t>(ks.n)};
  if (w->extents != want_w) {
    throw BindError("extent mismatch for slot '" + spec.slot + "': expected " +
                    extents_string(want_w) + ", got " +
                    extents_string(w->extents));
  }
  if (b->extents != want_b) {
    throw BindError("extent mismatch for slot '" + spec.slot + "' bias: expected " +
                    extents_string(want_b) + ", got " +
                    extents_string(b->extents));
  }
  return ConvWeights{Tensor(ks, w->as_f32()), b->as_f32()};
}

}  // namespace

std::uint64_t WeightEntry::element_count() const {
  std::uint64_t n = 1;
  for (std::uint32_t e : extents) n *= e;
  return n;
}

std::vector<float> WeightEntry::as_f32() const {
  if (dtype == DType::F32) return f32;
  std::vector<float> out(f16_bits.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = half_to_float(f16_bits[i]);
  return out;
}

void WeightStore::add(WeightEntry entry) {
  if (entry.extents.size() > 4) {
    throw std::invalid_argument("entry '" + entry.name + "' has rank " +
                                std::to_string(entry.extents.size()) +
                                " (max 4)");
  }
  const std::size_t have =
      entry.dtype == DType::F32 ? entry.f32.size() : entry.f16_bits.size();
  if (have != entry.element_count()) {
    throw std::invalid_argument("entry '" + entry.name + "' has " +
                                std::to_string(have) + " values for extents " +
                                extents_string(entry.extents));
  }
  if (index_.count(entry.name)) {
    throw std::invalid_argument("duplicate weight name '" + entry.name + "'");
  }
  index_.emplace(entry.name, entries_.size());
  entries_.push_back(std::move(entry));
}

const WeightEntry* WeightStore::find(const std::string& name) const {
  const auto it = index_.find(name);
  return it == index_.end() ? nullptr : &entries_[it->second];
}

bool WeightStore::erase(const std::string& name) {
  const auto it = index_.find(name);
  if (it == index_.end()) return false;
  entries_.erase(entries_.begin() + static_cast<std::ptrdiff_t>(it->second));
  index_.clear();
  for (std::size_t i = 0; i < entries_.size(); ++i) index_[entries_[i].name] = i;
  return true;
}

std::string weight_name(const std::string& slot) { return slot + ".weight"; }
std::string bias_name(const std::string& slot) { return slot + ".bias"; }

WeightStore init_random(const ArchConfig& cfg, std::uint64_t seed) {
  const Network net = build_network(cfg);
  WeightStore store;
  for (const ConvSpec& spec : net.layers()) {
    const std::uint64_t name_hash = fnv1a64(spec.slot);
    std::seed_seq seq{static_cast<std::uint32_t>(seed),
                      static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(name_hash),
                      static_cast<std::uint32_t>(name_hash >> 32)};
    std::mt19937_64 rng(seq);
    const double stddev = std::sqrt(2.0 / (spec.in_channels * 9.0));
    std::normal_distribution<float> dist(0.0f, static_cast<float>(stddev));

    WeightEntry w;
    w.name = weight_name(spec.slot);
    const Shape ks = spec.kernel_shape();
    w.extents = {static_cast<std::uint32_t>(ks.n),
                 static_cast<std::uint32_t>(ks.c), 3, 3};
    w.f32.resize(ks.numel());
    for (float& v : w.f32) v = dist(rng);

    WeightEntry b;
    b.name = bias_name(spec.slot);
    b.extents = {static_cast<std::uint32_t>(ks.n)};
    b.f32.assign(ks.n, 0.0f);

    store.add(std::move(w));
    store.add(std::move(b));
  }
  return store;
}

const char* to_string(ParseErrorKind kind) {
  switch (kind) {
    case ParseErrorKind::BadMagic: return "bad magic";
    case ParseErrorKind::UnsupportedVersion: return "unsupported version";
    case ParseErrorKind::Truncated: return "truncated";
    case ParseErrorKind::DuplicateName: return "duplicate name";
    case ParseErrorKind::ExtentOverflow: return "extent overflow";
    case ParseErrorKind::BadDType: return "bad dtype";
    case ParseErrorKind::BadRank: return "bad rank";
    case ParseErrorKind::TrailingBytes: return "trailing bytes";
    case ParseErrorKind::Io: return "i/o error";
  }
  return "unknown";
}

WeightParseError::WeightParseError(ParseErrorKind kind, const std::string& detail)
    : std::runtime_error(std::string(to_string(kind)) + ": " + detail),
      kind_(kind) {}

std::vector<std::uint8_t> serialize_weights(const WeightStore& store) {
  Writer w;
  w.bytes("RTMD", 4);
  w.u16(kFormatVersion);
  w.u32(static_cast<std::uint32_t>(store.size()));
  for (const WeightEntry& e : store.entries()) {
    w.u16(static_cast<std::uint16_t>(e.name.size()));
    w.bytes(e.name.data(), e.name.size());
    w.u8(static_cast<std::uint8_t>(e.dtype));
    w.u8(static_cast<std::uint8_t>(e.extents.size()));
    for (std::uint32_t x : e.extents) w.u32(x);
    if (e.dtype == DType::F32) {
      for (float v : e.f32) {
        std::uint32_t bits;
        std::memcpy(&bits, &v, 4);
        w.u32(bits);
      }
    } else {
      for (std::uint16_t v : e.f16_bits) w.u16(v);
    }
  }
  return w.take();
}

WeightStore parse_weights(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  const std::uint8_t* magic = r.take(4, "magic");
  if (std::memcmp(magic, "RTMD", 4) != 0) {
    throw WeightParseError(ParseErrorKind::BadMagic,
                           "file does not start with \"RTMD\"");
  }
  const std::uint16_t version = r.u16("version");
  if (version != kFormatVersion) {
    throw WeightParseError(ParseErrorKind::UnsupportedVersion,
                           "version " + std::to_string(version));
  }
  const std::uint32_t count = r.u32("entry count");
  WeightStore store;
  for (std::uint32_t i = 0; i < count; ++i) {
    WeightEntry e;
    const std::uint16_t name_len = r.u16("name length");
    const std::uint8_t* name = r.take(name_len, "entry name");
    e.name.assign(reinterpret_cast<const char*>(name), name_len);
    if (store.find(e.name)) {
      throw WeightParseError(ParseErrorKind::DuplicateName,
                             "entry '" + e.name + "' appears twice");
    }
    const std::uint8_t dtype = r.u8("dtype");
    if (dtype > 1) {
      throw WeightParseError(ParseErrorKind::BadDType,
                             "entry '" + e.name + "' has dtype code " +
                                 std::to_string(dtype));
    }
    e.dtype = static_cast<DType>(dtype);
    const std::uint8_t rank = r.u8("rank");
    if (rank > 4) {
      throw WeightParseError(ParseErrorKind::BadRank,
                             "entry '" + e.name + "' has rank " +
                                 std::to_string(rank));
    }
    std::uint64_t elements = 1;
    for (int k = 0; k < rank; ++k) {
      const std::uint32_t x = r.u32("extents");
      e.extents.push_back(x);
      if (x != 0 && elements > kMaxElements / x) {
        throw WeightParseError(ParseErrorKind::ExtentOverflow,
                               "entry '" + e.name + "' declares more than 2^40 elements");
      }
      elements *= x;
    }
    const std::size_t elem_size = e.dtype == DType::F32 ? 4 : 2;
    const std::uint8_t* data = r.take(elements * elem_size, "tensor data");
    if (e.dtype == DType::F32) {
      e.f32.resize(elements);
      for (std::uint64_t k = 0; k < elements; ++k) {
        const std::uint8_t* p = data + 4 * k;
        const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) |
                                   static_cast<std::uint32_t>(p[1]) << 8 |
                                   static_cast<std::uint32_t>(p[2]) << 16 |
                                   static_cast<std::uint32_t>(p[3]) << 24;
        std::memcpy(&e.f32[k], &bits, 4);
      }
    } else {
      e.f16_bits.resize(elements);
      for (std::uint64_t k = 0; k < elements; ++k) {
        e.f16_bits[k] =
            static_cast<std::uint16_t>(data[2 * k] | (data[2 * k + 1] << 8));
      }
    }
    store.add(std::move(e));
  }
  if (r.remaining() != 0) {
    throw WeightParseError(ParseErrorKind::TrailingBytes,
                           std::to_string(r.remaining()) +
                               " bytes after the last entry");
  }
  return store;
}

void save_weights(const WeightStore& store, const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = serialize_weights(store);
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw WeightParseError(ParseErrorKind::Io, "cannot open " + path.string() +
                                                   " for writing");
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw WeightParseError(ParseErrorKind::Io, "write failed for " + path.string());
  }
}

WeightStore load_weights(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw WeightParseError(ParseErrorKind::Io, "cannot open " + path.string());
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return parse_weights(bytes);
}

BindResult bind_weights(const Network& net, const WeightStore& store,
                        const BindOptions& options) {
  std::vector<ConvWeights> weights;
  weights.reserve(net.layers().size());
  for (const ConvSpec& spec : net.layers()) {
    weights.push_back(resolve_slot(spec, store));
  }

  std::vector<std::string> extra;
  for (const WeightEntry& e : store.entries()) {
    const auto dot = e.name.rfind('.');
    const std::string slot = dot == std::string::npos ? e.name : e.name.substr(0, dot);
    const bool known = net.find_layer(slot) &&
                       (e.name == weight_name(slot) || e.name == bias_name(slot));
    if (!known) extra.push_back(e.name);
  }
  if (!extra.empty() && !options.allow_extra) {
    std::ostringstream msg;
    msg << extra.size() << " weight entries match no slot:";
    for (const std::string& name : extra) msg << " '" << name << "'";
    msg << " (use --allow-extra to ignore them)";
    throw BindError(msg.str());
  }
  return {net.with_weights(std::move(weights)), std::move(extra)};
}

Network bind(const Network& net, const WeightStore& store,
             const BindOptions& options) {
  return bind_weights(net, store, options).network;
}

}  // namespace rtmd
