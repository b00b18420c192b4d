#include "rtmd/arch_config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace rtmd {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

int parse_int(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  int value = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size()) {
    throw ConfigError("config key '" + key + "': expected an integer, got '" +
                      text + "'");
  }
  return value;
}

std::vector<int> parse_int_list(const std::string& key,
                                const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_int(key, item));
  if (out.empty()) {
    throw ConfigError("config key '" + key + "': empty list");
  }
  return out;
}

}  // namespace

Resolution parse_resolution(const std::string& text) {
  const auto x = text.find_first_of("xX");
  if (x == std::string::npos) {
    throw ConfigError("resolution must look like WxH, got '" + text + "'");
  }
  Resolution r;
  r.width = parse_int("resolution", text.substr(0, x));
  r.height = parse_int("resolution", text.substr(x + 1));
  if (r.width < 1 || r.height < 1) {
    throw ConfigError("resolution extents must be positive, got '" + text +
                      "'");
  }
  return r;
}

std::string format_resolution(const Resolution& r) {
  return std::to_string(r.width) + "x" + std::to_string(r.height);
}

void ArchConfig::validate() const {
  if (levels < 2 || levels > 5) {
    throw ConfigError("levels must be in [2, 5], got " +
                      std::to_string(levels));
  }
  if (static_cast<int>(channels.size()) != levels) {
    throw ConfigError("channels lists " + std::to_string(channels.size()) +
                      " widths for " + std::to_string(levels) + " levels");
  }
  for (int c : channels) {
    if (c < 1) throw ConfigError("every channel width must be >= 1");
  }
  if (convs_per_block < 1) {
    throw ConfigError("convs_per_block must be >= 1, got " +
                      std::to_string(convs_per_block));
  }
  if (static_cast<int>(fusion.size()) != levels - 1) {
    throw ConfigError("fusion pattern '" + format_fusion(fusion) +
                      "' has length " + std::to_string(fusion.size()) +
                      ", expected levels - 1 = " + std::to_string(levels - 1));
  }
  if (supervision_scales < 1 || supervision_scales > 4 ||
      supervision_scales > levels) {
    throw ConfigError("supervision_scales must be in [1, min(4, levels)], got " +
                      std::to_string(supervision_scales));
  }
  const int div = 1 << levels;
  if (resolution.height % div != 0 || resolution.width % div != 0) {
    throw ConfigError("resolution " + format_resolution(resolution) +
                      " is not divisible by 2^levels = " + std::to_string(div));
  }
}

std::vector<int> default_channels(int levels) {
  std::vector<int> out;
  for (int n = 1; n <= levels; ++n) out.push_back(32 << (n - 1));
  return out;
}

ArchConfig rt_monodepth() { return ArchConfig{}; }

ArchConfig rt_monodepth_s() {
  ArchConfig cfg;
  cfg.variant = "rt-monodepth-s";
  cfg.channels = {28, 56, 112, 224};
  cfg.convs_per_block = 2;
  cfg.fusion = {Fusion::None, Fusion::None, Fusion::None};
  return cfg;
}

ArchConfig variant_by_name(const std::string& name) {
  if (name == "rt-monodepth") return rt_monodepth();
  if (name == "rt-monodepth-s") return rt_monodepth_s();
  throw ConfigError("unknown variant '" + name +
                    "' (expected rt-monodepth or rt-monodepth-s)");
}

std::vector<Fusion> parse_fusion(const std::string& text) {
  std::vector<Fusion> out;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (ch == '+') {
      out.push_back(Fusion::Add);
    } else if (ch == 'c' || ch == 'C') {
      out.push_back(Fusion::Concat);
    } else if (ch == '.' || ch == '-') {
      out.push_back(Fusion::None);
    } else if (static_cast<unsigned char>(ch) == 0xC2 && i + 1 < text.size() &&
               static_cast<unsigned char>(text[i + 1]) == 0xB7) {
      out.push_back(Fusion::None);
      ++i;
    } else {
      throw ConfigError("fusion pattern '" + text +
                        "' contains an unknown symbol; use '+', 'c' or '.'");
    }
  }
  return out;
}

std::string format_fusion(const std::vector<Fusion>& pattern) {
  std::string out;
  for (Fusion f : pattern) out.push_back(static_cast<char>(f));
  return out;
}

std::string serialize_config(const ArchConfig& cfg) {
  std::ostringstream os;
  os << "variant = " << cfg.variant << "\n";
  os << "levels = " << cfg.levels << "\n";
  os << "channels = ";
  for (std::size_t i = 0; i < cfg.channels.size(); ++i) {
    os << (i ? "," : "") << cfg.channels[i];
  }
  os << "\n";
  os << "convs_per_block = " << cfg.convs_per_block << "\n";
  os << "fusion = " << format_fusion(cfg.fusion) << "\n";
  os << "supervision_scales = " << cfg.supervision_scales << "\n";
  os << "resolution = " << format_resolution(cfg.resolution) << "\n";
  return os.str();
}

ArchConfig parse_config(const std::string& text) {
  ArchConfig cfg;
  std::map<std::string, std::string> seen;
  std::istringstream is(text);
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.resize(hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!seen.emplace(key, value).second) {
      throw ConfigError("config key '" + key + "' given twice");
    }
    if (key == "variant") {
      cfg.variant = value;
    } else if (key == "levels") {
      cfg.levels = parse_int(key, value);
    } else if (key == "channels") {
      cfg.channels = parse_int_list(key, value);
    } else if (key == "convs_per_block") {
      cfg.convs_per_block = parse_int(key, value);
    } else if (key == "fusion") {
      cfg.fusion = parse_fusion(value);
    } else if (key == "supervision_scales") {
      cfg.supervision_scales = parse_int(key, value);
    } else if (key == "resolution") {
      cfg.resolution = parse_resolution(value);
    } else {
      throw ConfigError("unknown config key '" + key + "' on line " +
                        std::to_string(line_no));
    }
  }
  cfg.validate();
  return cfg;
}

ArchConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void save_config(const ArchConfig& cfg, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write config file " + path.string());
  out << serialize_config(cfg);
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

std::string config_fingerprint(const ArchConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(serialize_config(cfg))));
  return buf;
}

}  // namespace rtmd
