#include "rtmd/bench.hpp"

#include <omp.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <random>

#include "json.hpp"

namespace rtmd {

namespace {
// Keeps each forward result observable so the call cannot be elided.
volatile float g_sink = 0.0f;
}  // namespace

const char* to_string(BenchMode mode) {
  return mode == BenchMode::Online ? "online" : "offline";
}

BenchMode parse_bench_mode(const std::string& text) {
  if (text == "online") return BenchMode::Online;
  if (text == "offline") return BenchMode::Offline;
  throw ConfigError("mode must be 'online' or 'offline', got '" + text + "'");
}

void BenchOptions::validate() const {
  if (warmup < 0) throw ConfigError("warm-up count must be >= 0");
  if (iters < 1) throw ConfigError("measured iteration count must be >= 1");
  if (batch < 1) throw ConfigError("batch must be >= 1");
  if (mode == BenchMode::Online && batch != 1) {
    throw ConfigError("online testing feeds one image at a time; batch must be 1, got " +
                      std::to_string(batch));
  }
}

double percentile_nearest_rank(std::vector<double> samples, double q) {
  if (samples.empty()) throw std::invalid_argument("percentile of an empty series");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  auto rank = static_cast<std::size_t>(std::ceil(q / 100.0 * n));
  rank = std::clamp<std::size_t>(rank, 1, samples.size());
  return samples[rank - 1];
}

LatencyStats compute_stats(std::span<const double> samples) {
  if (samples.empty()) throw std::invalid_argument("no samples");
  LatencyStats s;
  const double n = static_cast<double>(samples.size());
  double sum = 0;
  for (double v : samples) sum += v;
  s.mean = sum / n;
  double ss = 0;
  for (double v : samples) ss += (v - s.mean) * (v - s.mean);
  s.stddev = samples.size() > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
  const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
  s.min = *lo;
  s.max = *hi;
  std::vector<double> copy(samples.begin(), samples.end());
  s.p50 = percentile_nearest_rank(copy, 50);
  s.p90 = percentile_nearest_rank(copy, 90);
  s.p99 = percentile_nearest_rank(copy, 99);
  return s;
}

std::string host_descriptor() {
  char name[256] = {};
  gethostname(name, sizeof(name) - 1);
  std::string cpu = "unknown cpu";
  std::ifstream info("/proc/cpuinfo");
  for (std::string line; std::getline(info, line);) {
    if (line.rfind("model name", 0) == 0) {
      const auto colon = line.find(':');
      if (colon != std::string::npos) cpu = line.substr(colon + 2);
      break;
    }
  }
  return std::string(name) + " | " + cpu + " | " + std::to_string(omp_get_max_threads()) +
         " threads";
}

BenchReport run_protocol(const ForwardFn& forward, const BenchOptions& options) {
  options.validate();
  using clock = std::chrono::steady_clock;

  for (int i = 0; i < options.warmup; ++i) forward();

  BenchReport report;
  report.warmup_iters = options.warmup;
  report.mode = options.mode;
  report.batch = options.batch;
  report.seconds.reserve(options.iters);
  for (int i = 0; i < options.iters; ++i) {
    const auto t0 = clock::now();
    forward();
    const auto t1 = clock::now();
    report.seconds.push_back(std::chrono::duration<double>(t1 - t0).count());
  }
  report.measured_iters = static_cast<int>(report.seconds.size());
  report.stats = compute_stats(report.seconds);
  report.fps = 1.0 / report.stats.mean;
  report.images_per_second = options.batch / report.stats.mean;
  report.host = host_descriptor();
  report.threads = omp_get_max_threads();
  return report;
}

BenchReport run_benchmark(const Network& net, const BenchOptions& options) {
  options.validate();
  const Resolution& res = net.config().resolution;
  std::mt19937_64 rng(options.input_seed);
  std::uniform_real_distribution<float> dist(0.0f, 1.0f);
  Tensor image({options.batch, 3, res.height, res.width});
  for (float& v : image.data()) v = dist(rng);

  BenchReport report = run_protocol(
      [&] {
        DepthOutputs out = net.forward(image);
        g_sink = out.disp.front().data()[0];
      },
      options);
  report.height = res.height;
  report.width = res.width;
  report.active_heads = net.active_heads();
  report.variant = net.config().variant;
  report.config_fingerprint = config_fingerprint(net.config());
  return report;
}

std::string report_to_json(const BenchReport& r, int indent) {
  nlohmann::ordered_json j;
  j["variant"] = r.variant;
  j["config_fingerprint"] = r.config_fingerprint;
  j["resolution"] = std::to_string(r.width) + "x" + std::to_string(r.height);
  j["mode"] = to_string(r.mode);
  j["batch"] = r.batch;
  j["active_heads"] = r.active_heads;
  j["warmup_iters"] = r.warmup_iters;
  j["measured_iters"] = r.measured_iters;
  j["threads"] = r.threads;
  j["host"] = r.host;
  j["mean_s"] = r.stats.mean;
  j["std_s"] = r.stats.stddev;
  j["min_s"] = r.stats.min;
  j["max_s"] = r.stats.max;
  j["p50_s"] = r.stats.p50;
  j["p90_s"] = r.stats.p90;
  j["p99_s"] = r.stats.p99;
  j["fps"] = r.fps;
  j["images_per_s"] = r.images_per_second;
  return j.dump(indent);
}

void write_csv(const BenchReport& report, std::ostream& out) {
  out << "iteration,seconds\n";
  out << std::setprecision(17);
  for (std::size_t i = 0; i < report.seconds.size(); ++i) {
    out << i << "," << report.seconds[i] << "\n";
  }
}

}  // namespace rtmd
