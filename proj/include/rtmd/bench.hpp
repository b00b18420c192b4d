#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rtmd/network.hpp"

namespace rtmd {

enum class BenchMode { Online, Offline };

const char* to_string(BenchMode mode);
BenchMode parse_bench_mode(const std::string& text);

/// Latency protocol: warm-up iterations are run and discarded, then every
/// measured iteration times exactly one forward call.
struct BenchOptions {
  int warmup = 1000;
  int iters = 5000;
  BenchMode mode = BenchMode::Online;
  int batch = 1;
  std::uint64_t input_seed = 7;

  /// Throws ConfigError for online mode with batch > 1 or negative counts.
  void validate() const;
};

struct LatencyStats {
  double mean = 0, stddev = 0, min = 0, max = 0, p50 = 0, p90 = 0, p99 = 0;
};

/// Mean, sample standard deviation and nearest-rank percentiles.
LatencyStats compute_stats(std::span<const double> samples);

/// Nearest-rank percentile: the ceil(q/100 * n)-th smallest sample.
double percentile_nearest_rank(std::vector<double> sorted_or_not, double q);

struct BenchReport {
  int warmup_iters = 0;
  int measured_iters = 0;
  BenchMode mode = BenchMode::Online;
  int batch = 1;
  int height = 0;
  int width = 0;
  int active_heads = 1;
  std::vector<double> seconds;  // per measured iteration
  LatencyStats stats;
  double fps = 0;              // forward calls per second, 1 / mean
  double images_per_second = 0;  // batch / mean
  std::string host;
  std::string variant;
  std::string config_fingerprint;
  int threads = 1;
};

/// A function run once per iteration; the harness times each call.
using ForwardFn = std::function<void()>;

/// Generic protocol driver, exposed so the timing loop can be checked
/// against a stub workload.
BenchReport run_protocol(const ForwardFn& forward, const BenchOptions& options);

/// Times `net.forward` on a fixed random image of the network's resolution.
BenchReport run_benchmark(const Network& net, const BenchOptions& options = {});

/// "<hostname> | <cpu model> | <n> threads".
std::string host_descriptor();

std::string report_to_json(const BenchReport& report, int indent = 2);
/// One row per measured iteration: "iteration,seconds".
void write_csv(const BenchReport& report, std::ostream& out);

}  // namespace rtmd
