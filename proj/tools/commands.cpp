#include "commands.hpp"

#include <omp.h>

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "rtmd/arch_config.hpp"
#include "rtmd/bench.hpp"
#include "rtmd/depth_eval.hpp"
#include "rtmd/half.hpp"
#include "rtmd/image_io.hpp"
#include "rtmd/network.hpp"
#include "rtmd/selfsup_loss.hpp"
#include "rtmd/weights.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace rtmd::cli {

namespace {

// Flag values that fail validation before any heavy work starts.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ArchFlags {
  std::string variant = "rt-monodepth";
  std::string config_path;
  std::optional<int> levels;
  std::optional<std::string> fusion;
  std::optional<int> scales;
  std::optional<int> convs_per_block;
  std::optional<std::string> channels;
  std::optional<std::string> resolution;

  void attach(CLI::App* app) {
    app->add_option("--variant", variant, "Network variant: rt-monodepth | rt-monodepth-s")
        ->capture_default_str();
    app->add_option("--config", config_path, "Architecture config file (key = value)");
    app->add_option("--levels", levels, "Override pyramid levels (2-5)");
    app->add_option("--fusion", fusion, "Override fusion pattern, e.g. ++c or ...");
    app->add_option("--scales", scales, "Override supervision scales (1-4)");
    app->add_option("--convs-per-block", convs_per_block, "Override convs per ConvBlock");
    app->add_option("--channels", channels, "Override encoder widths, e.g. 32,64,128,256");
    app->add_option("--resolution", resolution,
                    "Input resolution as WxH (default 640x192 or the config's)");
  }

  // Resolves flags into a validated config; throws UsageError.
  ArchConfig resolve() const {
    try {
      ArchConfig cfg = config_path.empty() ? variant_by_name(variant) : load_config(config_path);
      if (levels) {
        cfg.levels = *levels;
        if (!channels) cfg.channels = default_channels(*levels);
        if (!fusion) {
          const Fusion f = cfg.fusion.empty() ? Fusion::Add : cfg.fusion.front();
          cfg.fusion.assign(std::max(0, *levels - 1), f);
          if (f != Fusion::None && *levels >= 2) cfg.fusion.back() = Fusion::Concat;
        }
        if (!scales) cfg.supervision_scales = std::min(cfg.supervision_scales, *levels);
      }
      if (fusion) cfg.fusion = parse_fusion(*fusion);
      if (scales) cfg.supervision_scales = *scales;
      if (convs_per_block) cfg.convs_per_block = *convs_per_block;
      if (channels) {
        cfg.channels.clear();
        std::stringstream ss(*channels);
        for (std::string item; std::getline(ss, item, ',');) {
          cfg.channels.push_back(std::stoi(item));
        }
      }
      if (resolution) cfg.resolution = parse_resolution(*resolution);
      build_network(cfg);  // validates channel arithmetic too
      return cfg;
    } catch (const ConfigError& e) {
      throw UsageError(e.what());
    } catch (const std::invalid_argument& e) {
      throw UsageError(std::string("invalid architecture flag: ") + e.what());
    }
  }
};

void write_text(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text;
}

Network load_network(const ArchConfig& cfg, const std::string& weights_path,
                     std::uint64_t seed, bool allow_extra, std::ostream& err) {
  const Network net = build_network(cfg);
  const WeightStore store = weights_path.empty() ? init_random(cfg, seed) : load_weights(weights_path);
  BindResult bound = bind_weights(net, store, {allow_extra});
  for (const std::string& name : bound.ignored_entries) {
    err << "warning: ignoring weight entry '" << name << "'\n";
  }
  return bound.network;
}

// --- infer -------------------------------------------------------------------

struct InferFlags {
  ArchFlags arch;
  std::string weights;
  std::string input;
  std::string output;
  std::string raw;
  float min_depth = kDefaultMinDepth;
  float max_depth = kDefaultMaxDepth;
  bool allow_extra = false;
};

int cmd_infer(const InferFlags& f, std::ostream& out, std::ostream& err) {
  const ArchConfig cfg = f.arch.resolve();
  if (!(f.min_depth > 0) || !(f.min_depth < f.max_depth)) {
    throw UsageError("need 0 < --min-depth < --max-depth");
  }
  const Tensor image = read_rgb(f.input);
  const Network net = load_network(cfg, f.weights, 0, f.allow_extra, err).with_active_heads(1);
  const DepthOutputs disp = net.forward(image);
  const Tensor depth = disp_to_depth(disp.at(0), f.min_depth, f.max_depth);
  save_depth_png16(DepthMap::from_tensor(depth), f.output);
  if (!f.raw.empty()) {
    std::ofstream raw(f.raw, std::ios::binary);
    if (!raw) throw std::runtime_error("cannot write " + f.raw);
    for (float v : depth.data()) {
      std::uint32_t bits;
      std::memcpy(&bits, &v, 4);
      const char le[4] = {static_cast<char>(bits), static_cast<char>(bits >> 8),
                          static_cast<char>(bits >> 16), static_cast<char>(bits >> 24)};
      raw.write(le, 4);
    }
  }
  out << "wrote " << f.output << " (" << depth.w() << "x" << depth.h() << ", 16-bit)\n";
  return kExitOk;
}

// --- bench -------------------------------------------------------------------

struct BenchFlags {
  ArchFlags arch;
  std::string weights;
  std::uint64_t seed = 0;
  int warmup = 1000;
  int iters = 5000;
  std::string mode = "online";
  int batch = 1;
  bool all_heads = false;
  std::string out_path;
  std::string csv_path;
};

int cmd_bench(const BenchFlags& f, std::ostream& out, std::ostream& err) {
  const ArchConfig cfg = f.arch.resolve();
  BenchOptions opts;
  opts.warmup = f.warmup;
  opts.iters = f.iters;
  opts.batch = f.batch;
  try {
    opts.mode = parse_bench_mode(f.mode);
    opts.validate();
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  Network net = load_network(cfg, f.weights, f.seed, true, err);
  if (!f.all_heads) net = net.with_active_heads(1);
  const BenchReport report = run_benchmark(net, opts);
  write_text(report_to_json(report) + "\n", f.out_path, out);
  if (!f.csv_path.empty()) {
    std::ofstream csv(f.csv_path);
    if (!csv) throw std::runtime_error("cannot write " + f.csv_path);
    write_csv(report, csv);
  }
  return kExitOk;
}

// --- eval --------------------------------------------------------------------

struct EvalFlags {
  std::string pred_dir;
  std::string gt_dir;
  std::string list_path;
  double min_depth = 1e-3;
  double max_depth = 80.0;
  bool median_scale = false;
  bool garg_crop = false;
  std::string crop;
  bool json_out = false;
  std::string out_path;
};

std::set<std::string> png_names(const std::string& dir) {
  if (!fs::is_directory(dir)) throw std::runtime_error("not a directory: " + dir);
  std::set<std::string> names;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") {
      names.insert(entry.path().filename().string());
    }
  }
  return names;
}

std::string metrics_json(const DepthMetrics& m) {
  json j;
  j["abs_rel"] = m.abs_rel;
  j["sq_rel"] = m.sq_rel;
  j["rmse"] = m.rmse;
  j["rmse_log"] = m.rmse_log;
  j["delta1"] = m.delta1;
  j["delta2"] = m.delta2;
  j["delta3"] = m.delta3;
  j["n_pixels"] = m.n_pixels;
  j["n_images"] = m.n_images;
  return j.dump(2);
}

std::string metrics_text(const DepthMetrics& m) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(3);
  os << std::setw(10) << "abs_rel" << std::setw(10) << "sq_rel" << std::setw(10) << "rmse"
     << std::setw(10) << "rmse_log" << std::setw(10) << "a1" << std::setw(10) << "a2"
     << std::setw(10) << "a3" << "\n";
  os << std::setw(10) << m.abs_rel << std::setw(10) << m.sq_rel << std::setw(10) << m.rmse
     << std::setw(10) << m.rmse_log << std::setw(10) << m.delta1 << std::setw(10) << m.delta2
     << std::setw(10) << m.delta3 << "\n";
  os << m.n_images << " images, " << m.n_pixels << " pixels\n";
  return os.str();
}

int cmd_eval(const EvalFlags& f, std::ostream& out, std::ostream& err) {
  EvalOptions opts;
  opts.min_depth = f.min_depth;
  opts.max_depth = f.max_depth;
  opts.median_scale = f.median_scale;
  if (!(opts.min_depth > 0) || !(opts.min_depth < opts.max_depth)) {
    throw UsageError("need 0 < --min-depth < --max-depth");
  }
  std::optional<CropRect> fixed_crop;
  if (!f.crop.empty()) {
    CropRect r;
    if (std::sscanf(f.crop.c_str(), "%d,%d,%d,%d", &r.y0, &r.y1, &r.x0, &r.x1) != 4) {
      throw UsageError("--crop expects y0,y1,x0,x1");
    }
    fixed_crop = r;
  }

  const std::set<std::string> pred = png_names(f.pred_dir);
  const std::set<std::string> gt = png_names(f.gt_dir);
  std::vector<std::string> names;
  if (!f.list_path.empty()) {
    std::ifstream list(f.list_path);
    if (!list) throw std::runtime_error("cannot read list file " + f.list_path);
    for (std::string line; std::getline(list, line);) {
      if (!line.empty()) names.push_back(line);
    }
  } else {
    std::set_union(pred.begin(), pred.end(), gt.begin(), gt.end(), std::back_inserter(names));
  }
  std::vector<std::string> offenders;
  for (const std::string& n : names) {
    if (!pred.count(n)) offenders.push_back(n + " (no prediction)");
    if (!gt.count(n)) offenders.push_back(n + " (no ground truth)");
  }
  if (names.empty()) {
    err << "error: no PNG files to evaluate in " << f.pred_dir << " / " << f.gt_dir << "\n";
    return kExitFailure;
  }
  if (!offenders.empty()) {
    err << "error: unpaired files:\n";
    for (const std::string& o : offenders) err << "  " << o << "\n";
    return kExitFailure;
  }

  std::vector<DepthMetrics> per_image(names.size());
  std::vector<std::string> failures(names.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(names.size()); ++i) {
    try {
      const DepthMap p = load_depth_png16(fs::path(f.pred_dir) / names[i]);
      const DepthMap g = load_depth_png16(fs::path(f.gt_dir) / names[i]);
      EvalOptions o = opts;
      if (fixed_crop) o.crop = fixed_crop;
      else if (f.garg_crop) o.crop = garg_crop(g.height, g.width);
      per_image[i] = compute_metrics(p, g, o);
    } catch (const std::exception& e) {
      failures[i] = names[i] + ": " + e.what();
    }
  }
  bool failed = false;
  for (const std::string& msg : failures) {
    if (!msg.empty()) {
      err << "error: " << msg << "\n";
      failed = true;
    }
  }
  if (failed) return kExitFailure;

  const DepthMetrics total = aggregate(per_image);
  write_text(f.json_out ? metrics_json(total) + "\n" : metrics_text(total), f.out_path, out);
  return kExitOk;
}

// --- arch-info ---------------------------------------------------------------

struct ArchInfoFlags {
  ArchFlags arch;
  bool json_out = false;
  std::string out_path;
};

const char* role_name(LayerRole r) {
  switch (r) {
    case LayerRole::Encoder: return "encoder";
    case LayerRole::UpConv: return "upconv";
    case LayerRole::Head: return "head";
  }
  return "?";
}

int cmd_arch_info(const ArchInfoFlags& f, std::ostream& out, std::ostream&) {
  const ArchConfig cfg = f.arch.resolve();
  const std::vector<LayerCost> layers = layer_costs(cfg);
  const std::int64_t params = count_params(cfg);
  const std::int64_t macs_all = count_flops(cfg);
  const std::int64_t macs_inference = count_flops(cfg, 1);

  if (f.json_out) {
    json j;
    j["variant"] = cfg.variant;
    j["config"] = serialize_config(cfg);
    j["fingerprint"] = config_fingerprint(cfg);
    j["params"] = params;
    j["params_millions"] = params / 1e6;
    j["macs_all_heads"] = macs_all;
    j["macs_inference"] = macs_inference;
    json rows = json::array();
    for (const LayerCost& c : layers) {
      rows.push_back({{"slot", c.spec.slot},
                      {"role", role_name(c.spec.role)},
                      {"in", c.spec.in_channels},
                      {"out", c.spec.out_channels},
                      {"stride", c.spec.stride},
                      {"output", std::to_string(c.out_width) + "x" + std::to_string(c.out_height)},
                      {"params", c.params},
                      {"macs", c.macs}});
    }
    j["layers"] = rows;
    write_text(j.dump(2) + "\n", f.out_path, out);
    return kExitOk;
  }

  std::ostringstream os;
  os << "variant " << cfg.variant << ", levels " << cfg.levels << ", fusion "
     << format_fusion(cfg.fusion) << ", convs/block " << cfg.convs_per_block << ", scales "
     << cfg.supervision_scales << ", input " << format_resolution(cfg.resolution) << "\n\n";
  os << std::left << std::setw(16) << "slot" << std::setw(9) << "role" << std::right
     << std::setw(6) << "in" << std::setw(6) << "out" << std::setw(8) << "stride"
     << std::setw(11) << "output" << std::setw(11) << "params" << std::setw(15) << "MACs"
     << "\n";
  for (const LayerCost& c : layers) {
    os << std::left << std::setw(16) << c.spec.slot << std::setw(9) << role_name(c.spec.role)
       << std::right << std::setw(6) << c.spec.in_channels << std::setw(6)
       << c.spec.out_channels << std::setw(8) << c.spec.stride << std::setw(11)
       << (std::to_string(c.out_width) + "x" + std::to_string(c.out_height)) << std::setw(11)
       << c.params << std::setw(15) << c.macs << "\n";
  }
  os << "\nparameters: " << params << " (" << std::fixed << std::setprecision(2) << params / 1e6
     << " M)\n";
  os << "MACs (all heads): " << macs_all << "\n";
  os << "MACs (inference, head 0 only): " << macs_inference << "\n";
  write_text(os.str(), f.out_path, out);
  return kExitOk;
}

// --- init-weights ------------------------------------------------------------

struct InitFlags {
  ArchFlags arch;
  std::uint64_t seed = 42;
  std::string output;
  bool f16 = false;
};

int cmd_init(const InitFlags& f, std::ostream& out, std::ostream&) {
  const ArchConfig cfg = f.arch.resolve();
  WeightStore store = init_random(cfg, f.seed);
  if (f.f16) {
    WeightStore narrowed;
    for (WeightEntry e : store.entries()) {
      e.dtype = DType::F16;
      e.f16_bits.resize(e.f32.size());
      for (std::size_t i = 0; i < e.f32.size(); ++i) e.f16_bits[i] = float_to_half(e.f32[i]);
      e.f32.clear();
      narrowed.add(std::move(e));
    }
    store = std::move(narrowed);
  }
  save_weights(store, f.output);
  out << "wrote " << store.size() << " entries (" << count_params(cfg) << " parameters) to "
      << f.output << "\n";
  return kExitOk;
}

// --- loss-check --------------------------------------------------------------

struct LossFlags {
  ArchFlags arch;
  std::string sample;
  std::string weights;
  std::uint64_t seed = 42;
  double smoothness_weight = kDefaultSmoothnessWeight;
  bool allow_extra = false;
  bool json_out = false;
};

std::vector<double> numbers(const json& j, std::size_t n, const std::string& what) {
  if (!j.is_array() || j.size() != n) {
    throw std::runtime_error(what + " must be an array of " + std::to_string(n) + " numbers");
  }
  std::vector<double> v;
  for (const auto& x : j) v.push_back(x.get<double>());
  return v;
}

int cmd_loss_check(const LossFlags& f, std::ostream& out, std::ostream& err) {
  const ArchConfig cfg = f.arch.resolve();
  std::ifstream in(f.sample);
  if (!in) throw std::runtime_error("cannot read sample sidecar " + f.sample);
  const json doc = json::parse(in);
  const fs::path base = fs::path(f.sample).parent_path();

  const Tensor target = read_rgb(base / doc.at("target").get<std::string>());
  std::vector<Tensor> sources;
  for (const auto& s : doc.at("sources")) sources.push_back(read_rgb(base / s.get<std::string>()));
  std::vector<Pose> poses;
  for (const auto& p : doc.at("poses")) {
    Pose pose;
    const auto r = numbers(p.at("rotation"), 9, "pose rotation");
    const auto t = numbers(p.at("translation"), 3, "pose translation");
    std::copy(r.begin(), r.end(), pose.rotation.begin());
    std::copy(t.begin(), t.end(), pose.translation.begin());
    poses.push_back(pose);
  }
  const json& kj = doc.at("intrinsics");
  CameraIntrinsics k{kj.at("fx").get<double>(), kj.at("fy").get<double>(),
                     kj.at("cx").get<double>(), kj.at("cy").get<double>()};

  const Network net = load_network(cfg, f.weights, f.seed, f.allow_extra, err);
  const DepthOutputs disp = net.forward(target);
  LossOptions opts;
  opts.smoothness_weight = f.smoothness_weight;
  const LossBreakdown loss = total_loss(disp, target, sources, poses, k, opts);

  if (f.json_out) {
    json j;
    j["total"] = loss.total;
    json scales = json::array();
    for (const ScaleLoss& s : loss.scales) {
      scales.push_back({{"scale", s.scale},
                        {"photometric", s.photometric},
                        {"smoothness", s.smoothness},
                        {"total", s.total},
                        {"masked_fraction", s.masked_fraction}});
    }
    j["scales"] = scales;
    out << j.dump(2) << "\n";
  } else {
    out << std::setprecision(8);
    for (const ScaleLoss& s : loss.scales) {
      out << "scale " << s.scale << ": photometric " << s.photometric << ", smoothness "
          << s.smoothness << ", total " << s.total << ", auto-masked "
          << s.masked_fraction * 100 << "%\n";
    }
    out << "total " << loss.total << "\n";
  }
  return kExitOk;
}

}  // namespace

void apply_thread_cap() {
  if (const char* v = std::getenv("RTMD_THREADS")) {
    const int n = std::atoi(v);
    if (n > 0) omp_set_num_threads(n);
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Real-time monocular depth estimation runtime", "rtmd"};
  app.require_subcommand(1);

  InferFlags infer;
  CLI::App* infer_cmd = app.add_subcommand("infer", "Predict a 16-bit depth PNG from one image");
  infer.arch.attach(infer_cmd);
  infer_cmd->add_option("--weights", infer.weights, "RTMD weight file")->required();
  infer_cmd->add_option("--input", infer.input, "8-bit RGB PNG or PPM image")->required();
  infer_cmd->add_option("--output", infer.output, "Output 16-bit depth PNG (depth * 256)")
      ->required();
  infer_cmd->add_option("--raw", infer.raw, "Also write depth as raw little-endian float32");
  infer_cmd->add_option("--min-depth", infer.min_depth, "Depth at disparity 1 (meters)")
      ->capture_default_str();
  infer_cmd->add_option("--max-depth", infer.max_depth, "Depth at disparity 0 (meters)")
      ->capture_default_str();
  infer_cmd->add_flag("--allow-extra", infer.allow_extra, "Ignore weight entries matching no slot");

  BenchFlags bench;
  CLI::App* bench_cmd = app.add_subcommand("bench", "Measure forward latency");
  bench.arch.attach(bench_cmd);
  bench_cmd->add_option("--weights", bench.weights, "RTMD weight file (default: random init)");
  bench_cmd->add_option("--seed", bench.seed, "Seed for random-init weights")
      ->capture_default_str();
  bench_cmd->add_option("--warmup", bench.warmup, "Warm-up iterations, discarded")
      ->capture_default_str();
  bench_cmd->add_option("--iters", bench.iters, "Measured iterations")->capture_default_str();
  bench_cmd->add_option("--mode", bench.mode, "online (batch 1) or offline")
      ->capture_default_str();
  bench_cmd->add_option("--batch", bench.batch, "Images per forward call (offline mode)")
      ->capture_default_str();
  bench_cmd->add_flag("--all-heads", bench.all_heads,
                      "Run every supervision head instead of head 0 only");
  bench_cmd->add_option("--out", bench.out_path, "Write the JSON report here instead of stdout");
  bench_cmd->add_option("--csv", bench.csv_path, "Write per-iteration seconds as CSV");

  EvalFlags eval;
  CLI::App* eval_cmd =
      app.add_subcommand("eval", "Score predicted depth PNGs against ground truth");
  eval_cmd->add_option("--pred", eval.pred_dir, "Directory of predicted 16-bit depth PNGs")
      ->required();
  eval_cmd->add_option("--gt", eval.gt_dir, "Directory of ground-truth 16-bit depth PNGs")
      ->required();
  eval_cmd->add_option("--list", eval.list_path, "File naming the PNGs to evaluate, one per line");
  eval_cmd->add_option("--min-depth", eval.min_depth, "Lower evaluation bound (meters)")
      ->capture_default_str();
  eval_cmd->add_option("--max-depth", eval.max_depth, "Upper evaluation bound / clip (meters)")
      ->capture_default_str();
  eval_cmd->add_flag("--median-scale", eval.median_scale,
                     "Scale predictions by median(gt)/median(pred) per image");
  eval_cmd->add_flag("--garg-crop", eval.garg_crop, "Apply the Garg evaluation crop");
  eval_cmd->add_option("--crop", eval.crop, "Explicit crop y0,y1,x0,x1 (pixels)");
  eval_cmd->add_flag("--json", eval.json_out, "Emit JSON instead of a text table");
  eval_cmd->add_option("--out", eval.out_path, "Write the report here instead of stdout");

  ArchInfoFlags info;
  CLI::App* info_cmd =
      app.add_subcommand("arch-info", "Print the layer table, parameter and MAC counts");
  info.arch.attach(info_cmd);
  info_cmd->add_flag("--json", info.json_out, "Emit JSON");
  info_cmd->add_option("--out", info.out_path, "Write the report here instead of stdout");

  InitFlags init;
  CLI::App* init_cmd =
      app.add_subcommand("init-weights", "Write He-initialized random weights");
  init.arch.attach(init_cmd);
  init_cmd->add_option("--seed", init.seed, "PRNG seed")->capture_default_str();
  init_cmd->add_option("--output", init.output, "Output RTMD weight file")->required();
  init_cmd->add_flag("--f16", init.f16, "Store tensors as 16-bit floats");

  LossFlags loss;
  CLI::App* loss_cmd =
      app.add_subcommand("loss-check", "Evaluate the self-supervised loss on a sample bundle");
  loss.arch.attach(loss_cmd);
  loss_cmd->add_option("--sample", loss.sample, "JSON sidecar naming images, poses, intrinsics")
      ->required();
  loss_cmd->add_option("--weights", loss.weights, "RTMD weight file (default: random init)");
  loss_cmd->add_option("--seed", loss.seed, "Seed for random-init weights")
      ->capture_default_str();
  loss_cmd->add_option("--smoothness-weight", loss.smoothness_weight,
                       "Weight of the edge-aware smoothness term")
      ->capture_default_str();
  loss_cmd->add_flag("--allow-extra", loss.allow_extra, "Ignore weight entries matching no slot");
  loss_cmd->add_flag("--json", loss.json_out, "Emit JSON");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (infer_cmd->parsed()) return cmd_infer(infer, out, err);
    if (bench_cmd->parsed()) return cmd_bench(bench, out, err);
    if (eval_cmd->parsed()) return cmd_eval(eval, out, err);
    if (info_cmd->parsed()) return cmd_arch_info(info, out, err);
    if (init_cmd->parsed()) return cmd_init(init, out, err);
    if (loss_cmd->parsed()) return cmd_loss_check(loss, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace rtmd::cli
