#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "commands.hpp"
#include "json.hpp"
#include "oracles.hpp"
#include "rtmd/depth_eval.hpp"
#include "rtmd/image_io.hpp"

namespace fs = std::filesystem;
using rtmd::cli::kExitFailure;
using rtmd::cli::kExitOk;
using rtmd::cli::kExitUsage;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = rtmd::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("rtmd_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  // Small S-variant setup so the forward pass stays fast.
  std::vector<std::string> small_arch() const {
    return {"--variant", "rt-monodepth-s", "--resolution", "64x32"};
  }

  std::string make_weights() {
    std::vector<std::string> args{"init-weights", "--output", path("w.rtmd"), "--seed", "3"};
    for (const auto& a : small_arch()) args.push_back(a);
    EXPECT_EQ(run(args).code, kExitOk);
    return path("w.rtmd");
  }

  std::string make_image(int h, int w, std::uint64_t seed) {
    const std::string p = path("img" + std::to_string(seed) + ".png");
    rtmd::write_rgb_png(p, rtmd::oracle::random_tensor({1, 3, h, w}, seed, 0.0f, 1.0f));
    return p;
  }

  std::vector<std::string> with_arch(std::vector<std::string> args) const {
    for (const auto& a : small_arch()) args.push_back(a);
    return args;
  }

  fs::path dir_;
};

std::string read_file(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_F(CliTest, InferWritesDepthPngAndIsDeterministic) {
  const std::string w = make_weights();
  const std::string img = make_image(32, 64, 1);
  const auto a = run(with_arch({"infer", "--weights", w, "--input", img, "--output", path("a.png"),
                                "--raw", path("a.f32")}));
  ASSERT_EQ(a.code, kExitOk) << a.err;
  const auto b = run(with_arch({"infer", "--weights", w, "--input", img, "--output", path("b.png")}));
  ASSERT_EQ(b.code, kExitOk) << b.err;
  EXPECT_EQ(read_file(path("a.png")), read_file(path("b.png")));
  EXPECT_EQ(read_file(path("a.f32")).size(), 32u * 64u * 4u);

  const rtmd::DepthMap d = rtmd::load_depth_png16(path("a.png"));
  EXPECT_EQ(d.height, 32);
  EXPECT_EQ(d.width, 64);
  for (float v : d.values) {
    EXPECT_GE(v, 0.1f - 1.0f / 256);
    EXPECT_LE(v, 100.0f + 1.0f / 256);
  }
}

TEST_F(CliTest, InferRejectsWrongResolutionAndMissingWeights) {
  const std::string w = make_weights();
  const std::string img = make_image(48, 64, 2);
  const auto r = run(with_arch({"infer", "--weights", w, "--input", img, "--output", path("o.png")}));
  EXPECT_EQ(r.code, kExitFailure);
  EXPECT_NE(r.err.find("32"), std::string::npos);
  const auto m = run(with_arch({"infer", "--weights", path("none.rtmd"), "--input", img,
                                "--output", path("o.png")}));
  EXPECT_EQ(m.code, kExitFailure);
  // Weights for the S variant cannot bind to the full network.
  const auto full = run({"infer", "--weights", w, "--input", make_image(32, 64, 3), "--output",
                         path("o.png"), "--resolution", "64x32"});
  EXPECT_EQ(full.code, kExitFailure);
  EXPECT_NE(full.err.find("slot"), std::string::npos);
}

TEST_F(CliTest, EvalIdentityAndUnpairedFiles) {
  fs::create_directories(path("pred"));
  fs::create_directories(path("gt"));
  rtmd::DepthMap d(4, 6);
  for (std::size_t i = 0; i < d.values.size(); ++i) d.values[i] = 1.0f + i;
  for (const char* name : {"a.png", "b.png"}) {
    rtmd::save_depth_png16(d, path("pred") + "/" + name);
    rtmd::save_depth_png16(d, path("gt") + "/" + name);
  }
  const auto r = run({"eval", "--pred", path("pred"), "--gt", path("gt"), "--json"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j.at("abs_rel").get<double>(), 0.0);
  EXPECT_EQ(j.at("delta1").get<double>(), 1.0);
  EXPECT_EQ(j.at("n_images").get<int>(), 2);
  EXPECT_EQ(j.at("n_pixels").get<int>(), 48);

  const auto text = run({"eval", "--pred", path("pred"), "--gt", path("gt")});
  EXPECT_EQ(text.code, kExitOk);
  EXPECT_NE(text.out.find("abs_rel"), std::string::npos);

  rtmd::save_depth_png16(d, path("gt") + "/c.png");
  const auto unpaired = run({"eval", "--pred", path("pred"), "--gt", path("gt")});
  EXPECT_EQ(unpaired.code, kExitFailure);
  EXPECT_NE(unpaired.err.find("c.png"), std::string::npos);

  const auto bad = run({"eval", "--pred", path("pred"), "--gt", path("gt"), "--crop", "1,2"});
  EXPECT_EQ(bad.code, kExitUsage);
}

TEST_F(CliTest, ArchInfoReportsShippedCounts) {
  const auto full = run({"arch-info", "--json"});
  ASSERT_EQ(full.code, kExitOk) << full.err;
  const auto j = nlohmann::json::parse(full.out);
  EXPECT_EQ(j.at("params").get<long>(), 2595140);
  EXPECT_LE(std::abs(j.at("params").get<double>() - 2.8e6) / 2.8e6, 0.20);
  EXPECT_LT(j.at("macs_inference").get<long>(), j.at("macs_all_heads").get<long>());

  const auto s = run({"arch-info", "--variant", "rt-monodepth-s"});
  ASSERT_EQ(s.code, kExitOk);
  EXPECT_NE(s.out.find("parameters: 1349842"), std::string::npos);
  EXPECT_NE(s.out.find("head0.conv2"), std::string::npos);
}

TEST_F(CliTest, ConfigFileAndOverrides) {
  std::ofstream(path("a.cfg")) << "levels = 3\nchannels = 16,32,64\nfusion = +.\n"
                                  "supervision_scales = 2\nresolution = 64x32\n";
  const auto r = run({"arch-info", "--config", path("a.cfg"), "--json"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j.at("layers").back().at("slot"), "head0.conv2");
  EXPECT_EQ(run({"arch-info", "--levels", "5", "--resolution", "64x64"}).code, kExitOk);
  EXPECT_EQ(run({"arch-info", "--levels", "3", "--fusion", "c+"}).code, kExitUsage);
}

TEST_F(CliTest, UsageErrorsExitWithTwo) {
  EXPECT_EQ(run({}).code, kExitUsage);
  EXPECT_EQ(run({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(run({"infer", "--input", "x.png"}).code, kExitUsage);
  EXPECT_EQ(run({"arch-info", "--fusion", "++"}).code, kExitUsage);
  EXPECT_EQ(run({"arch-info", "--levels", "7"}).code, kExitUsage);
  EXPECT_EQ(run({"arch-info", "--resolution", "100x100"}).code, kExitUsage);
  EXPECT_EQ(run({"arch-info", "--variant", "huge"}).code, kExitUsage);
  const auto online = run(with_arch({"bench", "--batch", "4", "--iters", "1", "--warmup", "0"}));
  EXPECT_EQ(online.code, kExitUsage);
  EXPECT_NE(online.err.find("batch"), std::string::npos);
}

TEST_F(CliTest, BenchWritesReportAndCsv) {
  const auto r = run(with_arch({"bench", "--warmup", "1", "--iters", "4", "--csv", path("t.csv"),
                                "--out", path("r.json")}));
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto j = nlohmann::json::parse(read_file(path("r.json")));
  EXPECT_EQ(j.at("measured_iters"), 4);
  EXPECT_EQ(j.at("active_heads"), 1);
  std::istringstream csv(read_file(path("t.csv")));
  int lines = 0;
  for (std::string l; std::getline(csv, l);) ++lines;
  EXPECT_EQ(lines, 5);
}

TEST_F(CliTest, InitWeightsHalfPrecisionBindsAndRuns) {
  const auto r = run(with_arch({"init-weights", "--output", path("h.rtmd"), "--f16"}));
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto i = run(with_arch({"infer", "--weights", path("h.rtmd"), "--input",
                                make_image(32, 64, 4), "--output", path("o.png")}));
  EXPECT_EQ(i.code, kExitOk) << i.err;
}

TEST_F(CliTest, LossCheckOnStaticBundle) {
  const std::string img = make_image(32, 64, 5);
  nlohmann::json doc;
  doc["target"] = fs::path(img).filename().string();
  doc["sources"] = {fs::path(img).filename().string()};
  doc["poses"] = {{{"rotation", {1, 0, 0, 0, 1, 0, 0, 0, 1}}, {"translation", {0, 0, 0}}}};
  doc["intrinsics"] = {{"fx", 40}, {"fy", 40}, {"cx", 32}, {"cy", 16}};
  std::ofstream(path("sample.json")) << doc.dump();
  const auto r = run(with_arch({"loss-check", "--sample", path("sample.json"), "--json"}));
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  ASSERT_EQ(j.at("scales").size(), 4u);
  for (const auto& s : j.at("scales")) EXPECT_EQ(s.at("photometric").get<double>(), 0.0);

  const auto missing = run(with_arch({"loss-check", "--sample", path("nope.json")}));
  EXPECT_EQ(missing.code, kExitFailure);
}

// Help output is frozen; regenerate with RTMD_UPDATE_SNAPSHOTS=1 after an
// intentional flag change.
class HelpSnapshot : public ::testing::TestWithParam<std::string> {};

TEST_P(HelpSnapshot, MatchesStoredText) {
  std::vector<std::string> args;
  if (!GetParam().empty()) args.push_back(GetParam());
  args.push_back("--help");
  const auto r = run(args);
  EXPECT_EQ(r.code, kExitOk);
  const fs::path snap = fs::path(RTMD_SNAPSHOT_DIR) /
                        ("help_" + (GetParam().empty() ? std::string("main") : GetParam()) + ".txt");
  if (std::getenv("RTMD_UPDATE_SNAPSHOTS")) {
    std::ofstream(snap) << r.out;
    GTEST_SKIP() << "snapshot updated";
  }
  ASSERT_TRUE(fs::exists(snap)) << snap;
  EXPECT_EQ(r.out, read_file(snap.string()));
}

INSTANTIATE_TEST_SUITE_P(Commands, HelpSnapshot,
                         ::testing::Values("", "infer", "bench", "eval", "arch-info",
                                           "init-weights", "loss-check"),
                         [](const auto& info) {
                           std::string n = info.param.empty() ? "main" : info.param;
                           for (char& c : n)
                             if (c == '-') c = '_';
                           return n;
                         });

TEST(Help, EveryFlagIsDocumented) {
  const std::map<std::string, std::vector<std::string>> flags{
      {"infer", {"--weights", "--input", "--output", "--raw", "--min-depth", "--max-depth",
                 "--allow-extra", "--variant", "--config", "--levels", "--fusion", "--scales",
                 "--convs-per-block", "--channels", "--resolution"}},
      {"bench", {"--weights", "--seed", "--warmup", "--iters", "--mode", "--batch", "--all-heads",
                 "--out", "--csv"}},
      {"eval", {"--pred", "--gt", "--list", "--min-depth", "--max-depth", "--median-scale",
                "--garg-crop", "--crop", "--json", "--out"}},
      {"arch-info", {"--json", "--out", "--variant"}},
      {"init-weights", {"--seed", "--output", "--f16"}},
      {"loss-check", {"--sample", "--weights", "--seed", "--smoothness-weight", "--allow-extra",
                      "--json"}},
  };
  for (const auto& [cmd, names] : flags) {
    const auto r = run({cmd, "--help"});
    for (const auto& f : names) EXPECT_NE(r.out.find(f), std::string::npos) << cmd << " " << f;
  }
}
