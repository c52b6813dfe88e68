#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "finer/checkpoint.hpp"
#include "finer/config.hpp"
#include "finer/errors.hpp"
#include "finer/experiment.hpp"
#include "finer/image.hpp"

using namespace finer;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "finer_cfg" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Checkpoint, RoundTripIsExact) {
  const fs::path dir = scratch("ckpt");
  const Mlp mlp = init_mlp({2, 7, 5, 3}, Activation::finer(12.5), {0.3, 99}, PositionalEncoder{3, true});
  save_checkpoint({mlp, {0.3, 99}}, (dir / "m.ckpt").string());
  const Checkpoint back = load_checkpoint((dir / "m.ckpt").string());
  EXPECT_EQ(back.mlp, mlp);
  EXPECT_EQ(back.scheme.seed, 99u);
  EXPECT_EQ(back.scheme.bias_halfwidth, 0.3);
  const std::string bytes = slurp(dir / "m.ckpt");
  EXPECT_EQ(bytes.rfind(std::string(kCheckpointMagic) + "\n", 0), 0u);
  EXPECT_EQ(bytes.size() - bytes.find('\n', 13) - 1, mlp.parameter_count() * 8);
}

TEST(Checkpoint, RejectsCorruptFiles) {
  const fs::path dir = scratch("ckpt_bad");
  const Mlp mlp = init_mlp({1, 3, 1}, Activation::sine(), {1.0, 1});
  const std::string good = (dir / "g.ckpt").string();
  save_checkpoint({mlp, {1.0, 1}}, good);
  const std::string bytes = slurp(good);

  std::ofstream((dir / "magic.ckpt").string(), std::ios::binary) << "FINER-CKPT-0" << bytes.substr(12);
  EXPECT_THROW(load_checkpoint((dir / "magic.ckpt").string()), IoError);
  std::ofstream((dir / "short.ckpt").string(), std::ios::binary) << bytes.substr(0, bytes.size() - 3);
  EXPECT_THROW(load_checkpoint((dir / "short.ckpt").string()), IoError);
  std::ofstream((dir / "long.ckpt").string(), std::ios::binary) << bytes << "x";
  EXPECT_THROW(load_checkpoint((dir / "long.ckpt").string()), IoError);
  EXPECT_THROW(load_checkpoint((dir / "none.ckpt").string()), IoError);
}

TEST(Config, ImageDefaults) {
  const ExperimentConfig c = parse_config_text("", {.task = "fit-image"});
  EXPECT_EQ(c.task, Task::kFitImage);
  EXPECT_EQ(c.train.net.hidden_layers, 3u);
  EXPECT_EQ(c.train.net.hidden_width, 256u);
  EXPECT_EQ(c.activation.kind, ActivationKind::kFiner);
  EXPECT_EQ(c.activation.omega0, 30.0);
  EXPECT_DOUBLE_EQ(c.init.bias_halfwidth, 1.0 / std::sqrt(2.0));
  EXPECT_EQ(c.run_directory(), "runs/fit-image-0");
}

TEST(Config, TaskSpecificDefaults) {
  EXPECT_EQ(parse_config_text("", {.task = "fit-sdf"}).init.bias_halfwidth, 1.0);
  EXPECT_EQ(parse_config_text("", {.task = "fit-sdf"}).train.iterations, 20000u);
  EXPECT_EQ(parse_config_text("", {.task = "ntk"}).activation.omega0, 1.0);
  EXPECT_EQ(parse_config_text(R"({"task": "freq-map"})").task, Task::kFreqMap);
}

TEST(Config, RangeErrorsNameTheKey) {
  try {
    parse_config_text(R"({"init": {"k": -1}})");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key_path(), "init.k");
  }
  try {
    parse_config_text(R"({"activation": {"omega0": 0}})");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key_path(), "activation.omega0");
  }
  EXPECT_THROW(parse_config_text("", {.k = -0.5}), ConfigError);
}

TEST(Config, UnknownKeysAndBadTypesRejected) {
  try {
    parse_config_text(R"({"optim": {"learning_rate": 0.1}})");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key_path(), "optim.learning_rate");
  }
  try {
    parse_config_text(R"({"network": {"hidden_width": "wide"}})");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key_path(), "network.hidden_width");
  }
  try {
    parse_config_text(R"({"network": {"hidden_width": 2.5}})");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key_path(), "network.hidden_width");
  }
  EXPECT_THROW(parse_config_text("{not json"), ConfigError);
  EXPECT_THROW(parse_config_text("[1, 2]"), ConfigError);
  EXPECT_THROW(parse_config_text(R"({"task": "train"})"), ConfigError);
  EXPECT_THROW(parse_config_text(R"({"activation": {"family": "tanh"}})"), ConfigError);
}

TEST(Config, FlagsOverrideFile) {
  const ExperimentConfig c = parse_config_text(R"({"init": {"k": 1.0}, "seed": 4})", {.seed = 9, .k = 2.0});
  EXPECT_EQ(c.init.bias_halfwidth, 2.0);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.init.seed, 9u);
  EXPECT_NE(c.resolved_json.find("\"k\": 2.0"), std::string::npos);
}

TEST(Config, PemlpAddsEncoder) {
  const ExperimentConfig c = parse_config_text("", {.activation = "pemlp"});
  EXPECT_EQ(c.activation.kind, ActivationKind::kRelu);
  ASSERT_TRUE(c.train.net.encoder.has_value());
  EXPECT_EQ(c.train.net.encoder->num_bands, 10u);
}

TEST(Config, ReadsFile) {
  const fs::path dir = scratch("file");
  std::ofstream(dir / "c.json") << R"({"task": "ntk", "ntk": {"ensemble": 8}})";
  EXPECT_EQ(parse_config((dir / "c.json").string()).ntk.ensemble, 8u);
  EXPECT_THROW(parse_config((dir / "missing.json").string()), ConfigError);
}

TEST(Run, FitImageEmitsArtifactsAndIsReproducible) {
  const fs::path dir = scratch("run_image");
  ImageTarget img(64, 64, 3);
  for (std::size_t y = 0; y < 64; ++y)
    for (std::size_t x = 0; x < 64; ++x)
      for (std::size_t c = 0; c < 3; ++c) img.at(x, y, c) = 0.5 + 0.4 * std::sin(0.2 * static_cast<double>(x + c * y));
  save_png(img, (dir / "in.png").string());

  const std::string cfg = R"({"network": {"hidden_layers": 2, "hidden_width": 16}, "optim": {"psnr_every": 5}})";
  auto config_for = [&](const std::string& out) {
    return parse_config_text(cfg, {.task = "fit-image", .out = (dir / out).string(), .iterations = 20,
                                   .input = (dir / "in.png").string()});
  };
  std::ostringstream log, err;
  ASSERT_EQ(run(config_for("a"), log, err), kExitOk) << err.str();
  ASSERT_EQ(run(config_for("b"), log, err), kExitOk) << err.str();
  const fs::path a = dir / "a" / "fit-image-0", b = dir / "b" / "fit-image-0";
  for (const char* f : {"recon.png", "log.csv", "summary.json", "model.ckpt"}) EXPECT_TRUE(fs::exists(a / f)) << f;
  EXPECT_EQ(slurp(a / "log.csv"), slurp(b / "log.csv"));
  EXPECT_EQ(slurp(a / "model.ckpt"), slurp(b / "model.ckpt"));
  EXPECT_NE(slurp(a / "summary.json").find("\"hidden_width\": 16"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "a" / "metrics.csv"));

  // Existing directory is refused without --force.
  EXPECT_EQ(run(config_for("a"), log, err), kExitIo);
  ExperimentConfig forced = config_for("a");
  forced.io.force = true;
  EXPECT_EQ(run(forced, log, err), kExitOk);

  // eval reproduces the metrics from the checkpoint alone.
  ExperimentConfig ev = parse_config_text("", {.task = "eval", .out = (dir / "e").string(),
                                               .input = (dir / "in.png").string(),
                                               .checkpoint = (a / "model.ckpt").string()});
  ASSERT_EQ(run(ev, log, err), kExitOk) << err.str();
  EXPECT_TRUE(fs::exists(dir / "e" / "eval-0" / "summary.json"));
}

TEST(Run, NtkEmitsKernelImagesAndSpectrum) {
  const fs::path dir = scratch("run_ntk");
  const ExperimentConfig c =
      parse_config_text(R"({"ntk": {"ensemble": 4, "coords": 16, "width": 8}})", {.task = "ntk", .out = dir.string()});
  std::ostringstream log, err;
  ASSERT_EQ(run(c, log, err), kExitOk) << err.str();
  const fs::path r = dir / "ntk-0";
  for (const char* f : {"kernel_k1.png", "kernel_k5.png", "kernel_k20.png", "spectrum.csv", "summary.json"})
    EXPECT_TRUE(fs::exists(r / f)) << f;
  EXPECT_EQ(slurp(r / "spectrum.csv").rfind("k,index,eigenvalue\n", 0), 0u);
}

TEST(Run, FreqMapSdfAndRender) {
  const fs::path dir = scratch("run_misc");
  std::ostringstream log, err;
  ASSERT_EQ(run(parse_config_text("", {.task = "freq-map", .out = dir.string()}), log, err), kExitOk) << err.str();
  const std::string csv = slurp(dir / "freq-map-0" / "frequencies.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 65);

  const ExperimentConfig sdf = parse_config_text(
      R"({"network": {"hidden_layers": 2, "hidden_width": 16}, "optim": {"batch_size": 256},
          "sdf": {"eval_resolution": 16, "chamfer_points": 500}})",
      {.task = "fit-sdf", .out = dir.string(), .iterations = 10});
  ASSERT_EQ(run(sdf, log, err), kExitOk) << err.str();
  for (const char* f : {"mesh.obj", "grid.raw", "grid.raw.json", "log.csv", "model.ckpt", "summary.json"})
    EXPECT_TRUE(fs::exists(dir / "fit-sdf-0" / f)) << f;

  const ExperimentConfig render =
      parse_config_text(R"({"render": {"width": 16, "height": 16, "samples": 32}})", {.task = "render-ray", .out = dir.string()});
  ASSERT_EQ(run(render, log, err), kExitOk) << err.str();
  EXPECT_TRUE(fs::exists(dir / "render-ray-0" / "render.png"));

  std::ofstream(dir / "rays.json") << R"({"rays": [[{"color": [1, 0, 0], "density": 0.6931471805599453, "delta": 1},
                                                    {"color": [0, 1, 0], "density": 1, "delta": 0.6931471805599453}]]})";
  ExperimentConfig rays = parse_config_text("", {.task = "render-ray", .seed = 1, .out = dir.string(),
                                                 .input = (dir / "rays.json").string()});
  ASSERT_EQ(run(rays, log, err), kExitOk) << err.str();
  EXPECT_NE(slurp(dir / "render-ray-1" / "colors.csv").find("0,0.5,0.25,0"), std::string::npos);
}

TEST(Run, FailuresMapToExitCodes) {
  const fs::path dir = scratch("run_fail");
  std::ostringstream log, err;
  EXPECT_EQ(run(parse_config_text("", {.task = "fit-image", .out = dir.string()}), log, err), kExitUsage);
  EXPECT_EQ(run(parse_config_text("", {.task = "fit-image", .out = dir.string(), .input = "/nonexistent.png"}), log, err),
            kExitIo);
  EXPECT_EQ(run(parse_config_text("", {.task = "eval", .out = dir.string(), .checkpoint = "/nonexistent.ckpt"}), log, err),
            kExitIo);
  EXPECT_EQ(run(parse_config_text("", {.task = "ntk", .out = dir.string(), .activation = "sine"}), log, err), kExitUsage);
  EXPECT_FALSE(err.str().empty());
}
