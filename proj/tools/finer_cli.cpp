// finer: command-line front end for the experiment tasks.
#include <CLI11.hpp>
#include <iostream>
#include <optional>
#include <string>

#include "finer/config.hpp"
#include "finer/experiment.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> activation;
  std::optional<double> omega0;
  std::optional<double> k;
  std::optional<std::size_t> iters;
  std::optional<std::string> input;
  std::optional<std::string> checkpoint;
  bool force = false;
  bool print_config = false;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON configuration file");
  cmd->add_option("--seed", f.seed, "run seed");
  cmd->add_option("--out", f.out, "output root; artifacts go to <out>/<task>-<seed>/");
  cmd->add_option("--activation", f.activation, "network family")
      ->check(CLI::IsMember({"finer", "sine", "gauss", "pemlp"}));
  cmd->add_option("--omega0", f.omega0, "frequency scale");
  cmd->add_option("--k", f.k, "bias initialization half-width");
  cmd->add_option("--iters", f.iters, "training iterations");
  cmd->add_option("--input", f.input, "input image (fit-image, eval) or ray JSON (render-ray)");
  cmd->add_option("--checkpoint", f.checkpoint, "model checkpoint (eval)");
  cmd->add_flag("--force", f.force, "overwrite an existing run directory");
  cmd->add_flag("--print-config", f.print_config, "print the resolved configuration and exit");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"FINER implicit neural representation experiments"};
  app.require_subcommand(1);
  Flags flags;
  const char* tasks[][2] = {
      {"fit-image", "fit a coordinate network to an image"},
      {"fit-sdf", "fit a signed distance field of an analytic shape"},
      {"ntk", "Monte-Carlo neural tangent kernels over a bias range sweep"},
      {"freq-map", "per-neuron dominant frequencies of the first layer"},
      {"render-ray", "volume compositing along rays"},
      {"eval", "recompute metrics from a checkpoint"},
  };
  for (const auto& [name, help] : tasks) add_common(app.add_subcommand(name, help), flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : finer::kExitUsage;
  }

  finer::ConfigOverrides ov;
  ov.task = app.get_subcommands().front()->get_name();
  ov.seed = flags.seed;
  ov.out = flags.out;
  ov.activation = flags.activation;
  ov.omega0 = flags.omega0;
  ov.k = flags.k;
  ov.iterations = flags.iters;
  ov.input = flags.input;
  ov.checkpoint = flags.checkpoint;
  ov.force = flags.force;

  finer::ExperimentConfig config;
  try {
    config = finer::parse_config(flags.config, ov);
  } catch (const finer::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return finer::kExitUsage;
  }
  if (flags.print_config) {
    std::cout << config.resolved_json << "\n";
    return finer::kExitOk;
  }
  return finer::run(config, std::cout, std::cerr);
}
