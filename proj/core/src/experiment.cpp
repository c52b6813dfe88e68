#include "finer/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <ostream>
#include <sstream>

#include "finer/checkpoint.hpp"
#include "finer/diagnostics.hpp"
#include "finer/errors.hpp"
#include "finer/fit.hpp"
#include "finer/geometry.hpp"
#include "finer/image.hpp"
#include "finer/metrics.hpp"
#include "finer/ntk.hpp"
#include "finer/sdf.hpp"

namespace finer {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

struct Metric {
  std::string name;
  double value;
};

class RunContext {
 public:
  RunContext(const ExperimentConfig& config, std::ostream& log) : config_(config), log_(log), start_(Clock::now()) {
    dir_ = config.run_directory();
  }

  const ExperimentConfig& config() const { return config_; }
  std::ostream& log() { return log_; }
  std::string path(const std::string& name) const { return (fs::path(dir_) / name).string(); }

  void prepare() {
    if (fs::exists(dir_) && !config_.io.force)
      throw IoError("output directory " + dir_ + " exists; pass --force to overwrite");
    fs::create_directories(dir_);
  }

  void add(const std::string& name, double value) { metrics_.push_back({name, value}); }

  void finish(json extra = json::object()) {
    json summary;
    summary["config"] = json::parse(config_.resolved_json);
    json m = json::object();
    for (const auto& [name, value] : metrics_) m[name] = std::isfinite(value) ? json(value) : json(nullptr);
    summary["metrics"] = m;
    for (auto& [k, v] : extra.items()) summary[k] = v;
    summary["wall_seconds"] = std::chrono::duration<double>(Clock::now() - start_).count();
    write_text("summary.json", summary.dump(2) + "\n");
    append_metrics_csv();
  }

  void write_text(const std::string& name, const std::string& content) const {
    std::ofstream f(path(name), std::ios::binary);
    if (!f) throw IoError("cannot write " + path(name));
    f << content;
  }

 private:
  void append_metrics_csv() const {
    const fs::path csv = fs::path(config_.io.out) / "metrics.csv";
    const bool fresh = !fs::exists(csv);
    std::ofstream f(csv, std::ios::binary | std::ios::app);
    if (!f) throw IoError("cannot append to " + csv.string());
    if (fresh) f << "run,task,seed,family,omega0,k,metric,value\n";
    char buf[64];
    for (const auto& [name, value] : metrics_) {
      std::snprintf(buf, sizeof buf, "%.10g", value);
      f << fs::path(dir_).filename().string() << ',' << to_string(config_.task) << ',' << config_.seed << ','
        << config_.family << ',' << config_.activation.omega0 << ',' << config_.init.bias_halfwidth << ',' << name
        << ',' << buf << '\n';
    }
  }

  const ExperimentConfig& config_;
  std::ostream& log_;
  Clock::time_point start_;
  std::string dir_;
  std::vector<Metric> metrics_;
};

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

void write_log(RunContext& ctx, const TrainLog& log) {
  log.write_csv(ctx.path("log.csv"), ctx.config().io.timing);
}

void save_model(RunContext& ctx, const Mlp& mlp) {
  save_checkpoint({mlp, ctx.config().init}, ctx.path("model.ckpt"));
}

void run_fit_image(RunContext& ctx) {
  const auto& c = ctx.config();
  if (c.io.input.empty()) throw ConfigError("io.input", "fit-image needs an input image (--input)");
  const ImageTarget img = load_image(c.io.input);
  ctx.prepare();
  ctx.log() << "fit-image " << img.width << "x" << img.height << "x" << img.channels << " family=" << c.family
            << " iters=" << c.train.iterations << "\n";
  const FitImageResult r = fit_image(img, c.activation, c.init, c.train);
  save_png(r.reconstruction, ctx.path("recon.png"));
  write_log(ctx, r.log);
  save_model(ctx, r.mlp);
  ctx.add("psnr", r.metrics.psnr);
  ctx.add("ssim", r.metrics.ssim);
  ctx.add("final_loss", r.log.records.back().loss);
  ctx.log() << "psnr " << fmt("%.3f", r.metrics.psnr) << " dB, ssim " << fmt("%.4f", r.metrics.ssim) << "\n";
  ctx.finish();
}

void run_fit_sdf(RunContext& ctx) {
  const auto& c = ctx.config();
  const auto target = make_sdf(c.sdf.shape);
  ctx.prepare();
  ctx.log() << "fit-sdf " << c.sdf.shape << " family=" << c.family << " iters=" << c.train.iterations
            << " batch=" << c.train.batch_size << "\n";
  const FitSdfResult r = fit_sdf(*target, c.activation, c.init, c.train, c.sdf.fit);
  const TriMesh mesh = marching_cubes(r.grid);
  mesh.write_obj(ctx.path("mesh.obj"));
  r.grid.write_raw(ctx.path("grid.raw"));
  write_log(ctx, r.log);
  save_model(ctx, r.mlp);
  const SdfMetrics m = sdf_metrics(r.grid, *target, c.sdf.chamfer_points, c.seed);
  ctx.add("iou", m.iou);
  ctx.add("chamfer", m.chamfer);
  ctx.add("vertices", static_cast<double>(m.vertices));
  ctx.add("triangles", static_cast<double>(m.triangles));
  ctx.add("final_loss", r.log.records.back().loss);
  ctx.log() << "iou " << fmt("%.4f", m.iou) << ", chamfer " << fmt("%.3e", m.chamfer) << "\n";
  ctx.finish();
}

std::string k_label(double k) { return fmt("%g", k); }

void run_ntk(RunContext& ctx) {
  const auto& c = ctx.config();
  if (c.activation.kind != ActivationKind::kFiner)
    throw ConfigError("activation.family", "the ntk task evaluates the closed-form FINER kernel; use finer");
  ctx.prepare();
  const Matrix coords = CoordinateGrid::line(c.ntk.coords).coordinates();
  const std::vector<std::size_t> dims{1, c.ntk.width, 1};

  std::ostringstream spectrum_csv;
  spectrum_csv << "k,index,eigenvalue\n";
  json per_k = json::array();
  for (double k : c.ntk.k_sweep) {
    InitScheme scheme = c.init;
    scheme.bias_halfwidth = k;
    const KernelMatrix kernel = analytic_ntk_mc(dims, c.activation, scheme, coords, c.ntk.ensemble);
    const SpectrumReport report = spectrum(kernel, c.ntk.thresholds);
    const std::string label = k_label(k);
    save_heatmap_png(kernel.k, ctx.path("kernel_k" + label + ".png"));
    {
      std::ofstream f(ctx.path("kernel_k" + label + ".csv"), std::ios::binary);
      if (!f) throw IoError("cannot write " + ctx.path("kernel_k" + label + ".csv"));
      write_kernel_csv(kernel, f);
    }
    for (std::size_t i = 0; i < report.eigenvalues.size(); ++i)
      spectrum_csv << label << ',' << i << ',' << fmt("%.17g", report.eigenvalues[i]) << '\n';

    json entry = {{"k", k}, {"diagonal_energy", report.diagonal_energy}};
    json counts = json::object();
    for (const auto& [t, n] : report.counts) counts[fmt("%g", t)] = n;
    entry["count_above"] = counts;
    per_k.push_back(entry);
    ctx.add("diagonal_energy_k" + label, report.diagonal_energy);
    ctx.add("count_above_1_k" + label, static_cast<double>(report.count_above(1.0)));
    ctx.log() << "k=" << label << " diagonal_energy " << fmt("%.4f", report.diagonal_energy) << " count_above(1) "
              << report.count_above(1.0) << "\n";
  }
  ctx.write_text("spectrum.csv", spectrum_csv.str());
  ctx.finish({{"kernels", per_k}});
}

void run_freq_map(RunContext& ctx) {
  const auto& c = ctx.config();
  ctx.prepare();
  const CoordinateGrid grid =
      c.freq_map.dims == 1 ? CoordinateGrid::line(c.freq_map.points) : CoordinateGrid::square(c.freq_map.points);
  const Mlp mlp = init_mlp({c.freq_map.dims, c.freq_map.width, 1}, c.activation, c.init, c.train.net.encoder);
  const auto neurons = neuron_frequency_map(mlp, grid);
  std::ostringstream csv;
  csv << "neuron,crossings,frequency\n";
  for (const auto& n : neurons) csv << n.neuron << ',' << n.crossings << ',' << fmt("%.10g", n.frequency) << '\n';
  ctx.write_text("frequencies.csv", csv.str());
  save_model(ctx, mlp);
  const double spread = frequency_spread(neurons);
  ctx.add("frequency_spread", spread);
  ctx.log() << "frequency spread " << fmt("%.4f", spread) << " cycles/unit over " << neurons.size() << " neurons\n";
  ctx.finish();
}

RaySamples parse_ray(const json& ray, std::size_t index) {
  RaySamples samples;
  for (const auto& s : ray) {
    RaySample r;
    const auto color = s.at("color").get<std::vector<double>>();
    if (color.size() != 3) throw ConfigError("rays[" + std::to_string(index) + "]", "color needs 3 channels");
    std::copy(color.begin(), color.end(), r.color.begin());
    r.density = s.at("density").get<double>();
    r.delta = s.at("delta").get<double>();
    samples.push_back(r);
  }
  return samples;
}

void run_render_ray(RunContext& ctx) {
  const auto& c = ctx.config();
  if (!c.io.input.empty()) {
    std::ifstream f(c.io.input);
    if (!f) throw IoError("cannot open " + c.io.input);
    json doc;
    try {
      doc = json::parse(f);
    } catch (const json::parse_error& e) {
      throw IoError(c.io.input + ": malformed JSON: " + e.what());
    }
    ctx.prepare();
    std::ostringstream csv;
    csv << "ray,r,g,b\n";
    const json& rays = doc.at("rays");
    for (std::size_t i = 0; i < rays.size(); ++i) {
      const auto col = composite_ray(parse_ray(rays[i], i));
      csv << i << ',' << fmt("%.17g", col[0]) << ',' << fmt("%.17g", col[1]) << ',' << fmt("%.17g", col[2]) << '\n';
    }
    ctx.write_text("colors.csv", csv.str());
    ctx.add("rays", static_cast<double>(rays.size()));
    ctx.finish();
    return;
  }

  // Orthographic rays along +z through the analytic shape; solid interior
  // with colour taken from position.
  const auto target = make_sdf(c.sdf.shape);
  ctx.prepare();
  const std::size_t w = c.render.width, h = c.render.height, n = c.render.samples;
  const double delta = 2.0 / static_cast<double>(n);
  ImageTarget img(w, h, 3);
  double coverage = 0.0;
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const double px = (2.0 * static_cast<double>(x) + 1.0) / static_cast<double>(w) - 1.0;
      const double py = 1.0 - (2.0 * static_cast<double>(y) + 1.0) / static_cast<double>(h);
      RaySamples ray(n);
      for (std::size_t i = 0; i < n; ++i) {
        const Point3 p{px, py, -1.0 + (static_cast<double>(i) + 0.5) * delta};
        ray[i].delta = delta;
        ray[i].density = target->distance(p) < 0.0 ? c.render.density_scale : 0.0;
        for (int ch = 0; ch < 3; ++ch) ray[i].color[static_cast<std::size_t>(ch)] = 0.5 + 0.5 * p[static_cast<std::size_t>(ch)];
      }
      const auto weights = composite_weights(ray);
      for (double wgt : weights) coverage += wgt;
      const auto col = composite_ray(ray);
      for (std::size_t ch = 0; ch < 3; ++ch) img.at(x, y, ch) = col[ch];
    }
  }
  save_png(img, ctx.path("render.png"));
  ctx.add("mean_opacity", coverage / static_cast<double>(w * h));
  ctx.finish();
}

void run_eval(RunContext& ctx) {
  const auto& c = ctx.config();
  if (c.io.checkpoint.empty()) throw ConfigError("io.checkpoint", "eval needs a checkpoint (--checkpoint)");
  const Checkpoint ckpt = load_checkpoint(c.io.checkpoint);
  const Mlp& mlp = ckpt.mlp;
  if (mlp.input_dim() == 2) {
    if (c.io.input.empty()) throw ConfigError("io.input", "eval of an image model needs the target image (--input)");
    const ImageTarget img = load_image(c.io.input);
    FINER_REQUIRE(mlp.output_dim() == img.channels, "eval: checkpoint channels do not match the image");
    ctx.prepare();
    const ImageTarget recon = render_image(mlp, img.width, img.height);
    save_png(recon, ctx.path("recon.png"));
    ctx.add("psnr", psnr(recon, img));
    ctx.add("ssim", ssim(recon, img));
  } else if (mlp.input_dim() == 3 && mlp.output_dim() == 1) {
    const auto target = make_sdf(c.sdf.shape);
    ctx.prepare();
    const ScalarGrid grid = evaluate_sdf_grid(mlp, c.sdf.fit.eval_resolution);
    const SdfMetrics m = sdf_metrics(grid, *target, c.sdf.chamfer_points, c.seed);
    marching_cubes(grid).write_obj(ctx.path("mesh.obj"));
    ctx.add("iou", m.iou);
    ctx.add("chamfer", m.chamfer);
  } else {
    throw ConfigError("io.checkpoint", "checkpoint is neither an image (2 -> c) nor an SDF (3 -> 1) model");
  }
  ctx.log() << "eval " << c.io.checkpoint << " done\n";
  ctx.finish({{"checkpoint", c.io.checkpoint}});
}

}  // namespace

int run(const ExperimentConfig& config, std::ostream& log, std::ostream& err) {
  RunContext ctx(config, log);
  try {
    switch (config.task) {
      case Task::kFitImage: run_fit_image(ctx); break;
      case Task::kFitSdf: run_fit_sdf(ctx); break;
      case Task::kNtk: run_ntk(ctx); break;
      case Task::kFreqMap: run_freq_map(ctx); break;
      case Task::kRenderRay: run_render_ray(ctx); break;
      case Task::kEval: run_eval(ctx); break;
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    err << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const NonFiniteError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const ConvergenceError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const ContractViolation& e) {
    err << "invalid input: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace finer
