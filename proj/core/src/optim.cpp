#include "finer/optim.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <ostream>

#include "finer/errors.hpp"

namespace finer {

AdamState AdamState::for_mlp(const Mlp& mlp, double lr, double beta1, double beta2, double eps) {
  FINER_REQUIRE(lr >= 0.0, "adam: learning rate must be non-negative");
  FINER_REQUIRE(beta1 > 0.0 && beta1 < 1.0 && beta2 > 0.0 && beta2 < 1.0, "adam: betas must lie in (0, 1)");
  FINER_REQUIRE(eps >= 0.0, "adam: eps must be non-negative");
  AdamState s;
  s.lr = lr;
  s.beta1 = beta1;
  s.beta2 = beta2;
  s.eps = eps;
  s.m = GradientSet::zeros_like(mlp);
  s.v = GradientSet::zeros_like(mlp);
  return s;
}

namespace {

void update(std::span<double> theta, std::span<const double> g, std::span<double> m, std::span<double> v,
            const AdamState& s, double c1, double c2) {
  for (std::size_t i = 0; i < theta.size(); ++i) {
    m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * g[i];
    v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * g[i] * g[i];
    const double mhat = m[i] / c1;
    const double vhat = v[i] / c2;
    theta[i] -= s.lr * mhat / (std::sqrt(vhat) + s.eps);
  }
}

}  // namespace

void adam_step(Mlp& mlp, const GradientSet& grads, AdamState& state) {
  const std::size_t n = mlp.num_layers();
  FINER_REQUIRE(grads.weights.size() == n && grads.biases.size() == n, "adam_step: gradient depth mismatch");
  FINER_REQUIRE(state.m.weights.size() == n && state.v.weights.size() == n, "adam_step: state depth mismatch");
  for (std::size_t l = 0; l < n; ++l) {
    const auto& layer = mlp.layer(l);
    FINER_REQUIRE(grads.weights[l].rows() == layer.weights.rows() && grads.weights[l].cols() == layer.weights.cols() &&
                      grads.biases[l].size() == layer.biases.size(),
                  "adam_step: gradient shape mismatch at layer " + std::to_string(l));
    if (!all_finite(grads.weights[l].span()) || !all_finite(grads.biases[l].span()))
      throw NonFiniteError("adam_step: non-finite gradient in layer " + std::to_string(l),
                           static_cast<std::ptrdiff_t>(l));
  }

  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t l = 0; l < n; ++l) {
    auto& layer = mlp.layer(l);
    update(layer.weights.span(), grads.weights[l].span(), state.m.weights[l].span(), state.v.weights[l].span(), state,
           c1, c2);
    update(layer.biases.span(), grads.biases[l].span(), state.m.biases[l].span(), state.v.biases[l].span(), state,
           c1, c2);
  }
}

void evaluate_loss(Loss loss, const Matrix& predictions, const Matrix& targets, LossValue& out) {
  FINER_REQUIRE(predictions.rows() == targets.rows() && predictions.cols() == targets.cols(),
                "loss: prediction/target shape mismatch");
  FINER_REQUIRE(!predictions.empty(), "loss: empty batch");
  const double inv_n = 1.0 / static_cast<double>(predictions.size());
  out.output_grad.reshape(predictions.rows(), predictions.cols());
  const auto p = predictions.span();
  const auto y = targets.span();
  auto g = out.output_grad.span();
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double r = p[i] - y[i];
    if (loss == Loss::kL2) {
      total += r * r;
      g[i] = 2.0 * r * inv_n;
    } else {
      total += std::abs(r);
      g[i] = (r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0)) * inv_n;
    }
  }
  out.value = total * inv_n;
}

LossValue evaluate_loss(Loss loss, const Matrix& predictions, const Matrix& targets) {
  LossValue out;
  evaluate_loss(loss, predictions, targets, out);
  return out;
}

void TrainLog::write_csv(std::ostream& out, bool include_timing) const {
  out << "iter,loss,ms,psnr\n";
  char buf[64];
  for (const auto& r : records) {
    out << r.iteration << ',';
    std::snprintf(buf, sizeof buf, "%.17g", r.loss);
    out << buf << ',';
    if (include_timing) {
      std::snprintf(buf, sizeof buf, "%.3f", r.ms);
      out << buf;
    }
    out << ',';
    if (r.psnr) {
      std::snprintf(buf, sizeof buf, "%.6f", *r.psnr);
      out << buf;
    }
    out << '\n';
  }
}

void TrainLog::write_csv(const std::string& path, bool include_timing) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path);
  write_csv(f, include_timing);
}

TrainLog train(Mlp& mlp, const BatchSampler& sampler, const TrainOptions& options, AdamState& state,
               TrainLog* partial_log) {
  FINER_REQUIRE(options.iterations >= 1, "train: iterations must be >= 1");
  FINER_REQUIRE(static_cast<bool>(sampler), "train: no batch sampler");
  const double base_lr = state.lr;
  const auto t0 = std::chrono::steady_clock::now();
  TrainLog log;
  log.records.reserve(options.iterations);
  // Buffers reused across iterations.
  ForwardPass pass;
  LossValue loss;
  GradientSet grads;
  BackwardScratch scratch;
  try {
    for (std::size_t it = 1; it <= options.iterations; ++it) {
      const SampleBatch batch = sampler(it);
      forward(mlp, batch.coords, pass);
      evaluate_loss(options.loss, pass.outputs, batch.targets, loss);
      backward(mlp, pass.cache, loss.output_grad, grads, scratch);
      if (options.cosine_decay) {
        const double frac = static_cast<double>(it - 1) / static_cast<double>(options.iterations);
        state.lr = base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * frac));
      }
      adam_step(mlp, grads, state);

      TrainRecord rec;
      rec.iteration = it;
      rec.loss = loss.value;
      rec.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      if (options.monitor) rec.psnr = options.monitor(it, pass.outputs, batch);
      log.records.push_back(rec);
    }
  } catch (const NonFiniteError&) {
    state.lr = base_lr;
    if (partial_log) *partial_log = log;
    throw;
  }
  state.lr = base_lr;
  if (partial_log) *partial_log = log;
  return log;
}

}  // namespace finer
