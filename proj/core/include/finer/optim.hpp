#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "finer/linalg.hpp"
#include "finer/mlp.hpp"

namespace finer {

/// Training currency shared by every task: one coordinate row per target row.
struct SampleBatch {
  Matrix coords;   ///< B × d_in
  Matrix targets;  ///< B × d_out
};

struct AdamState {
  std::size_t step = 0;
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  GradientSet m;  ///< first moment, shaped like the network
  GradientSet v;  ///< second moment

  static AdamState for_mlp(const Mlp& mlp, double lr = 1e-4, double beta1 = 0.9, double beta2 = 0.999,
                           double eps = 1e-8);
};

/// One bias-corrected Adam update, θ ← θ − lr·m̂/(√v̂ + eps).
///
/// Throws NonFiniteError carrying the layer index if any gradient entry is NaN
/// or infinite; the network and state are left untouched in that case.
void adam_step(Mlp& mlp, const GradientSet& grads, AdamState& state);

enum class Loss { kL2, kL1 };

struct LossValue {
  double value = 0.0;
  Matrix output_grad;  ///< dL/d(outputs)
};

/// Mean over every output entry: L2 → mean (ŷ−y)², L1 → mean |ŷ−y|.
LossValue evaluate_loss(Loss loss, const Matrix& predictions, const Matrix& targets);
/// Same, writing the gradient into `out.output_grad` and reusing its storage.
void evaluate_loss(Loss loss, const Matrix& predictions, const Matrix& targets, LossValue& out);

struct TrainRecord {
  std::size_t iteration = 0;
  double loss = 0.0;
  double ms = 0.0;  ///< wall-clock milliseconds since training started
  std::optional<double> psnr;
};

struct TrainLog {
  std::vector<TrainRecord> records;

  /// CSV with header `iter,loss,ms,psnr`. With include_timing false the ms
  /// field is left empty so that logs of identical runs are byte-identical.
  void write_csv(std::ostream& out, bool include_timing = false) const;
  void write_csv(const std::string& path, bool include_timing = false) const;
};

using BatchSampler = std::function<SampleBatch(std::size_t iteration)>;
/// Called after each forward pass; may return a PSNR for the log.
using TrainMonitor = std::function<std::optional<double>(std::size_t iteration, const Matrix& predictions,
                                                         const SampleBatch& batch)>;

struct TrainOptions {
  Loss loss = Loss::kL2;
  std::size_t iterations = 1;
  bool cosine_decay = false;  ///< lr_t = lr·½(1 + cos(π t / T))
  TrainMonitor monitor;
};

/// Runs forward / backward / adam_step per iteration. If a step hits a
/// non-finite gradient, the error is rethrown after `partial_log` (when
/// given) receives the records made so far.
TrainLog train(Mlp& mlp, const BatchSampler& sampler, const TrainOptions& options, AdamState& state,
               TrainLog* partial_log = nullptr);

}  // namespace finer
