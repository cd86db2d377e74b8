#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "fnirs/adam.hpp"
#include "fnirs/dataio.hpp"
#include "fnirs/model.hpp"
#include "fnirs/report.hpp"

namespace fnirs {

struct TrainConfig {
  std::size_t max_epochs = 300;
  std::size_t patience = 50;
  std::size_t batch_size = 64;
  int n_folds = 10;
  double train_fraction = 0.7;
  double learning_rate = 0.001;
  std::uint64_t seed = 7;

  void validate() const;
};

/// Raised when a loss turns NaN or infinite.
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Counts consecutive epochs without a strict decrease of the monitored loss.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience) : patience_(patience) {}

  /// Feeds one epoch's loss; returns true once patience is exhausted.
  bool update(double loss);
  std::size_t epochs_without_improvement() const { return stale_; }
  double best() const { return best_; }

 private:
  std::size_t patience_;
  std::size_t stale_ = 0;
  double best_ = std::numeric_limits<double>::infinity();
};

struct Example {
  const Array* window;  // [steps x channels]
  int label;
};

std::vector<Example> examples_from(const WindowSet& ws, std::span<const std::size_t> indices);

/// Stacks the selected windows into [n x steps x channels].
Array make_batch(std::span<const Example> examples, std::span<const std::size_t> order, std::size_t begin,
                 std::size_t end);

struct Evaluation {
  double loss = 0.0;
  double accuracy = 0.0;
  std::vector<int> predictions;
};

/// Inference-mode pass (dropout off) over every example.
Evaluation evaluate(const ModelState& model, std::span<const Example> examples, std::size_t batch_size = 64);

std::vector<int> predict(const ModelState& model, std::span<const Example> examples, std::size_t batch_size = 64);

struct TrainResult {
  ModelState best;
  std::vector<EpochRecord> history;
  std::size_t stopped_epoch = 0;
  std::size_t best_epoch = 0;
  double best_val_acc = 0.0;
};

using EpochCallback = std::function<void(const EpochRecord&)>;
/// Optional extra stopping rule, checked after each epoch's bookkeeping.
using StopPredicate = std::function<bool(const EpochRecord&)>;

/**
 * Minibatch Adam training with dropout active, validation in inference mode
 * after every epoch. Stops once val_loss has not decreased for cfg.patience
 * epochs or at cfg.max_epochs; returns the epoch with the highest validation
 * accuracy (earliest on ties). stream_seed keys weight init, shuffling and
 * dropout masks.
 */
TrainResult train_one_model(const ModelSpec& spec, InputShape input, std::span<const Example> train,
                            std::span<const Example> val, const TrainConfig& cfg, std::uint64_t stream_seed,
                            const EpochCallback& on_epoch = {}, const StopPredicate& stop_when = {});

}  // namespace fnirs
