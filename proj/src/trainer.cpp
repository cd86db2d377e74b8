#include "fnirs/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace fnirs {

void TrainConfig::validate() const {
  if (max_epochs == 0) throw std::invalid_argument("max_epochs must be positive");
  if (patience >= max_epochs) throw std::invalid_argument("patience must be smaller than max_epochs");
  if (batch_size == 0) throw std::invalid_argument("batch_size must be at least 1");
  if (n_folds < 2) throw std::invalid_argument("n_folds must be at least 2");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw std::invalid_argument("train_fraction must lie in (0, 1)");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
}

bool EarlyStopping::update(double loss) {
  if (loss < best_) {
    best_ = loss;
    stale_ = 0;
  } else {
    ++stale_;
  }
  return stale_ >= patience_;
}

std::vector<Example> examples_from(const WindowSet& ws, std::span<const std::size_t> indices) {
  std::vector<Example> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back({&ws.windows.at(i).data, index_of(ws.windows[i].label)});
  return out;
}

Array make_batch(std::span<const Example> examples, std::span<const std::size_t> order, std::size_t begin,
                 std::size_t end) {
  const Array& first = *examples[order[begin]].window;
  const std::size_t steps = first.dim(0), channels = first.dim(1), per = steps * channels;
  Array batch({end - begin, steps, channels});
  for (std::size_t r = begin; r < end; ++r) {
    const Array& w = *examples[order[r]].window;
    require_shape(w, first.shape(), "batch window");
    std::copy_n(w.data(), per, batch.data() + (r - begin) * per);
  }
  return batch;
}

namespace {

int argmax_row(const Array& logits, std::size_t r) {
  const std::size_t c = logits.dim(1);
  const double* row = logits.data() + r * c;
  return static_cast<int>(std::max_element(row, row + c) - row);
}

std::vector<int> labels_of(std::span<const Example> examples, std::span<const std::size_t> order, std::size_t begin,
                           std::size_t end) {
  std::vector<int> labels;
  for (std::size_t r = begin; r < end; ++r) labels.push_back(examples[order[r]].label);
  return labels;
}

}  // namespace

Evaluation evaluate(const ModelState& model, std::span<const Example> examples, std::size_t batch_size) {
  Evaluation ev;
  if (examples.empty()) return ev;
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t n_batches = (examples.size() + batch_size - 1) / batch_size;
  std::vector<double> batch_loss(n_batches);
  ev.predictions.resize(examples.size());
  std::vector<std::string> errors(n_batches);

  // Batches are independent in inference mode; the loss sum is reduced in batch order.
#pragma omp parallel for schedule(dynamic)
  for (std::size_t b = 0; b < n_batches; ++b) {
    try {
      const std::size_t begin = b * batch_size, end = std::min(examples.size(), begin + batch_size);
      Rng unused(0);
      const Array logits = model_forward(model, make_batch(examples, order, begin, end), false, unused);
      const auto labels = labels_of(examples, order, begin, end);
      const LossAndGrad lg = softmax_crossentropy(logits, one_hot(labels, model.spec.n_classes));
      batch_loss[b] = lg.loss * static_cast<double>(end - begin);
      for (std::size_t r = begin; r < end; ++r) ev.predictions[r] = argmax_row(logits, r - begin);
    } catch (const std::exception& e) {
      errors[b] = e.what();
    }
  }
  for (const auto& e : errors)
    if (!e.empty()) throw std::runtime_error(e);

  double total = 0.0;
  for (double l : batch_loss) total += l;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < examples.size(); ++i) correct += ev.predictions[i] == examples[i].label;
  ev.loss = total / static_cast<double>(examples.size());
  ev.accuracy = static_cast<double>(correct) / static_cast<double>(examples.size());
  return ev;
}

std::vector<int> predict(const ModelState& model, std::span<const Example> examples, std::size_t batch_size) {
  return evaluate(model, examples, batch_size).predictions;
}

TrainResult train_one_model(const ModelSpec& spec, InputShape input, std::span<const Example> train,
                            std::span<const Example> val, const TrainConfig& cfg, std::uint64_t stream_seed,
                            const EpochCallback& on_epoch, const StopPredicate& stop_when) {
  cfg.validate();
  if (train.empty() || val.empty()) throw std::invalid_argument("training needs nonempty train and validation sets");

  ModelState model = build_model(spec, input, stream_seed);
  auto params = model.parameters();
  std::vector<Array*> param_ptrs;
  std::vector<Shape> shapes;
  for (auto& p : params) {
    param_ptrs.push_back(p.value);
    shapes.push_back(p.value->shape());
  }
  AdamState adam = AdamState::for_shapes(shapes, AdamHyper{.lr = cfg.learning_rate});
  Rng shuffle_rng = Rng::derive(stream_seed, {0x73687566ULL});
  Rng dropout_rng = Rng::derive(stream_seed, {0x64726f70ULL});

  TrainResult result;
  result.best = model;
  result.best_val_acc = -1.0;
  EarlyStopping stopper(cfg.patience);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t begin = 0; begin < train.size(); begin += cfg.batch_size) {
      const std::size_t end = std::min(train.size(), begin + cfg.batch_size);
      const auto labels = labels_of(train, order, begin, end);
      ForwardCache cache;
      const Array logits = model_forward(model, make_batch(train, order, begin, end), true, dropout_rng, &cache);
      const LossAndGrad lg = softmax_crossentropy(logits, one_hot(labels, spec.n_classes));
      if (!std::isfinite(lg.loss)) {
        std::ostringstream msg;
        msg << to_string(spec.kind) << ": non-finite training loss at epoch " << epoch << ", batch starting at "
            << begin;
        throw TrainingError(msg.str());
      }
      const auto grads = model_backward(model, cache, lg.grad);
      adam_step(param_ptrs, grads, adam);
      loss_sum += lg.loss * static_cast<double>(end - begin);
      for (std::size_t r = begin; r < end; ++r) correct += argmax_row(logits, r - begin) == labels[r - begin];
    }

    const Evaluation v = evaluate(model, val, cfg.batch_size);
    if (!std::isfinite(v.loss))
      throw TrainingError(std::string(to_string(spec.kind)) + ": non-finite validation loss at epoch " +
                          std::to_string(epoch));
    EpochRecord rec{epoch, loss_sum / static_cast<double>(train.size()), v.loss,
                    static_cast<double>(correct) / static_cast<double>(train.size()), v.accuracy};
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);
    if (v.accuracy > result.best_val_acc) {
      result.best_val_acc = v.accuracy;
      result.best_epoch = epoch;
      result.best = model;
    }
    result.stopped_epoch = epoch;
    if (stopper.update(v.loss) || (stop_when && stop_when(rec))) break;
  }
  return result;
}

}  // namespace fnirs
