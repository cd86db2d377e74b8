#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "fnirs/layers.hpp"

namespace fnirs {

enum class ModelKind { mlp, lstm_fwd, lstm_bwd, bilstm };

inline constexpr ModelKind kAllModelKinds[] = {ModelKind::mlp, ModelKind::lstm_fwd, ModelKind::lstm_bwd,
                                               ModelKind::bilstm};

std::string_view to_string(ModelKind kind);
ModelKind model_kind_from_string(std::string_view name);

struct ModelSpec {
  ModelKind kind = ModelKind::bilstm;
  std::vector<std::size_t> layer_widths{64, 32};
  double dropout_rate = 0.5;
  std::size_t n_classes = 4;

  void validate() const;
};

struct InputShape {
  std::size_t steps = 300;
  std::size_t channels = 24;
};

/**
 * Trainable network.
 *
 *  mlp:      dense(w0, relu) -> dense(w1, relu) -> dropout -> dense(classes)
 *  lstm_fwd: lstm(w0, sequences) -> lstm(w1, final state) -> dropout -> dense(classes)
 *  lstm_bwd: lstm_fwd applied to the time-reversed window
 *  bilstm:   bidirectional(w0, sequences) -> bidirectional(w1, final) -> dropout -> dense(classes)
 *
 * The head emits logits; softmax lives in the loss.
 */
struct ModelState {
  ModelSpec spec;
  InputShape input;
  std::vector<DenseParams> hidden_dense;  // mlp only
  std::vector<LstmParams> forward_layers;
  std::vector<LstmParams> backward_layers;  // bilstm only
  DenseParams head;

  struct ParamRef {
    std::string name;
    Array* value;
  };
  struct ConstParamRef {
    std::string name;
    const Array* value;
  };

  /// Fixed enumeration order shared by gradients, optimizer state and checkpoints.
  std::vector<ParamRef> parameters();
  std::vector<ConstParamRef> parameters() const;
  std::size_t parameter_count() const;
};

ModelState build_model(const ModelSpec& spec, InputShape input, std::uint64_t seed);

struct ForwardCache {
  std::size_t batch = 0;
  std::vector<DenseCache> dense;
  std::vector<BiLstmCache> recurrent;  // unidirectional layers use .fwd only
  Array dropout_mask;
  DenseCache head;
};

/// batch is [B x steps x channels] for every kind; returns logits [B x classes].
Array model_forward(const ModelState& model, const Array& batch, bool training, Rng& rng,
                    ForwardCache* cache = nullptr);

/// Gradients of every parameter, in parameters() order.
std::vector<Array> model_backward(const ModelState& model, const ForwardCache& cache, const Array& grad_logits);

}  // namespace fnirs
