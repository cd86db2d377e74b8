#include "fnirs/model.hpp"

#include <cmath>
#include <stdexcept>

namespace fnirs {

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::mlp: return "mlp";
    case ModelKind::lstm_fwd: return "lstm_fwd";
    case ModelKind::lstm_bwd: return "lstm_bwd";
    case ModelKind::bilstm: return "bilstm";
  }
  throw std::invalid_argument("invalid model kind");
}

ModelKind model_kind_from_string(std::string_view name) {
  for (auto k : kAllModelKinds)
    if (to_string(k) == name) return k;
  throw std::invalid_argument("unknown model kind '" + std::string(name) + "'");
}

void ModelSpec::validate() const {
  if (layer_widths.empty()) throw std::invalid_argument("model needs at least one hidden layer");
  for (auto w : layer_widths)
    if (w == 0) throw std::invalid_argument("layer widths must be positive");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw std::invalid_argument("dropout rate must lie in [0, 1)");
  if (n_classes < 2) throw std::invalid_argument("need at least 2 classes");
}

namespace {

bool is_recurrent(ModelKind k) { return k != ModelKind::mlp; }

void glorot(Array& w, std::size_t row0, std::size_t rows, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  const std::size_t cols = w.dim(1);
  for (std::size_t r = row0; r < row0 + rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) w.at(r, c) = rng.uniform(-limit, limit);
}

DenseParams init_dense(std::size_t in, std::size_t out, Activation act, Rng& rng) {
  DenseParams p = make_dense(in, out, act);
  glorot(p.W, 0, out, in, out, rng);
  return p;
}

LstmParams init_lstm(std::size_t hidden, std::size_t in, Rng& rng) {
  LstmParams p = make_lstm(hidden, in, Activation::relu);
  // Fans of the fused [4H x (H + I)] matrix.
  glorot(p.W, 0, 4 * hidden, hidden + in, 4 * hidden, rng);
  for (std::size_t j = 0; j < hidden; ++j) p.b[j] = 1.0;  // forget gate
  return p;
}

}  // namespace

std::vector<ModelState::ParamRef> ModelState::parameters() {
  std::vector<ParamRef> out;
  for (std::size_t i = 0; i < hidden_dense.size(); ++i) {
    out.push_back({"dense" + std::to_string(i) + ".W", &hidden_dense[i].W});
    out.push_back({"dense" + std::to_string(i) + ".b", &hidden_dense[i].b});
  }
  for (std::size_t l = 0; l < forward_layers.size(); ++l) {
    out.push_back({"lstm" + std::to_string(l) + ".fwd.W", &forward_layers[l].W});
    out.push_back({"lstm" + std::to_string(l) + ".fwd.b", &forward_layers[l].b});
    if (l < backward_layers.size()) {
      out.push_back({"lstm" + std::to_string(l) + ".bwd.W", &backward_layers[l].W});
      out.push_back({"lstm" + std::to_string(l) + ".bwd.b", &backward_layers[l].b});
    }
  }
  out.push_back({"head.W", &head.W});
  out.push_back({"head.b", &head.b});
  return out;
}

std::vector<ModelState::ConstParamRef> ModelState::parameters() const {
  std::vector<ConstParamRef> out;
  for (auto& p : const_cast<ModelState*>(this)->parameters()) out.push_back({std::move(p.name), p.value});
  return out;
}

std::size_t ModelState::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : parameters()) n += p.value->size();
  return n;
}

ModelState build_model(const ModelSpec& spec, InputShape input, std::uint64_t seed) {
  spec.validate();
  if (input.steps == 0 || input.channels == 0) throw std::invalid_argument("input shape must be positive");
  Rng rng = Rng::derive(seed, {0x696e6974ULL});
  ModelState m;
  m.spec = spec;
  m.input = input;
  std::size_t width = 0;
  if (!is_recurrent(spec.kind)) {
    width = input.steps * input.channels;
    for (auto w : spec.layer_widths) {
      m.hidden_dense.push_back(init_dense(width, w, Activation::relu, rng));
      width = w;
    }
  } else {
    width = input.channels;
    const bool bidirectional = spec.kind == ModelKind::bilstm;
    for (auto w : spec.layer_widths) {
      m.forward_layers.push_back(init_lstm(w, width, rng));
      if (bidirectional) m.backward_layers.push_back(init_lstm(w, width, rng));
      width = bidirectional ? 2 * w : w;
    }
  }
  m.head = init_dense(width, spec.n_classes, Activation::linear, rng);
  return m;
}

Array model_forward(const ModelState& model, const Array& batch, bool training, Rng& rng, ForwardCache* cache) {
  const InputShape& in = model.input;
  if (batch.rank() != 3 || batch.dim(1) != in.steps || batch.dim(2) != in.channels)
    throw ShapeError("model input " + to_string(batch.shape()) + " does not match [B x " +
                     std::to_string(in.steps) + " x " + std::to_string(in.channels) + "]");
  const std::size_t b = batch.dim(0);
  if (cache) {
    *cache = ForwardCache{};
    cache->batch = b;
  }

  Array h;
  if (model.spec.kind == ModelKind::mlp) {
    h = batch.reshaped({b, in.steps * in.channels});
    if (cache) cache->dense.resize(model.hidden_dense.size());
    for (std::size_t i = 0; i < model.hidden_dense.size(); ++i)
      h = dense_forward(h, model.hidden_dense[i], cache ? &cache->dense[i] : nullptr);
  } else {
    h = model.spec.kind == ModelKind::lstm_bwd ? reverse_time_batch(batch) : batch;
    const std::size_t layers = model.forward_layers.size();
    if (cache) cache->recurrent.resize(layers);
    for (std::size_t l = 0; l < layers; ++l) {
      const bool sequences = l + 1 < layers;
      BiLstmCache* lc = cache ? &cache->recurrent[l] : nullptr;
      if (model.spec.kind == ModelKind::bilstm)
        h = bilstm_forward(h, model.forward_layers[l], model.backward_layers[l], sequences, lc);
      else
        h = lstm_layer_forward(h, model.forward_layers[l], sequences, lc ? &lc->fwd : nullptr);
    }
  }

  DropoutResult d = dropout_forward(h, model.spec.dropout_rate, training, rng);
  if (cache) cache->dropout_mask = std::move(d.mask);
  return dense_forward(d.y, model.head, cache ? &cache->head : nullptr);
}

std::vector<Array> model_backward(const ModelState& model, const ForwardCache& cache, const Array& grad_logits) {
  if (grad_logits.rank() != 2 || grad_logits.dim(0) != cache.batch || grad_logits.dim(1) != model.head.out())
    throw std::invalid_argument("gradient " + to_string(grad_logits.shape()) + " does not match the cached batch of " +
                                std::to_string(cache.batch));
  if (cache.head.input.empty()) throw std::invalid_argument("model_backward called without a forward cache");

  DenseGrads hg = dense_backward(model.head, cache.head, grad_logits);
  Array dh = dropout_backward(hg.dx, cache.dropout_mask);

  std::vector<Array> body;  // parameter gradients before the head, in enumeration order
  if (model.spec.kind == ModelKind::mlp) {
    const std::size_t n = model.hidden_dense.size();
    body.resize(2 * n);
    for (std::size_t i = n; i-- > 0;) {
      DenseGrads g = dense_backward(model.hidden_dense[i], cache.dense[i], dh);
      dh = std::move(g.dx);
      body[2 * i] = std::move(g.dW);
      body[2 * i + 1] = std::move(g.db);
    }
  } else {
    const bool bidirectional = model.spec.kind == ModelKind::bilstm;
    const std::size_t per_layer = bidirectional ? 4 : 2;
    const std::size_t layers = model.forward_layers.size();
    body.resize(per_layer * layers);
    for (std::size_t l = layers; l-- > 0;) {
      if (bidirectional) {
        BiLstmGrads g = bilstm_backward(model.forward_layers[l], model.backward_layers[l], cache.recurrent[l], dh);
        dh = std::move(g.dseq);
        body[4 * l] = std::move(g.fwd.dW);
        body[4 * l + 1] = std::move(g.fwd.db);
        body[4 * l + 2] = std::move(g.bwd.dW);
        body[4 * l + 3] = std::move(g.bwd.db);
      } else {
        LstmGrads g = lstm_layer_backward(model.forward_layers[l], cache.recurrent[l].fwd, dh);
        dh = std::move(g.dseq);
        body[2 * l] = std::move(g.dW);
        body[2 * l + 1] = std::move(g.db);
      }
    }
  }
  body.push_back(std::move(hg.dW));
  body.push_back(std::move(hg.db));
  return body;
}

}  // namespace fnirs
