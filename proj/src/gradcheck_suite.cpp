#include "fnirs/gradcheck_suite.hpp"

#include <algorithm>

#include "fnirs/gradcheck.hpp"
#include "fnirs/layers.hpp"
#include "fnirs/model.hpp"
#include "fnirs/ops.hpp"

namespace fnirs {

namespace {

Array random_array(Shape shape, Rng& rng, double scale = 1.0) {
  Array a(std::move(shape));
  for (auto& v : a.values()) v = rng.uniform(-scale, scale);
  return a;
}

double dot(const Array& a, const Array& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Worst relative error over several (f, x, analytic) triples.
struct Worst {
  double value = 0.0;
  void check(const ScalarFn& f, const Array& x, const Array& analytic) {
    value = std::max(value, finite_diff_check(f, x, analytic));
  }
};

double check_activations(Rng& rng) {
  Worst w;
  for (Activation kind : {Activation::sigmoid, Activation::tanh, Activation::relu}) {
    const Array x = random_array({12}, rng, 3.0);
    const Array proj = random_array({12}, rng);
    Array g = activation_grad(kind, x);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] *= proj[i];
    w.check([&](const Array& p) { return dot(activation(kind, p), proj); }, x, g);
  }
  return w.value;
}

double check_softmax(Rng& rng) {
  const Array logits = random_array({3, 4}, rng, 2.0);
  std::vector<int> labels;
  for (int r = 0; r < 3; ++r) labels.push_back(static_cast<int>(rng.index(4)));
  const Array y = one_hot(labels, 4);
  const auto lg = softmax_crossentropy(logits, y);
  Worst w;
  w.check([&](const Array& p) { return softmax_crossentropy(p, y).loss; }, logits, lg.grad);
  return w.value;
}

double check_dense(Rng& rng) {
  Worst w;
  for (Activation act : {Activation::relu, Activation::tanh, Activation::linear}) {
    DenseParams p = make_dense(5, 4, act);
    p.W = random_array({4, 5}, rng);
    p.b = random_array({4}, rng, 0.5);
    const Array x = random_array({3, 5}, rng);
    const Array proj = random_array({3, 4}, rng);
    DenseCache cache;
    dense_forward(x, p, &cache);
    const DenseGrads g = dense_backward(p, cache, proj);
    w.check([&](const Array& v) { return dot(dense_forward(v, p), proj); }, x, g.dx);
    w.check([&](const Array& v) { DenseParams q = p; q.W = v; return dot(dense_forward(x, q), proj); }, p.W, g.dW);
    w.check([&](const Array& v) { DenseParams q = p; q.b = v; return dot(dense_forward(x, q), proj); }, p.b, g.db);
  }
  return w.value;
}

// Candidate units sitting at the ReLU kink give gradients near 1e-9, where
// double roundoff in the central difference dominates the relative error.
// A positive candidate bias keeps them clearly on one side.
void lift_candidate_bias(LstmParams& p, Rng& rng) {
  const std::size_t h = p.hidden();
  for (std::size_t j = 2 * h; j < 3 * h; ++j) p.b[j] = rng.uniform(0.5, 1.0);
}

LstmParams random_lstm(std::size_t hidden, std::size_t in, Rng& rng, Activation act) {
  LstmParams p = make_lstm(hidden, in, act);
  p.W = random_array(p.W.shape(), rng, 0.8);
  p.b = random_array(p.b.shape(), rng, 0.5);
  lift_candidate_bias(p, rng);
  return p;
}

double check_lstm_layer(Rng& rng, std::size_t steps, bool sequences) {
  Worst w;
  for (Activation act : {Activation::relu, Activation::tanh}) {
    const LstmParams p = random_lstm(3, 2, rng, act);
    const Array x = random_array({2, steps, 2}, rng);
    const Array proj = sequences ? random_array({2, steps, 3}, rng) : random_array({2, 3}, rng);
    LstmCache cache;
    lstm_layer_forward(x, p, sequences, &cache);
    const LstmGrads g = lstm_layer_backward(p, cache, proj);
    w.check([&](const Array& v) { return dot(lstm_layer_forward(v, p, sequences), proj); }, x, g.dseq);
    w.check([&](const Array& v) { LstmParams q = p; q.W = v; return dot(lstm_layer_forward(x, q, sequences), proj); },
            p.W, g.dW);
    w.check([&](const Array& v) { LstmParams q = p; q.b = v; return dot(lstm_layer_forward(x, q, sequences), proj); },
            p.b, g.db);
  }
  return w.value;
}

// Two stacked layers: hidden 3 with full sequences, then hidden 2 final state.
double check_stack(Rng& rng, bool bidirectional) {
  const std::size_t steps = 4, in = 2, h1 = 3, h2 = 2;
  const std::size_t dir = bidirectional ? 2 : 1;
  LstmParams f1 = random_lstm(h1, in, rng, Activation::relu), b1 = random_lstm(h1, in, rng, Activation::relu);
  LstmParams f2 = random_lstm(h2, dir * h1, rng, Activation::relu), b2 = random_lstm(h2, dir * h1, rng, Activation::relu);
  const Array x = random_array({2, steps, in}, rng);
  const Array proj = random_array({2, dir * h2}, rng);

  auto forward = [&](const Array& input, const LstmParams& pf1, const LstmParams& pb1, const LstmParams& pf2,
                     const LstmParams& pb2, BiLstmCache* c1, BiLstmCache* c2) {
    if (bidirectional) {
      const Array mid = bilstm_forward(input, pf1, pb1, true, c1);
      return bilstm_forward(mid, pf2, pb2, false, c2);
    }
    const Array mid = lstm_layer_forward(input, pf1, true, c1 ? &c1->fwd : nullptr);
    return lstm_layer_forward(mid, pf2, false, c2 ? &c2->fwd : nullptr);
  };

  BiLstmCache c1, c2;
  forward(x, f1, b1, f2, b2, &c1, &c2);
  Array dx;
  std::vector<std::pair<Array*, Array>> param_grads;
  if (bidirectional) {
    const BiLstmGrads g2 = bilstm_backward(f2, b2, c2, proj);
    const BiLstmGrads g1 = bilstm_backward(f1, b1, c1, g2.dseq);
    dx = g1.dseq;
    param_grads = {{&f1.W, g1.fwd.dW}, {&f1.b, g1.fwd.db}, {&b1.W, g1.bwd.dW}, {&b1.b, g1.bwd.db},
                   {&f2.W, g2.fwd.dW}, {&f2.b, g2.fwd.db}, {&b2.W, g2.bwd.dW}, {&b2.b, g2.bwd.db}};
  } else {
    const LstmGrads g2 = lstm_layer_backward(f2, c2.fwd, proj);
    const LstmGrads g1 = lstm_layer_backward(f1, c1.fwd, g2.dseq);
    dx = g1.dseq;
    param_grads = {{&f1.W, g1.dW}, {&f1.b, g1.db}, {&f2.W, g2.dW}, {&f2.b, g2.db}};
  }

  Worst w;
  w.check([&](const Array& v) { return dot(forward(v, f1, b1, f2, b2, nullptr, nullptr), proj); }, x, dx);
  for (auto& [param, grad] : param_grads) {
    const Array original = *param;
    w.check(
        [&, param = param](const Array& v) {
          *param = v;
          const double r = dot(forward(x, f1, b1, f2, b2, nullptr, nullptr), proj);
          *param = original;
          return r;
        },
        original, grad);
  }
  return w.value;
}

double check_dropout(Rng& rng) {
  const Array x = random_array({4, 6}, rng);
  const Array proj = random_array({4, 6}, rng);
  const std::uint64_t mask_seed = rng.next_u64();
  auto f = [&](const Array& v) {
    Rng r(mask_seed);
    return dot(dropout_forward(v, 0.5, true, r).y, proj);
  };
  Rng r(mask_seed);
  const DropoutResult d = dropout_forward(x, 0.5, true, r);
  Worst w;
  w.check(f, x, dropout_backward(proj, d.mask));
  return w.value;
}

// Whole network in training mode; the dropout stream is re-seeded per evaluation
// so every probe sees the same mask.
double check_model(ModelKind kind, Rng& rng) {
  ModelSpec spec{kind, {3, 2}, 0.5, 4};
  const InputShape input{5, 3};
  ModelState model = build_model(spec, input, rng.next_u64());
  for (auto& p : model.parameters())
    for (auto& v : p.value->values()) v += rng.uniform(-0.3, 0.3);
  // Recurrent layers get the same generic parameters as the layer checks,
  // independent of the builder's initialization scale.
  for (auto* layers : {&model.forward_layers, &model.backward_layers})
    for (auto& l : *layers) l = random_lstm(l.hidden(), l.input(), rng, l.cell_activation);
  const Array batch = random_array({2, input.steps, input.channels}, rng);
  std::vector<int> labels{static_cast<int>(rng.index(4)), static_cast<int>(rng.index(4))};
  const Array y = one_hot(labels, 4);
  const std::uint64_t mask_seed = rng.next_u64();

  auto loss = [&](const ModelState& m) {
    Rng r(mask_seed);
    return softmax_crossentropy(model_forward(m, batch, true, r), y).loss;
  };
  Rng r(mask_seed);
  ForwardCache cache;
  const Array logits = model_forward(model, batch, true, r, &cache);
  const auto grads = model_backward(model, cache, softmax_crossentropy(logits, y).grad);

  Worst w;
  auto params = model.parameters();
  for (std::size_t k = 0; k < params.size(); ++k) {
    Array* param = params[k].value;
    const Array original = *param;
    w.check(
        [&](const Array& v) {
          *param = v;
          const double l = loss(model);
          *param = original;
          return l;
        },
        original, grads[k]);
  }
  return w.value;
}

}  // namespace

std::vector<GradcheckResult> run_gradcheck_suite(std::size_t n_seeds, std::uint64_t base_seed) {
  struct Case {
    const char* name;
    double (*run)(Rng&);
  };
  const Case cases[] = {
      {"activation", check_activations},
      {"softmax_crossentropy", check_softmax},
      {"dense", check_dense},
      {"lstm_cell_step", [](Rng& r) { return check_lstm_layer(r, 1, false); }},
      {"lstm_layer_4_steps", [](Rng& r) { return std::max(check_lstm_layer(r, 4, false), check_lstm_layer(r, 4, true)); }},
      {"lstm_stack_4_steps", [](Rng& r) { return check_stack(r, false); }},
      {"bilstm_stack_4_steps", [](Rng& r) { return check_stack(r, true); }},
      {"dropout_train", check_dropout},
      {"model_mlp", [](Rng& r) { return check_model(ModelKind::mlp, r); }},
      {"model_lstm_fwd", [](Rng& r) { return check_model(ModelKind::lstm_fwd, r); }},
      {"model_lstm_bwd", [](Rng& r) { return check_model(ModelKind::lstm_bwd, r); }},
      {"model_bilstm", [](Rng& r) { return check_model(ModelKind::bilstm, r); }},
  };
  std::vector<GradcheckResult> out;
  std::size_t case_id = 0;
  for (const auto& c : cases) {
    GradcheckResult res{c.name, 0.0, n_seeds};
    for (std::size_t s = 0; s < n_seeds; ++s) {
      Rng rng = Rng::derive(base_seed, {case_id, s});
      res.max_rel_error = std::max(res.max_rel_error, c.run(rng));
    }
    out.push_back(res);
    ++case_id;
  }
  return out;
}

}  // namespace fnirs
