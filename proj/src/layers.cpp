#include "fnirs/layers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "fnirs/kernels.hpp"

namespace fnirs {

// ---------------------------------------------------------------------------
// Dense

DenseParams make_dense(std::size_t in, std::size_t out, Activation activation) {
  return {Array({out, in}), Array({out}), activation};
}

Array dense_forward(const Array& x, const DenseParams& p, DenseCache* cache) {
  if (x.rank() != 2 || x.dim(1) != p.in())
    throw ShapeError("dense input " + to_string(x.shape()) + " does not match weights " + to_string(p.W.shape()));
  require_shape(p.b, {p.out()}, "dense bias");
  const std::size_t batch = x.dim(0), out = p.out();
  Array pre({batch, out});
  kernels::gemm_nt(batch, out, p.in(), x.values(), p.W.values(), pre.values());
  for (std::size_t r = 0; r < batch; ++r)
    for (std::size_t j = 0; j < out; ++j) pre.at(r, j) += p.b[j];
  Array a = activation(p.activation, pre);
  if (cache) {
    cache->input = x;
    cache->pre = std::move(pre);
  }
  return a;
}

DenseGrads dense_backward(const DenseParams& p, const DenseCache& cache, const Array& grad_out) {
  require_shape(grad_out, cache.pre.shape(), "dense upstream gradient");
  const std::size_t batch = grad_out.dim(0), out = p.out(), in = p.in();
  Array dpre = grad_out;
  if (p.activation != Activation::linear)
    for (std::size_t i = 0; i < dpre.size(); ++i) dpre[i] *= activate_grad(p.activation, cache.pre[i]);

  DenseGrads g{Array({batch, in}), Array({out, in}), Array({out})};
  kernels::gemm_tn(out, in, batch, dpre.values(), cache.input.values(), g.dW.values());
  kernels::gemm_nn(batch, in, out, dpre.values(), p.W.values(), g.dx.values());
  for (std::size_t r = 0; r < batch; ++r)
    for (std::size_t j = 0; j < out; ++j) g.db[j] += dpre.at(r, j);
  return g;
}

// ---------------------------------------------------------------------------
// LSTM

Array LstmParams::gate_weights(Gate g) const {
  const std::size_t h = hidden(), cols = W.dim(1);
  const auto first = W.values().begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(g) * h * cols);
  return Array({h, cols}, std::vector<double>(first, first + static_cast<std::ptrdiff_t>(h * cols)));
}

Array LstmParams::gate_bias(Gate g) const {
  const std::size_t h = hidden();
  const auto first = b.values().begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(g) * h);
  return Array({h}, std::vector<double>(first, first + static_cast<std::ptrdiff_t>(h)));
}

void LstmParams::set_gate(Gate g, const Array& weights, const Array& bias) {
  const std::size_t h = hidden(), cols = W.dim(1);
  require_shape(weights, {h, cols}, "gate weights");
  require_shape(bias, {h}, "gate bias");
  std::copy(weights.values().begin(), weights.values().end(),
            W.values().begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(g) * h * cols));
  std::copy(bias.values().begin(), bias.values().end(),
            b.values().begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(g) * h));
}

LstmParams make_lstm(std::size_t hidden, std::size_t input, Activation cell_activation) {
  return {Array({4 * hidden, hidden + input}), Array({4 * hidden}), cell_activation};
}

namespace {

void check_lstm_params(const LstmParams& p) {
  if (p.W.rank() != 2 || p.W.dim(0) % 4 != 0 || p.W.dim(1) <= p.W.dim(0) / 4)
    throw ShapeError("LSTM weights must be [4H x (H + I)], got " + to_string(p.W.shape()));
  require_shape(p.b, {p.W.dim(0)}, "LSTM bias");
}

// One batched cell update. hx is [B x K] = [h_prev | x_t]; c_prev may be null (zeros).
void step_forward(std::size_t batch, std::size_t hidden, std::size_t k, const double* hx, const Array& wt,
                  const Array& bias, const double* c_prev, Activation act, double* gates, double* cand_pre,
                  double* c, double* h) {
  const std::size_t g4 = 4 * hidden;
  kernels::gemm_nn(batch, g4, k, {hx, batch * k}, wt.values(), {gates, batch * g4});
  for (std::size_t r = 0; r < batch; ++r) {
    double* z = gates + r * g4;
    double* zc = cand_pre + r * hidden;
    double* cr = c + r * hidden;
    double* hr = h + r * hidden;
    const double* cp = c_prev ? c_prev + r * hidden : nullptr;
    for (std::size_t j = 0; j < hidden; ++j) {
      const double f = activate(Activation::sigmoid, z[j] + bias[j]);
      const double i = activate(Activation::sigmoid, z[hidden + j] + bias[hidden + j]);
      const double pre = z[2 * hidden + j] + bias[2 * hidden + j];
      const double g = activate(act, pre);
      const double o = activate(Activation::sigmoid, z[3 * hidden + j] + bias[3 * hidden + j]);
      const double cell = f * (cp ? cp[j] : 0.0) + i * g;
      z[j] = f;
      z[hidden + j] = i;
      z[2 * hidden + j] = g;
      z[3 * hidden + j] = o;
      zc[j] = pre;
      cr[j] = cell;
      hr[j] = o * activate(act, cell);
    }
  }
}

Array transposed(const Array& w) {
  Array t({w.dim(1), w.dim(0)});
  kernels::transpose(w.dim(0), w.dim(1), w.values(), t.values());
  return t;
}

}  // namespace

LstmStep lstm_cell_step(const Array& x_t, const Array& h_prev, const Array& c_prev, const LstmParams& p) {
  check_lstm_params(p);
  const std::size_t hidden = p.hidden(), in = p.input(), k = hidden + in;
  require_shape(x_t, {in}, "LSTM step input");
  require_shape(h_prev, {hidden}, "LSTM previous hidden state");
  require_shape(c_prev, {hidden}, "LSTM previous cell state");

  std::vector<double> hx(k);
  std::copy(h_prev.values().begin(), h_prev.values().end(), hx.begin());
  std::copy(x_t.values().begin(), x_t.values().end(), hx.begin() + static_cast<std::ptrdiff_t>(hidden));
  std::vector<double> gates(4 * hidden), cand(hidden);
  LstmStep s{Array({hidden}), Array({hidden}), Array({hidden}), Array({hidden}), Array({hidden}), Array({hidden})};
  step_forward(1, hidden, k, hx.data(), transposed(p.W), p.b, c_prev.data(), p.cell_activation, gates.data(),
               cand.data(), s.c.data(), s.h.data());
  for (std::size_t j = 0; j < hidden; ++j) {
    s.forget[j] = gates[j];
    s.input[j] = gates[hidden + j];
    s.candidate[j] = gates[2 * hidden + j];
    s.output[j] = gates[3 * hidden + j];
  }
  return s;
}

Array lstm_layer_forward(const Array& seq, const LstmParams& p, bool return_sequences, LstmCache* cache) {
  check_lstm_params(p);
  const std::size_t hidden = p.hidden(), in = p.input(), k = hidden + in, g4 = 4 * hidden;
  if (seq.rank() != 3 || seq.dim(2) != in)
    throw ShapeError("LSTM input " + to_string(seq.shape()) + " does not match input width " + std::to_string(in));
  const std::size_t batch = seq.dim(0), steps = seq.dim(1);
  const Array wt = transposed(p.W);

  LstmCache local;
  LstmCache& cc = cache ? *cache : local;
  cc.batch = batch;
  cc.steps = steps;
  cc.return_sequences = return_sequences;
  // Without a cache only the rolling state is kept.
  const std::size_t kept = cache ? steps : 1;
  cc.hx = Array({kept, batch, k});
  cc.gates = Array({kept, batch, g4});
  cc.cand_pre = Array({kept, batch, hidden});
  cc.c = Array({cache ? steps : 2, batch, hidden});

  Array out = return_sequences ? Array({batch, steps, hidden}) : Array({batch, hidden});
  std::vector<double> h(batch * hidden, 0.0);
  for (std::size_t t = 0; t < steps; ++t) {
    const std::size_t slot = cache ? t : 0;
    double* hx = cc.hx.data() + slot * batch * k;
    for (std::size_t r = 0; r < batch; ++r) {
      std::copy_n(h.data() + r * hidden, hidden, hx + r * k);
      std::copy_n(seq.data() + (r * steps + t) * in, in, hx + r * k + hidden);
    }
    const double* c_prev = nullptr;
    double* c_now;
    if (cache) {
      c_prev = t > 0 ? cc.c.data() + (t - 1) * batch * hidden : nullptr;
      c_now = cc.c.data() + t * batch * hidden;
    } else {
      c_prev = t > 0 ? cc.c.data() + ((t - 1) % 2) * batch * hidden : nullptr;
      c_now = cc.c.data() + (t % 2) * batch * hidden;
    }
    step_forward(batch, hidden, k, hx, wt, p.b, c_prev, p.cell_activation, cc.gates.data() + slot * batch * g4,
                 cc.cand_pre.data() + slot * batch * hidden, c_now, h.data());
    if (return_sequences)
      for (std::size_t r = 0; r < batch; ++r)
        std::copy_n(h.data() + r * hidden, hidden, out.data() + (r * steps + t) * hidden);
  }
  if (!return_sequences) std::copy(h.begin(), h.end(), out.data());
  return out;
}

LstmGrads lstm_layer_backward(const LstmParams& p, const LstmCache& cache, const Array& grad_out) {
  check_lstm_params(p);
  const std::size_t hidden = p.hidden(), in = p.input(), k = hidden + in, g4 = 4 * hidden;
  const std::size_t batch = cache.batch, steps = cache.steps;
  if (cache.hx.rank() != 3 || cache.hx.dim(0) != steps)
    throw std::invalid_argument("LSTM backward needs a cache recorded by lstm_layer_forward");
  if (cache.return_sequences)
    require_shape(grad_out, {batch, steps, hidden}, "LSTM upstream gradient");
  else
    require_shape(grad_out, {batch, hidden}, "LSTM upstream gradient");

  const Activation act = p.cell_activation;
  LstmGrads g{Array({batch, steps, in}), Array(p.W.shape()), Array(p.b.shape())};
  std::vector<double> dh_next(batch * hidden, 0.0), dc_next(batch * hidden, 0.0);
  std::vector<double> dz(batch * g4), dhx(batch * k);

  for (std::size_t t = steps; t-- > 0;) {
    const double* gates = cache.gates.data() + t * batch * g4;
    const double* cand_pre = cache.cand_pre.data() + t * batch * hidden;
    const double* c_now = cache.c.data() + t * batch * hidden;
    const double* c_prev = t > 0 ? cache.c.data() + (t - 1) * batch * hidden : nullptr;
    for (std::size_t r = 0; r < batch; ++r) {
      const double* gr = gates + r * g4;
      double* dzr = dz.data() + r * g4;
      for (std::size_t j = 0; j < hidden; ++j) {
        const std::size_t rj = r * hidden + j;
        double dh = dh_next[rj];
        if (cache.return_sequences)
          dh += grad_out[(r * steps + t) * hidden + j];
        else if (t + 1 == steps)
          dh += grad_out[rj];
        const double f = gr[j], i = gr[hidden + j], cand = gr[2 * hidden + j], o = gr[3 * hidden + j];
        const double cell = c_now[rj];
        const double dc = dh * o * activate_grad(act, cell) + dc_next[rj];
        const double d_o = dh * activate(act, cell);
        const double d_f = dc * (c_prev ? c_prev[rj] : 0.0);
        const double d_i = dc * cand;
        const double d_cand = dc * i;
        dc_next[rj] = dc * f;
        dzr[j] = d_f * f * (1.0 - f);
        dzr[hidden + j] = d_i * i * (1.0 - i);
        dzr[2 * hidden + j] = d_cand * activate_grad(act, cand_pre[rj]);
        dzr[3 * hidden + j] = d_o * o * (1.0 - o);
      }
    }
    kernels::gemm_tn(g4, k, batch, dz, {cache.hx.data() + t * batch * k, batch * k}, g.dW.values(), true);
    for (std::size_t r = 0; r < batch; ++r)
      for (std::size_t j = 0; j < g4; ++j) g.db[j] += dz[r * g4 + j];
    kernels::gemm_nn(batch, k, g4, dz, p.W.values(), dhx);
    for (std::size_t r = 0; r < batch; ++r) {
      std::copy_n(dhx.data() + r * k, hidden, dh_next.data() + r * hidden);
      std::copy_n(dhx.data() + r * k + hidden, in, g.dseq.data() + (r * steps + t) * in);
    }
  }
  return g;
}

Array reverse_time_batch(const Array& seq) {
  if (seq.rank() != 3) throw ShapeError("expected [batch x steps x features], got " + to_string(seq.shape()));
  const std::size_t batch = seq.dim(0), steps = seq.dim(1), feat = seq.dim(2);
  Array out(seq.shape());
  for (std::size_t r = 0; r < batch; ++r)
    for (std::size_t t = 0; t < steps; ++t)
      std::copy_n(seq.data() + (r * steps + t) * feat, feat, out.data() + (r * steps + (steps - 1 - t)) * feat);
  return out;
}

// ---------------------------------------------------------------------------
// Bidirectional

namespace {

Array concat_features(const Array& a, const Array& b) {
  const std::size_t fa = a.shape().back(), fb = b.shape().back();
  const std::size_t rows = a.size() / fa;
  Shape shape = a.shape();
  shape.back() = fa + fb;
  Array out(shape);
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(a.data() + r * fa, fa, out.data() + r * (fa + fb));
    std::copy_n(b.data() + r * fb, fb, out.data() + r * (fa + fb) + fa);
  }
  return out;
}

std::pair<Array, Array> split_features(const Array& x, std::size_t fa) {
  const std::size_t f = x.shape().back(), fb = f - fa, rows = x.size() / f;
  Shape sa = x.shape(), sb = x.shape();
  sa.back() = fa;
  sb.back() = fb;
  Array a(sa), b(sb);
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(x.data() + r * f, fa, a.data() + r * fa);
    std::copy_n(x.data() + r * f + fa, fb, b.data() + r * fb);
  }
  return {std::move(a), std::move(b)};
}

}  // namespace

Array bilstm_forward(const Array& seq, const LstmParams& p_fwd, const LstmParams& p_bwd, bool return_sequences,
                     BiLstmCache* cache) {
  if (p_fwd.W.shape() != p_bwd.W.shape())
    throw ShapeError("bidirectional branches differ: " + to_string(p_fwd.W.shape()) + " vs " +
                     to_string(p_bwd.W.shape()));
  Array out_f = lstm_layer_forward(seq, p_fwd, return_sequences, cache ? &cache->fwd : nullptr);
  Array out_b = lstm_layer_forward(reverse_time_batch(seq), p_bwd, return_sequences, cache ? &cache->bwd : nullptr);
  if (return_sequences) out_b = reverse_time_batch(out_b);
  return concat_features(out_f, out_b);
}

BiLstmGrads bilstm_backward(const LstmParams& p_fwd, const LstmParams& p_bwd, const BiLstmCache& cache,
                            const Array& grad_out) {
  const std::size_t hidden = p_fwd.hidden();
  if (grad_out.shape().back() != 2 * hidden)
    throw ShapeError("bidirectional upstream gradient " + to_string(grad_out.shape()) + " is not 2x" +
                     std::to_string(hidden) + " wide");
  auto [g_f, g_b] = split_features(grad_out, hidden);
  if (cache.bwd.return_sequences) g_b = reverse_time_batch(g_b);
  BiLstmGrads g;
  g.fwd = lstm_layer_backward(p_fwd, cache.fwd, g_f);
  g.bwd = lstm_layer_backward(p_bwd, cache.bwd, g_b);
  g.dseq = g.fwd.dseq;
  const Array back = reverse_time_batch(g.bwd.dseq);
  for (std::size_t i = 0; i < g.dseq.size(); ++i) g.dseq[i] += back[i];
  return g;
}

// ---------------------------------------------------------------------------
// Dropout

DropoutResult dropout_forward(const Array& x, double rate, bool training, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) throw std::invalid_argument("dropout rate must lie in [0, 1)");
  if (!training || rate == 0.0) return {x, Array(x.shape(), 1.0)};
  const double keep_scale = 1.0 / (1.0 - rate);
  DropoutResult r{x, Array(x.shape())};
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double m = rng.uniform() < rate ? 0.0 : keep_scale;
    r.mask[i] = m;
    r.y[i] *= m;
  }
  return r;
}

Array dropout_backward(const Array& grad_out, const Array& mask) {
  require_shape(grad_out, mask.shape(), "dropout upstream gradient");
  Array g = grad_out;
  for (std::size_t i = 0; i < g.size(); ++i) g[i] *= mask[i];
  return g;
}

}  // namespace fnirs
