#pragma once

#include <cstddef>

#include "fnirs/array.hpp"
#include "fnirs/ops.hpp"
#include "fnirs/rng.hpp"

namespace fnirs {

// ---------------------------------------------------------------------------
// Dense layer: a = act(x W^T + b)

struct DenseParams {
  Array W;  // [out x in]
  Array b;  // [out]
  Activation activation = Activation::linear;

  std::size_t in() const { return W.dim(1); }
  std::size_t out() const { return W.dim(0); }
};

DenseParams make_dense(std::size_t in, std::size_t out, Activation activation);

struct DenseCache {
  Array input;  // [batch x in]
  Array pre;    // [batch x out], before activation
};

struct DenseGrads {
  Array dx, dW, db;
};

Array dense_forward(const Array& x, const DenseParams& p, DenseCache* cache = nullptr);
DenseGrads dense_backward(const DenseParams& p, const DenseCache& cache, const Array& grad_out);

// ---------------------------------------------------------------------------
// LSTM
//
// The four gate matrices are stacked row-wise in one [4H x (H + I)] array in
// the order forget, input, candidate, output. Each block multiplies the
// concatenation [h_{t-1}, x_t]. Gates use the logistic sigmoid; the candidate
// and the cell-output nonlinearity use cell_activation.

enum class Gate : std::size_t { forget = 0, input = 1, candidate = 2, output = 3 };

struct LstmParams {
  Array W;  // [4H x (H + I)]
  Array b;  // [4H]
  Activation cell_activation = Activation::relu;

  std::size_t hidden() const { return W.dim(0) / 4; }
  std::size_t input() const { return W.dim(1) - hidden(); }

  Array gate_weights(Gate g) const;
  Array gate_bias(Gate g) const;
  void set_gate(Gate g, const Array& weights, const Array& bias);
};

LstmParams make_lstm(std::size_t hidden, std::size_t input, Activation cell_activation = Activation::relu);

/// Every intermediate of one cell update, for a single example.
struct LstmStep {
  Array forget, input, candidate, output;  // [H]
  Array c, h;                              // [H]
};

LstmStep lstm_cell_step(const Array& x_t, const Array& h_prev, const Array& c_prev, const LstmParams& p);

struct LstmCache {
  std::size_t batch = 0, steps = 0;
  bool return_sequences = false;
  Array hx;        // [T x B x (H + I)]  concatenated step inputs
  Array gates;     // [T x B x 4H]       activated f, i, candidate, o
  Array cand_pre;  // [T x B x H]        candidate pre-activation
  Array c;         // [T x B x H]        cell states
};

struct LstmGrads {
  Array dseq;  // [B x T x I]
  Array dW, db;
};

/// seq is [batch x steps x input]; h0 = c0 = 0. Returns [batch x steps x H]
/// when return_sequences, else the final hidden state [batch x H].
Array lstm_layer_forward(const Array& seq, const LstmParams& p, bool return_sequences,
                         LstmCache* cache = nullptr);
LstmGrads lstm_layer_backward(const LstmParams& p, const LstmCache& cache, const Array& grad_out);

/// Row order of every example reversed along the time axis of [batch x steps x features].
Array reverse_time_batch(const Array& seq);

// ---------------------------------------------------------------------------
// Bidirectional: forward features first, then the reversed-time branch.

struct BiLstmCache {
  LstmCache fwd, bwd;
};

struct BiLstmGrads {
  Array dseq;
  LstmGrads fwd, bwd;
};

Array bilstm_forward(const Array& seq, const LstmParams& p_fwd, const LstmParams& p_bwd,
                     bool return_sequences, BiLstmCache* cache = nullptr);
BiLstmGrads bilstm_backward(const LstmParams& p_fwd, const LstmParams& p_bwd, const BiLstmCache& cache,
                            const Array& grad_out);

// ---------------------------------------------------------------------------
// Inverted dropout. The mask holds 0 or 1/(1 - rate).

struct DropoutResult {
  Array y;
  Array mask;
};

DropoutResult dropout_forward(const Array& x, double rate, bool training, Rng& rng);
Array dropout_backward(const Array& grad_out, const Array& mask);

}  // namespace fnirs
