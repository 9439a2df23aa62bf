#pragma once

#include <cstddef>
#include <vector>

#include "har/matrix.hpp"

namespace har {

// ---------------------------------------------------------------------------
// Convolutional embedding: one full-width filter per output channel, applied
// independently at every time point. x is T×N, w is K×N, bias is 1×K; the
// result is T×K with out[t,k] = dot(x[t,:], w[k,:]) + bias[k].
// ---------------------------------------------------------------------------

Matrix conv_embed(const Matrix& x, const Matrix& w, const Matrix& bias);

struct ConvGrads {
    Matrix dw;    // K×N
    Matrix dbias; // 1×K
    Matrix dx;    // T×N
};

ConvGrads conv_backward(const Matrix& x, const Matrix& w, const Matrix& dout);

// ---------------------------------------------------------------------------
// LSTM encoder. Input x is T×I, weights wx 4E×I, wh 4E×E, bias 1×4E with
// gate row order [input, forget, candidate, output]. Initial hidden and cell
// states are zero. Output h stacks h(t) for t = 1..T.
// ---------------------------------------------------------------------------

struct LstmTrace {
    Matrix gate_i, gate_f, gate_g, gate_o; // T×E activations
    Matrix cell;                           // T×E cell states
    Matrix cell_tanh;                      // T×E tanh(c_t)
    Matrix h;                              // T×E outputs
};

LstmTrace lstm_forward(const Matrix& x, const Matrix& wx, const Matrix& wh,
                       const Matrix& bias);

struct LstmGrads {
    Matrix dwx;   // 4E×I
    Matrix dwh;   // 4E×E
    Matrix dbias; // 1×4E
    Matrix dx;    // T×I
};

// dh is the T×E upstream gradient on the stacked outputs.
LstmGrads lstm_backward(const Matrix& x, const Matrix& wx, const Matrix& wh,
                        const LstmTrace& trace, const Matrix& dh);

// ---------------------------------------------------------------------------
// Self-attention over time points. h_e is T×E, u is D×E, v is F×D.
// alpha = softmax_rows(v · tanh(u · h_e')) is F×T (each row a distribution
// over time points); scores = alpha · h_e is F×E.
// ---------------------------------------------------------------------------

struct AttentionTrace {
    Matrix tanh_m; // D×T, tanh(u · h_e')
    Matrix alpha;  // F×T
    Matrix scores; // F×E
};

AttentionTrace attention_forward(const Matrix& h_e, const Matrix& u, const Matrix& v);

struct AttentionGrads {
    Matrix du;   // D×E
    Matrix dv;   // F×D
    Matrix dh_e; // T×E
};

AttentionGrads attention_backward(const Matrix& h_e, const Matrix& u, const Matrix& v,
                                  const AttentionTrace& trace, const Matrix& dscores);

// ---------------------------------------------------------------------------
// Softmax classifier head and loss. The score matrix is flattened row-major
// into s; probs = softmax(w · s + bias).
// ---------------------------------------------------------------------------

std::vector<double> flatten_row_major(const Matrix& m);

std::vector<double> dense_softmax(const std::vector<double>& s, const Matrix& w,
                                  const Matrix& bias);

struct DenseGrads {
    Matrix dw;    // C×len(s)
    Matrix dbias; // 1×C
    std::vector<double> ds;
};

// dlogits is the gradient on the pre-softmax logits.
DenseGrads dense_backward(const std::vector<double>& s, const Matrix& w,
                          const std::vector<double>& dlogits);

// probs must sum to 1; the probability is clamped below at 1e-12.
double cross_entropy(const std::vector<double>& probs, std::size_t label);

// Gradient of cross_entropy w.r.t. probs (zero where the clamp is active).
std::vector<double> cross_entropy_backward(const std::vector<double>& probs,
                                           std::size_t label);

// Jacobian-vector product of a softmax output: given probs and dL/dprobs,
// returns dL/dlogits.
std::vector<double> softmax_backward(const std::vector<double>& probs,
                                     const std::vector<double>& dprobs);

}  // namespace har
