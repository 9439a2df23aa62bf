#include "har/layers.hpp"

#include <algorithm>
#include <cmath>

#include "har/errors.hpp"

namespace har {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

Matrix conv_embed(const Matrix& x, const Matrix& w, const Matrix& bias) {
    const std::size_t T = x.rows(), N = x.cols(), K = w.rows();
    if (w.cols() != N)
        throw ConfigError("conv_embed: filter width " + std::to_string(w.cols()) +
                          " != channel count " + std::to_string(N));
    if (bias.rows() != 1 || bias.cols() != K)
        throw ConfigError("conv_embed: bias shape " + bias.shape_str());
    Matrix out(T, K);
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t k = 0; k < K; ++k) {
            double acc = bias(0, k);
            for (std::size_t n = 0; n < N; ++n) acc += x(t, n) * w(k, n);
            out(t, k) = acc;
        }
    }
    return out;
}

ConvGrads conv_backward(const Matrix& x, const Matrix& w, const Matrix& dout) {
    const std::size_t T = x.rows(), N = x.cols(), K = w.rows();
    ConvGrads g{Matrix(K, N), Matrix(1, K), Matrix(T, N)};
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t k = 0; k < K; ++k) {
            const double d = dout(t, k);
            g.dbias(0, k) += d;
            for (std::size_t n = 0; n < N; ++n) {
                g.dw(k, n) += d * x(t, n);
                g.dx(t, n) += d * w(k, n);
            }
        }
    }
    return g;
}

LstmTrace lstm_forward(const Matrix& x, const Matrix& wx, const Matrix& wh,
                       const Matrix& bias) {
    const std::size_t T = x.rows(), I = x.cols();
    const std::size_t E = wh.cols();
    if (wx.rows() != 4 * E || wx.cols() != I || wh.rows() != 4 * E ||
        bias.rows() != 1 || bias.cols() != 4 * E)
        throw ConfigError("lstm_forward: inconsistent parameter shapes wx=" +
                          wx.shape_str() + " wh=" + wh.shape_str() + " b=" + bias.shape_str());

    LstmTrace tr{Matrix(T, E), Matrix(T, E), Matrix(T, E), Matrix(T, E),
                 Matrix(T, E), Matrix(T, E), Matrix(T, E)};
    std::vector<double> a(4 * E);
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t r = 0; r < 4 * E; ++r) {
            double acc = bias(0, r);
            for (std::size_t i = 0; i < I; ++i) acc += wx(r, i) * x(t, i);
            if (t > 0)
                for (std::size_t e = 0; e < E; ++e) acc += wh(r, e) * tr.h(t - 1, e);
            a[r] = acc;
        }
        for (std::size_t e = 0; e < E; ++e) {
            const double gi = sigmoid(a[e]);
            const double gf = sigmoid(a[E + e]);
            const double gg = std::tanh(a[2 * E + e]);
            const double go = sigmoid(a[3 * E + e]);
            const double c_prev = t > 0 ? tr.cell(t - 1, e) : 0.0;
            const double c = gf * c_prev + gi * gg;
            const double ct = std::tanh(c);
            tr.gate_i(t, e) = gi;
            tr.gate_f(t, e) = gf;
            tr.gate_g(t, e) = gg;
            tr.gate_o(t, e) = go;
            tr.cell(t, e) = c;
            tr.cell_tanh(t, e) = ct;
            tr.h(t, e) = go * ct;
        }
    }
    return tr;
}

LstmGrads lstm_backward(const Matrix& x, const Matrix& wx, const Matrix& wh,
                        const LstmTrace& trace, const Matrix& dh_up) {
    const std::size_t T = x.rows(), I = x.cols(), E = wh.cols();
    LstmGrads g{Matrix(4 * E, I), Matrix(4 * E, E), Matrix(1, 4 * E), Matrix(T, I)};

    std::vector<double> dh_rec(E, 0.0), dc_rec(E, 0.0), da(4 * E);
    for (std::size_t ti = T; ti-- > 0;) {
        for (std::size_t e = 0; e < E; ++e) {
            const double gi = trace.gate_i(ti, e);
            const double gf = trace.gate_f(ti, e);
            const double gg = trace.gate_g(ti, e);
            const double go = trace.gate_o(ti, e);
            const double ct = trace.cell_tanh(ti, e);
            const double c_prev = ti > 0 ? trace.cell(ti - 1, e) : 0.0;

            const double dh = dh_up(ti, e) + dh_rec[e];
            const double d_o = dh * ct;
            const double dc = dh * go * (1.0 - ct * ct) + dc_rec[e];
            const double d_i = dc * gg;
            const double d_g = dc * gi;
            const double d_f = dc * c_prev;
            dc_rec[e] = dc * gf;

            da[e] = d_i * gi * (1.0 - gi);
            da[E + e] = d_f * gf * (1.0 - gf);
            da[2 * E + e] = d_g * (1.0 - gg * gg);
            da[3 * E + e] = d_o * go * (1.0 - go);
        }
        for (std::size_t r = 0; r < 4 * E; ++r) {
            const double d = da[r];
            g.dbias(0, r) += d;
            for (std::size_t i = 0; i < I; ++i) {
                g.dwx(r, i) += d * x(ti, i);
                g.dx(ti, i) += d * wx(r, i);
            }
        }
        std::fill(dh_rec.begin(), dh_rec.end(), 0.0);
        if (ti > 0) {
            for (std::size_t r = 0; r < 4 * E; ++r) {
                const double d = da[r];
                for (std::size_t e = 0; e < E; ++e) {
                    g.dwh(r, e) += d * trace.h(ti - 1, e);
                    dh_rec[e] += d * wh(r, e);
                }
            }
        }
    }
    return g;
}

AttentionTrace attention_forward(const Matrix& h_e, const Matrix& u, const Matrix& v) {
    if (u.cols() != h_e.cols())
        throw ConfigError("attention_forward: u shape " + u.shape_str() +
                          " vs encoder width " + std::to_string(h_e.cols()));
    if (v.cols() != u.rows())
        throw ConfigError("attention_forward: v shape " + v.shape_str() +
                          " vs attention length " + std::to_string(u.rows()));
    AttentionTrace tr;
    Matrix m = matmul(u, transpose(h_e)); // D×T
    for (double& val : m.values()) val = std::tanh(val);
    tr.tanh_m = std::move(m);
    tr.alpha = softmax_rows(matmul(v, tr.tanh_m)); // F×T, distributions over time
    tr.scores = matmul(tr.alpha, h_e);             // F×E
    return tr;
}

AttentionGrads attention_backward(const Matrix& h_e, const Matrix& u, const Matrix& v,
                                  const AttentionTrace& trace, const Matrix& dscores) {
    const std::size_t F = trace.alpha.rows(), T = trace.alpha.cols();

    AttentionGrads g;
    g.dh_e = matmul(transpose(trace.alpha), dscores); // T×E
    Matrix dalpha = matmul(dscores, transpose(h_e));  // F×T

    // softmax backward per row
    Matrix dlogits(F, T);
    for (std::size_t f = 0; f < F; ++f) {
        double dot = 0.0;
        for (std::size_t t = 0; t < T; ++t) dot += dalpha(f, t) * trace.alpha(f, t);
        for (std::size_t t = 0; t < T; ++t)
            dlogits(f, t) = trace.alpha(f, t) * (dalpha(f, t) - dot);
    }

    g.dv = matmul(dlogits, transpose(trace.tanh_m)); // F×D
    Matrix dm = matmul(transpose(v), dlogits);       // D×T
    for (std::size_t i = 0; i < dm.size(); ++i)
        dm.values()[i] *= 1.0 - trace.tanh_m.values()[i] * trace.tanh_m.values()[i];
    g.du = matmul(dm, h_e);                     // D×E
    accumulate(g.dh_e, matmul(transpose(dm), u)); // T×E
    return g;
}

std::vector<double> flatten_row_major(const Matrix& m) { return m.values(); }

std::vector<double> dense_softmax(const std::vector<double>& s, const Matrix& w,
                                  const Matrix& bias) {
    const std::size_t C = w.rows();
    if (w.cols() != s.size() || bias.cols() != C)
        throw ConfigError("dense_softmax: w shape " + w.shape_str() + " vs input length " +
                          std::to_string(s.size()));
    std::vector<double> logits(C);
    for (std::size_t c = 0; c < C; ++c) {
        double acc = bias(0, c);
        for (std::size_t i = 0; i < s.size(); ++i) acc += w(c, i) * s[i];
        logits[c] = acc;
    }
    const double mx = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double& l : logits) {
        l = std::exp(l - mx);
        sum += l;
    }
    for (double& l : logits) l /= sum;
    return logits;
}

DenseGrads dense_backward(const std::vector<double>& s, const Matrix& w,
                          const std::vector<double>& dlogits) {
    const std::size_t C = w.rows();
    DenseGrads g{Matrix(C, s.size()), Matrix(1, C), std::vector<double>(s.size(), 0.0)};
    for (std::size_t c = 0; c < C; ++c) {
        const double d = dlogits[c];
        g.dbias(0, c) = d;
        for (std::size_t i = 0; i < s.size(); ++i) {
            g.dw(c, i) = d * s[i];
            g.ds[i] += d * w(c, i);
        }
    }
    return g;
}

double cross_entropy(const std::vector<double>& probs, std::size_t label) {
    if (label >= probs.size())
        throw ConfigError("cross_entropy: label " + std::to_string(label) +
                          " out of range for " + std::to_string(probs.size()) + " classes");
    return -std::log(std::max(probs[label], 1e-12));
}

std::vector<double> cross_entropy_backward(const std::vector<double>& probs,
                                           std::size_t label) {
    if (label >= probs.size())
        throw ConfigError("cross_entropy_backward: label out of range");
    std::vector<double> d(probs.size(), 0.0);
    if (probs[label] > 1e-12) d[label] = -1.0 / probs[label];
    return d;
}

std::vector<double> softmax_backward(const std::vector<double>& probs,
                                     const std::vector<double>& dprobs) {
    double dot = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) dot += probs[i] * dprobs[i];
    std::vector<double> d(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i)
        d[i] = probs[i] * (dprobs[i] - dot);
    return d;
}

}  // namespace har
