#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "har/layers.hpp"
#include "har/matrix.hpp"
#include "har/rng.hpp"

namespace har {

enum class Arch { Proposed, Baseline };

std::string to_string(Arch a);
Arch arch_from_string(const std::string& s);

struct ModelConfig {
    Arch arch = Arch::Proposed;
    std::size_t channels = 0;     // N
    std::size_t window = 0;       // T
    std::size_t classes = 0;      // C
    std::size_t conv_filters = 3; // K
    std::size_t lstm_units = 32;  // E
    std::size_t lstm_layers = 1;
    std::size_t att_length = 32;  // D, proposed only
    std::size_t att_output = 10;  // F, proposed only
    double learning_rate = 1e-4;
    std::size_t batch_size = 32;
    std::size_t max_epochs = 100;
    std::size_t patience = 10;
    std::uint64_t seed = 0;

    static ModelConfig defaults(Arch a);
    void validate() const;
};

// Ordered collection of named parameter tensors. Gradients use the same
// structure; flatten()/unflatten() give a stable flat-vector view.
class ParamSet {
public:
    Matrix& add(const std::string& name, std::size_t rows, std::size_t cols);
    Matrix& at(const std::string& name);
    const Matrix& at(const std::string& name) const;
    bool has(const std::string& name) const;

    const std::vector<std::pair<std::string, Matrix>>& items() const { return items_; }
    std::vector<std::pair<std::string, Matrix>>& items() { return items_; }

    std::size_t value_count() const;
    std::vector<double> flatten() const;
    void unflatten(const std::vector<double>& flat);

    ParamSet zeros_like() const;
    bool same_structure(const ParamSet& o) const;

    bool operator==(const ParamSet& o) const { return items_ == o.items_; }

private:
    std::vector<std::pair<std::string, Matrix>> items_;
};

struct ForwardTrace {
    Matrix h_c;                      // T×K conv outputs
    std::vector<Matrix> lstm_inputs; // input to each LSTM layer
    std::vector<LstmTrace> lstm;     // one per layer
    AttentionTrace att;              // proposed only
    std::vector<double> s;           // flattened classifier input
    std::vector<double> probs;       // length C
};

// Glorot-uniform dense/conv/attention weights, per-gate orthogonal
// hidden-to-hidden blocks, zero biases except forget-gate bias 1.
ParamSet init_params(const ModelConfig& cfg, Rng& rng);

ForwardTrace forward(const ModelConfig& cfg, const ParamSet& params, const Matrix& x);

// Exact gradient of cross_entropy(forward(x).probs, label) for every tensor
// in params, including backpropagation through time and the attention
// softmax. x must be the input the trace was produced from.
ParamSet backward(const ModelConfig& cfg, const ParamSet& params, const Matrix& x,
                  const ForwardTrace& trace, std::size_t label);

// Argmax of forward probabilities; ties resolve to the lowest class index.
std::size_t predict(const ModelConfig& cfg, const ParamSet& params, const Matrix& x);

std::size_t argmax_lowest(const std::vector<double>& v);

// Flat binary container: magic string, config header, then named tensors.
void save_params(const std::string& path, const ModelConfig& cfg, const ParamSet& params);
std::pair<ModelConfig, ParamSet> load_params(const std::string& path);

}  // namespace har
