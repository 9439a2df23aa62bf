#pragma once

#include <limits>
#include <string>
#include <vector>

#include "har/data.hpp"
#include "har/model.hpp"
#include "har/rng.hpp"

namespace har {

struct AdamState {
    ParamSet m, v; // moment buffers mirroring the parameter structure
    std::size_t step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    static AdamState init(const ParamSet& params);
};

// Standard Adam update with bias correction. Throws NumericError naming the
// tensor on a non-finite gradient.
void adam_step(ParamSet& params, const ParamSet& grads, AdamState& state, double lr);

// Early stopping on validation loss with strict improvement and best-params
// snapshot restore.
class EarlyStop {
public:
    explicit EarlyStop(std::size_t patience) : patience_(patience) {}

    // Returns true when training should stop (counter exceeded patience).
    bool update(double val_loss, const ParamSet& params);

    double best_loss() const { return best_loss_; }
    std::size_t epochs_since_improvement() const { return since_; }
    const ParamSet& best_params() const { return best_; }

private:
    std::size_t patience_;
    double best_loss_ = std::numeric_limits<double>::infinity();
    std::size_t since_ = 0;
    ParamSet best_;
};

struct EpochRecord {
    std::size_t epoch = 0;   // 1-based
    double train_loss = 0.0; // running mean over the epoch's batches
    double val_loss = 0.0;
    double val_acc = 0.0;
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
    std::size_t stop_epoch = 0;
    std::string stop_reason; // "early_stop" or "max_epochs"

    bool operator==(const TrainHistory&) const;
};

// Line-delimited record file: epoch,train_loss,val_loss,val_acc.
void serialize_history(const TrainHistory& history, const std::string& path);

// Mini-batch Adam with seeded per-epoch shuffle, mean batch gradients, the
// final partial batch kept, and early stopping on validation loss. Returns
// the best-validation snapshot.
std::pair<ParamSet, TrainHistory> fit(const ModelConfig& cfg, const std::vector<Sample>& train,
                                      const std::vector<Sample>& val, Rng& rng);

double mean_loss(const ModelConfig& cfg, const ParamSet& params,
                 const std::vector<Sample>& samples);
double accuracy(const ModelConfig& cfg, const ParamSet& params,
                const std::vector<Sample>& samples);

}  // namespace har
