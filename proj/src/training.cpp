#include "har/training.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "har/errors.hpp"
#include "har/layers.hpp"

namespace har {

AdamState AdamState::init(const ParamSet& params) {
    AdamState st;
    st.m = params.zeros_like();
    st.v = params.zeros_like();
    return st;
}

void adam_step(ParamSet& params, const ParamSet& grads, AdamState& state, double lr) {
    if (!(lr >= 0.0)) throw ConfigError("adam_step: negative learning rate");
    if (!params.same_structure(grads) || !params.same_structure(state.m))
        throw ConfigError("adam_step: parameter/gradient structure mismatch");
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double corr1 = 1.0 - std::pow(state.beta1, t);
    const double corr2 = 1.0 - std::pow(state.beta2, t);
    for (std::size_t i = 0; i < params.items().size(); ++i) {
        auto& [name, p] = params.items()[i];
        const Matrix& g = grads.items()[i].second;
        Matrix& m = state.m.items()[i].second;
        Matrix& v = state.v.items()[i].second;
        for (std::size_t j = 0; j < p.size(); ++j) {
            const double gj = g.values()[j];
            if (!std::isfinite(gj))
                throw NumericError("adam_step: non-finite gradient in '" + name + "'");
            m.values()[j] = state.beta1 * m.values()[j] + (1.0 - state.beta1) * gj;
            v.values()[j] = state.beta2 * v.values()[j] + (1.0 - state.beta2) * gj * gj;
            const double mhat = m.values()[j] / corr1;
            const double vhat = v.values()[j] / corr2;
            p.values()[j] -= lr * mhat / (std::sqrt(vhat) + state.eps);
        }
    }
}

bool EarlyStop::update(double val_loss, const ParamSet& params) {
    if (!std::isfinite(val_loss)) throw NumericError("EarlyStop: non-finite validation loss");
    if (val_loss < best_loss_) {
        best_loss_ = val_loss;
        since_ = 0;
        best_ = params;
        return false;
    }
    ++since_;
    return since_ > patience_;
}

bool TrainHistory::operator==(const TrainHistory& o) const {
    if (stop_epoch != o.stop_epoch || stop_reason != o.stop_reason ||
        epochs.size() != o.epochs.size())
        return false;
    for (std::size_t i = 0; i < epochs.size(); ++i) {
        const EpochRecord& a = epochs[i];
        const EpochRecord& b = o.epochs[i];
        if (a.epoch != b.epoch || a.train_loss != b.train_loss || a.val_loss != b.val_loss ||
            a.val_acc != b.val_acc)
            return false;
    }
    return true;
}

void serialize_history(const TrainHistory& history, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot open for write: " + path);
    os << "epoch,train_loss,val_loss,val_acc\n";
    char buf[128];
    for (const EpochRecord& r : history.epochs) {
        std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g\n", r.epoch, r.train_loss,
                      r.val_loss, r.val_acc);
        os << buf;
    }
    if (!os) throw DataError("write failed: " + path);
}

double mean_loss(const ModelConfig& cfg, const ParamSet& params,
                 const std::vector<Sample>& samples) {
    double sum = 0.0;
    for (const Sample& s : samples)
        sum += cross_entropy(forward(cfg, params, s.window).probs, s.label);
    return sum / static_cast<double>(samples.size());
}

double accuracy(const ModelConfig& cfg, const ParamSet& params,
                const std::vector<Sample>& samples) {
    std::size_t correct = 0;
    for (const Sample& s : samples)
        if (predict(cfg, params, s.window) == s.label) ++correct;
    return static_cast<double>(correct) / static_cast<double>(samples.size());
}

std::pair<ParamSet, TrainHistory> fit(const ModelConfig& cfg, const std::vector<Sample>& train,
                                      const std::vector<Sample>& val, Rng& rng) {
    cfg.validate();
    if (train.empty()) throw ConfigError("fit: empty training set");
    if (val.empty()) throw ConfigError("fit: empty validation set");
    for (const Sample& s : train)
        if (s.window.rows() != cfg.window || s.window.cols() != cfg.channels)
            throw ConfigError("fit: sample shape " + s.window.shape_str() +
                              " != configured window");

    ParamSet params = init_params(cfg, rng);
    AdamState adam = AdamState::init(params);
    EarlyStop stopper(cfg.patience);
    TrainHistory history;

    std::vector<std::size_t> order(train.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        rng.shuffle(order);
        double loss_sum = 0.0;
        for (std::size_t batch_start = 0; batch_start < order.size();
             batch_start += cfg.batch_size) {
            const std::size_t batch_end =
                std::min(batch_start + cfg.batch_size, order.size());
            const std::size_t n = batch_end - batch_start;
            ParamSet grad_sum = params.zeros_like();
            for (std::size_t i = batch_start; i < batch_end; ++i) {
                const Sample& s = train[order[i]];
                ForwardTrace trace = forward(cfg, params, s.window);
                const double loss = cross_entropy(trace.probs, s.label);
                if (!std::isfinite(loss))
                    throw NumericError("fit: non-finite loss at epoch " + std::to_string(epoch) +
                                       ", batch starting at sample " +
                                       std::to_string(batch_start));
                loss_sum += loss;
                ParamSet grads = backward(cfg, params, s.window, trace, s.label);
                for (std::size_t j = 0; j < grad_sum.items().size(); ++j)
                    accumulate(grad_sum.items()[j].second, grads.items()[j].second);
            }
            for (auto& [name, g] : grad_sum.items())
                for (double& gv : g.values()) gv /= static_cast<double>(n);
            adam_step(params, grad_sum, adam, cfg.learning_rate);
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_loss = loss_sum / static_cast<double>(train.size());
        rec.val_loss = mean_loss(cfg, params, val);
        rec.val_acc = accuracy(cfg, params, val);
        history.epochs.push_back(rec);

        if (stopper.update(rec.val_loss, params)) {
            history.stop_epoch = epoch;
            history.stop_reason = "early_stop";
            return {stopper.best_params(), std::move(history)};
        }
    }
    history.stop_epoch = cfg.max_epochs;
    history.stop_reason = "max_epochs";
    return {stopper.best_params(), std::move(history)};
}

}  // namespace har
