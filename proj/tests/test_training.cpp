#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "har/synth.hpp"
#include "har/training.hpp"

using namespace har;

namespace {

ModelConfig tiny_config(Arch arch) {
    ModelConfig cfg = ModelConfig::defaults(arch);
    cfg.channels = 2;
    cfg.window = 8;
    cfg.classes = 2;
    cfg.conv_filters = 3;
    cfg.lstm_units = 4;
    cfg.att_length = 4;
    cfg.att_output = 2;
    return cfg;
}

ParamSet constant_grads(const ParamSet& params, double value) {
    ParamSet g = params.zeros_like();
    for (auto& [name, m] : g.items())
        for (double& v : m.values()) v = value;
    return g;
}

}  // namespace

TEST_CASE("adam_step with zero gradients leaves params unchanged") {
    ModelConfig cfg = tiny_config(Arch::Proposed);
    Rng rng(1);
    ParamSet p = init_params(cfg, rng);
    ParamSet before = p;
    AdamState st = AdamState::init(p);
    adam_step(p, p.zeros_like(), st, 1e-3);
    CHECK(p == before);
    CHECK(st.step == 1);
}

TEST_CASE("first adam step moves each coordinate by about lr") {
    // with constant gradient g, the bias-corrected first step is
    // lr * g / (|g| + eps') which is lr * sign(g) up to eps
    ModelConfig cfg = tiny_config(Arch::Proposed);
    Rng rng(2);
    ParamSet p = init_params(cfg, rng);
    ParamSet before = p;
    const double lr = 0.01;
    AdamState st = AdamState::init(p);
    adam_step(p, constant_grads(p, 0.5), st, lr);
    auto a = before.flatten();
    auto b = p.flatten();
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK(a[i] - b[i] == doctest::Approx(lr).epsilon(1e-4));
}

TEST_CASE("adam with lr=0 is the identity") {
    ModelConfig cfg = tiny_config(Arch::Baseline);
    Rng rng(3);
    ParamSet p = init_params(cfg, rng);
    ParamSet before = p;
    AdamState st = AdamState::init(p);
    for (int i = 0; i < 5; ++i) adam_step(p, constant_grads(p, 1.0), st, 0.0);
    CHECK(p == before);
}

TEST_CASE("adam converges on a separable quadratic") {
    // minimize sum_i (theta_i - 1)^2 coordinate-wise through the real update
    ModelConfig cfg = tiny_config(Arch::Baseline);
    cfg.lstm_units = 2;
    Rng rng(4);
    ParamSet p = init_params(cfg, rng);
    AdamState st = AdamState::init(p);
    for (int iter = 0; iter < 2000; ++iter) {
        ParamSet grads = p;
        for (auto& [name, m] : grads.items())
            for (double& v : m.values()) v = 2.0 * (v - 1.0);
        adam_step(p, grads, st, 0.05);
    }
    for (double v : p.flatten()) CHECK(v == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("adam_step rejects non-finite gradients naming the tensor") {
    ModelConfig cfg = tiny_config(Arch::Proposed);
    Rng rng(5);
    ParamSet p = init_params(cfg, rng);
    ParamSet g = p.zeros_like();
    g.at("att_u")(0, 0) = std::numeric_limits<double>::quiet_NaN();
    AdamState st = AdamState::init(p);
    CHECK_THROWS_WITH_AS(adam_step(p, g, st, 1e-3), doctest::Contains("att_u"), NumericError);
}

TEST_CASE("early stopping: 11th non-improving epoch with patience 10 stops") {
    ModelConfig cfg = tiny_config(Arch::Baseline);
    Rng rng(6);
    ParamSet p = init_params(cfg, rng);
    EarlyStop es(10);
    CHECK(!es.update(1.0, p)); // improvement
    for (int i = 0; i < 10; ++i) {
        CHECK(!es.update(2.0, p));
        CHECK(es.epochs_since_improvement() == static_cast<std::size_t>(i + 1));
    }
    CHECK(es.update(2.0, p)); // 11th in a row
    CHECK(es.best_loss() == 1.0);
}

TEST_CASE("early stopping: equal loss is not an improvement") {
    ModelConfig cfg = tiny_config(Arch::Baseline);
    Rng r1(7), r2(8);
    ParamSet first = init_params(cfg, r1);
    ParamSet second = init_params(cfg, r2);
    EarlyStop es(1);
    CHECK(!es.update(0.5, first));
    CHECK(!es.update(0.5, second)); // tie: counter goes to 1
    CHECK(es.epochs_since_improvement() == 1);
    CHECK(es.best_params() == first);
    CHECK(es.update(0.5, second)); // counter 2 > patience 1
}

TEST_CASE("early stopping keeps the snapshot of the best epoch") {
    ModelConfig cfg = tiny_config(Arch::Baseline);
    Rng r1(9), r2(10), r3(11);
    ParamSet a = init_params(cfg, r1);
    ParamSet b = init_params(cfg, r2);
    ParamSet c = init_params(cfg, r3);
    EarlyStop es(5);
    es.update(3.0, a);
    es.update(1.0, b);
    es.update(2.0, c);
    CHECK(es.best_loss() == 1.0);
    CHECK(es.best_params() == b);
}

namespace {

std::vector<Sample> windows_of(const std::vector<Trial>& trials, std::size_t T) {
    std::vector<Sample> out;
    for (const Trial& t : trials)
        for (Sample& s : make_windows(t, T, WindowScheme::Fnow)) out.push_back(std::move(s));
    return out;
}

}  // namespace

TEST_CASE("fit drives the training loss down on an easy problem") {
    SynthSpec spec;
    spec.family = TaskFamily::Separable;
    spec.classes = 2;
    spec.subjects = 2;
    spec.trials_per_class = 4;
    spec.length = 16;
    spec.channels = 2;
    spec.noise = 0.05;
    Rng data_rng(42);
    auto samples = windows_of(synth_trials(spec, data_rng), 16);

    ModelConfig cfg = tiny_config(Arch::Proposed);
    cfg.window = 16;
    cfg.learning_rate = 1e-2;
    cfg.max_epochs = 60;
    cfg.patience = 60;
    Rng rng(1);
    auto [best, hist] = fit(cfg, samples, samples, rng);

    REQUIRE(!hist.epochs.empty());
    CHECK(hist.epochs.back().train_loss < 0.5 * hist.epochs.front().train_loss);
    CHECK(hist.epochs.back().val_acc >= 0.9);
    CHECK(mean_loss(cfg, best, samples) <= hist.epochs.front().val_loss);
}

TEST_CASE("fit is bitwise deterministic under the same seed") {
    SynthSpec spec;
    spec.family = TaskFamily::Separable;
    spec.classes = 2;
    spec.subjects = 2;
    spec.trials_per_class = 2;
    spec.length = 8;
    spec.channels = 2;
    Rng d1(5), d2(5);
    auto s1 = windows_of(synth_trials(spec, d1), 8);
    auto s2 = windows_of(synth_trials(spec, d2), 8);

    ModelConfig cfg = tiny_config(Arch::Baseline);
    cfg.max_epochs = 5;
    Rng r1(3), r2(3);
    auto [p1, h1] = fit(cfg, s1, s1, r1);
    auto [p2, h2] = fit(cfg, s2, s2, r2);
    CHECK(p1 == p2);
    CHECK(h1 == h2);
}

TEST_CASE("fit stops early when validation stops improving") {
    // a single repeated training point with an unrelated validation point:
    // val loss plateaus almost immediately
    Matrix w(4, 2);
    for (double& v : w.values()) v = 0.1;
    Sample train_pt{w, 0, 0, 0, 0};
    Matrix vw(4, 2);
    for (std::size_t i = 0; i < vw.values().size(); ++i) vw.values()[i] = (i % 3) * 0.7 - 0.5;
    Sample val_pt{vw, 1, 1, 0, 0};

    ModelConfig cfg = tiny_config(Arch::Baseline);
    cfg.window = 4;
    cfg.learning_rate = 0.05;
    cfg.max_epochs = 100;
    cfg.patience = 3;
    Rng rng(9);
    auto [best, hist] = fit(cfg, {train_pt, train_pt}, {val_pt}, rng);
    CHECK(hist.stop_reason == "early_stop");
    CHECK(hist.stop_epoch < 100);
    CHECK(hist.epochs.size() == hist.stop_epoch);
}

TEST_CASE("fit runs to max_epochs when patience is never exhausted") {
    SynthSpec spec;
    spec.family = TaskFamily::Separable;
    spec.classes = 2;
    spec.subjects = 1;
    spec.trials_per_class = 2;
    spec.length = 8;
    spec.channels = 2;
    Rng d(6);
    auto samples = windows_of(synth_trials(spec, d), 8);
    ModelConfig cfg = tiny_config(Arch::Baseline);
    cfg.max_epochs = 4;
    cfg.patience = 100;
    Rng rng(2);
    auto [best, hist] = fit(cfg, samples, samples, rng);
    CHECK(hist.stop_reason == "max_epochs");
    CHECK(hist.stop_epoch == 4);
    CHECK(hist.epochs.size() == 4);
    for (std::size_t i = 0; i < hist.epochs.size(); ++i)
        CHECK(hist.epochs[i].epoch == i + 1);
}

TEST_CASE("returned params are the best-validation snapshot, not the last") {
    SynthSpec spec;
    spec.family = TaskFamily::Separable;
    spec.classes = 2;
    spec.subjects = 1;
    spec.trials_per_class = 3;
    spec.length = 8;
    spec.channels = 2;
    spec.noise = 0.4;
    Rng d(7);
    auto samples = windows_of(synth_trials(spec, d), 8);
    ModelConfig cfg = tiny_config(Arch::Proposed);
    cfg.learning_rate = 0.05; // deliberately unstable so val loss oscillates
    cfg.max_epochs = 30;
    cfg.patience = 30;
    Rng rng(4);
    auto [best, hist] = fit(cfg, samples, samples, rng);

    double best_recorded = std::numeric_limits<double>::infinity();
    for (const EpochRecord& e : hist.epochs) best_recorded = std::min(best_recorded, e.val_loss);
    CHECK(mean_loss(cfg, best, samples) == doctest::Approx(best_recorded).epsilon(1e-12));
}

TEST_CASE("mean_loss and accuracy agree with per-sample recomputation") {
    SynthSpec spec;
    spec.family = TaskFamily::Separable;
    spec.classes = 3;
    spec.subjects = 1;
    spec.trials_per_class = 2;
    spec.length = 8;
    spec.channels = 2;
    Rng d(8);
    auto samples = windows_of(synth_trials(spec, d), 8);
    ModelConfig cfg = tiny_config(Arch::Proposed);
    cfg.classes = 3;
    Rng rng(5);
    ParamSet p = init_params(cfg, rng);

    double loss = 0.0;
    std::size_t hits = 0;
    for (const Sample& s : samples) {
        auto probs = forward(cfg, p, s.window).probs;
        loss += cross_entropy(probs, s.label);
        if (argmax_lowest(probs) == s.label) ++hits;
    }
    CHECK(mean_loss(cfg, p, samples) ==
          doctest::Approx(loss / static_cast<double>(samples.size())));
    CHECK(accuracy(cfg, p, samples) ==
          doctest::Approx(static_cast<double>(hits) / static_cast<double>(samples.size())));
}

TEST_CASE("serialize_history writes one line per epoch") {
    TrainHistory h;
    h.epochs = {{1, 0.9, 1.1, 0.25}, {2, 0.5, 0.8, 0.5}};
    h.stop_epoch = 2;
    h.stop_reason = "max_epochs";
    const std::string path =
        (std::filesystem::temp_directory_path() / "har_history_test.csv").string();
    serialize_history(h, path);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "epoch,train_loss,val_loss,val_acc");
    std::getline(in, line);
    CHECK(line.substr(0, 2) == "1,");
    std::getline(in, line);
    CHECK(line.substr(0, 2) == "2,");
    CHECK(!std::getline(in, line));
    std::filesystem::remove(path);
}
