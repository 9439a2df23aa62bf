// End-to-end acceptance suite. Each criterion prints one [PASS]/[FAIL] line;
// the process exits nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "har/experiment.hpp"
#include "har/layers.hpp"
#include "har/metrics.hpp"
#include "har/synth.hpp"
#include "har/training.hpp"

using namespace har;

namespace {

int failures = 0;

void report(int index, const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%s] %d. %s%s%s\n", pass ? "PASS" : "FAIL", index, name.c_str(),
                detail.empty() ? "" : " — ", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

void run(int index, const std::string& name, const std::function<std::pair<bool, std::string>()>& body) {
    try {
        auto [pass, detail] = body();
        report(index, name, pass, detail);
    } catch (const std::exception& e) {
        report(index, name, false, std::string("exception: ") + e.what());
    }
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    std::ostringstream buf;
    buf << is.rdbuf();
    return buf.str();
}

// ---- 1. gradient correctness ------------------------------------------------

std::pair<bool, std::string> check_gradients() {
    double worst = 0.0;
    std::string worst_group;
    for (Arch arch : {Arch::Proposed, Arch::Baseline}) {
        ModelConfig dims = ModelConfig::defaults(arch);
        dims.window = 8;
        dims.channels = 3;
        dims.conv_filters = 3;
        dims.lstm_units = 4;
        dims.att_length = 4;
        dims.att_output = 2;
        dims.classes = 3;
        for (const GradCheckRow& row : run_gradcheck(dims, {1, 2, 3, 4, 5})) {
            if (row.max_rel_err > worst) {
                worst = row.max_rel_err;
                worst_group = to_string(arch) + "/" + row.group;
            }
            if (!row.pass)
                return {false, to_string(arch) + " group " + row.group + " rel err " +
                                   fmt(row.max_rel_err)};
        }
    }
    return {true, "max rel err " + fmt(worst) + " (" + worst_group + ") < 1e-5"};
}

// ---- 2. attention normalization --------------------------------------------

std::pair<bool, std::string> check_attention() {
    Rng rng(202);
    for (int rep = 0; rep < 1000; ++rep) {
        const std::size_t T = 1 + rng.below(12);
        const std::size_t E = 1 + rng.below(8);
        const std::size_t D = 1 + rng.below(6);
        const std::size_t F = 1 + rng.below(6);
        Matrix h(T, E), u(D, E), v(F, D);
        for (double& x : h.values()) x = rng.normal();
        for (double& x : u.values()) x = rng.normal();
        for (double& x : v.values()) x = rng.normal();
        AttentionTrace tr = attention_forward(h, u, v);

        for (std::size_t f = 0; f < F; ++f) {
            double sum = 0.0;
            for (std::size_t t = 0; t < T; ++t) sum += tr.alpha(f, t);
            if (std::abs(sum - 1.0) > 1e-9)
                return {false, "alpha row sum " + fmt(sum) + " at rep " + std::to_string(rep)};
        }
        for (std::size_t e = 0; e < E; ++e) {
            double lo = h(0, e), hi = h(0, e);
            for (std::size_t t = 1; t < T; ++t) {
                lo = std::min(lo, h(t, e));
                hi = std::max(hi, h(t, e));
            }
            for (std::size_t f = 0; f < F; ++f) {
                const double s = tr.scores(f, e);
                if (s < lo - 1e-12 || s > hi + 1e-12)
                    return {false, "summary entry " + fmt(s) + " outside [" + fmt(lo) + ", " +
                                       fmt(hi) + "]"};
            }
        }
    }
    return {true, "1000 random inputs: rows sum to 1, summaries stay in the convex hull"};
}

// ---- 3. overfit capacity ----------------------------------------------------

std::pair<bool, std::string> check_overfit() {
    SynthSpec spec;
    spec.family = TaskFamily::Separable;
    spec.classes = 3;
    spec.subjects = 5;
    spec.trials_per_class = 10;
    spec.length = 128;
    spec.channels = 3;
    spec.noise = 0.1;
    Rng data_rng(3);
    std::vector<Sample> samples;
    for (const Trial& t : synth_trials(spec, data_rng))
        for (Sample& s : make_windows(t, 32, WindowScheme::Snow)) samples.push_back(std::move(s));

    NormStats stats = fit_norm(samples);
    apply_norm(stats, samples);

    ModelConfig cfg = ModelConfig::defaults(Arch::Proposed);
    cfg.window = 32;
    cfg.channels = 3;
    cfg.classes = 3;
    cfg.max_epochs = 300;
    cfg.patience = 30;
    Rng rng(1);
    auto [params, hist] = fit(cfg, samples, samples, rng);

    double best = 0.0;
    for (const EpochRecord& e : hist.epochs) best = std::max(best, e.val_acc);
    return {best >= 0.99, "train accuracy " + fmt(best) + " after " +
                              std::to_string(hist.epochs.size()) + " epochs on " +
                              std::to_string(samples.size()) + " windows"};
}

// ---- 4. direction of improvement -------------------------------------------

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::pair<bool, std::string> check_direction() {
    const std::string common =
        "synth_family = long_range\n"
        "synth_classes = 4\n"
        "synth_subjects = 5\n"
        "synth_trials_per_class = 25\n"
        "synth_length = 64\n"
        "synth_channels = 3\n"
        "synth_noise = 0.3\n"
        "synth_marker_amp = 2\n"
        "synth_marker_len = 6\n"
        "window = 64\n"
        "window_scheme = fnow\n"
        "folds = 5\n"
        "conv_filters = 3\n"
        "lstm_units = 16\n"
        "att_length = 16\n"
        "att_output = 4\n"
        "learning_rate = 0.003\n"
        "max_epochs = 150\n"
        "patience = 25\n";

    std::vector<double> proposed, baseline;
    const std::string out = (std::filesystem::temp_directory_path() / "har_acc_dir").string();
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        for (const char* arch : {"proposed", "baseline"}) {
            ExperimentConfig cfg = ExperimentConfig::from_text(
                common + "arch = " + arch + "\nseed = " + std::to_string(seed) + "\n");
            cfg.out_dir = out;
            cfg.jobs = std::max<std::size_t>(1, std::thread::hardware_concurrency());
            XvalResult res = run_xval(cfg);
            for (const FoldReport& f : res.report.folds)
                (std::string(arch) == "proposed" ? proposed : baseline)
                    .push_back(f.metrics.accuracy);
        }
    }
    std::filesystem::remove_all(out);
    const double mp = median(proposed), mb = median(baseline);
    return {mp >= mb, "median accuracy proposed " + fmt(mp) + " vs baseline " + fmt(mb) +
                          " over 5 seeds x 5 folds"};
}

// ---- 5. windowing oracle ----------------------------------------------------

std::pair<bool, std::string> check_windowing() {
    {
        Trial t;
        t.series = Matrix(100, 1);
        if (make_windows(t, 20, WindowScheme::Snow).size() != 9 ||
            make_windows(t, 20, WindowScheme::Fnow).size() != 5)
            return {false, "L=100, T=20 count mismatch"};
    }
    Rng rng(55);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t T = 2 * (1 + rng.below(25));
        const std::size_t L = T + rng.below(9 * T + 1); // T <= L <= 10T
        Trial t;
        t.series = Matrix(L, 1);
        for (std::size_t i = 0; i < L; ++i) t.series(i, 0) = static_cast<double>(i);
        for (WindowScheme scheme : {WindowScheme::Snow, WindowScheme::Fnow}) {
            const std::size_t stride = scheme == WindowScheme::Snow ? T / 2 : T;
            std::vector<std::size_t> expected;
            for (std::size_t s = 0; s + T <= L; s += stride) expected.push_back(s);
            auto samples = make_windows(t, T, scheme);
            if (samples.size() != expected.size())
                return {false, "count mismatch at L=" + std::to_string(L) +
                                   ", T=" + std::to_string(T)};
            for (std::size_t i = 0; i < samples.size(); ++i)
                if (samples[i].start != expected[i] ||
                    samples[i].window(0, 0) != static_cast<double>(expected[i]))
                    return {false, "offset mismatch at L=" + std::to_string(L) +
                                       ", T=" + std::to_string(T)};
        }
    }
    return {true, "100 random (L, T) pairs match brute-force enumeration exactly"};
}

// ---- 6. leakage properties ---------------------------------------------------

std::pair<bool, std::string> check_leakage() {
    SynthSpec spec;
    spec.classes = 3;
    spec.subjects = 4;
    spec.trials_per_class = 8;
    spec.length = 64;
    spec.channels = 2;
    Rng data_rng(6);
    auto trials = synth_trials(spec, data_rng);

    // trial- and subject-level splitting: train/val/test trial ids disjoint
    for (SplitScheme scheme : {SplitScheme::Loto, SplitScheme::Loso}) {
        Rng rng(1);
        FoldPlan plan = plan_folds(trials, 4, scheme, rng);
        for (std::size_t fold = 0; fold < plan.k; ++fold) {
            Rng split_rng(10 + fold);
            TrialSplit split = split_train_val_test(plan, fold, 0.1, split_rng);
            for (long id : split.test)
                if (split.train.count(id) || split.val.count(id))
                    return {false, to_string(scheme) + " fold " + std::to_string(fold) +
                                       ": trial " + std::to_string(id) + " leaks"};
            for (long id : split.val)
                if (split.train.count(id))
                    return {false, to_string(scheme) + " fold " + std::to_string(fold) +
                                       ": trial " + std::to_string(id) + " leaks"};
            if (split.train.size() + split.val.size() + split.test.size() != trials.size())
                return {false, to_string(scheme) + ": split is not a partition"};
        }
    }

    // sample-level splitting with half-overlapping windows: two windows that
    // share time points from the same trial land in different folds
    Trial long_trial = trials.front();
    auto windows = make_windows(long_trial, 16, WindowScheme::Snow);
    Rng rng(2);
    auto folds = assign_sample_folds(windows.size(), 2, rng);
    bool overlap_found = false;
    for (std::size_t i = 0; i + 1 < windows.size() && !overlap_found; ++i)
        if (folds[i] != folds[i + 1]) overlap_found = true; // adjacent windows overlap by T/2
    if (!overlap_found)
        return {false, "sample-level split produced no cross-fold overlapping windows"};
    return {true, "trial/subject splits disjoint on all folds; sample-level split leaks"};
}

// ---- 7. metrics oracle -------------------------------------------------------

std::pair<bool, std::string> check_metrics() {
    {
        std::vector<std::size_t> labels{1, 1, 1, 1, 0, 0, 0, 0, 0, 0};
        std::vector<std::size_t> preds{1, 1, 1, 0, 1, 0, 0, 0, 0, 0};
        auto [cm, m] = evaluate(preds, labels, 2);
        if (std::abs(m.precision[1] - 0.75) > 1e-15 || std::abs(m.recall[1] - 0.75) > 1e-15 ||
            std::abs(m.f1[1] - 0.75) > 1e-15 || std::abs(m.accuracy - 0.8) > 1e-15)
            return {false, "hand-counted binary case mismatch"};
    }
    Rng rng(77);
    for (int rep = 0; rep < 1000; ++rep) {
        const std::size_t classes = 2 + rng.below(6);
        const std::size_t n = 1 + rng.below(50);
        std::vector<std::size_t> labels(n), preds(n);
        for (std::size_t i = 0; i < n; ++i) {
            labels[i] = rng.below(classes);
            preds[i] = rng.below(classes);
        }
        auto [cm, m] = evaluate(preds, labels, classes);
        std::size_t correct = 0;
        double psum = 0, rsum = 0, fsum = 0;
        for (std::size_t c = 0; c < classes; ++c) {
            std::size_t tp = 0, fp = 0, fn = 0;
            for (std::size_t i = 0; i < n; ++i) {
                tp += labels[i] == c && preds[i] == c;
                fp += labels[i] != c && preds[i] == c;
                fn += labels[i] == c && preds[i] != c;
            }
            const double p = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / (tp + fp);
            const double r = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / (tp + fn);
            const double f = p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
            if (std::abs(m.precision[c] - p) > 1e-12 || std::abs(m.recall[c] - r) > 1e-12 ||
                std::abs(m.f1[c] - f) > 1e-12)
                return {false, "per-class mismatch at rep " + std::to_string(rep)};
            psum += p;
            rsum += r;
            fsum += f;
        }
        for (std::size_t i = 0; i < n; ++i) correct += labels[i] == preds[i];
        if (std::abs(m.accuracy - static_cast<double>(correct) / n) > 1e-12 ||
            std::abs(m.macro_precision - psum / classes) > 1e-12 ||
            std::abs(m.macro_recall - rsum / classes) > 1e-12 ||
            std::abs(m.macro_f1 - fsum / classes) > 1e-12)
            return {false, "macro mismatch at rep " + std::to_string(rep)};
    }
    return {true, "1000 random instances match the brute-force recomputation"};
}

// ---- 8. early stopping -------------------------------------------------------

std::pair<bool, std::string> check_early_stopping() {
    ModelConfig cfg = ModelConfig::defaults(Arch::Baseline);
    cfg.channels = 2;
    cfg.window = 4;
    cfg.classes = 2;
    cfg.conv_filters = 2;
    cfg.lstm_units = 2;

    Rng r1(1), r2(2);
    ParamSet best_snapshot = init_params(cfg, r1);
    ParamSet other = init_params(cfg, r2);

    EarlyStop es(10);
    if (es.update(1.0, best_snapshot)) return {false, "stopped on the improving epoch"};
    for (int i = 1; i <= 10; ++i)
        if (es.update(2.0, other))
            return {false, "stopped at non-improving epoch " + std::to_string(i)};
    if (!es.update(2.0, other)) return {false, "did not stop at the 11th non-improving epoch"};
    if (!(es.best_params() == best_snapshot)) return {false, "restored params differ bitwise"};
    if (es.best_loss() != 1.0) return {false, "best loss not retained"};
    return {true, "stops at the 11th non-improving epoch with a bitwise-equal snapshot"};
}

// ---- 9. determinism ----------------------------------------------------------

std::pair<bool, std::string> check_determinism() {
    ExperimentConfig cfg = ExperimentConfig::from_text(
        "synth_family = separable\n"
        "synth_classes = 3\n"
        "synth_subjects = 4\n"
        "synth_trials_per_class = 4\n"
        "synth_length = 32\n"
        "synth_channels = 2\n"
        "window = 16\n"
        "folds = 4\n"
        "conv_filters = 2\n"
        "lstm_units = 4\n"
        "att_length = 4\n"
        "att_output = 2\n"
        "max_epochs = 5\n"
        "seed = 123\n");
    cfg.out_dir = (std::filesystem::temp_directory_path() / "har_acc_det").string();
    run_xval(cfg);
    const std::string first = slurp(cfg.out_dir + "/report.json");
    run_xval(cfg);
    const std::string second = slurp(cfg.out_dir + "/report.json");
    std::filesystem::remove_all(cfg.out_dir);
    if (first.empty()) return {false, "empty report"};
    if (first != second) return {false, "reports differ between identical runs"};
    return {true, "repeated run reproduces the report byte for byte (" +
                      std::to_string(first.size()) + " bytes)"};
}

}  // namespace

int main() {
    const auto t0 = std::chrono::steady_clock::now();
    run(1, "gradient correctness", check_gradients);
    run(2, "attention normalization", check_attention);
    run(3, "overfit capacity", check_overfit);
    run(4, "direction of improvement", check_direction);
    run(5, "windowing oracle", check_windowing);
    run(6, "leakage properties", check_leakage);
    run(7, "metrics oracle", check_metrics);
    run(8, "early stopping", check_early_stopping);
    run(9, "determinism", check_determinism);
    const auto dt = std::chrono::duration_cast<std::chrono::seconds>(
        std::chrono::steady_clock::now() - t0);
    std::printf("%s (%d/9 criteria, %llds)\n", failures == 0 ? "ALL PASS" : "FAILED",
                9 - failures, static_cast<long long>(dt.count()));
    return failures == 0 ? 0 : 1;
}
