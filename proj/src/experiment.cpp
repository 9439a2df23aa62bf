#include "har/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "har/errors.hpp"
#include "har/gradcheck.hpp"
#include "har/layers.hpp"
#include "har/training.hpp"

namespace har {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::size_t parse_count(const std::string& key, const std::string& val) {
    try {
        std::size_t pos = 0;
        unsigned long long v = std::stoull(val, &pos);
        if (pos != val.size()) throw std::invalid_argument(val);
        return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
        throw ConfigError("config: key '" + key + "' expects a count, got '" + val + "'");
    }
}

double parse_real(const std::string& key, const std::string& val) {
    try {
        std::size_t pos = 0;
        double v = std::stod(val, &pos);
        if (pos != val.size()) throw std::invalid_argument(val);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: key '" + key + "' expects a number, got '" + val + "'");
    }
}

std::string fmt_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_text(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream is(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": expected key=value, got '" + t + "'");
        const std::string key = trim(t.substr(0, eq));
        const std::string val = trim(t.substr(eq + 1));
        if (kv.count(key))
            throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" +
                              key + "'");
        kv[key] = val;
    }

    ExperimentConfig cfg;
    // arch first so the learning-rate default can depend on it
    Arch arch = Arch::Proposed;
    if (auto it = kv.find("arch"); it != kv.end()) arch = arch_from_string(it->second);
    cfg.model = ModelConfig::defaults(arch);

    SynthSpec synth;
    bool have_synth = false;

    for (const auto& [key, val] : kv) {
        if (key == "arch") continue;
        else if (key == "data") cfg.data_path = val;
        else if (key == "synth_family") { synth.family = task_family_from_string(val); have_synth = true; }
        else if (key == "synth_classes") { synth.classes = parse_count(key, val); have_synth = true; }
        else if (key == "synth_subjects") { synth.subjects = parse_count(key, val); have_synth = true; }
        else if (key == "synth_trials_per_class") { synth.trials_per_class = parse_count(key, val); have_synth = true; }
        else if (key == "synth_length") { synth.length = parse_count(key, val); have_synth = true; }
        else if (key == "synth_channels") { synth.channels = parse_count(key, val); have_synth = true; }
        else if (key == "synth_noise") { synth.noise = parse_real(key, val); have_synth = true; }
        else if (key == "synth_marker_amp") { synth.marker_amp = parse_real(key, val); have_synth = true; }
        else if (key == "synth_marker_len") { synth.marker_len = parse_count(key, val); have_synth = true; }
        else if (key == "window") cfg.window = parse_count(key, val);
        else if (key == "window_scheme") cfg.window_scheme = window_scheme_from_string(val);
        else if (key == "split_scheme") cfg.split_scheme = split_scheme_from_string(val);
        else if (key == "folds") cfg.folds = parse_count(key, val);
        else if (key == "val_fraction") cfg.val_fraction = parse_real(key, val);
        else if (key == "out_dir") cfg.out_dir = val;
        else if (key == "seed") cfg.seed = parse_count(key, val);
        else if (key == "jobs") cfg.jobs = parse_count(key, val);
        else if (key == "conv_filters") cfg.model.conv_filters = parse_count(key, val);
        else if (key == "lstm_units") cfg.model.lstm_units = parse_count(key, val);
        else if (key == "lstm_layers") cfg.model.lstm_layers = parse_count(key, val);
        else if (key == "att_length") cfg.model.att_length = parse_count(key, val);
        else if (key == "att_output") cfg.model.att_output = parse_count(key, val);
        else if (key == "learning_rate") cfg.model.learning_rate = parse_real(key, val);
        else if (key == "batch_size") cfg.model.batch_size = parse_count(key, val);
        else if (key == "max_epochs") cfg.model.max_epochs = parse_count(key, val);
        else if (key == "patience") cfg.model.patience = parse_count(key, val);
        else throw ConfigError("config: unknown key '" + key + "'");
    }
    if (have_synth) cfg.synth = synth;
    cfg.validate();
    return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << is.rdbuf();
    return from_text(buf.str());
}

void ExperimentConfig::validate() const {
    if (data_path.empty() == !synth.has_value())
        throw ConfigError("config: exactly one of 'data' and 'synth_*' must be given");
    if (window < 1) throw ConfigError("config: 'window' is required and must be >= 1");
    if (folds < 1) throw ConfigError("config: 'folds' must be >= 1");
    if (!(val_fraction > 0.0 && val_fraction < 1.0))
        throw ConfigError("config: 'val_fraction' must be in (0,1)");
    if (jobs < 1) throw ConfigError("config: 'jobs' must be >= 1");
}

std::map<std::string, std::string> ExperimentConfig::resolved() const {
    std::map<std::string, std::string> out;
    if (!data_path.empty()) out["data"] = data_path;
    if (synth) {
        out["synth_family"] = to_string(synth->family);
        out["synth_classes"] = std::to_string(synth->classes);
        out["synth_subjects"] = std::to_string(synth->subjects);
        out["synth_trials_per_class"] = std::to_string(synth->trials_per_class);
        out["synth_length"] = std::to_string(synth->length);
        out["synth_channels"] = std::to_string(synth->channels);
        out["synth_noise"] = fmt_real(synth->noise);
        out["synth_marker_amp"] = fmt_real(synth->marker_amp);
        out["synth_marker_len"] = std::to_string(synth->marker_len);
    }
    out["window"] = std::to_string(window);
    out["window_scheme"] = to_string(window_scheme);
    out["split_scheme"] = to_string(split_scheme);
    out["folds"] = std::to_string(folds);
    out["val_fraction"] = fmt_real(val_fraction);
    out["out_dir"] = out_dir;
    out["seed"] = std::to_string(seed);
    out["jobs"] = std::to_string(jobs);
    out["arch"] = to_string(model.arch);
    out["conv_filters"] = std::to_string(model.conv_filters);
    out["lstm_units"] = std::to_string(model.lstm_units);
    out["lstm_layers"] = std::to_string(model.lstm_layers);
    out["att_length"] = std::to_string(model.att_length);
    out["att_output"] = std::to_string(model.att_output);
    out["learning_rate"] = fmt_real(model.learning_rate);
    out["batch_size"] = std::to_string(model.batch_size);
    out["max_epochs"] = std::to_string(model.max_epochs);
    out["patience"] = std::to_string(model.patience);
    return out;
}

namespace {

struct Dataset {
    std::vector<Trial> trials;
    std::size_t channels = 0;
    std::size_t classes = 0;
};

Dataset load_dataset(const ExperimentConfig& cfg, Rng& setup_rng) {
    Dataset ds;
    ds.trials = cfg.synth ? synth_trials(*cfg.synth, setup_rng) : load_trials(cfg.data_path);
    ds.channels = ds.trials.front().series.cols();
    for (const Trial& t : ds.trials) ds.classes = std::max(ds.classes, t.label + 1);
    return ds;
}

struct FoldOutcome {
    FoldReport report;
    ParamSet params;
};

FoldOutcome run_fold(const ExperimentConfig& cfg, const Dataset& ds, const FoldPlan& plan,
                     const std::vector<Sample>* all_samples,
                     const std::vector<std::size_t>* sample_folds, std::size_t fold) {
    Rng fold_rng(cfg.seed + fold);

    std::vector<Sample> train, val, test;
    if (plan.scheme == SplitScheme::RandomSample) {
        std::vector<std::size_t> remaining;
        for (std::size_t i = 0; i < all_samples->size(); ++i) {
            if ((*sample_folds)[i] == fold)
                test.push_back((*all_samples)[i]);
            else
                remaining.push_back(i);
        }
        fold_rng.shuffle(remaining);
        const std::size_t n_val = static_cast<std::size_t>(
            std::ceil(cfg.val_fraction * static_cast<double>(remaining.size())));
        for (std::size_t i = 0; i < remaining.size(); ++i) {
            if (i < n_val)
                val.push_back((*all_samples)[remaining[i]]);
            else
                train.push_back((*all_samples)[remaining[i]]);
        }
    } else {
        TrialSplit split = split_train_val_test(plan, fold, cfg.val_fraction, fold_rng);
        for (const Trial& t : ds.trials) {
            std::vector<Sample> windows = make_windows(t, cfg.window, cfg.window_scheme);
            std::vector<Sample>* dest = nullptr;
            if (split.train.count(t.trial_id)) dest = &train;
            else if (split.val.count(t.trial_id)) dest = &val;
            else dest = &test;
            dest->insert(dest->end(), std::make_move_iterator(windows.begin()),
                         std::make_move_iterator(windows.end()));
        }
    }
    if (train.empty() || val.empty() || test.empty())
        throw ConfigError("fold yields an empty split (train " + std::to_string(train.size()) +
                          ", val " + std::to_string(val.size()) + ", test " +
                          std::to_string(test.size()) + "); trials too short for T=" +
                          std::to_string(cfg.window) + "?");

    NormStats stats = fit_norm(train);
    apply_norm(stats, train);
    apply_norm(stats, val);
    apply_norm(stats, test);

    ModelConfig mc = cfg.model;
    mc.channels = ds.channels;
    mc.window = cfg.window;
    mc.classes = ds.classes;
    mc.seed = cfg.seed + fold;

    auto [params, history] = fit(mc, train, val, fold_rng);

    std::vector<std::size_t> preds, labels;
    preds.reserve(test.size());
    labels.reserve(test.size());
    for (const Sample& s : test) {
        preds.push_back(predict(mc, params, s.window));
        labels.push_back(s.label);
    }
    auto [confusion, metrics] = evaluate(preds, labels, ds.classes);

    FoldOutcome out{FoldReport{fold, std::move(metrics), std::move(confusion),
                               std::move(history)},
                    std::move(params)};
    return out;
}

RunReport assemble_report(const ExperimentConfig& cfg, std::vector<FoldReport> folds) {
    RunReport report;
    report.config = cfg.resolved();
    std::sort(folds.begin(), folds.end(),
              [](const FoldReport& a, const FoldReport& b) { return a.fold_index < b.fold_index; });
    if (folds.size() >= 2) {
        std::vector<MetricSet> metrics;
        for (const FoldReport& f : folds) metrics.push_back(f.metrics);
        report.aggregate = aggregate_folds(metrics);
    }
    report.folds = std::move(folds);
    return report;
}

}  // namespace

XvalResult run_xval(const ExperimentConfig& cfg) {
    cfg.validate();
    Rng setup_rng(cfg.seed);
    Dataset ds = load_dataset(cfg, setup_rng);
    FoldPlan plan = plan_folds(ds.trials, cfg.folds, cfg.split_scheme, setup_rng);

    std::vector<Sample> all_samples;
    std::vector<std::size_t> sample_folds;
    if (cfg.split_scheme == SplitScheme::RandomSample) {
        for (const Trial& t : ds.trials) {
            std::vector<Sample> windows = make_windows(t, cfg.window, cfg.window_scheme);
            all_samples.insert(all_samples.end(), std::make_move_iterator(windows.begin()),
                               std::make_move_iterator(windows.end()));
        }
        sample_folds = assign_sample_folds(all_samples.size(), plan.k, setup_rng);
    }

    std::vector<FoldReport> folds(plan.k);
    std::vector<std::string> errors(plan.k);
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t fold = next.fetch_add(1);
            if (fold >= plan.k) return;
            try {
                folds[fold] = run_fold(cfg, ds, plan, &all_samples, &sample_folds, fold).report;
            } catch (const std::exception& e) {
                errors[fold] = e.what();
            }
        }
    };
    const std::size_t n_threads = std::min(cfg.jobs, plan.k);
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (std::size_t i = 0; i < n_threads; ++i) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }
    for (std::size_t f = 0; f < plan.k; ++f)
        if (!errors[f].empty())
            throw Error("fold " + std::to_string(f) + ": " + errors[f]);

    XvalResult result;
    result.report = assemble_report(cfg, std::move(folds));
    std::filesystem::create_directories(cfg.out_dir);
    result.report_path = cfg.out_dir + "/report.json";
    write_report(result.report, result.report_path);
    if (!plan.assignments.empty())
        serialize_fold_plan(plan, cfg.out_dir + "/folds.csv");
    return result;
}

XvalResult run_train(const ExperimentConfig& cfg) {
    cfg.validate();
    Rng setup_rng(cfg.seed);
    Dataset ds = load_dataset(cfg, setup_rng);
    FoldPlan plan = plan_folds(ds.trials, cfg.folds, cfg.split_scheme, setup_rng);

    std::vector<Sample> all_samples;
    std::vector<std::size_t> sample_folds;
    if (cfg.split_scheme == SplitScheme::RandomSample) {
        for (const Trial& t : ds.trials) {
            std::vector<Sample> windows = make_windows(t, cfg.window, cfg.window_scheme);
            all_samples.insert(all_samples.end(), std::make_move_iterator(windows.begin()),
                               std::make_move_iterator(windows.end()));
        }
        sample_folds = assign_sample_folds(all_samples.size(), plan.k, setup_rng);
    }

    FoldOutcome outcome = run_fold(cfg, ds, plan, &all_samples, &sample_folds, 0);

    XvalResult result;
    result.report = assemble_report(cfg, {std::move(outcome.report)});
    std::filesystem::create_directories(cfg.out_dir);
    result.report_path = cfg.out_dir + "/report.json";
    write_report(result.report, result.report_path);

    ModelConfig mc = cfg.model;
    mc.channels = ds.channels;
    mc.window = cfg.window;
    mc.classes = ds.classes;
    mc.seed = cfg.seed;
    save_params(cfg.out_dir + "/model.bin", mc, outcome.params);
    return result;
}

std::vector<GradCheckRow> run_gradcheck(const ModelConfig& dims,
                                        const std::vector<std::uint64_t>& seeds,
                                        double eps, double tol,
                                        const std::string& corrupt_group) {
    dims.validate();
    if (seeds.empty()) throw ConfigError("run_gradcheck: no seeds");

    std::vector<GradCheckRow> rows;
    for (std::uint64_t seed : seeds) {
        Rng rng(seed);
        ParamSet params = init_params(dims, rng);
        if (params.value_count() > 10000)
            throw ConfigError("run_gradcheck: " + std::to_string(params.value_count()) +
                              " parameters exceed the finite-difference budget of 10000");

        Matrix x(dims.window, dims.channels);
        for (double& v : x.values()) v = rng.normal();
        const std::size_t label = static_cast<std::size_t>(seed % dims.classes);

        ForwardTrace trace = forward(dims, params, x);
        ParamSet analytic = backward(dims, params, x, trace, label);
        if (!corrupt_group.empty()) {
            Matrix& g = analytic.at(corrupt_group);
            for (double& v : g.values()) v *= 1.01;
        }

        const ParamSet base = params;
        auto loss_fn = [&](const std::vector<double>& flat) {
            ParamSet p = base;
            p.unflatten(flat);
            return cross_entropy(forward(dims, p, x).probs, label);
        };
        const std::vector<double> numeric = finite_diff_grad(loss_fn, params.flatten(), eps);
        const std::vector<double> flat_analytic = analytic.flatten();

        if (rows.empty())
            for (const auto& [name, m] : params.items()) rows.push_back({name, 0.0, false});

        std::size_t off = 0, group = 0;
        for (const auto& [name, m] : params.items()) {
            for (std::size_t i = 0; i < m.size(); ++i) {
                const double a = flat_analytic[off + i];
                const double n = numeric[off + i];
                // relative error with an absolute floor so tiny true
                // gradients do not dominate
                const double rel = std::abs(a - n) / std::max(std::abs(a) + std::abs(n), 1e-3);
                rows[group].max_rel_err = std::max(rows[group].max_rel_err, rel);
            }
            off += m.size();
            ++group;
        }
    }
    for (GradCheckRow& r : rows) r.pass = r.max_rel_err < tol;
    return rows;
}

}  // namespace har
