#include "har/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace har {

std::string to_string(WindowScheme s) {
    return s == WindowScheme::Snow ? "snow" : "fnow";
}

std::string to_string(SplitScheme s) {
    switch (s) {
        case SplitScheme::Loto: return "loto";
        case SplitScheme::Loso: return "loso";
        default: return "random_sample";
    }
}

WindowScheme window_scheme_from_string(const std::string& s) {
    if (s == "snow") return WindowScheme::Snow;
    if (s == "fnow") return WindowScheme::Fnow;
    throw ConfigError("unknown window scheme '" + s + "' (expected snow|fnow)");
}

SplitScheme split_scheme_from_string(const std::string& s) {
    if (s == "loto") return SplitScheme::Loto;
    if (s == "loso") return SplitScheme::Loso;
    if (s == "random_sample") return SplitScheme::RandomSample;
    throw ConfigError("unknown split scheme '" + s + "' (expected loto|loso|random_sample)");
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        auto comma = line.find(',', start);
        if (comma == std::string::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

long parse_long(const std::string& s, std::size_t line_no) {
    long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw DataError("line " + std::to_string(line_no) + ": not an integer: '" + s + "'");
    return v;
}

double parse_double(const std::string& s, std::size_t line_no) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw DataError("line " + std::to_string(line_no) + ": not a number: '" + s + "'");
    return v;
}

struct RawRow {
    long t;
    std::vector<double> values;
};

}  // namespace

std::vector<Trial> load_trials(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open: " + path);

    std::string line;
    if (!std::getline(is, line)) throw DataError(path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_csv_line(line);
    if (header.size() < 5 || header[0] != "trial_id" || header[1] != "subject_id" ||
        header[2] != "label" || header[3] != "t")
        throw DataError(path + ": bad header, expected trial_id,subject_id,label,t,ch_0,...");
    const std::size_t n_channels = header.size() - 4;
    for (std::size_t c = 0; c < n_channels; ++c)
        if (header[4 + c] != "ch_" + std::to_string(c))
            throw DataError(path + ": bad channel column '" + header[4 + c] + "'");

    struct TrialAccum {
        long subject_id;
        std::size_t label;
        std::vector<RawRow> rows;
    };
    std::map<long, TrialAccum> groups;

    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != header.size())
            throw DataError("line " + std::to_string(line_no) + ": expected " +
                            std::to_string(header.size()) + " fields, got " +
                            std::to_string(fields.size()));
        const long trial_id = parse_long(fields[0], line_no);
        const long subject_id = parse_long(fields[1], line_no);
        const long label = parse_long(fields[2], line_no);
        if (label < 0)
            throw DataError("line " + std::to_string(line_no) + ": negative label");
        const long t = parse_long(fields[3], line_no);
        RawRow row;
        row.t = t;
        row.values.reserve(n_channels);
        for (std::size_t c = 0; c < n_channels; ++c)
            row.values.push_back(parse_double(fields[4 + c], line_no));

        auto [it, inserted] = groups.try_emplace(
            trial_id, TrialAccum{subject_id, static_cast<std::size_t>(label), {}});
        if (!inserted) {
            if (it->second.subject_id != subject_id || it->second.label != static_cast<std::size_t>(label))
                throw DataError("line " + std::to_string(line_no) + ": trial " +
                                std::to_string(trial_id) + " changes subject or label");
        }
        it->second.rows.push_back(std::move(row));
    }

    if (groups.empty()) throw DataError(path + ": no trials");

    std::vector<Trial> trials;
    trials.reserve(groups.size());
    for (auto& [trial_id, acc] : groups) {
        std::sort(acc.rows.begin(), acc.rows.end(),
                  [](const RawRow& a, const RawRow& b) { return a.t < b.t; });
        for (std::size_t i = 1; i < acc.rows.size(); ++i)
            if (acc.rows[i].t == acc.rows[i - 1].t)
                throw DataError("trial " + std::to_string(trial_id) + ": duplicate time index " +
                                std::to_string(acc.rows[i].t));
        Trial tr;
        tr.trial_id = trial_id;
        tr.subject_id = acc.subject_id;
        tr.label = acc.label;
        tr.series = Matrix(acc.rows.size(), n_channels);
        for (std::size_t r = 0; r < acc.rows.size(); ++r)
            for (std::size_t c = 0; c < n_channels; ++c)
                tr.series(r, c) = acc.rows[r].values[c];
        trials.push_back(std::move(tr));
    }
    return trials;
}

void save_trials(const std::string& path, const std::vector<Trial>& trials) {
    if (trials.empty()) throw ConfigError("save_trials: no trials");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot open for write: " + path);
    const std::size_t n_channels = trials.front().series.cols();
    os << "trial_id,subject_id,label,t";
    for (std::size_t c = 0; c < n_channels; ++c) os << ",ch_" << c;
    os << "\n";
    char buf[64];
    for (const Trial& tr : trials) {
        if (tr.series.cols() != n_channels)
            throw ConfigError("save_trials: trials disagree on channel count");
        for (std::size_t t = 0; t < tr.series.rows(); ++t) {
            os << tr.trial_id << ',' << tr.subject_id << ',' << tr.label << ',' << t;
            for (std::size_t c = 0; c < n_channels; ++c) {
                std::snprintf(buf, sizeof(buf), "%.17g", tr.series(t, c));
                os << ',' << buf;
            }
            os << "\n";
        }
    }
    if (!os) throw DataError("write failed: " + path);
}

std::vector<Sample> make_windows(const Trial& trial, std::size_t T, WindowScheme scheme) {
    if (T < 1) throw ConfigError("make_windows: T must be >= 1");
    std::size_t stride;
    if (scheme == WindowScheme::Snow) {
        if (T < 2 || T % 2 != 0)
            throw ConfigError("make_windows: SNOW requires even T >= 2, got " + std::to_string(T));
        stride = T / 2;
    } else {
        stride = T;
    }
    std::vector<Sample> out;
    const std::size_t L = trial.series.rows();
    if (L < T) return out;
    for (std::size_t start = 0; start + T <= L; start += stride) {
        Sample s;
        s.window = Matrix(T, trial.series.cols());
        for (std::size_t t = 0; t < T; ++t)
            for (std::size_t c = 0; c < trial.series.cols(); ++c)
                s.window(t, c) = trial.series(start + t, c);
        s.label = trial.label;
        s.trial_id = trial.trial_id;
        s.subject_id = trial.subject_id;
        s.start = start;
        out.push_back(std::move(s));
    }
    return out;
}

FoldPlan plan_folds(const std::vector<Trial>& trials, std::size_t k, SplitScheme scheme,
                    Rng& rng) {
    if (trials.empty()) throw ConfigError("plan_folds: no trials");
    FoldPlan plan;
    plan.scheme = scheme;
    switch (scheme) {
        case SplitScheme::Loto: {
            if (k < 1 || k > trials.size())
                throw ConfigError("plan_folds: k=" + std::to_string(k) + " with " +
                                  std::to_string(trials.size()) + " trials");
            plan.k = k;
            std::vector<long> ids;
            ids.reserve(trials.size());
            for (const Trial& t : trials) ids.push_back(t.trial_id);
            std::sort(ids.begin(), ids.end());
            rng.shuffle(ids);
            for (std::size_t i = 0; i < ids.size(); ++i)
                plan.assignments[ids[i]] = i % k;
            break;
        }
        case SplitScheme::Loso: {
            std::map<long, std::size_t> subject_fold;
            for (const Trial& t : trials) subject_fold.emplace(t.subject_id, 0);
            std::size_t idx = 0;
            for (auto& [subject, fold] : subject_fold) fold = idx++;
            plan.k = subject_fold.size(); // k forced to the subject count
            for (const Trial& t : trials)
                plan.assignments[t.trial_id] = subject_fold[t.subject_id];
            break;
        }
        case SplitScheme::RandomSample: {
            if (k < 1) throw ConfigError("plan_folds: k must be >= 1");
            plan.k = k;
            break;
        }
    }
    return plan;
}

std::vector<std::size_t> assign_sample_folds(std::size_t n_samples, std::size_t k, Rng& rng) {
    if (k < 1 || k > n_samples)
        throw ConfigError("assign_sample_folds: k=" + std::to_string(k) + " with " +
                          std::to_string(n_samples) + " samples");
    std::vector<std::size_t> order(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) order[i] = i;
    rng.shuffle(order);
    std::vector<std::size_t> fold(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) fold[order[i]] = i % k;
    return fold;
}

TrialSplit split_train_val_test(const FoldPlan& plan, std::size_t test_fold,
                                double val_fraction, Rng& rng) {
    if (!(val_fraction > 0.0 && val_fraction < 1.0))
        throw ConfigError("split_train_val_test: val_fraction must be in (0,1)");
    if (test_fold >= plan.k)
        throw ConfigError("split_train_val_test: test_fold " + std::to_string(test_fold) +
                          " >= k " + std::to_string(plan.k));
    TrialSplit split;
    std::vector<long> remaining;
    for (const auto& [trial_id, fold] : plan.assignments) {
        if (fold == test_fold)
            split.test.insert(trial_id);
        else
            remaining.push_back(trial_id);
    }
    if (remaining.empty())
        throw ConfigError("split_train_val_test: no trials left outside the test fold");
    // assignments iterate in trial_id order, so the shuffle is reproducible
    rng.shuffle(remaining);
    const std::size_t n_val =
        static_cast<std::size_t>(std::ceil(val_fraction * static_cast<double>(remaining.size())));
    if (n_val >= remaining.size())
        throw ConfigError("split_train_val_test: validation would consume all training trials");
    for (std::size_t i = 0; i < remaining.size(); ++i) {
        if (i < n_val)
            split.val.insert(remaining[i]);
        else
            split.train.insert(remaining[i]);
    }
    return split;
}

NormStats fit_norm(const std::vector<Sample>& train) {
    if (train.empty()) throw ConfigError("fit_norm: empty training set");
    const std::size_t N = train.front().window.cols();
    NormStats stats;
    stats.mean.assign(N, 0.0);
    stats.stddev.assign(N, 0.0);
    std::size_t count = 0;
    for (const Sample& s : train) {
        for (std::size_t t = 0; t < s.window.rows(); ++t)
            for (std::size_t c = 0; c < N; ++c) stats.mean[c] += s.window(t, c);
        count += s.window.rows();
    }
    for (std::size_t c = 0; c < N; ++c) stats.mean[c] /= static_cast<double>(count);
    for (const Sample& s : train)
        for (std::size_t t = 0; t < s.window.rows(); ++t)
            for (std::size_t c = 0; c < N; ++c) {
                const double d = s.window(t, c) - stats.mean[c];
                stats.stddev[c] += d * d;
            }
    for (std::size_t c = 0; c < N; ++c)
        stats.stddev[c] = std::sqrt(stats.stddev[c] / static_cast<double>(count));
    return stats;
}

void apply_norm(const NormStats& stats, std::vector<Sample>& samples) {
    for (Sample& s : samples) {
        if (s.window.cols() != stats.mean.size())
            throw ConfigError("apply_norm: channel count mismatch");
        for (std::size_t t = 0; t < s.window.rows(); ++t)
            for (std::size_t c = 0; c < s.window.cols(); ++c) {
                const double div = stats.stddev[c] < 1e-8 ? 1.0 : stats.stddev[c];
                s.window(t, c) = (s.window(t, c) - stats.mean[c]) / div;
            }
    }
}

void serialize_fold_plan(const FoldPlan& plan, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot open for write: " + path);
    os << "trial_id,fold\n";
    for (const auto& [trial_id, fold] : plan.assignments)
        os << trial_id << ',' << fold << "\n";
    if (!os) throw DataError("write failed: " + path);
}

}  // namespace har
