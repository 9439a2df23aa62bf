#include "har/metrics.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "har/errors.hpp"

namespace har {

std::size_t ConfusionMatrix::total() const {
    return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
}

std::size_t ConfusionMatrix::trace() const {
    std::size_t t = 0;
    for (std::size_t c = 0; c < classes; ++c) t += at(c, c);
    return t;
}

std::pair<ConfusionMatrix, MetricSet> evaluate(const std::vector<std::size_t>& preds,
                                               const std::vector<std::size_t>& labels,
                                               std::size_t classes) {
    if (preds.size() != labels.size())
        throw ConfigError("evaluate: " + std::to_string(preds.size()) + " predictions vs " +
                          std::to_string(labels.size()) + " labels");
    if (preds.empty()) throw ConfigError("evaluate: no samples");

    ConfusionMatrix cm(classes);
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (labels[i] >= classes || preds[i] >= classes)
            throw ConfigError("evaluate: class index out of range at sample " +
                              std::to_string(i));
        ++cm.at(labels[i], preds[i]);
    }

    MetricSet ms;
    ms.precision.resize(classes);
    ms.recall.resize(classes);
    ms.f1.resize(classes);
    const auto ratio = [](double num, double den) { return den > 0.0 ? num / den : 0.0; };
    for (std::size_t c = 0; c < classes; ++c) {
        double tp = static_cast<double>(cm.at(c, c));
        double fp = 0.0, fn = 0.0;
        for (std::size_t o = 0; o < classes; ++o) {
            if (o == c) continue;
            fp += static_cast<double>(cm.at(o, c));
            fn += static_cast<double>(cm.at(c, o));
        }
        ms.precision[c] = ratio(tp, tp + fp);
        ms.recall[c] = ratio(tp, tp + fn);
        ms.f1[c] = ratio(2.0 * ms.precision[c] * ms.recall[c], ms.precision[c] + ms.recall[c]);
        ms.macro_precision += ms.precision[c];
        ms.macro_recall += ms.recall[c];
        ms.macro_f1 += ms.f1[c];
    }
    const double n_classes = static_cast<double>(classes);
    ms.macro_precision /= n_classes;
    ms.macro_recall /= n_classes;
    ms.macro_f1 /= n_classes;
    ms.accuracy = static_cast<double>(cm.trace()) / static_cast<double>(preds.size());
    return {cm, ms};
}

namespace {

FoldSummary::Stat stat_of(const std::vector<double>& xs) {
    FoldSummary::Stat st;
    const double n = static_cast<double>(xs.size());
    for (double x : xs) st.mean += x;
    st.mean /= n;
    double ss = 0.0;
    for (double x : xs) ss += (x - st.mean) * (x - st.mean);
    st.stddev = std::sqrt(ss / (n - 1.0));
    return st;
}

}  // namespace

FoldSummary aggregate_folds(const std::vector<MetricSet>& fold_metrics) {
    if (fold_metrics.size() < 2)
        throw ConfigError("aggregate_folds: need at least 2 folds, got " +
                          std::to_string(fold_metrics.size()));
    FoldSummary summary;
    summary.folds = fold_metrics;
    std::vector<double> acc, prec, rec, f1;
    for (const MetricSet& m : fold_metrics) {
        acc.push_back(m.accuracy);
        prec.push_back(m.macro_precision);
        rec.push_back(m.macro_recall);
        f1.push_back(m.macro_f1);
    }
    summary.accuracy = stat_of(acc);
    summary.precision = stat_of(prec);
    summary.recall = stat_of(rec);
    summary.f1 = stat_of(f1);
    return summary;
}

}  // namespace har
