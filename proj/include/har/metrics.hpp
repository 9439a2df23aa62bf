#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace har {

// C×C counts; entry (i, j) = samples with true class i predicted as class j.
struct ConfusionMatrix {
    std::size_t classes = 0;
    std::vector<std::size_t> counts; // row-major

    explicit ConfusionMatrix(std::size_t c = 0) : classes(c), counts(c * c, 0) {}

    std::size_t& at(std::size_t truth, std::size_t pred) {
        return counts[truth * classes + pred];
    }
    std::size_t at(std::size_t truth, std::size_t pred) const {
        return counts[truth * classes + pred];
    }
    std::size_t total() const;
    std::size_t trace() const;
};

struct MetricSet {
    double accuracy = 0.0;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
    std::vector<double> precision, recall, f1; // per class
};

// One-vs-rest reduction per class; 0/0 cells are defined as 0; macro
// averages are unweighted means over all classes, absent ones included.
std::pair<ConfusionMatrix, MetricSet> evaluate(const std::vector<std::size_t>& preds,
                                               const std::vector<std::size_t>& labels,
                                               std::size_t classes);

struct FoldSummary {
    struct Stat {
        double mean = 0.0;
        double stddev = 0.0; // sample standard deviation, (n-1) divisor
    };
    std::vector<MetricSet> folds;
    Stat accuracy, precision, recall, f1;
};

// Requires at least 2 folds; raw per-fold values are retained for box plots.
FoldSummary aggregate_folds(const std::vector<MetricSet>& fold_metrics);

}  // namespace har
