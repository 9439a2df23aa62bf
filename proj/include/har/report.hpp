#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "har/metrics.hpp"
#include "har/training.hpp"

namespace har {

struct FoldReport {
    std::size_t fold_index = 0;
    MetricSet metrics;
    ConfusionMatrix confusion;
    TrainHistory history;
};

struct RunReport {
    std::map<std::string, std::string> config; // full effective config, defaults resolved
    std::vector<FoldReport> folds;
    std::optional<FoldSummary> aggregate; // absent for single-fold runs
};

// Structured JSON document with top-level keys config, folds, aggregate,
// boxplot, histories. No timestamps; identical inputs render byte-identical
// output.
std::string render_report(const RunReport& report);

void write_report(const RunReport& report, const std::string& path);

}  // namespace har
