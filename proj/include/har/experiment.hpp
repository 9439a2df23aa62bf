#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "har/data.hpp"
#include "har/model.hpp"
#include "har/report.hpp"
#include "har/synth.hpp"

namespace har {

// Flat key=value experiment description. Every key has a default except the
// data source (data= or synth_family=) and window. Unknown keys are
// rejected.
struct ExperimentConfig {
    std::string data_path;               // empty when synthetic
    std::optional<SynthSpec> synth;

    std::size_t window = 0;              // T, required
    WindowScheme window_scheme = WindowScheme::Snow;
    SplitScheme split_scheme = SplitScheme::Loto;
    std::size_t folds = 10;
    double val_fraction = 0.1;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    std::size_t jobs = 1;

    ModelConfig model = ModelConfig::defaults(Arch::Proposed);

    static ExperimentConfig from_text(const std::string& text);
    static ExperimentConfig from_file(const std::string& path);

    void validate() const;

    // Full effective configuration, defaults resolved; sufficient to
    // reproduce the run.
    std::map<std::string, std::string> resolved() const;
};

struct XvalResult {
    RunReport report;
    std::string report_path;
};

// Full cross-validation: fold plan, per-fold train/evaluate (parallel up to
// cfg.jobs), aggregation, report written to out_dir/report.json and the fold
// plan to out_dir/folds.csv.
XvalResult run_xval(const ExperimentConfig& cfg);

// Single split (test fold 0): fits one model, writes out_dir/report.json
// (no aggregate) and the trained parameters to out_dir/model.bin.
XvalResult run_train(const ExperimentConfig& cfg);

struct GradCheckRow {
    std::string group;
    double max_rel_err = 0.0;
    bool pass = false;
};

// Compares analytic gradients against central finite differences per
// parameter group, max over seeds. corrupt_group is a test hook that scales
// that group's analytic gradient by 1.01 before comparison.
std::vector<GradCheckRow> run_gradcheck(const ModelConfig& dims,
                                        const std::vector<std::uint64_t>& seeds,
                                        double eps = 1e-6, double tol = 1e-5,
                                        const std::string& corrupt_group = "");

}  // namespace har
