#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "har/data.hpp"
#include "har/errors.hpp"
#include "har/experiment.hpp"
#include "har/synth.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

struct CommonOpts {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> jobs;
    std::optional<std::string> out_dir;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "experiment config file (key=value lines)")
        ->required();
    cmd->add_option("--seed", opts.seed, "override the config's global seed");
    cmd->add_option("--jobs", opts.jobs, "parallel fold workers");
    cmd->add_option("--out", opts.out_dir, "output directory");
}

har::ExperimentConfig load_config(const CommonOpts& opts) {
    har::ExperimentConfig cfg = har::ExperimentConfig::from_file(opts.config_path);
    if (opts.seed) cfg.seed = *opts.seed;
    if (opts.jobs) cfg.jobs = *opts.jobs;
    if (opts.out_dir) cfg.out_dir = *opts.out_dir;
    return cfg;
}

void print_metrics_line(const har::RunReport& report) {
    if (report.aggregate) {
        const auto& agg = *report.aggregate;
        std::printf("folds: %zu  accuracy: %.2f±%.2f%%  recall: %.2f±%.2f%%  f1: %.2f±%.2f%%\n",
                    report.folds.size(), agg.accuracy.mean * 100.0, agg.accuracy.stddev * 100.0,
                    agg.recall.mean * 100.0, agg.recall.stddev * 100.0, agg.f1.mean * 100.0,
                    agg.f1.stddev * 100.0);
    } else if (!report.folds.empty()) {
        const auto& m = report.folds.front().metrics;
        std::printf("accuracy: %.2f%%  recall: %.2f%%  f1: %.2f%%\n", m.accuracy * 100.0,
                    m.macro_recall * 100.0, m.macro_f1 * 100.0);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ConvLSTM-with-self-attention activity classifier"};
    app.require_subcommand(1);

    CommonOpts xval_opts, train_opts;
    CLI::App* xval_cmd = app.add_subcommand("xval", "cross-validated experiment");
    add_common(xval_cmd, xval_opts);
    CLI::App* train_cmd = app.add_subcommand("train", "single train/val/test split");
    add_common(train_cmd, train_opts);

    CLI::App* grad_cmd = app.add_subcommand("gradcheck", "verify analytic gradients");
    std::size_t g_window = 8, g_channels = 3, g_filters = 3, g_units = 4, g_att_len = 4,
                g_att_out = 2, g_classes = 3, g_layers = 1, g_seeds = 5;
    std::string g_arch = "both";
    std::string g_corrupt;
    grad_cmd->add_option("--window", g_window, "window length T");
    grad_cmd->add_option("--channels", g_channels, "sensor channels N");
    grad_cmd->add_option("--filters", g_filters, "conv filters K");
    grad_cmd->add_option("--units", g_units, "LSTM units E");
    grad_cmd->add_option("--layers", g_layers, "LSTM layers");
    grad_cmd->add_option("--att-length", g_att_len, "attention length D");
    grad_cmd->add_option("--att-output", g_att_out, "attention output length F");
    grad_cmd->add_option("--classes", g_classes, "class count C");
    grad_cmd->add_option("--seeds", g_seeds, "number of seeds");
    grad_cmd->add_option("--arch", g_arch, "proposed|baseline|both");
    grad_cmd->add_option("--corrupt-group", g_corrupt, "test hook: scale one gradient group by 1.01")
        ->group("");

    CLI::App* synth_cmd = app.add_subcommand("synth", "emit canonical trial CSV from a generator config");
    CommonOpts synth_opts;
    std::string synth_out = "trials.csv";
    synth_cmd->add_option("--config", synth_opts.config_path, "experiment config with synth_* keys")
        ->required();
    synth_cmd->add_option("--seed", synth_opts.seed, "override the config's global seed");
    synth_cmd->add_option("--out", synth_out, "output CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (xval_cmd->parsed()) {
            har::XvalResult result = har::run_xval(load_config(xval_opts));
            print_metrics_line(result.report);
            std::printf("report: %s\n", result.report_path.c_str());
        } else if (train_cmd->parsed()) {
            har::XvalResult result = har::run_train(load_config(train_opts));
            print_metrics_line(result.report);
            std::printf("report: %s\n", result.report_path.c_str());
        } else if (grad_cmd->parsed()) {
            std::vector<std::uint64_t> seeds;
            for (std::size_t s = 0; s < g_seeds; ++s) seeds.push_back(s + 1);
            std::vector<har::Arch> archs;
            if (g_arch == "both")
                archs = {har::Arch::Proposed, har::Arch::Baseline};
            else
                archs = {har::arch_from_string(g_arch)};

            bool all_pass = true;
            for (har::Arch arch : archs) {
                har::ModelConfig dims = har::ModelConfig::defaults(arch);
                dims.window = g_window;
                dims.channels = g_channels;
                dims.classes = g_classes;
                dims.conv_filters = g_filters;
                dims.lstm_units = g_units;
                dims.lstm_layers = g_layers;
                dims.att_length = g_att_len;
                dims.att_output = g_att_out;
                std::printf("architecture: %s\n", har::to_string(arch).c_str());
                for (const har::GradCheckRow& row : har::run_gradcheck(dims, seeds, 1e-6, 1e-5,
                                                                       g_corrupt)) {
                    std::printf("  %-10s max_rel_err %.3e  %s\n", row.group.c_str(),
                                row.max_rel_err, row.pass ? "pass" : "FAIL");
                    all_pass = all_pass && row.pass;
                }
            }
            if (!all_pass) {
                std::fprintf(stderr, "gradcheck failed\n");
                return kExitNumeric;
            }
        } else if (synth_cmd->parsed()) {
            har::ExperimentConfig cfg = har::ExperimentConfig::from_file(synth_opts.config_path);
            if (synth_opts.seed) cfg.seed = *synth_opts.seed;
            if (!cfg.synth)
                throw har::ConfigError("synth subcommand needs synth_* keys in the config");
            har::Rng rng(cfg.seed);
            har::save_trials(synth_out, har::synth_trials(*cfg.synth, rng));
            std::printf("wrote %s\n", synth_out.c_str());
        }
    } catch (const har::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const har::DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return kExitData;
    } catch (const har::NumericError& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    }
    return kExitOk;
}
