#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "har/matrix.hpp"
#include "har/rng.hpp"

namespace har {

// One contiguous recording of one activity by one subject. The atomic unit
// for leakage-free splitting.
struct Trial {
    long trial_id = 0;
    long subject_id = 0;
    std::size_t label = 0;
    Matrix series; // L×N
};

// Fixed-length T×N window cut from a trial.
struct Sample {
    Matrix window;
    std::size_t label = 0;
    long trial_id = 0;
    long subject_id = 0;
    std::size_t start = 0; // offset into the source trial
};

enum class WindowScheme { Snow, Fnow };
enum class SplitScheme { Loto, Loso, RandomSample };

std::string to_string(WindowScheme s);
std::string to_string(SplitScheme s);
WindowScheme window_scheme_from_string(const std::string& s);
SplitScheme split_scheme_from_string(const std::string& s);

// Canonical trial CSV: header trial_id,subject_id,label,t,ch_0,...,ch_{N-1};
// one row per time point; rows need not be pre-sorted.
std::vector<Trial> load_trials(const std::string& path);
void save_trials(const std::string& path, const std::vector<Trial>& trials);

// SNOW: stride T/2 (T must be even); FNOW: stride T. Windows start at
// multiples of the stride while start+T <= L; a trailing remainder shorter
// than T is discarded.
std::vector<Sample> make_windows(const Trial& trial, std::size_t T, WindowScheme scheme);

struct FoldPlan {
    std::size_t k = 0;
    SplitScheme scheme = SplitScheme::Loto;
    std::map<long, std::size_t> assignments; // trial_id -> fold; empty for RandomSample
};

// LOTO: seeded shuffle then round-robin deal; LOSO: one fold per subject
// (k is forced to the subject count); RandomSample: assignment happens at
// the sample level via assign_sample_folds, the plan stays empty.
FoldPlan plan_folds(const std::vector<Trial>& trials, std::size_t k, SplitScheme scheme,
                    Rng& rng);

// Sample-level round-robin deal after a seeded shuffle; used only by the
// RANDOM_SAMPLE scheme (deliberately leaky across trials).
std::vector<std::size_t> assign_sample_folds(std::size_t n_samples, std::size_t k, Rng& rng);

struct TrialSplit {
    std::set<long> train, val, test;
};

// test = trials of test_fold; validation takes ceil(val_fraction * remaining)
// of the rest by seeded choice; the three sets partition all trials.
TrialSplit split_train_val_test(const FoldPlan& plan, std::size_t test_fold,
                                double val_fraction, Rng& rng);

// Per-channel z-score statistics fitted from training windows only.
struct NormStats {
    std::vector<double> mean, stddev; // length N; stddev < 1e-8 uses divisor 1
};

NormStats fit_norm(const std::vector<Sample>& train);
void apply_norm(const NormStats& stats, std::vector<Sample>& samples);

void serialize_fold_plan(const FoldPlan& plan, const std::string& path);

}  // namespace har
