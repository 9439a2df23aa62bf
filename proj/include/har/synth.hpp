#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "har/data.hpp"
#include "har/rng.hpp"

namespace har {

enum class TaskFamily {
    // Distinct per-class sinusoid frequency per channel plus noise;
    // learnable from any single window.
    Separable,
    // Class identity carried only by a short marker pattern placed at a
    // random time point inside an otherwise class-identical noisy signal.
    LongRange,
};

std::string to_string(TaskFamily f);
TaskFamily task_family_from_string(const std::string& s);

struct SynthSpec {
    TaskFamily family = TaskFamily::Separable;
    std::size_t classes = 3;
    std::size_t subjects = 5;
    std::size_t trials_per_class = 10;
    std::size_t length = 128;   // L
    std::size_t channels = 3;   // N
    double noise = 0.1;
    double marker_amp = 2.0;    // LongRange only
    std::size_t marker_len = 6; // LongRange only
};

std::vector<Trial> synth_trials(const SynthSpec& spec, Rng& rng);

}  // namespace har
