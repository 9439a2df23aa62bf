#include "har/synth.hpp"

#include <cmath>
#include <numbers>

#include "har/errors.hpp"

namespace har {

std::string to_string(TaskFamily f) {
    return f == TaskFamily::Separable ? "separable" : "long_range";
}

TaskFamily task_family_from_string(const std::string& s) {
    if (s == "separable") return TaskFamily::Separable;
    if (s == "long_range") return TaskFamily::LongRange;
    throw ConfigError("unknown task family '" + s + "' (expected separable|long_range)");
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Base period of the class sinusoids, in time points.
constexpr double kBasePeriod = 32.0;

void fill_separable(const SynthSpec& spec, std::size_t cls, Trial& trial, Rng& rng) {
    const double phase = rng.uniform(0.0, kBasePeriod);
    const double freq = static_cast<double>(cls + 1);
    for (std::size_t t = 0; t < spec.length; ++t)
        for (std::size_t n = 0; n < spec.channels; ++n) {
            const double channel_phase =
                kTwoPi * static_cast<double>(n) / static_cast<double>(spec.channels);
            double v = std::sin(kTwoPi * freq * (static_cast<double>(t) + phase) / kBasePeriod +
                                channel_phase);
            if (spec.noise > 0.0) v += spec.noise * rng.normal();
            trial.series(t, n) = v;
        }
}

// Class-specific chirp written over a class-identical background.
double marker_value(std::size_t cls, std::size_t j, std::size_t marker_len) {
    return std::cos(std::numbers::pi * static_cast<double>(cls + 1) *
                    (static_cast<double>(j) + 0.5) / static_cast<double>(marker_len));
}

void fill_long_range(const SynthSpec& spec, std::size_t cls, Trial& trial, Rng& rng) {
    for (std::size_t t = 0; t < spec.length; ++t)
        for (std::size_t n = 0; n < spec.channels; ++n) {
            double v = 0.25 * std::sin(kTwoPi * static_cast<double>(t) / 16.0);
            if (spec.noise > 0.0) v += spec.noise * rng.normal();
            trial.series(t, n) = v;
        }
    if (spec.marker_len > spec.length)
        throw ConfigError("synth_trials: marker longer than the trial");
    const std::size_t pos = rng.below(spec.length - spec.marker_len + 1);
    for (std::size_t j = 0; j < spec.marker_len; ++j) {
        const double m = spec.marker_amp * marker_value(cls, j, spec.marker_len);
        for (std::size_t n = 0; n < spec.channels; ++n) trial.series(pos + j, n) += m;
    }
}

}  // namespace

std::vector<Trial> synth_trials(const SynthSpec& spec, Rng& rng) {
    if (spec.classes < 1 || spec.subjects < 1 || spec.trials_per_class < 1 ||
        spec.length < 1 || spec.channels < 1)
        throw ConfigError("synth_trials: all counts must be >= 1");
    std::vector<Trial> trials;
    trials.reserve(spec.classes * spec.trials_per_class);
    long next_id = 0;
    for (std::size_t cls = 0; cls < spec.classes; ++cls) {
        for (std::size_t i = 0; i < spec.trials_per_class; ++i) {
            Trial trial;
            trial.trial_id = next_id++;
            trial.subject_id = static_cast<long>(trial.trial_id % static_cast<long>(spec.subjects));
            trial.label = cls;
            trial.series = Matrix(spec.length, spec.channels);
            if (spec.family == TaskFamily::Separable)
                fill_separable(spec, cls, trial, rng);
            else
                fill_long_range(spec, cls, trial, rng);
            trials.push_back(std::move(trial));
        }
    }
    return trials;
}

}  // namespace har
