#pragma once

#include "cbsim/calibration.hpp"
#include "cbsim/config.hpp"
#include "cbsim/engine.hpp"
#include "cbsim/metrics.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>

namespace cbsim {

/// Normalized daily new cases over the study window.
ExternalSignal load_signal(const RunConfig& config);

/// Search interest (optionally smoothed) restricted to the signal's dates and
/// min-max normalized. Throws if the file does not cover those dates.
DailySeries load_observed_search(const RunConfig& config, const ExternalSignal& signal);

SocialNetwork build_network(const RunConfig& config);

/// Deterministic two-wave daily case counts, used for synthetic experiments
/// and the bundled demo data.
DailySeries two_wave_cases(Date start, std::size_t days);

struct SimulateOptions {
    std::size_t replicates = 1;  // >= 2 also writes noise-only bands
    bool dump_draws = false;
};

/// Writes trajectory.csv, one <channel>.csv per channel, signal.csv and
/// simulate.json into config.out_dir.
void cmd_simulate(const RunConfig& config, const std::filesystem::path& params_file,
                  const SimulateOptions& options = {});

struct CalibrateOptions {
    bool dump_draws = false;
};

/// Fits the behaviour channel; writes posterior.csv, bands/<channel>.csv,
/// bands/mean_behaviour.csv, observed_search.csv, signal.csv and
/// calibration.json. With synthetic_truth set, also recovery.json.
PosteriorEnsemble cmd_calibrate(const RunConfig& config, const CalibrateOptions& options = {});

struct PearsonWindow {
    std::string name;
    Date first{};
    Date last{};
    std::optional<Correlation> raw;         // median mean behaviour
    std::optional<Correlation> normalized;  // median of the behaviour channel band
};

struct ValidationReport {
    double coverage = 0.0;
    std::optional<SurveyCapture> survey;
    std::vector<PearsonWindow> pearson;  // first entry is the full overlap
    Date first{};
    Date last{};
    std::string config_hash;
};

/// Reads bands from `bands_dir` and writes validation.json into config.out_dir.
ValidationReport cmd_validate(const RunConfig& config, const std::filesystem::path& bands_dir);

/// Human-readable summary of whatever artifacts exist in `out_dir`.
void cmd_report(const std::filesystem::path& out_dir, std::ostream& out);

}  // namespace cbsim
