#pragma once

#include "cbsim/behavior.hpp"
#include "cbsim/calibration.hpp"
#include "cbsim/network.hpp"
#include "cbsim/series.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace cbsim {

struct InputFile {
    std::string path;  // as written in the config; empty if unused
    std::string date_column = "date";
    std::string value_column = "value";
    friend bool operator==(const InputFile&, const InputFile&) = default;
};

enum class AbcMethod { smc, rejection };

struct AbcSettings {
    AbcMethod method = AbcMethod::smc;
    // ABC-SMC
    std::size_t pop_size = 500;
    std::vector<double> schedule;  // empty: adaptive
    double keep_fraction = 0.3;
    std::size_t stages = 4;
    std::size_t max_sims_per_particle = 200;
    // rejection
    std::size_t draws = 2000;
    std::optional<double> epsilon;
    double quantile = 0.1;
    friend bool operator==(const AbcSettings&, const AbcSettings&) = default;
};

/// Parsed run configuration.
///
/// Grammar: one `key = value` per line; `#` starts a comment; blank lines are
/// ignored; unknown or repeated keys are errors. Prior ranges are written
/// `prior.<param> = lo hi` (or a single value to pin).
struct RunConfig {
    InputFile cases{"", "date", "cases"};
    InputFile search{"", "date", "search"};
    InputFile rt{"", "date", "rt"};
    InputFile survey{"", "date", "pct_worried"};
    StudyWindow window{};

    NetworkKind network = WattsStrogatz{10, 0.1};
    std::size_t agents = 2000;
    std::string network_edges;  // optional edge-list CSV replacing generation

    PriorSpec prior = PriorSpec::defaults();
    AbcSettings abc{};
    std::size_t predictive_draws = 200;

    std::optional<std::uint64_t> seed;
    int threads = 1;
    std::string out_dir = "out";
    FillPolicy fill_cases = FillPolicy::zero;
    FillPolicy fill_search = FillPolicy::previous;
    bool smooth_search = false;
    std::string synthetic_truth;  // params file; when set, calibrate fits synthetic data
    Date rt_split = iso_date("2020-04-23");

    /// Directory relative paths are resolved against (the config file's directory).
    std::filesystem::path base_dir = ".";

    std::filesystem::path resolve(const std::string& p) const;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = ".");

/// Parses and checks that every referenced input file exists.
RunConfig load_config(const std::filesystem::path& path);

/// Canonical text; parse_config(to_text(c), c.base_dir) == c.
std::string to_text(const RunConfig& config);

/// Canonical text without execution-only keys (threads, out_dir): the part
/// that determines results.
std::string result_text(const RunConfig& config);

/// Throws std::invalid_argument on any inconsistency (prior, ABC settings, window, network).
void validate(const RunConfig& config);

/// Ensures all referenced files exist; throws std::runtime_error naming the path.
void check_inputs_exist(const RunConfig& config);

std::uint64_t require_seed(const RunConfig& config);

/// `name = value` lines for all twelve parameters.
ModelParams parse_params(std::string_view text, const std::string& origin = "params");
ModelParams load_params(const std::filesystem::path& path);
std::string to_text(const ModelParams& params);

/// 64-bit FNV-1a, rendered as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);
std::string file_hash(const std::filesystem::path& path);

/// Independent sub-seeds derived from the one top-level seed.
enum class SeedRole : std::uint64_t { network = 1, truth = 2, abc = 3, predictive = 4, simulate = 5 };
std::uint64_t derive_seed(std::uint64_t seed, SeedRole role);

}  // namespace cbsim
