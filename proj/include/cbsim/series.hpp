#pragma once

#include "cbsim/date.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cbsim {

/// Gapless daily series: values[k] belongs to start + k days. All values finite.
class DailySeries {
public:
    DailySeries() = default;
    DailySeries(Date start, std::vector<double> values, std::string label = {});

    Date start() const noexcept { return start_; }
    Date last() const noexcept { return add_days(start_, static_cast<long>(values_.size()) - 1); }
    Date date_at(std::size_t k) const noexcept { return add_days(start_, static_cast<long>(k)); }
    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }
    const std::vector<double>& values() const noexcept { return values_; }
    double operator[](std::size_t k) const noexcept { return values_[k]; }
    const std::string& label() const noexcept { return label_; }

    std::optional<std::size_t> index_of(Date d) const noexcept;

    /// Inclusive sub-range; throws std::out_of_range if either end is outside.
    DailySeries slice(Date first, Date last) const;

    friend bool operator==(const DailySeries&, const DailySeries&) = default;

private:
    Date start_{};
    std::vector<double> values_;
    std::string label_;
};

/// Normalized hazard input: a DailySeries whose values lie in [0, 1].
class ExternalSignal {
public:
    ExternalSignal() = default;
    /// Throws std::invalid_argument unless every value is in [0, 1].
    explicit ExternalSignal(DailySeries series);

    const DailySeries& series() const noexcept { return series_; }
    std::size_t size() const noexcept { return series_.size(); }
    double operator[](std::size_t k) const noexcept { return series_[k]; }

private:
    DailySeries series_;
};

struct StudyWindow {
    Date first = iso_date("2020-01-31");
    Date last = iso_date("2020-06-28");

    bool contains(Date d) const noexcept { return d >= first && d <= last; }
    long days() const noexcept { return days_between(first, last) + 1; }
    friend bool operator==(const StudyWindow&, const StudyWindow&) = default;
};

/// How days absent from an input file are filled. `none` makes a gap an error.
enum class FillPolicy { zero, previous, none };

FillPolicy parse_fill_policy(std::string_view text);
std::string_view to_string(FillPolicy policy);

/// Loads a header-row CSV with ISO dates. Lines before the header (the first
/// row containing `date_column`) are skipped. Rows outside `window` are
/// dropped; interior gaps are filled per `fill`. Duplicate dates, unparseable
/// rows and non-finite values raise DataError with the offending line.
DailySeries load_daily_csv(const std::filesystem::path& path, std::string_view date_column,
                           std::string_view value_column, const StudyWindow& window, FillPolicy fill,
                           std::string label = {});

/// Same as load_daily_csv, plus every value must be > 0.
DailySeries load_rt_csv(const std::filesystem::path& path, std::string_view date_column,
                        std::string_view value_column, const StudyWindow& window);

/// (v - min) / (max - min); a constant input maps to all zeros.
std::vector<double> min_max(std::span<const double> values);
ExternalSignal min_max_normalize(const DailySeries& series);

/// Centered moving average over `width` days (odd); the window is truncated
/// at the series ends.
DailySeries smooth_centered(const DailySeries& series, int width = 7);

struct SurveyPoint {
    Date date;
    double pct_worried = 0.0;  // percent in (0, 100]
    friend bool operator==(const SurveyPoint&, const SurveyPoint&) = default;
};

/// Sparse survey rounds and their min-max normalized log-percentages.
struct SurveySeries {
    std::vector<SurveyPoint> points;
    std::vector<double> transformed;
};

/// ln(pct), then min-max across the points. Throws std::invalid_argument for
/// pct outside (0, 100] or dates that are not strictly increasing.
SurveySeries transform_survey(std::vector<SurveyPoint> points);

std::vector<SurveyPoint> load_survey_csv(const std::filesystem::path& path, std::string_view date_column,
                                         std::string_view pct_column);

/// "date,value" with a header row.
void write_series_csv(std::ostream& out, const DailySeries& series);
void write_series_csv(const std::filesystem::path& path, const DailySeries& series);

/// Two-column file written by write_series_csv, read back without windowing.
DailySeries read_series_csv(const std::filesystem::path& path);

}  // namespace cbsim
