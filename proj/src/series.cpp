#include "cbsim/series.hpp"

#include "cbsim/csv.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>

namespace cbsim {

DailySeries::DailySeries(Date start, std::vector<double> values, std::string label)
    : start_(start), values_(std::move(values)), label_(std::move(label))
{
    for (std::size_t k = 0; k < values_.size(); ++k)
        if (!std::isfinite(values_[k]))
            throw std::invalid_argument("series '" + label_ + "' has a non-finite value on " +
                                        format_iso_date(date_at(k)));
}

std::optional<std::size_t> DailySeries::index_of(Date d) const noexcept
{
    const auto k = days_between(start_, d);
    if (k < 0 || static_cast<std::size_t>(k) >= values_.size()) return std::nullopt;
    return static_cast<std::size_t>(k);
}

DailySeries DailySeries::slice(Date first, Date last) const
{
    const auto a = index_of(first);
    const auto b = index_of(last);
    if (!a || !b || *a > *b)
        throw std::out_of_range("slice " + format_iso_date(first) + ".." + format_iso_date(last) +
                                " outside series '" + label_ + "'");
    return DailySeries(first, {values_.begin() + static_cast<std::ptrdiff_t>(*a),
                               values_.begin() + static_cast<std::ptrdiff_t>(*b) + 1},
                       label_);
}

ExternalSignal::ExternalSignal(DailySeries series) : series_(std::move(series))
{
    for (std::size_t k = 0; k < series_.size(); ++k)
        if (series_[k] < 0.0 || series_[k] > 1.0)
            throw std::invalid_argument("external signal value " + std::to_string(series_[k]) + " on " +
                                        format_iso_date(series_.date_at(k)) + " outside [0,1]");
}

FillPolicy parse_fill_policy(std::string_view text)
{
    if (text == "zero") return FillPolicy::zero;
    if (text == "previous") return FillPolicy::previous;
    if (text == "none") return FillPolicy::none;
    throw std::invalid_argument("unknown fill policy '" + std::string(text) + "' (expected zero|previous|none)");
}

std::string_view to_string(FillPolicy policy)
{
    switch (policy) {
    case FillPolicy::zero: return "zero";
    case FillPolicy::previous: return "previous";
    case FillPolicy::none: return "none";
    }
    return "none";
}

DailySeries load_daily_csv(const std::filesystem::path& path, std::string_view date_column,
                           std::string_view value_column, const StudyWindow& window, FillPolicy fill,
                           std::string label)
{
    if (!std::filesystem::exists(path)) throw std::runtime_error("input file not found: " + path.string());
    const auto rows = read_csv_rows(path);

    std::size_t header = rows.size();
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (std::find(rows[r].fields.begin(), rows[r].fields.end(), date_column) != rows[r].fields.end()) {
            header = r;
            break;
        }
    }
    if (header == rows.size())
        throw std::runtime_error(path.string() + ": no header row containing column '" + std::string(date_column) +
                                 "'");
    const auto& names = rows[header].fields;
    const auto date_idx = static_cast<std::size_t>(std::find(names.begin(), names.end(), date_column) - names.begin());
    const auto value_it = std::find(names.begin(), names.end(), value_column);
    if (value_it == names.end())
        throw DataError(path, rows[header].line, "missing column '" + std::string(value_column) + "'");
    const auto value_idx = static_cast<std::size_t>(value_it - names.begin());

    std::map<Date, double> by_date;
    std::map<Date, std::size_t> line_of;
    for (std::size_t r = header + 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.fields.size() <= std::max(date_idx, value_idx))
            throw DataError(path, row.line, "too few columns");
        const auto date = parse_iso_date(row.fields[date_idx]);
        if (!date) throw DataError(path, row.line, "unparseable date '" + row.fields[date_idx] + "'");
        const double v = parse_double(row.fields[value_idx], path, row.line);
        if (!std::isfinite(v)) throw DataError(path, row.line, "non-finite value");
        if (auto prev = line_of.find(*date); prev != line_of.end())
            throw DataError(path, row.line,
                            "duplicate date " + format_iso_date(*date) + " (first seen on line " +
                                std::to_string(prev->second) + ")");
        line_of.emplace(*date, row.line);
        if (window.contains(*date)) by_date.emplace(*date, v);
    }
    if (by_date.empty())
        throw std::runtime_error(path.string() + ": no rows inside window " + format_iso_date(window.first) + ".." +
                                 format_iso_date(window.last));

    const Date start = by_date.begin()->first;
    const Date last = by_date.rbegin()->first;
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(days_between(start, last) + 1));
    for (Date d = start; d <= last; d = add_days(d, 1)) {
        if (auto it = by_date.find(d); it != by_date.end()) {
            values.push_back(it->second);
            continue;
        }
        switch (fill) {
        case FillPolicy::zero: values.push_back(0.0); break;
        case FillPolicy::previous: values.push_back(values.back()); break;
        case FillPolicy::none:
            throw std::runtime_error(path.string() + ": missing day " + format_iso_date(d) +
                                     " and fill policy is 'none'");
        }
    }
    if (label.empty()) label = std::string(value_column);
    return DailySeries(start, std::move(values), std::move(label));
}

DailySeries load_rt_csv(const std::filesystem::path& path, std::string_view date_column,
                        std::string_view value_column, const StudyWindow& window)
{
    auto series = load_daily_csv(path, date_column, value_column, window, FillPolicy::none, "rt");
    for (std::size_t k = 0; k < series.size(); ++k)
        if (series[k] <= 0.0)
            throw std::runtime_error(path.string() + ": R_t must be positive, got " + std::to_string(series[k]) +
                                     " on " + format_iso_date(series.date_at(k)));
    return series;
}

std::vector<double> min_max(std::span<const double> values)
{
    std::vector<double> out(values.size(), 0.0);
    if (values.empty()) return out;
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    const double range = *hi - *lo;
    if (!(range > 0.0)) return out;
    for (std::size_t k = 0; k < values.size(); ++k) out[k] = std::clamp((values[k] - *lo) / range, 0.0, 1.0);
    return out;
}

ExternalSignal min_max_normalize(const DailySeries& series)
{
    if (series.empty()) throw std::invalid_argument("cannot normalize an empty series");
    return ExternalSignal(DailySeries(series.start(), min_max(series.values()), series.label()));
}

DailySeries smooth_centered(const DailySeries& series, int width)
{
    if (width < 1 || width % 2 == 0) throw std::invalid_argument("smoothing width must be odd and positive");
    const auto half = static_cast<std::ptrdiff_t>(width / 2);
    const auto n = static_cast<std::ptrdiff_t>(series.size());
    std::vector<double> out(series.size());
    for (std::ptrdiff_t k = 0; k < n; ++k) {
        const auto a = std::max<std::ptrdiff_t>(0, k - half);
        const auto b = std::min<std::ptrdiff_t>(n - 1, k + half);
        double sum = 0.0;
        for (auto j = a; j <= b; ++j) sum += series[static_cast<std::size_t>(j)];
        out[static_cast<std::size_t>(k)] = sum / static_cast<double>(b - a + 1);
    }
    return DailySeries(series.start(), std::move(out), series.label());
}

SurveySeries transform_survey(std::vector<SurveyPoint> points)
{
    std::vector<double> logs;
    logs.reserve(points.size());
    for (std::size_t k = 0; k < points.size(); ++k) {
        const double pct = points[k].pct_worried;
        if (!std::isfinite(pct) || pct <= 0.0 || pct > 100.0)
            throw std::invalid_argument("survey percentage " + std::to_string(pct) + " on " +
                                        format_iso_date(points[k].date) + " outside (0, 100]");
        if (k > 0 && points[k].date <= points[k - 1].date)
            throw std::invalid_argument("survey dates must be strictly increasing (" +
                                        format_iso_date(points[k].date) + ")");
        logs.push_back(std::log(pct));
    }
    auto transformed = min_max(logs);
    return {std::move(points), std::move(transformed)};
}

std::vector<SurveyPoint> load_survey_csv(const std::filesystem::path& path, std::string_view date_column,
                                         std::string_view pct_column)
{
    if (!std::filesystem::exists(path)) throw std::runtime_error("input file not found: " + path.string());
    const auto rows = read_csv_rows(path);
    if (rows.empty()) throw std::runtime_error(path.string() + ": empty file");
    const auto& names = rows.front().fields;
    const auto d = std::find(names.begin(), names.end(), date_column);
    const auto p = std::find(names.begin(), names.end(), pct_column);
    if (d == names.end() || p == names.end())
        throw DataError(path, rows.front().line,
                        "header must contain '" + std::string(date_column) + "' and '" + std::string(pct_column) + "'");
    const auto di = static_cast<std::size_t>(d - names.begin());
    const auto pi = static_cast<std::size_t>(p - names.begin());
    std::vector<SurveyPoint> points;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.fields.size() <= std::max(di, pi)) throw DataError(path, row.line, "too few columns");
        const auto date = parse_iso_date(row.fields[di]);
        if (!date) throw DataError(path, row.line, "unparseable date '" + row.fields[di] + "'");
        const double pct = parse_double(row.fields[pi], path, row.line);
        if (!std::isfinite(pct) || pct <= 0.0 || pct > 100.0)
            throw DataError(path, row.line, "percentage must lie in (0, 100]");
        if (!points.empty() && *date <= points.back().date)
            throw DataError(path, row.line, "survey dates must be strictly increasing");
        points.push_back({*date, pct});
    }
    return points;
}

void write_series_csv(std::ostream& out, const DailySeries& series)
{
    out << "date,value\n";
    for (std::size_t k = 0; k < series.size(); ++k)
        out << format_iso_date(series.date_at(k)) << ',' << format_double(series[k]) << '\n';
}

void write_series_csv(const std::filesystem::path& path, const DailySeries& series)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    write_series_csv(out, series);
}

DailySeries read_series_csv(const std::filesystem::path& path)
{
    const StudyWindow everything{iso_date("0001-01-01"), iso_date("9999-12-31")};
    return load_daily_csv(path, "date", "value", everything, FillPolicy::none);
}

}  // namespace cbsim
