#pragma once

#include "cbsim/engine.hpp"
#include "cbsim/series.hpp"

#include <cstdint>
#include <span>

namespace cbsim {

/// Fraction of days with lo <= obs <= hi (inclusive). obs and bands must
/// cover exactly the same dates.
double coverage_fraction(const DailySeries& obs, const SummaryBands& bands);

struct SurveyCapture {
    std::size_t inside = 0;
    std::size_t total = 0;
};

/// Survey points whose transformed value lies inside the band on their date.
/// Throws std::out_of_range for a survey date outside the band dates.
SurveyCapture survey_capture(const SurveySeries& survey, const SummaryBands& perception);

struct Correlation {
    double r = 0.0;
    double p_value = 1.0;
    std::size_t n = 0;
};

/// Sample Pearson r with a two-sided p-value from Student's t, n - 2 df.
/// Needs n >= 3 and both inputs non-constant.
Correlation pearson(std::span<const double> x, std::span<const double> y);

/// Pearson over the dates both series cover. Throws if they do not overlap
/// on at least 3 days.
Correlation pearson(const DailySeries& x, const DailySeries& y);

/// Two-sided permutation p-value for r, for cross-checking the t-based value.
double pearson_permutation_p(std::span<const double> x, std::span<const double> y, std::size_t permutations,
                             std::uint64_t seed);

}  // namespace cbsim
