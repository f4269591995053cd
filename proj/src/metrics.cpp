#include "cbsim/metrics.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace cbsim {

namespace {

double sample_r(std::span<const double> x, std::span<const double> y)
{
    const auto n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (!(sxx > 0.0) || !(syy > 0.0)) throw std::invalid_argument("pearson: constant series, r is undefined");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace

double coverage_fraction(const DailySeries& obs, const SummaryBands& bands)
{
    if (obs.start() != bands.start || obs.size() != bands.size())
        throw std::invalid_argument("coverage: observed series " + format_iso_date(obs.start()) + " (" +
                                    std::to_string(obs.size()) + " days) is not aligned with bands " +
                                    format_iso_date(bands.start) + " (" + std::to_string(bands.size()) + " days)");
    if (obs.empty()) throw std::invalid_argument("coverage: empty series");
    std::size_t inside = 0;
    for (std::size_t k = 0; k < obs.size(); ++k)
        if (bands.lo[k] <= obs[k] && obs[k] <= bands.hi[k]) ++inside;
    return static_cast<double>(inside) / static_cast<double>(obs.size());
}

SurveyCapture survey_capture(const SurveySeries& survey, const SummaryBands& perception)
{
    SurveyCapture out;
    out.total = survey.points.size();
    for (std::size_t i = 0; i < survey.points.size(); ++i) {
        const auto k = days_between(perception.start, survey.points[i].date);
        if (k < 0 || static_cast<std::size_t>(k) >= perception.size())
            throw std::out_of_range("survey date " + format_iso_date(survey.points[i].date) +
                                    " outside the simulated window");
        const auto d = static_cast<std::size_t>(k);
        const double v = survey.transformed[i];
        if (perception.lo[d] <= v && v <= perception.hi[d]) ++out.inside;
    }
    return out;
}

Correlation pearson(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size()) throw std::invalid_argument("pearson: series lengths differ");
    if (x.size() < 3) throw std::invalid_argument("pearson: need at least 3 paired values");
    Correlation c;
    c.n = x.size();
    c.r = sample_r(x, y);
    const double df = static_cast<double>(c.n - 2);
    if (std::abs(c.r) >= 1.0) {
        c.p_value = 0.0;
        return c;
    }
    const double t = c.r * std::sqrt(df / (1.0 - c.r * c.r));
    const boost::math::students_t dist(df);
    c.p_value = std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))), 0.0, 1.0);
    return c;
}

Correlation pearson(const DailySeries& x, const DailySeries& y)
{
    const Date first = std::max(x.start(), y.start());
    const Date last = std::min(x.last(), y.last());
    if (x.empty() || y.empty() || days_between(first, last) + 1 < 3)
        throw std::invalid_argument("pearson: series overlap on fewer than 3 days");
    const auto xs = x.slice(first, last);
    const auto ys = y.slice(first, last);
    return pearson(xs.values(), ys.values());
}

double pearson_permutation_p(std::span<const double> x, std::span<const double> y, std::size_t permutations,
                             std::uint64_t seed)
{
    const double observed = std::abs(pearson(x, y).r);
    std::vector<double> shuffled(y.begin(), y.end());
    std::mt19937_64 rng(seed);
    std::size_t extreme = 0;
    for (std::size_t i = 0; i < permutations; ++i) {
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        if (std::abs(sample_r(x, shuffled)) >= observed - 1e-12) ++extreme;
    }
    return static_cast<double>(extreme + 1) / static_cast<double>(permutations + 1);
}

}  // namespace cbsim
