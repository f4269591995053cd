#include "cbsim/rng.hpp"

#include <boost/random/normal_distribution.hpp>

#include <limits>

namespace cbsim {

namespace {

// Uniform random bit generator reading stream_draw(key, first), (key, first + 1), ...
class CounterEngine {
public:
    using result_type = std::uint64_t;
    CounterEngine(std::uint64_t key, std::uint64_t first) noexcept : key_(key), counter_(first) {}
    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }
    result_type operator()() noexcept { return stream_draw(key_, counter_++); }

private:
    std::uint64_t key_;
    std::uint64_t counter_;
};

// Counters per day. The ziggurat almost always uses one draw; running past
// the block would take ~2^20 consecutive rejections.
constexpr int kDayShift = 20;

}  // namespace

double standard_normal(std::uint64_t key, std::uint64_t day) noexcept
{
    CounterEngine engine(key, day << kDayShift);
    return boost::random::normal_distribution<double>(0.0, 1.0)(engine);
}

}  // namespace cbsim
