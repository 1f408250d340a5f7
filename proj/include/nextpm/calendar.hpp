#pragma once

#include <array>
#include <optional>
#include <vector>

namespace nextpm {

/// Set-up cost d_t (kUSD) for months t = 1..T.
///
/// Continuous times are looked up as d_{ceil(t)}; d_0 and anything below map to
/// d_1. Months beyond T continue the 12-month template when the calendar was
/// built from one, and repeat d_T otherwise.
class SetupCostCalendar {
public:
    using Pattern = std::array<double, 12>;

    SetupCostCalendar() = default;

    static SetupCostCalendar constant(int horizon, double value);
    static SetupCostCalendar from_values(std::vector<double> values);
    /// d_t = pattern[(start + t - 1) mod 12].
    static SetupCostCalendar from_pattern(const Pattern& pattern, int horizon, int start = 0);

    int horizon() const { return static_cast<int>(values_.size()); }
    const std::vector<double>& values() const { return values_; }
    const std::optional<Pattern>& pattern() const { return pattern_; }
    int pattern_start() const { return start_; }

    double month(long t) const;
    double at(double t) const;

    /// (d_1 + ... + d_T) / T
    double mean() const;

    SetupCostCalendar scaled(double factor) const;

private:
    std::vector<double> values_;
    std::optional<Pattern> pattern_;
    int start_ = 0;
};

/// Monthly template used by the seasonal studies, January first (mean 5).
inline constexpr SetupCostCalendar::Pattern kSeasonalPattern = {
    7.5, 6.5, 5.5, 4.5, 3.5, 2.5, 2.5, 3.5, 4.5, 5.5, 6.5, 7.5};

/// Template offsets for month t = 1.
inline constexpr int kWinterStart = 0;  // January
inline constexpr int kSummerStart = 6;  // July

}  // namespace nextpm
