#include "nextpm/calendar.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace nextpm {

SetupCostCalendar SetupCostCalendar::constant(int horizon, double value) {
    if (horizon < 0) throw std::invalid_argument("calendar horizon must be >= 0");
    if (value < 0.0) throw std::invalid_argument("set-up cost must be >= 0");
    SetupCostCalendar cal;
    cal.values_.assign(static_cast<std::size_t>(horizon), value);
    // Constant calendars extend as constants even for T = 0.
    cal.pattern_ = Pattern{};
    cal.pattern_->fill(value);
    return cal;
}

SetupCostCalendar SetupCostCalendar::from_values(std::vector<double> values) {
    for (double v : values)
        if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("set-up costs must be finite and >= 0");
    SetupCostCalendar cal;
    cal.values_ = std::move(values);
    return cal;
}

SetupCostCalendar SetupCostCalendar::from_pattern(const Pattern& pattern, int horizon, int start) {
    if (horizon < 0) throw std::invalid_argument("calendar horizon must be >= 0");
    for (double v : pattern)
        if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("set-up costs must be finite and >= 0");
    SetupCostCalendar cal;
    cal.pattern_ = pattern;
    cal.start_ = ((start % 12) + 12) % 12;
    cal.values_.resize(static_cast<std::size_t>(horizon));
    for (int t = 1; t <= horizon; ++t) cal.values_[t - 1] = pattern[(cal.start_ + t - 1) % 12];
    return cal;
}

double SetupCostCalendar::month(long t) const {
    if (t < 1) t = 1;
    if (t <= horizon()) return values_[static_cast<std::size_t>(t - 1)];
    if (pattern_) return (*pattern_)[static_cast<std::size_t>((start_ + t - 1) % 12)];
    if (values_.empty()) return 0.0;
    return values_.back();
}

double SetupCostCalendar::at(double t) const {
    return month(static_cast<long>(std::ceil(t)));
}

double SetupCostCalendar::mean() const {
    if (values_.empty()) return 0.0;
    return std::accumulate(values_.begin(), values_.end(), 0.0) / static_cast<double>(values_.size());
}

SetupCostCalendar SetupCostCalendar::scaled(double factor) const {
    SetupCostCalendar out = *this;
    for (auto& v : out.values_) v *= factor;
    if (out.pattern_)
        for (auto& v : *out.pattern_) v *= factor;
    return out;
}

}  // namespace nextpm
