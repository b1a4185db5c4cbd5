#pragma once

#include <geosched/errors.hpp>

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

namespace geosched {

/// Seconds since the Unix epoch. All series in a scenario share one uniform
/// step (default 1 hour), so timestamps are always start + i * step.
using Timestamp = std::int64_t;

constexpr Timestamp kSecondsPerHour = 3600;

namespace detail {

// Days-from-civil / civil-from-days (proleptic Gregorian).
inline std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yy + (m <= 2));
}

} // namespace detail

/// Parses a strict ISO-8601 UTC timestamp, "YYYY-MM-DDTHH:MM:SSZ".
inline Timestamp parse_iso8601(const std::string& s) {
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, se = 0;
    char tail = 0;
    if (std::sscanf(s.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%c", &y, &mo, &d, &h, &mi, &se, &tail) != 7 ||
        tail != 'Z' || mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || se > 60) {
        throw TraceError("malformed ISO-8601 timestamp: '" + s + "'");
    }
    return detail::days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + se;
}

inline std::string format_iso8601(Timestamp t) {
    std::int64_t days = t / 86400;
    std::int64_t rem = t % 86400;
    if (rem < 0) {
        rem += 86400;
        --days;
    }
    int y, m, d;
    detail::civil_from_days(days, y, m, d);
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", y, m, d,
                  static_cast<int>(rem / 3600), static_cast<int>(rem % 3600 / 60),
                  static_cast<int>(rem % 60));
    return buf;
}

/// Uniformly spaced time series {x_t : t in T}. The index is strictly
/// increasing by construction: timestamp i equals start + i * step.
template <typename T>
class TimeSeries {
public:
    TimeSeries() : start_(0), step_(kSecondsPerHour) {}

    TimeSeries(Timestamp start, Timestamp step, std::vector<T> values)
        : start_(start), step_(step), values_(std::move(values)) {
        if (step_ <= 0) throw Error("time series step must be positive");
    }

    /// Validating constructor from an explicit index, which must be uniform
    /// and strictly increasing.
    TimeSeries(const std::vector<Timestamp>& index, std::vector<T> values)
        : start_(index.empty() ? 0 : index.front()), step_(kSecondsPerHour), values_(std::move(values)) {
        if (index.size() != values_.size())
            throw Error("time series index and values differ in length");
        if (index.size() >= 2) {
            step_ = index[1] - index[0];
            if (step_ <= 0) throw Error("time series index must be strictly increasing");
            for (std::size_t i = 1; i < index.size(); ++i) {
                if (index[i] - index[i - 1] != step_)
                    throw Error("time series index must be uniformly spaced");
            }
        }
    }

    std::size_t size() const { return values_.size(); }
    bool empty() const { return values_.empty(); }
    Timestamp start() const { return start_; }
    Timestamp step() const { return step_; }
    /// One step past the last timestamp.
    Timestamp end() const { return start_ + static_cast<Timestamp>(values_.size()) * step_; }

    Timestamp timestamp_at(std::size_t i) const { return start_ + static_cast<Timestamp>(i) * step_; }

    bool contains(Timestamp t) const {
        return t >= start_ && t < end() && (t - start_) % step_ == 0;
    }

    std::size_t index_of(Timestamp t) const {
        if (!contains(t)) throw WindowError("timestamp " + format_iso8601(t) + " outside series");
        return static_cast<std::size_t>((t - start_) / step_);
    }

    const T& at(Timestamp t) const { return values_[index_of(t)]; }
    const T& operator[](std::size_t i) const { return values_[i]; }
    T& operator[](std::size_t i) { return values_[i]; }

    const std::vector<T>& values() const { return values_; }

    std::vector<Timestamp> index() const {
        std::vector<Timestamp> out;
        out.reserve(values_.size());
        for (std::size_t i = 0; i < values_.size(); ++i) out.push_back(timestamp_at(i));
        return out;
    }

    /// Copy of the [t0, t0 + n*step) sub-series.
    TimeSeries<T> slice(Timestamp t0, std::size_t n) const {
        std::size_t first = index_of(t0);
        if (first + n > values_.size()) throw WindowError("slice extends past series end");
        return TimeSeries<T>(t0, step_, std::vector<T>(values_.begin() + first, values_.begin() + first + n));
    }

    bool operator==(const TimeSeries<T>& o) const {
        return start_ == o.start_ && step_ == o.step_ && values_ == o.values_;
    }

private:
    Timestamp start_;
    Timestamp step_;
    std::vector<T> values_;
};

/// The planning horizon: `length` steps starting at `start`.
struct ForecastWindow {
    Timestamp start = 0;
    Timestamp step = kSecondsPerHour;
    int length = 12;

    Timestamp end() const { return start + static_cast<Timestamp>(length) * step; }
    Timestamp timestamp_at(int i) const { return start + static_cast<Timestamp>(i) * step; }

    bool contains(Timestamp t) const {
        return t >= start && t < end() && (t - start) % step == 0;
    }

    int index_of(Timestamp t) const {
        if (!contains(t)) throw WindowError("timestamp " + format_iso8601(t) + " outside window");
        return static_cast<int>((t - start) / step);
    }

    double step_hours() const { return static_cast<double>(step) / kSecondsPerHour; }

    bool operator==(const ForecastWindow&) const = default;

    void validate() const {
        if (length < 1) throw Error("forecast window length must be >= 1");
        if (step <= 0) throw Error("forecast window step must be positive");
    }
};

} // namespace geosched
