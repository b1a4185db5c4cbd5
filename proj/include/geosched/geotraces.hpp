#pragma once

#include <geosched/errors.hpp>
#include <geosched/rng.hpp>
#include <geosched/time_series.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace geosched {

/// Electricity price and ambient temperature history for one location.
struct GeoTrace {
    std::string location;
    TimeSeries<double> prices;       // USD/kWh, >= 0
    TimeSeries<double> temperatures; // degrees C

    bool operator==(const GeoTrace&) const = default;
};

using GeoTraceSet = std::map<std::string, GeoTrace>;

/// Temperature-dependent cooling overhead of a data center, expressed as
/// partial PUE. Piecewise linear between measured anchors; below the first
/// anchor free cooling keeps the floor value, at and above the mechanical
/// threshold only chillers run, pinning the ceiling value.
struct PPueModel {
    struct Anchor {
        double temperature_c;
        double ppue;
        bool operator==(const Anchor&) const = default;
    };

    std::vector<Anchor> anchors;
    double mechanical_threshold_c = 25.0;
    double mechanical_ceiling = 1.30;

    /// Outside-air / mixed / chiller-only operating points.
    static PPueModel dual_cooling_default() {
        return PPueModel{{{-3.9, 1.05}, {15.6, 1.17}}, 25.0, 1.30};
    }

    void validate() const {
        if (anchors.empty()) throw ConfigError("pPUE model needs at least one anchor");
        double prev_t = -1e300, prev_p = 1.0;
        for (const Anchor& a : anchors) {
            if (a.ppue < 1.0) throw ConfigError("pPUE values must be >= 1.0");
            if (a.temperature_c <= prev_t) throw ConfigError("pPUE anchors must be sorted by temperature");
            if (a.ppue < prev_p) throw ConfigError("pPUE must be non-decreasing in temperature");
            prev_t = a.temperature_c;
            prev_p = a.ppue;
        }
        if (mechanical_ceiling < anchors.back().ppue)
            throw ConfigError("mechanical ceiling below last anchor");
        if (mechanical_threshold_c < anchors.back().temperature_c)
            throw ConfigError("mechanical threshold below last anchor temperature");
    }
};

/// Cooling overhead factor at an outside temperature. Clamped to the first
/// anchor below, interpolated between anchors, rising linearly to the
/// chiller-only ceiling at the mechanical threshold and flat beyond it.
inline double ppue(const PPueModel& model, double temperature_c) {
    const auto& a = model.anchors;
    if (temperature_c <= a.front().temperature_c) return a.front().ppue;
    for (std::size_t i = 1; i < a.size(); ++i) {
        if (temperature_c <= a[i].temperature_c) {
            double f = (temperature_c - a[i - 1].temperature_c) /
                       (a[i].temperature_c - a[i - 1].temperature_c);
            return a[i - 1].ppue + f * (a[i].ppue - a[i - 1].ppue);
        }
    }
    if (temperature_c >= model.mechanical_threshold_c) return model.mechanical_ceiling;
    double span = model.mechanical_threshold_c - a.back().temperature_c;
    if (span <= 0.0) return model.mechanical_ceiling;
    double f = (temperature_c - a.back().temperature_c) / span;
    return a.back().ppue + f * (model.mechanical_ceiling - a.back().ppue);
}

// ---------------------------------------------------------------------------
// Trace CSV: header `timestamp,location,price_usd_per_kwh,temperature_c`,
// ISO-8601 timestamps, one row per (timestamp, location).

namespace detail {

inline std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

inline double parse_double_field(const std::string& s, const std::string& what, int line_no) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw TraceError("line " + std::to_string(line_no) + ": malformed " + what + " '" + s + "'");
    }
}

} // namespace detail

inline GeoTraceSet load_traces(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw TraceError("empty trace file");
    {
        auto header = detail::split_csv_row(line);
        const std::vector<std::string> expected = {"timestamp", "location", "price_usd_per_kwh",
                                                   "temperature_c"};
        if (header != expected)
            throw TraceError("bad trace header, expected timestamp,location,price_usd_per_kwh,temperature_c");
    }

    struct Raw {
        std::vector<Timestamp> index;
        std::vector<double> prices;
        std::vector<double> temps;
    };
    std::map<std::string, Raw> raws;

    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto fields = detail::split_csv_row(line);
        if (fields.size() != 4)
            throw TraceError("line " + std::to_string(line_no) + ": expected 4 fields, got " +
                             std::to_string(fields.size()));
        if (fields[1].empty()) throw TraceError("line " + std::to_string(line_no) + ": missing location");
        Timestamp t = parse_iso8601(fields[0]);
        double price = detail::parse_double_field(fields[2], "price", line_no);
        double temp = detail::parse_double_field(fields[3], "temperature", line_no);
        if (price < 0)
            throw TraceError("line " + std::to_string(line_no) + ": negative price " + fields[2]);
        Raw& r = raws[fields[1]];
        if (!r.index.empty() && t <= r.index.back())
            throw TraceError("line " + std::to_string(line_no) + ": non-monotone timestamps for location '" +
                             fields[1] + "'");
        r.index.push_back(t);
        r.prices.push_back(price);
        r.temps.push_back(temp);
    }
    if (raws.empty()) throw TraceError("trace file has no data rows");

    GeoTraceSet out;
    const Raw* first = nullptr;
    for (auto& [loc, raw] : raws) {
        TimeSeries<double> prices(raw.index, std::move(raw.prices)); // validates uniform spacing
        TimeSeries<double> temps(raw.index, std::move(raw.temps));
        if (!first)
            first = &raw;
        else if (raw.index != first->index)
            throw TraceError("location '" + loc + "' index differs from the scenario index");
        out.emplace(loc, GeoTrace{loc, std::move(prices), std::move(temps)});
    }
    return out;
}

inline GeoTraceSet load_traces(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw TraceError("cannot open trace file '" + path + "'");
    return load_traces(in);
}

inline void write_traces(std::ostream& out, const GeoTraceSet& traces) {
    out << "timestamp,location,price_usd_per_kwh,temperature_c\n";
    char buf[64];
    for (const auto& [loc, trace] : traces) {
        for (std::size_t i = 0; i < trace.prices.size(); ++i) {
            out << format_iso8601(trace.prices.timestamp_at(i)) << ',' << loc << ',';
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", trace.prices[i], trace.temperatures[i]);
            out << buf;
        }
    }
}

inline void write_traces(const std::string& path, const GeoTraceSet& traces) {
    std::ofstream out(path);
    if (!out) throw TraceError("cannot write trace file '" + path + "'");
    write_traces(out, traces);
}

// ---------------------------------------------------------------------------
// Synthetic traces. Stand-ins for real market and weather feeds: prices are
// a daily sinusoid plus AR(1) noise with per-location phase offsets (evenly
// spaced over the circle, so two locations come out anti-correlated), and
// temperatures are a daily sinusoid around a per-location mean with a slow
// seasonal drift.

struct TraceSynthParams {
    int n_locations = 3;
    std::string location_prefix = "loc";

    double price_base_usd_per_kwh = 0.09;
    double price_daily_amplitude = 0.035;
    double price_noise_sigma = 0.004; // AR(1) innovation std-dev
    double price_noise_rho = 0.7;     // AR(1) coefficient
    std::vector<double> phase_offsets_rad; // empty: evenly spaced 2*pi*i/n

    double temp_mean_base_c = 14.0;
    double temp_mean_spread_c = 20.0; // location means span base +/- spread/2
    double temp_daily_amplitude_c = 4.0;
    double temp_seasonal_amplitude_c = 2.0;

    int steps_per_day = 24;
};

inline GeoTraceSet synthesize_traces(std::uint64_t seed, Timestamp start, Timestamp step,
                                     std::size_t horizon_steps, const TraceSynthParams& params) {
    if (params.n_locations < 1) throw ConfigError("trace synthesis needs n_locations >= 1");
    if (horizon_steps < 1) throw ConfigError("trace synthesis needs horizon >= 1");

    GeoTraceSet out;
    const double two_pi = 2.0 * std::numbers::pi;
    for (int loc = 0; loc < params.n_locations; ++loc) {
        char name[64];
        std::snprintf(name, sizeof(name), "%s-%02d", params.location_prefix.c_str(), loc);

        double phase = params.phase_offsets_rad.empty()
                           ? two_pi * loc / params.n_locations
                           : params.phase_offsets_rad[static_cast<std::size_t>(loc) %
                                                      params.phase_offsets_rad.size()];
        double temp_mean =
            params.temp_mean_base_c +
            (params.n_locations > 1
                 ? params.temp_mean_spread_c * (static_cast<double>(loc) / (params.n_locations - 1) - 0.5)
                 : 0.0);

        auto rng = make_rng(seed, "trace", {static_cast<std::uint64_t>(loc)});
        std::normal_distribution<double> noise(0.0, params.price_noise_sigma);

        std::vector<double> prices(horizon_steps), temps(horizon_steps);
        double ar = 0.0;
        for (std::size_t i = 0; i < horizon_steps; ++i) {
            double day_angle = two_pi * static_cast<double>(i) / params.steps_per_day;
            ar = params.price_noise_rho * ar + (params.price_noise_sigma > 0 ? noise(rng) : 0.0);
            double price = params.price_base_usd_per_kwh +
                           params.price_daily_amplitude * std::sin(day_angle + phase) + ar;
            prices[i] = std::max(price, 0.0);
            double season_angle = two_pi * static_cast<double>(i) / (params.steps_per_day * 365.0);
            temps[i] = temp_mean + params.temp_daily_amplitude_c * std::sin(day_angle + phase) +
                       params.temp_seasonal_amplitude_c * std::sin(season_angle);
        }
        out.emplace(name, GeoTrace{name, TimeSeries<double>(start, step, std::move(prices)),
                                   TimeSeries<double>(start, step, std::move(temps))});
    }
    return out;
}

} // namespace geosched
