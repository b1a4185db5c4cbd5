#pragma once

#include <geosched/errors.hpp>
#include <geosched/geotraces.hpp>
#include <geosched/rng.hpp>
#include <geosched/time_series.hpp>

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace geosched {

/// Multiplicative Gaussian forecast error: value * max(0, 1 + N(0, sigma)).
struct ErrorModel {
    double sigma = 0.0;
    std::uint64_t seed = 0;

    void validate() const {
        if (sigma < 0) throw ConfigError("error model sigma must be >= 0");
    }
};

/// Applies the error model to a series. sigma = 0 returns the input
/// unchanged without touching the random stream; the clamp at 0 keeps
/// perturbed prices non-negative.
inline TimeSeries<double> perturb(const TimeSeries<double>& actual, const ErrorModel& model) {
    model.validate();
    if (model.sigma == 0.0 || actual.empty()) return actual;
    std::mt19937_64 rng(model.seed);
    std::normal_distribution<double> noise(0.0, model.sigma);
    std::vector<double> values(actual.values());
    for (double& v : values) v *= std::max(0.0, 1.0 + noise(rng));
    return TimeSeries<double>(actual.start(), actual.step(), std::move(values));
}

struct ForecastMethod {
    enum class Kind { Persistence, Sma, DoubleExponential };
    Kind kind = Kind::Persistence;
    int sma_k = 3;

    static ForecastMethod persistence() { return {Kind::Persistence, 0}; }
    static ForecastMethod sma(int k) { return {Kind::Sma, k}; }
    static ForecastMethod double_exponential() { return {Kind::DoubleExponential, 0}; }
};

/// Forecasts `history` over the window, which must start exactly one step
/// after the history ends.
///
/// persistence: repeats the last observation. sma(k): flat mean of the last
/// k observations. double_exponential: Holt's linear method (alpha 0.5,
/// beta 0.3), which extends an exact linear trend exactly.
inline TimeSeries<double> forecast(const TimeSeries<double>& history, const ForecastWindow& window,
                                   const ForecastMethod& method) {
    window.validate();
    if (history.empty()) throw Error("cannot forecast from empty history");
    if (history.step() != window.step || window.start != history.end())
        throw WindowError("forecast window must start one step after history ends");

    const std::size_t n = static_cast<std::size_t>(window.length);
    std::vector<double> values(n);

    switch (method.kind) {
    case ForecastMethod::Kind::Persistence: {
        std::fill(values.begin(), values.end(), history[history.size() - 1]);
        break;
    }
    case ForecastMethod::Kind::Sma: {
        if (method.sma_k < 1) throw Error("sma needs k >= 1");
        if (static_cast<std::size_t>(method.sma_k) > history.size())
            throw Error("sma k exceeds history length");
        double sum = 0.0;
        for (std::size_t i = history.size() - static_cast<std::size_t>(method.sma_k); i < history.size(); ++i)
            sum += history[i];
        std::fill(values.begin(), values.end(), sum / method.sma_k);
        break;
    }
    case ForecastMethod::Kind::DoubleExponential: {
        constexpr double alpha = 0.5, beta = 0.3;
        double level = history[0];
        double trend = history.size() >= 2 ? history[1] - history[0] : 0.0;
        for (std::size_t i = 1; i < history.size(); ++i) {
            double prev_level = level;
            level = alpha * history[i] + (1.0 - alpha) * (level + trend);
            trend = beta * (level - prev_level) + (1.0 - beta) * trend;
        }
        for (std::size_t h = 0; h < n; ++h) values[h] = level + static_cast<double>(h + 1) * trend;
        break;
    }
    }
    return TimeSeries<double>(window.start, window.step, std::move(values));
}

// ---------------------------------------------------------------------------
// Controller-visible geotemporal inputs for one planning round.

struct ForecastConfig {
    enum class Mode {
        Perfect,     // ground truth passed through
        OracleNoise, // ground truth with multiplicative error (default)
        Method       // time-series forecast of the history before the window
    };
    Mode mode = Mode::OracleNoise;
    double sigma = 0.0;
    ForecastMethod method = ForecastMethod::persistence();
};

/// Builds the per-location price/temperature series the controller sees for
/// one window. Realized accounting never uses these; it reads the ground
/// truth traces directly. Noise streams derive from (seed, location, round)
/// so rounds and locations are independent and reproducible.
inline GeoTraceSet forecast_traces(const GeoTraceSet& truth, const ForecastWindow& window,
                                   const ForecastConfig& cfg, std::uint64_t seed, std::uint64_t round) {
    GeoTraceSet out;
    const std::size_t n = static_cast<std::size_t>(window.length);
    std::uint64_t loc_index = 0;
    for (const auto& [key, trace] : truth) {
        if (!trace.prices.contains(window.start) || window.end() > trace.prices.end())
            throw TraceError("trace '" + key + "' does not cover the forecast window");
        GeoTrace fc;
        fc.location = key;
        switch (cfg.mode) {
        case ForecastConfig::Mode::Perfect: {
            fc.prices = trace.prices.slice(window.start, n);
            fc.temperatures = trace.temperatures.slice(window.start, n);
            break;
        }
        case ForecastConfig::Mode::OracleNoise: {
            ErrorModel price_err{cfg.sigma, derive_seed(seed, "fc-price", {loc_index, round})};
            ErrorModel temp_err{cfg.sigma, derive_seed(seed, "fc-temp", {loc_index, round})};
            fc.prices = perturb(trace.prices.slice(window.start, n), price_err);
            fc.temperatures = perturb(trace.temperatures.slice(window.start, n), temp_err);
            break;
        }
        case ForecastConfig::Mode::Method: {
            std::size_t hist_len = trace.prices.index_of(window.start);
            if (hist_len == 0)
                throw TraceError("no history before the forecast window for '" + key + "'");
            TimeSeries<double> price_hist = trace.prices.slice(trace.prices.start(), hist_len);
            TimeSeries<double> temp_hist = trace.temperatures.slice(trace.temperatures.start(), hist_len);
            fc.prices = forecast(price_hist, window, cfg.method);
            fc.temperatures = forecast(temp_hist, window, cfg.method);
            break;
        }
        }
        // Forecast prices stay non-negative whatever the method.
        if (cfg.mode == ForecastConfig::Mode::Method) {
            std::vector<double> vals = fc.prices.values();
            for (double& v : vals) v = std::max(v, 0.0);
            fc.prices = TimeSeries<double>(window.start, window.step, std::move(vals));
        }
        out.emplace(key, std::move(fc));
        ++loc_index;
    }
    return out;
}

} // namespace geosched
