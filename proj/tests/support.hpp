#pragma once

#include <geosched/cloud.hpp>
#include <geosched/geotraces.hpp>
#include <geosched/time_series.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

namespace test_support {

using namespace geosched;

// 2015-01-01T00:00:00Z, the epoch used by most fixtures.
inline constexpr Timestamp kEpoch = 1420070400;
inline constexpr Timestamp kHour = kSecondsPerHour;

struct CloudSpec {
    int n_locations = 1;
    int n_pms = 2;
    std::vector<double> capacity{8.0, 16.0};
    double power_idle_w = 100.0;
    double power_peak_w = 200.0;
};

/// PMs spread round-robin over locations "loc-00", "loc-01", ...
inline Cloud make_cloud(const CloudSpec& spec) {
    Cloud cloud({"cpu", "ram"});
    for (int l = 0; l < spec.n_locations; ++l) {
        char name[16];
        std::snprintf(name, sizeof(name), "loc-%02d", l);
        cloud.add_location(Location{name, "", ""});
    }
    for (int p = 0; p < spec.n_pms; ++p) {
        char name[16];
        std::snprintf(name, sizeof(name), "pm-%02d", p);
        cloud.add_pm(PhysicalMachine{name, ResourceVec(std::span<const double>(spec.capacity)),
                                     LocationId{p % spec.n_locations}, spec.power_idle_w,
                                     spec.power_peak_w});
    }
    return cloud;
}

inline VmId add_vm(Cloud& cloud, std::string name, std::initializer_list<double> demand) {
    return cloud.add_vm(VirtualMachine{std::move(name), ResourceVec(demand)});
}

/// Constant-valued traces for every location of the cloud.
inline GeoTraceSet constant_traces(const Cloud& cloud, double price, double temp_c, Timestamp start,
                                   std::size_t n, Timestamp step = kHour) {
    GeoTraceSet out;
    for (const Location& loc : cloud.locations()) {
        GeoTrace tr;
        tr.location = loc.name;
        tr.prices = TimeSeries<double>(start, step, std::vector<double>(n, price));
        tr.temperatures = TimeSeries<double>(start, step, std::vector<double>(n, temp_c));
        out.emplace(loc.name, std::move(tr));
    }
    return out;
}

inline double mean(const std::vector<double>& xs) {
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

inline double stddev(const std::vector<double>& xs) {
    double m = mean(xs);
    double acc = 0.0;
    for (double x : xs) acc += (x - m) * (x - m);
    return std::sqrt(acc / static_cast<double>(xs.size()));
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    double ma = mean(a), mb = mean(b);
    double num = 0.0, da = 0.0, db = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - ma) * (b[i] - mb);
        da += (a[i] - ma) * (a[i] - ma);
        db += (b[i] - mb) * (b[i] - mb);
    }
    return num / std::sqrt(da * db);
}

/// Average ranks, with ties sharing the mean rank.
inline std::vector<double> ranks(const std::vector<double>& xs) {
    std::vector<std::size_t> order(xs.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return xs[i] < xs[j]; });
    std::vector<double> out(xs.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && xs[order[j + 1]] == xs[order[i]]) ++j;
        double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) out[order[k]] = r;
        i = j + 1;
    }
    return out;
}

inline double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    return pearson(ranks(a), ranks(b));
}

} // namespace test_support
