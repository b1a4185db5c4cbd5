#pragma once

#include <geosched/cloud.hpp>
#include <geosched/errors.hpp>
#include <geosched/forecasting.hpp>
#include <geosched/geotraces.hpp>
#include <geosched/time_series.hpp>

#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace geosched {

/// Scalarization weights for the decision-support components. All
/// components are normalized to [0, 1] before weighting; lower is better.
struct FitnessWeights {
    double energy = 1.0;
    double consolid = 0.0;
    double migration = 0.0;
    double constraint = 0.0;

    void validate() const {
        if (energy < 0 || consolid < 0 || migration < 0 || constraint < 0)
            throw ConfigError("fitness weights must be non-negative");
        if (energy + consolid + migration + constraint <= 0)
            throw ConfigError("at least one fitness weight must be positive");
    }
};

struct FitnessBreakdown {
    double energy_cost_usd = 0.0;
    double energy_ceiling_usd = 0.0; // all-PMs-at-peak cost over the window
    double consolid = 0.0;
    double migration_penalty = 0.0;
    double constraint_penalty = 0.0;
    double total = 0.0;

    bool operator==(const FitnessBreakdown&) const = default;
};

// ---------------------------------------------------------------------------
// Trajectory: allocation over time under a schedule (Eq. 4 semantics).

/// State at each window step after applying that step's requests (deletes
/// remove VMs, boots enqueue them as pending) and then that step's actions.
inline TimeSeries<CloudState> trajectory(const CloudState& start, const Schedule& schedule,
                                         std::span<const VMRequest> requests = {}) {
    const ForecastWindow& w = schedule.window();
    std::vector<CloudState> states;
    states.reserve(static_cast<std::size_t>(w.length));
    CloudState cur = start;
    for (int i = 0; i < w.length; ++i) {
        Timestamp t = w.timestamp_at(i);
        for (const VMRequest& req : requests) {
            if (req.t != t) continue;
            if (req.kind == VMRequest::Kind::Delete)
                cur.remove(req.vm);
            else
                cur.mark_pending(req.vm);
        }
        for (const Schedule::Entry& e : schedule.actions_at(t)) cur.move(e.action.vm, e.action.pm);
        cur.set_epoch(t);
        states.push_back(cur);
    }
    return TimeSeries<CloudState>(w.start, w.step, std::move(states));
}

// ---------------------------------------------------------------------------
// Decision-support components.

/// Linear PM power draw between idle and peak.
inline double pm_power_w(const PhysicalMachine& pm, double util) {
    return pm.power_idle_w + (pm.power_peak_w - pm.power_idle_w) * util;
}

namespace detail {

inline const GeoTrace& trace_for(const GeoTraceSet& traces, const std::string& key) {
    auto it = traces.find(key);
    if (it == traces.end()) throw TraceError("no trace for location key '" + key + "'");
    return it->second;
}

} // namespace detail

/// Realized or forecast energy cost of running the trajectory: per step and
/// active PM, power draw scaled by cooling overhead and the location's
/// electricity price. Suspended PMs contribute nothing.
inline double energy_cost(const TimeSeries<CloudState>& traj, const GeoTraceSet& traces,
                          const PPueModel& ppue_model) {
    if (traj.empty()) return 0.0;
    const Cloud& cloud = traj[0].cloud();
    const double step_hours = static_cast<double>(traj.step()) / kSecondsPerHour;
    double cost = 0.0;
    for (std::size_t i = 0; i < traj.size(); ++i) {
        Timestamp t = traj.timestamp_at(i);
        const CloudState& state = traj[i];
        for (std::size_t p = 0; p < cloud.pm_count(); ++p) {
            PmId pm{static_cast<std::int32_t>(p)};
            if (state.suspended(pm)) continue;
            const PhysicalMachine& machine = cloud.pm(pm);
            const Location& loc = cloud.location(machine.location);
            double price = detail::trace_for(traces, loc.price_trace_key).prices.at(t);
            double temp = detail::trace_for(traces, loc.temperature_trace_key).temperatures.at(t);
            double watts = pm_power_w(machine, utilisation(state, pm));
            cost += watts / 1000.0 * step_hours * ppue(ppue_model, temp) * price;
        }
    }
    return cost;
}

/// Consolidation fitness from per-PM utilisation series: one minus the mean
/// over PMs of the mean positive utilisation. Zero-valued elements are
/// excluded so idle periods do not mask how tightly a PM is packed while it
/// runs; a PM that never runs counts as perfectly consolidated.
inline double consolid_from_utils(std::span<const std::vector<double>> utils_per_pm) {
    if (utils_per_pm.empty()) return 0.0;
    double acc = 0.0;
    for (const std::vector<double>& utils : utils_per_pm) {
        double sum = 0.0;
        std::size_t count = 0;
        for (double u : utils) {
            if (u > 0.0) {
                sum += u;
                ++count;
            }
        }
        acc += count > 0 ? sum / static_cast<double>(count) : 1.0;
    }
    return 1.0 - acc / static_cast<double>(utils_per_pm.size());
}

inline double consolid(const TimeSeries<CloudState>& traj) {
    if (traj.empty()) return 0.0;
    const Cloud& cloud = traj[0].cloud();
    std::vector<std::vector<double>> utils(cloud.pm_count(), std::vector<double>(traj.size()));
    for (std::size_t i = 0; i < traj.size(); ++i)
        for (std::size_t p = 0; p < cloud.pm_count(); ++p)
            utils[p][i] = utilisation(traj[i], PmId{static_cast<std::int32_t>(p)});
    return consolid_from_utils(utils);
}

/// QoS pressure of a schedule: the fraction of possible (vm, step) slots
/// that actually migrate a VM between PMs. Placements of pending VMs and
/// same-PM actions do not count.
inline double migration_penalty(const Schedule& schedule, const CloudState& start) {
    const ForecastWindow& w = schedule.window();
    int present = start.present_count();
    if (present == 0 || w.length == 0) return 0.0;
    CloudState cur = start;
    std::size_t migrations = 0;
    for (int i = 0; i < w.length; ++i) {
        for (const Schedule::Entry& e : schedule.actions_at(w.timestamp_at(i))) {
            auto from = cur.pm_of(e.action.vm);
            if (from && *from != e.action.pm) ++migrations;
            cur.move(e.action.vm, e.action.pm);
        }
    }
    return static_cast<double>(migrations) / (static_cast<double>(present) * w.length);
}

/// Fraction of (pm, step) pairs whose capacity is exceeded.
inline double constraint_penalty(const TimeSeries<CloudState>& traj) {
    if (traj.empty()) return 0.0;
    const Cloud& cloud = traj[0].cloud();
    if (cloud.pm_count() == 0) return 0.0;
    std::size_t violations = 0;
    for (std::size_t i = 0; i < traj.size(); ++i)
        for (std::size_t p = 0; p < cloud.pm_count(); ++p)
            if (!capacity_ok(traj[i], PmId{static_cast<std::int32_t>(p)})) ++violations;
    return static_cast<double>(violations) / static_cast<double>(traj.size() * cloud.pm_count());
}

// ---------------------------------------------------------------------------
// Combined objective. EvalContext pre-resolves everything that does not
// depend on the schedule (trace lookups, cooling factors, the energy
// ceiling) so a population can be scored cheaply and in parallel.

class EvalContext {
public:
    EvalContext(const CloudState& start, const ForecastWindow& window, const GeoTraceSet& forecasts,
                const PPueModel& ppue_model, const FitnessWeights& weights)
        : cloud_(&start.cloud()), start_(start), window_(window), weights_(weights) {
        window_.validate();
        weights_.validate();
        const std::size_t n = static_cast<std::size_t>(window_.length);
        const double step_hours = window_.step_hours();

        // rate[loc * n + i]: USD per watt of IT draw at window step i,
        // cooling overhead included.
        rate_.resize(cloud_->location_count() * n);
        for (std::size_t l = 0; l < cloud_->location_count(); ++l) {
            const Location& loc = cloud_->locations()[l];
            const GeoTrace& price_trace = detail::trace_for(forecasts, loc.price_trace_key);
            const GeoTrace& temp_trace = detail::trace_for(forecasts, loc.temperature_trace_key);
            if (!price_trace.prices.contains(window_.start) || window_.end() > price_trace.prices.end())
                throw TraceError("price trace '" + loc.price_trace_key + "' does not cover the window");
            std::size_t base_p = price_trace.prices.index_of(window_.start);
            std::size_t base_t = temp_trace.temperatures.index_of(window_.start);
            for (std::size_t i = 0; i < n; ++i) {
                double price = price_trace.prices[base_p + i];
                double temp = temp_trace.temperatures[base_t + i];
                rate_[l * n + i] = ppue(ppue_model, temp) * price * step_hours / 1000.0;
            }
        }

        pm_loc_.reserve(cloud_->pm_count());
        for (const PhysicalMachine& pm : cloud_->pms())
            pm_loc_.push_back(static_cast<std::size_t>(pm.location.value));

        // Same summation order as evaluate() keeps the two routes bit-equal.
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t p = 0; p < cloud_->pm_count(); ++p)
                ceiling_ += cloud_->pms()[p].power_peak_w * rate_[pm_loc_[p] * n + i];
    }

    const Cloud& cloud() const { return *cloud_; }
    const CloudState& start_state() const { return start_; }
    const ForecastWindow& window() const { return window_; }
    const FitnessWeights& weights() const { return weights_; }
    double energy_ceiling_usd() const { return ceiling_; }

    /// Scores one schedule. Pure and thread-safe.
    FitnessBreakdown evaluate(const Schedule& schedule) const {
        if (!(schedule.window() == window_))
            throw WindowError("schedule window does not match evaluation window");
        const std::size_t n = static_cast<std::size_t>(window_.length);
        const std::size_t pm_count = cloud_->pm_count();

        CloudState cur = start_;
        std::vector<double> pos_util_sum(pm_count, 0.0);
        std::vector<std::size_t> pos_util_count(pm_count, 0);
        std::size_t migrations = 0, violations = 0;
        double energy = 0.0;

        for (std::size_t i = 0; i < n; ++i) {
            for (const Schedule::Entry& e : schedule.actions_at(window_.timestamp_at(static_cast<int>(i)))) {
                auto from = cur.pm_of(e.action.vm);
                if (from && *from != e.action.pm) ++migrations;
                cur.move(e.action.vm, e.action.pm);
            }
            for (std::size_t p = 0; p < pm_count; ++p) {
                PmId pm{static_cast<std::int32_t>(p)};
                if (cur.vm_count_on(pm) == 0) continue;
                const PhysicalMachine& machine = cloud_->pms()[p];
                double util = std::min(cur.load(pm).max_ratio(machine.capacity), 1.0);
                energy += pm_power_w(machine, util) * rate_[pm_loc_[p] * n + i];
                pos_util_sum[p] += util;
                ++pos_util_count[p];
                if (!cur.load(pm).fits_within(machine.capacity)) ++violations;
            }
        }

        FitnessBreakdown out;
        out.energy_cost_usd = energy;
        out.energy_ceiling_usd = ceiling_;
        double acc = 0.0;
        for (std::size_t p = 0; p < pm_count; ++p)
            acc += pos_util_count[p] > 0 ? pos_util_sum[p] / static_cast<double>(pos_util_count[p]) : 1.0;
        out.consolid = pm_count > 0 ? 1.0 - acc / static_cast<double>(pm_count) : 0.0;
        int present = start_.present_count();
        out.migration_penalty =
            present > 0 ? static_cast<double>(migrations) / (static_cast<double>(present) * n) : 0.0;
        out.constraint_penalty =
            pm_count > 0 ? static_cast<double>(violations) / static_cast<double>(n * pm_count) : 0.0;
        out.total = weights_.energy * (ceiling_ > 0.0 ? energy / ceiling_ : 0.0) +
                    weights_.consolid * out.consolid + weights_.migration * out.migration_penalty +
                    weights_.constraint * out.constraint_penalty;
        return out;
    }

private:
    const Cloud* cloud_;
    CloudState start_;
    ForecastWindow window_;
    FitnessWeights weights_;
    std::vector<double> rate_;
    std::vector<std::size_t> pm_loc_;
    double ceiling_ = 0.0;
};

/// One-shot scoring; prefer EvalContext when evaluating many schedules
/// against the same window.
inline FitnessBreakdown total_fitness(const Schedule& schedule, const CloudState& start,
                                      const GeoTraceSet& forecasts, const PPueModel& ppue_model,
                                      const FitnessWeights& weights) {
    return EvalContext(start, schedule.window(), forecasts, ppue_model, weights).evaluate(schedule);
}

// ---------------------------------------------------------------------------
// Per-step realized accounting used by the simulation engine. Reads ground
// truth, never forecasts.

inline double realized_step_energy_usd(const CloudState& state, const GeoTraceSet& truth,
                                       const PPueModel& ppue_model, Timestamp t, double step_hours) {
    const Cloud& cloud = state.cloud();
    double cost = 0.0;
    for (std::size_t p = 0; p < cloud.pm_count(); ++p) {
        PmId pm{static_cast<std::int32_t>(p)};
        if (state.suspended(pm)) continue;
        const PhysicalMachine& machine = cloud.pm(pm);
        const Location& loc = cloud.location(machine.location);
        double price = detail::trace_for(truth, loc.price_trace_key).prices.at(t);
        double temp = detail::trace_for(truth, loc.temperature_trace_key).temperatures.at(t);
        cost += pm_power_w(machine, utilisation(state, pm)) / 1000.0 * step_hours *
                ppue(ppue_model, temp) * price;
    }
    return cost;
}

/// Single-step consolidation: the window formula applied to one state.
inline double step_consolid(const CloudState& state) {
    const Cloud& cloud = state.cloud();
    if (cloud.pm_count() == 0) return 0.0;
    double acc = 0.0;
    for (std::size_t p = 0; p < cloud.pm_count(); ++p) {
        double u = utilisation(state, PmId{static_cast<std::int32_t>(p)});
        acc += u > 0.0 ? u : 1.0;
    }
    return 1.0 - acc / static_cast<double>(cloud.pm_count());
}

} // namespace geosched
