#pragma once

#include <geosched/errors.hpp>
#include <geosched/time_series.hpp>

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace geosched {

/// Per-resource quantity (CPU cores, RAM GB, ...). Dimension is fixed per
/// scenario; four dimensions cover every inventory we model.
class ResourceVec {
public:
    static constexpr int kMaxDims = 4;

    ResourceVec() = default;

    explicit ResourceVec(std::initializer_list<double> vals) {
        if (vals.size() > kMaxDims) throw ConfigError("too many resource dimensions (max 4)");
        for (double v : vals) v_[dims_++] = v;
    }

    explicit ResourceVec(std::span<const double> vals) {
        if (vals.size() > kMaxDims) throw ConfigError("too many resource dimensions (max 4)");
        for (double v : vals) v_[dims_++] = v;
    }

    static ResourceVec zeros(int dims) {
        ResourceVec r;
        r.dims_ = dims;
        return r;
    }

    int dims() const { return dims_; }
    double operator[](int i) const { return v_[static_cast<std::size_t>(i)]; }
    double& operator[](int i) { return v_[static_cast<std::size_t>(i)]; }

    bool all_positive() const {
        for (int i = 0; i < dims_; ++i)
            if (v_[static_cast<std::size_t>(i)] <= 0.0) return false;
        return dims_ > 0;
    }

    void add(const ResourceVec& o) {
        for (int i = 0; i < dims_; ++i) v_[static_cast<std::size_t>(i)] += o[i];
    }
    void sub(const ResourceVec& o) {
        for (int i = 0; i < dims_; ++i) v_[static_cast<std::size_t>(i)] -= o[i];
    }

    /// True when adding nothing further, this vector fits inside `cap`
    /// component-wise. A relative epsilon absorbs float summation noise so an
    /// exactly-full machine still counts as fitting.
    bool fits_within(const ResourceVec& cap) const {
        for (int i = 0; i < dims_; ++i) {
            double c = cap[i];
            if (v_[static_cast<std::size_t>(i)] > c + 1e-9 * std::max(1.0, c)) return false;
        }
        return true;
    }

    /// max_i (this_i / denom_i); the bottleneck ratio.
    double max_ratio(const ResourceVec& denom) const {
        double r = 0.0;
        for (int i = 0; i < dims_; ++i) r = std::max(r, v_[static_cast<std::size_t>(i)] / denom[i]);
        return r;
    }

    bool operator==(const ResourceVec& o) const {
        if (dims_ != o.dims_) return false;
        for (int i = 0; i < dims_; ++i)
            if (v_[static_cast<std::size_t>(i)] != o[i]) return false;
        return true;
    }

private:
    std::array<double, kMaxDims> v_{};
    int dims_ = 0;
};

/// Dense scenario-local indices. Names map to indices once, at load time.
struct VmId {
    std::int32_t value = -1;
    bool operator==(const VmId&) const = default;
    auto operator<=>(const VmId&) const = default;
};
struct PmId {
    std::int32_t value = -1;
    bool operator==(const PmId&) const = default;
    auto operator<=>(const PmId&) const = default;
};
struct LocationId {
    std::int32_t value = -1;
    bool operator==(const LocationId&) const = default;
    auto operator<=>(const LocationId&) const = default;
};

struct VirtualMachine {
    std::string name;
    ResourceVec demand; // all components > 0
};

struct PhysicalMachine {
    std::string name;
    ResourceVec capacity; // all components > 0
    LocationId location;
    double power_idle_w = 0.0;
    double power_peak_w = 0.0; // >= power_idle_w
};

/// A data center site; its traces are looked up by the two keys.
struct Location {
    std::string name;
    std::string price_trace_key;       // defaults to name
    std::string temperature_trace_key; // defaults to name
};

/// A user request: boot a new VM or delete a running one.
struct VMRequest {
    enum class Kind { Boot, Delete };
    Timestamp t = 0;
    Kind kind = Kind::Boot;
    VmId vm;
};

/// A planned control action: migrate (or place) `vm` onto `pm`.
struct Action {
    VmId vm;
    PmId pm;
    bool operator==(const Action&) const = default;
    auto operator<=>(const Action&) const = default;
};

/// Immutable scenario inventory: locations, PMs and the full VM catalogue
/// (including VMs that boot later; presence over time lives in CloudState).
class Cloud {
public:
    Cloud() = default;

    explicit Cloud(std::vector<std::string> resource_names) : resource_names_(std::move(resource_names)) {
        if (resource_names_.empty() || resource_names_.size() > ResourceVec::kMaxDims)
            throw ConfigError("scenario needs between 1 and 4 resource dimensions");
    }

    LocationId add_location(Location loc) {
        if (loc.price_trace_key.empty()) loc.price_trace_key = loc.name;
        if (loc.temperature_trace_key.empty()) loc.temperature_trace_key = loc.name;
        locations_.push_back(std::move(loc));
        return LocationId{static_cast<std::int32_t>(locations_.size() - 1)};
    }

    PmId add_pm(PhysicalMachine pm) {
        if (!pm.capacity.all_positive()) throw ConfigError("PM '" + pm.name + "' capacity must be positive");
        if (pm.power_idle_w < 0 || pm.power_peak_w < pm.power_idle_w)
            throw ConfigError("PM '" + pm.name + "' needs 0 <= power_idle <= power_peak");
        if (pm.location.value < 0 || pm.location.value >= static_cast<std::int32_t>(locations_.size()))
            throw IdentifierError("PM '" + pm.name + "' references unknown location");
        pms_.push_back(std::move(pm));
        return PmId{static_cast<std::int32_t>(pms_.size() - 1)};
    }

    VmId add_vm(VirtualMachine vm) {
        if (!vm.demand.all_positive()) throw ConfigError("VM '" + vm.name + "' demand must be positive");
        vms_.push_back(std::move(vm));
        return VmId{static_cast<std::int32_t>(vms_.size() - 1)};
    }

    std::size_t vm_count() const { return vms_.size(); }
    std::size_t pm_count() const { return pms_.size(); }
    std::size_t location_count() const { return locations_.size(); }

    const VirtualMachine& vm(VmId id) const {
        check_vm(id);
        return vms_[static_cast<std::size_t>(id.value)];
    }
    const PhysicalMachine& pm(PmId id) const {
        check_pm(id);
        return pms_[static_cast<std::size_t>(id.value)];
    }
    const Location& location(LocationId id) const {
        if (id.value < 0 || id.value >= static_cast<std::int32_t>(locations_.size()))
            throw IdentifierError("unknown location id");
        return locations_[static_cast<std::size_t>(id.value)];
    }

    const std::vector<VirtualMachine>& vms() const { return vms_; }
    const std::vector<PhysicalMachine>& pms() const { return pms_; }
    const std::vector<Location>& locations() const { return locations_; }
    const std::vector<std::string>& resource_names() const { return resource_names_; }

    void check_vm(VmId id) const {
        if (id.value < 0 || id.value >= static_cast<std::int32_t>(vms_.size()))
            throw IdentifierError("unknown vm id " + std::to_string(id.value));
    }
    void check_pm(PmId id) const {
        if (id.value < 0 || id.value >= static_cast<std::int32_t>(pms_.size()))
            throw IdentifierError("unknown pm id " + std::to_string(id.value));
    }

private:
    std::vector<std::string> resource_names_{"cpu", "ram"};
    std::vector<Location> locations_;
    std::vector<PhysicalMachine> pms_;
    std::vector<VirtualMachine> vms_;
};

/// The whole state of the cloud at one moment: which PM hosts each VM (or
/// whether the VM is pending placement / not present), plus per-PM load
/// aggregates. Suspension is implied: a PM with no VMs is suspended.
class CloudState {
public:
    static constexpr std::int32_t kAbsent = -2;
    static constexpr std::int32_t kPending = -1;

    CloudState() = default;

    explicit CloudState(const Cloud& cloud, Timestamp epoch = 0)
        : cloud_(&cloud),
          epoch_(epoch),
          vm_pm_(cloud.vm_count(), kAbsent),
          pm_load_(cloud.pm_count()),
          pm_vm_count_(cloud.pm_count(), 0) {
        for (std::size_t p = 0; p < cloud.pm_count(); ++p)
            pm_load_[p] = ResourceVec::zeros(cloud.pms()[p].capacity.dims());
    }

    const Cloud& cloud() const { return *cloud_; }
    Timestamp epoch() const { return epoch_; }
    void set_epoch(Timestamp t) { epoch_ = t; }

    bool is_absent(VmId vm) const { return slot(vm) == kAbsent; }
    bool is_pending(VmId vm) const { return slot(vm) == kPending; }
    bool is_placed(VmId vm) const { return slot(vm) >= 0; }

    std::optional<PmId> pm_of(VmId vm) const {
        std::int32_t s = slot(vm);
        if (s < 0) return std::nullopt;
        return PmId{s};
    }

    /// Eq. 11 semantics: suspended iff the PM hosts nothing.
    bool suspended(PmId pm) const {
        cloud_->check_pm(pm);
        return pm_vm_count_[static_cast<std::size_t>(pm.value)] == 0;
    }

    const ResourceVec& load(PmId pm) const {
        cloud_->check_pm(pm);
        return pm_load_[static_cast<std::size_t>(pm.value)];
    }

    int vm_count_on(PmId pm) const {
        cloud_->check_pm(pm);
        return pm_vm_count_[static_cast<std::size_t>(pm.value)];
    }

    int pending_count() const { return pending_count_; }
    int placed_count() const { return placed_count_; }
    int present_count() const { return pending_count_ + placed_count_; }

    /// All VMs currently placed or pending, in id order.
    std::vector<VmId> present_vms() const {
        std::vector<VmId> out;
        for (std::size_t v = 0; v < vm_pm_.size(); ++v)
            if (vm_pm_[v] != kAbsent) out.push_back(VmId{static_cast<std::int32_t>(v)});
        return out;
    }

    std::vector<VmId> pending_vms() const {
        std::vector<VmId> out;
        for (std::size_t v = 0; v < vm_pm_.size(); ++v)
            if (vm_pm_[v] == kPending) out.push_back(VmId{static_cast<std::int32_t>(v)});
        return out;
    }

    /// Materialized alloc map (pm -> set of vm names); for reports and tests,
    /// not the hot path.
    std::map<std::string, std::set<std::string>> alloc_map() const {
        std::map<std::string, std::set<std::string>> out;
        for (const auto& pm : cloud_->pms()) out[pm.name];
        for (std::size_t v = 0; v < vm_pm_.size(); ++v) {
            if (vm_pm_[v] >= 0)
                out[cloud_->pms()[static_cast<std::size_t>(vm_pm_[v])].name].insert(
                    cloud_->vms()[v].name);
        }
        return out;
    }

    // Mutating transitions. Fitness evaluation and the engine update owned
    // copies in place; the value-semantic apply_action below copies first.

    /// Boot request arrived: VM becomes pending until a controller places it.
    void mark_pending(VmId vm) {
        cloud_->check_vm(vm);
        if (slot(vm) != kAbsent) throw IdentifierError("vm " + vm_name(vm) + " already present");
        vm_pm_[static_cast<std::size_t>(vm.value)] = kPending;
        ++pending_count_;
    }

    /// Places a pending VM or migrates a placed one. Same source and target
    /// is a no-op. Unknown ids throw.
    void move(VmId vm, PmId pm) {
        cloud_->check_vm(vm);
        cloud_->check_pm(pm);
        std::int32_t s = slot(vm);
        if (s == kAbsent) throw IdentifierError("vm " + vm_name(vm) + " not present in cloud");
        if (s == pm.value) return;
        const ResourceVec& demand = cloud_->vm(vm).demand;
        if (s >= 0) {
            pm_load_[static_cast<std::size_t>(s)].sub(demand);
            --pm_vm_count_[static_cast<std::size_t>(s)];
        } else {
            --pending_count_;
            ++placed_count_;
        }
        vm_pm_[static_cast<std::size_t>(vm.value)] = pm.value;
        pm_load_[static_cast<std::size_t>(pm.value)].add(demand);
        ++pm_vm_count_[static_cast<std::size_t>(pm.value)];
    }

    /// Delete request: removes the VM wherever it is.
    void remove(VmId vm) {
        cloud_->check_vm(vm);
        std::int32_t s = slot(vm);
        if (s == kAbsent) throw IdentifierError("vm " + vm_name(vm) + " not present in cloud");
        if (s >= 0) {
            pm_load_[static_cast<std::size_t>(s)].sub(cloud_->vm(vm).demand);
            --pm_vm_count_[static_cast<std::size_t>(s)];
            --placed_count_;
        } else {
            --pending_count_;
        }
        vm_pm_[static_cast<std::size_t>(vm.value)] = kAbsent;
    }

    bool operator==(const CloudState& o) const {
        return vm_pm_ == o.vm_pm_ && epoch_ == o.epoch_;
    }

private:
    std::int32_t slot(VmId vm) const {
        cloud_->check_vm(vm);
        if (static_cast<std::size_t>(vm.value) >= vm_pm_.size())
            throw IdentifierError("vm " + vm_name(vm) + " registered after this state was created");
        return vm_pm_[static_cast<std::size_t>(vm.value)];
    }
    std::string vm_name(VmId vm) const { return cloud_->vms()[static_cast<std::size_t>(vm.value)].name; }

    const Cloud* cloud_ = nullptr;
    Timestamp epoch_ = 0;
    std::vector<std::int32_t> vm_pm_;
    std::vector<ResourceVec> pm_load_;
    std::vector<std::int32_t> pm_vm_count_;
    int pending_count_ = 0;
    int placed_count_ = 0;
};

/// Applies one migration action, returning the successor state. The input
/// state is left untouched; a same-source-and-target action returns an
/// equal state.
inline CloudState apply_action(const CloudState& state, const Action& action) {
    CloudState next = state;
    next.move(action.vm, action.pm);
    return next;
}

/// Bottleneck utilisation of a PM: max over resource dimensions of
/// demand-sum / capacity, capped at 1. Zero iff the PM hosts no VMs.
inline double utilisation(const CloudState& state, PmId pm) {
    if (state.vm_count_on(pm) == 0) return 0.0;
    double u = state.load(pm).max_ratio(state.cloud().pm(pm).capacity);
    return std::min(u, 1.0);
}

/// True iff the per-resource demand sum fits the PM capacity component-wise.
inline bool capacity_ok(const CloudState& state, PmId pm) {
    return state.load(pm).fits_within(state.cloud().pm(pm).capacity);
}

/// A cloud control schedule: a time series over the forecast window whose
/// values are the planned actions at each step (zero or more per step, at
/// most one per VM per step). Stored flat, ordered by (timestamp, vm).
class Schedule {
public:
    struct Entry {
        Timestamp t;
        Action action;
        bool operator==(const Entry&) const = default;
        auto operator<=>(const Entry&) const = default;
    };

    Schedule() = default;
    explicit Schedule(ForecastWindow window) : window_(window) { window_.validate(); }

    const ForecastWindow& window() const { return window_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    const std::vector<Entry>& entries() const { return entries_; }

    /// Actions planned for timestamp t, ordered by vm.
    std::span<const Entry> actions_at(Timestamp t) const {
        auto lo = std::lower_bound(entries_.begin(), entries_.end(), t,
                                   [](const Entry& e, Timestamp ts) { return e.t < ts; });
        auto hi = lo;
        while (hi != entries_.end() && hi->t == t) ++hi;
        if (lo == hi) return {};
        return {&*lo, static_cast<std::size_t>(hi - lo)};
    }

    std::optional<Action> action_for(Timestamp t, VmId vm) const {
        auto it = find(t, vm);
        if (it == entries_.end()) return std::nullopt;
        return it->action;
    }

    /// Inserts an action; throws if this VM already has one at t or if t is
    /// outside the window.
    void insert(Timestamp t, Action action) {
        if (!window_.contains(t))
            throw WindowError("action timestamp " + format_iso8601(t) + " outside schedule window");
        auto it = lower_bound(t, action.vm);
        if (it != entries_.end() && it->t == t && it->action.vm == action.vm)
            throw Error("duplicate action for vm at one timestamp");
        entries_.insert(it, Entry{t, action});
    }

    /// Inserts or replaces the action for (t, vm).
    void upsert(Timestamp t, Action action) {
        if (!window_.contains(t))
            throw WindowError("action timestamp " + format_iso8601(t) + " outside schedule window");
        auto it = lower_bound(t, action.vm);
        if (it != entries_.end() && it->t == t && it->action.vm == action.vm)
            it->action = action;
        else
            entries_.insert(it, Entry{t, action});
    }

    bool erase(Timestamp t, VmId vm) {
        auto it = find(t, vm);
        if (it == entries_.end()) return false;
        entries_.erase(it);
        return true;
    }

    /// Rebinds the schedule to a later window, dropping actions that fell
    /// outside it or that reference removed VMs.
    Schedule rebased(ForecastWindow new_window, std::span<const VmId> dropped_vms = {}) const {
        Schedule out(new_window);
        for (const Entry& e : entries_) {
            if (!new_window.contains(e.t)) continue;
            bool dropped = false;
            for (VmId v : dropped_vms)
                if (v == e.action.vm) {
                    dropped = true;
                    break;
                }
            if (!dropped) out.entries_.push_back(e);
        }
        return out;
    }

    bool operator==(const Schedule& o) const {
        return window_ == o.window_ && entries_ == o.entries_;
    }

    /// Lexicographic order on the entry list; an empty schedule sorts first.
    static int compare(const Schedule& a, const Schedule& b) {
        if (a.entries_ < b.entries_) return -1;
        if (b.entries_ < a.entries_) return 1;
        return 0;
    }

    /// Number of (t, vm) slots whose action differs between the two.
    static std::size_t hamming_distance(const Schedule& a, const Schedule& b) {
        std::size_t diff = 0;
        std::size_t i = 0, j = 0;
        while (i < a.entries_.size() && j < b.entries_.size()) {
            const Entry& ea = a.entries_[i];
            const Entry& eb = b.entries_[j];
            auto ka = std::make_pair(ea.t, ea.action.vm);
            auto kb = std::make_pair(eb.t, eb.action.vm);
            if (ka == kb) {
                if (ea.action.pm != eb.action.pm) ++diff;
                ++i, ++j;
            } else if (ka < kb) {
                ++diff, ++i;
            } else {
                ++diff, ++j;
            }
        }
        return diff + (a.entries_.size() - i) + (b.entries_.size() - j);
    }

private:
    std::vector<Entry>::const_iterator find(Timestamp t, VmId vm) const {
        auto it = lower_bound(t, vm);
        if (it != entries_.end() && it->t == t && it->action.vm == vm) return it;
        return entries_.end();
    }
    std::vector<Entry>::iterator find(Timestamp t, VmId vm) {
        auto it = lower_bound(t, vm);
        if (it != entries_.end() && it->t == t && it->action.vm == vm) return it;
        return entries_.end();
    }
    std::vector<Entry>::iterator lower_bound(Timestamp t, VmId vm) {
        return std::lower_bound(entries_.begin(), entries_.end(), std::make_pair(t, vm),
                                [](const Entry& e, const std::pair<Timestamp, VmId>& k) {
                                    return std::make_pair(e.t, e.action.vm) < k;
                                });
    }
    std::vector<Entry>::const_iterator lower_bound(Timestamp t, VmId vm) const {
        return std::lower_bound(entries_.begin(), entries_.end(), std::make_pair(t, vm),
                                [](const Entry& e, const std::pair<Timestamp, VmId>& k) {
                                    return std::make_pair(e.t, e.action.vm) < k;
                                });
    }

    ForecastWindow window_;
    std::vector<Entry> entries_;
};

} // namespace geosched
