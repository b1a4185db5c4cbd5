#include "support.hpp"

#include <geosched/fitness.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <memory>
#include <random>

using namespace geosched;
using test_support::kEpoch;
using test_support::kHour;

namespace {

// CloudState points at its Cloud, so fixtures keep the cloud at a stable
// heap address.
struct Toy {
    std::unique_ptr<Cloud> cloud;
    CloudState start;
    ForecastWindow window;
    GeoTraceSet traces;
    PPueModel ppue_model = PPueModel::dual_cooling_default();
};

// One VM placed on pm0; two PMs in one location with constant traces.
Toy make_toy(int window_len = 3, double price = 0.10, double temp = -10.0) {
    Toy toy;
    toy.cloud = std::make_unique<Cloud>(test_support::make_cloud({.n_locations = 1, .n_pms = 2}));
    VmId vm = test_support::add_vm(*toy.cloud, "vm0", {4, 8});
    toy.start = CloudState(*toy.cloud, kEpoch);
    toy.start.mark_pending(vm);
    toy.start.move(vm, PmId{0});
    toy.window = ForecastWindow{kEpoch, kHour, window_len};
    toy.traces = test_support::constant_traces(*toy.cloud, price, temp, kEpoch,
                                               static_cast<std::size_t>(window_len));
    return toy;
}

} // namespace

TEST_CASE("trajectory of an empty schedule is constant", "[fitness]") {
    Toy toy = make_toy(4);
    auto traj = trajectory(toy.start, Schedule(toy.window));
    REQUIRE(traj.size() == 4);
    for (std::size_t i = 0; i < traj.size(); ++i) {
        REQUIRE(traj[i].pm_of(VmId{0}) == PmId{0});
        REQUIRE(traj.timestamp_at(i) == kEpoch + static_cast<Timestamp>(i) * kHour);
    }
}

TEST_CASE("a single action is visible from its step onward", "[fitness]") {
    Toy toy = make_toy(4);
    Schedule s(toy.window);
    s.insert(kEpoch + kHour, Action{VmId{0}, PmId{1}});
    auto traj = trajectory(toy.start, s);
    REQUIRE(traj[0].pm_of(VmId{0}) == PmId{0});
    for (std::size_t i = 1; i < 4; ++i) REQUIRE(traj[i].pm_of(VmId{0}) == PmId{1});
}

TEST_CASE("trajectory replays a schedule-table style action sequence", "[fitness]") {
    // Hand replay: three actions at consecutive hours move three VMs; each
    // change becomes visible at its own step and persists.
    Cloud cloud = test_support::make_cloud({.n_pms = 5});
    for (int v = 0; v < 3; ++v) test_support::add_vm(cloud, "vm" + std::to_string(v + 1), {1, 2});
    CloudState start(cloud, kEpoch);
    start.mark_pending(VmId{0});
    start.move(VmId{0}, PmId{0});
    start.mark_pending(VmId{1});
    start.move(VmId{1}, PmId{1});
    start.mark_pending(VmId{2});
    start.move(VmId{2}, PmId{3});

    ForecastWindow w{kEpoch, kHour, 3};
    Schedule s(w);
    s.insert(kEpoch, Action{VmId{0}, PmId{2}});
    s.insert(kEpoch + kHour, Action{VmId{1}, PmId{4}});
    s.insert(kEpoch + 2 * kHour, Action{VmId{2}, PmId{1}});

    auto traj = trajectory(start, s);
    REQUIRE(traj[0].pm_of(VmId{0}) == PmId{2});
    REQUIRE(traj[0].pm_of(VmId{1}) == PmId{1});
    REQUIRE(traj[0].pm_of(VmId{2}) == PmId{3});
    REQUIRE(traj[1].pm_of(VmId{1}) == PmId{4});
    REQUIRE(traj[1].pm_of(VmId{2}) == PmId{3});
    REQUIRE(traj[2].pm_of(VmId{2}) == PmId{1});
    REQUIRE(traj[2].pm_of(VmId{0}) == PmId{2});
}

TEST_CASE("trajectory applies boot and delete requests before actions", "[fitness]") {
    Cloud cloud = test_support::make_cloud({.n_pms = 2});
    VmId vm0 = test_support::add_vm(cloud, "vm0", {4, 8});
    VmId vm1 = test_support::add_vm(cloud, "vm1", {2, 2});
    CloudState start(cloud, kEpoch);
    start.mark_pending(vm0);
    start.move(vm0, PmId{0});
    ForecastWindow w{kEpoch, kHour, 3};

    std::vector<VMRequest> reqs{
        {kEpoch + kHour, VMRequest::Kind::Boot, vm1},
        {kEpoch + 2 * kHour, VMRequest::Kind::Delete, vm0},
    };
    Schedule s(w);
    s.insert(kEpoch + kHour, Action{vm1, PmId{1}});

    auto traj = trajectory(start, s, reqs);
    REQUIRE(traj[0].is_absent(vm1));
    REQUIRE(traj[1].pm_of(vm1) == PmId{1});
    REQUIRE(traj[1].is_placed(vm0));
    REQUIRE(traj[2].is_absent(vm0));
    REQUIRE(traj[2].pm_of(vm1) == PmId{1});
}

TEST_CASE("energy cost of a fully suspended cloud is zero", "[fitness]") {
    Toy toy = make_toy(3);
    CloudState empty(*toy.cloud, kEpoch);
    auto traj = trajectory(empty, Schedule(toy.window));
    REQUIRE(energy_cost(traj, toy.traces, toy.ppue_model) == 0.0);
}

TEST_CASE("energy cost golden value: 200 W at pPUE 1.05 and 0.10 USD/kWh for 1 h", "[fitness]") {
    // 0.2 kWh * 1.05 * 0.10 USD/kWh = 0.021 USD
    Cloud cloud = test_support::make_cloud(
        {.n_locations = 1, .n_pms = 1, .capacity = {4.0, 8.0}, .power_idle_w = 80.0, .power_peak_w = 200.0});
    VmId vm = test_support::add_vm(cloud, "vm0", {4, 8}); // fills the PM: util 1.0
    CloudState state(cloud, kEpoch);
    state.mark_pending(vm);
    state.move(vm, PmId{0});

    ForecastWindow w{kEpoch, kHour, 1};
    GeoTraceSet traces = test_support::constant_traces(cloud, 0.10, -10.0, kEpoch, 1);
    auto traj = trajectory(state, Schedule(w));
    REQUIRE_THAT(energy_cost(traj, traces, PPueModel::dual_cooling_default()),
                 Catch::Matchers::WithinRel(0.021, 1e-12));
}

TEST_CASE("energy cost is linear in prices", "[fitness]") {
    Toy toy = make_toy(5, 0.13, 12.0);
    Schedule s(toy.window);
    s.insert(kEpoch + kHour, Action{VmId{0}, PmId{1}});
    auto traj = trajectory(toy.start, s);

    GeoTraceSet doubled = toy.traces;
    for (auto& [key, trace] : doubled) {
        std::vector<double> vals = trace.prices.values();
        for (double& v : vals) v *= 2.0;
        trace.prices = TimeSeries<double>(trace.prices.start(), trace.prices.step(), std::move(vals));
    }
    double base = energy_cost(traj, toy.traces, toy.ppue_model);
    REQUIRE(base > 0.0);
    REQUIRE(energy_cost(traj, doubled, toy.ppue_model) == 2.0 * base);
}

TEST_CASE("consolid reproduces the worked example", "[fitness]") {
    // util series [0, 0.6, 0.8, 0, 0]: positive elements average 0.7,
    // consolid = 1 - 0.7 = 0.3. Without zero exclusion the same series
    // would give 1 - 1.4/5 = 0.72.
    std::vector<std::vector<double>> utils{{0.0, 0.6, 0.8, 0.0, 0.0}};
    REQUIRE_THAT(consolid_from_utils(utils), Catch::Matchers::WithinAbs(0.3, 1e-12));

    double with_zeros = 1.0 - (0.0 + 0.6 + 0.8 + 0.0 + 0.0) / 5.0;
    REQUIRE_THAT(with_zeros, Catch::Matchers::WithinAbs(0.72, 1e-12));
    REQUIRE(consolid_from_utils(utils) != with_zeros);
}

TEST_CASE("consolid over a trajectory matches the util-series route", "[fitness]") {
    // Build states whose single-PM utils are exactly [0, 0.6, 0.8, 0, 0]
    // via boot/delete requests and placements.
    Cloud cloud = test_support::make_cloud({.n_pms = 1, .capacity = {10.0, 10.0}});
    VmId a = test_support::add_vm(cloud, "a", {6, 6});
    VmId b = test_support::add_vm(cloud, "b", {8, 8});
    CloudState start(cloud, kEpoch);

    ForecastWindow w{kEpoch, kHour, 5};
    std::vector<VMRequest> reqs{
        {kEpoch + kHour, VMRequest::Kind::Boot, a},
        {kEpoch + 2 * kHour, VMRequest::Kind::Delete, a},
        {kEpoch + 2 * kHour, VMRequest::Kind::Boot, b},
        {kEpoch + 3 * kHour, VMRequest::Kind::Delete, b},
    };
    Schedule s(w);
    s.insert(kEpoch + kHour, Action{a, PmId{0}});
    s.insert(kEpoch + 2 * kHour, Action{b, PmId{0}});

    auto traj = trajectory(start, s, reqs);
    REQUIRE(utilisation(traj[1], PmId{0}) == 0.6);
    REQUIRE(utilisation(traj[2], PmId{0}) == 0.8);
    REQUIRE_THAT(consolid(traj), Catch::Matchers::WithinAbs(0.3, 1e-12));
}

TEST_CASE("consolid is zero when every hosting PM runs full", "[fitness]") {
    std::vector<std::vector<double>> utils{{1.0, 1.0, 0.0}, {0.0, 1.0, 1.0}, {0.0, 0.0, 0.0}};
    REQUIRE(consolid_from_utils(utils) == 0.0);
}

TEST_CASE("always-suspended PMs contribute no consolidation badness", "[fitness]") {
    std::vector<std::vector<double>> utils{{0.0, 0.6, 0.8, 0.0, 0.0}, {0.0, 0.0, 0.0, 0.0, 0.0}};
    REQUIRE_THAT(consolid_from_utils(utils), Catch::Matchers::WithinAbs(0.15, 1e-12));
}

TEST_CASE("migration penalty counts only PM-changing actions", "[fitness]") {
    Cloud cloud = test_support::make_cloud({.n_pms = 3, .capacity = {100.0, 100.0}});
    for (int v = 0; v < 10; ++v) test_support::add_vm(cloud, "vm" + std::to_string(v), {1, 1});
    CloudState start(cloud, kEpoch);
    for (std::int32_t v = 0; v < 10; ++v) {
        start.mark_pending(VmId{v});
        start.move(VmId{v}, PmId{v % 3});
    }
    ForecastWindow w{kEpoch, kHour, 12};

    SECTION("empty schedule") { REQUIRE(migration_penalty(Schedule(w), start) == 0.0); }

    SECTION("three real migrations out of 10 VMs x 12 steps") {
        Schedule s(w);
        s.insert(kEpoch, Action{VmId{0}, PmId{1}});
        s.insert(kEpoch + 3 * kHour, Action{VmId{1}, PmId{2}});
        s.insert(kEpoch + 5 * kHour, Action{VmId{2}, PmId{0}});
        s.insert(kEpoch + 6 * kHour, Action{VmId{3}, PmId{0}}); // vm3 already on pm0: no-op
        REQUIRE(migration_penalty(s, start) == 3.0 / 120.0);
    }

    SECTION("every vm migrated every step") {
        Schedule s(w);
        for (int i = 0; i < 12; ++i)
            for (std::int32_t v = 0; v < 10; ++v)
                s.insert(kEpoch + i * kHour, Action{VmId{v}, PmId{(v + i + 1) % 3}});
        REQUIRE(migration_penalty(s, start) == 1.0);
    }
}

TEST_CASE("constraint penalty is the violating fraction of (pm, step) pairs", "[fitness]") {
    Cloud cloud = test_support::make_cloud({.n_pms = 2, .capacity = {8.0, 16.0}});
    VmId big = test_support::add_vm(cloud, "big", {9, 4});     // overflows cpu
    VmId huge = test_support::add_vm(cloud, "huge", {12, 40}); // overflows even more
    CloudState feasible(cloud, kEpoch);
    ForecastWindow w{kEpoch, kHour, 12};

    REQUIRE(constraint_penalty(trajectory(feasible, Schedule(w))) == 0.0);

    CloudState overfull(cloud, kEpoch);
    overfull.mark_pending(big);
    overfull.move(big, PmId{0});
    REQUIRE(constraint_penalty(trajectory(overfull, Schedule(w))) == 0.5);

    // magnitude of the overflow does not matter
    CloudState worse(cloud, kEpoch);
    worse.mark_pending(huge);
    worse.move(huge, PmId{0});
    REQUIRE(constraint_penalty(trajectory(worse, Schedule(w))) ==
            constraint_penalty(trajectory(overfull, Schedule(w))));
}

TEST_CASE("total fitness: constraint-only weights score a feasible schedule zero", "[fitness]") {
    Toy toy = make_toy(3);
    FitnessWeights w{0.0, 0.0, 0.0, 1.0};
    auto fb = total_fitness(Schedule(toy.window), toy.start, toy.traces, toy.ppue_model, w);
    REQUIRE(fb.total == 0.0);
    REQUIRE(fb.constraint_penalty == 0.0);
}

TEST_CASE("total fitness under energy-only weights orders like raw energy", "[fitness]") {
    Toy toy = make_toy(4);
    EvalContext ctx(toy.start, toy.window, toy.traces, toy.ppue_model, FitnessWeights{1, 0, 0, 0});

    std::mt19937_64 rng(23);
    std::vector<FitnessBreakdown> fbs;
    for (int i = 0; i < 20; ++i) {
        Schedule s(toy.window);
        for (int step = 0; step < 4; ++step)
            if (rng() % 2)
                s.insert(kEpoch + step * kHour, Action{VmId{0}, PmId{static_cast<std::int32_t>(rng() % 2)}});
        fbs.push_back(ctx.evaluate(s));
    }
    for (const auto& a : fbs)
        for (const auto& b : fbs) {
            REQUIRE((a.total < b.total) == (a.energy_cost_usd < b.energy_cost_usd));
        }
}

TEST_CASE("cheaper location wins under energy-only weights", "[fitness]") {
    Cloud cloud({"cpu", "ram"});
    cloud.add_location(Location{"pricey", "", ""});
    cloud.add_location(Location{"bargain", "", ""});
    cloud.add_pm(PhysicalMachine{"pm-a", ResourceVec({8, 16}), LocationId{0}, 100, 200});
    cloud.add_pm(PhysicalMachine{"pm-b", ResourceVec({8, 16}), LocationId{1}, 100, 200});
    VmId vm = cloud.add_vm(VirtualMachine{"vm0", ResourceVec({4, 8})});

    GeoTraceSet traces;
    auto mk = [&](const std::string& name, double price) {
        traces.emplace(name, GeoTrace{name, TimeSeries<double>(kEpoch, kHour, std::vector<double>(4, price)),
                                      TimeSeries<double>(kEpoch, kHour, std::vector<double>(4, 10.0))});
    };
    mk("pricey", 0.20);
    mk("bargain", 0.10);

    CloudState start(cloud, kEpoch);
    start.mark_pending(vm);
    start.move(vm, PmId{0});
    ForecastWindow w{kEpoch, kHour, 4};

    Schedule stay(w);
    Schedule move(w);
    move.insert(kEpoch, Action{vm, PmId{1}});

    FitnessWeights weights{1, 0, 0, 0};
    auto fb_stay = total_fitness(stay, start, traces, PPueModel::dual_cooling_default(), weights);
    auto fb_move = total_fitness(move, start, traces, PPueModel::dual_cooling_default(), weights);
    REQUIRE(fb_move.total < fb_stay.total);
    REQUIRE(fb_move.energy_cost_usd < fb_stay.energy_cost_usd);
}

TEST_CASE("fitness evaluation is pure", "[fitness]") {
    Toy toy = make_toy(4);
    Schedule s(toy.window);
    s.insert(kEpoch + kHour, Action{VmId{0}, PmId{1}});
    EvalContext ctx(toy.start, toy.window, toy.traces, toy.ppue_model, FitnessWeights{1, 0.5, 0.25, 2});
    FitnessBreakdown a = ctx.evaluate(s);
    FitnessBreakdown b = ctx.evaluate(s);
    REQUIRE(a == b); // bit-identical
}

TEST_CASE("streaming evaluation agrees with the component functions", "[fitness]") {
    std::mt19937_64 rng(31);
    for (int iter = 0; iter < 40; ++iter) {
        Cloud cloud = test_support::make_cloud(
            {.n_locations = 2, .n_pms = 3, .capacity = {8.0, 16.0}});
        int n_vms = 2 + static_cast<int>(rng() % 4);
        for (int v = 0; v < n_vms; ++v)
            test_support::add_vm(cloud, "vm" + std::to_string(v),
                                 {1.0 + static_cast<double>(rng() % 6), 2.0 + static_cast<double>(rng() % 10)});

        CloudState start(cloud, kEpoch);
        for (std::int32_t v = 0; v < n_vms; ++v) {
            start.mark_pending(VmId{v});
            if (rng() % 4 != 0) start.move(VmId{v}, PmId{static_cast<std::int32_t>(rng() % 3)});
        }

        int len = 2 + static_cast<int>(rng() % 4);
        ForecastWindow w{kEpoch, kHour, len};
        TraceSynthParams params;
        params.n_locations = 2;
        GeoTraceSet traces = synthesize_traces(iter, kEpoch, kHour, static_cast<std::size_t>(len), params);
        // trace keys are loc-xx, matching make_cloud's location names
        PPueModel model = PPueModel::dual_cooling_default();

        Schedule s(w);
        for (int i = 0; i < len; ++i)
            for (std::int32_t v = 0; v < n_vms; ++v)
                if (rng() % 3 == 0)
                    s.upsert(kEpoch + i * kHour, Action{VmId{v}, PmId{static_cast<std::int32_t>(rng() % 3)}});

        FitnessWeights weights{1.0, 0.5, 0.25, 2.0};
        EvalContext ctx(start, w, traces, model, weights);
        FitnessBreakdown fast = ctx.evaluate(s);

        auto traj = trajectory(start, s);
        double slow_energy = energy_cost(traj, traces, model);
        double slow_consolid = consolid(traj);
        double slow_migration = migration_penalty(s, start);
        double slow_constraint = constraint_penalty(traj);

        REQUIRE_THAT(fast.energy_cost_usd, Catch::Matchers::WithinRel(slow_energy, 1e-12));
        REQUIRE(fast.consolid == slow_consolid);
        REQUIRE(fast.migration_penalty == slow_migration);
        REQUIRE(fast.constraint_penalty == slow_constraint);

        double slow_total = weights.energy * (fast.energy_ceiling_usd > 0
                                                  ? slow_energy / fast.energy_ceiling_usd
                                                  : 0.0) +
                            weights.consolid * slow_consolid + weights.migration * slow_migration +
                            weights.constraint * slow_constraint;
        REQUIRE_THAT(fast.total, Catch::Matchers::WithinRel(slow_total, 1e-12));
    }
}
