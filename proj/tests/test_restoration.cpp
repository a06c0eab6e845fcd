#include "pyrogrid/restoration.hpp"

#include "helpers.hpp"
#include "pyrogrid/errors.hpp"
#include "pyrogrid/testbed.hpp"

#include <doctest.h>

#include <algorithm>

using namespace pyrogrid;

TEST_CASE("no damage yields an empty schedule") {
    const GridNetwork net = build_testbed(testutil::small_testbed_config(1));
    SystemState state = SystemState::intact_for(net);
    std::vector<double> crews{0.0};
    const auto tasks = schedule_repairs(net, state, {}, RepairDurations{}, crews, 0.0);
    CHECK(tasks.empty());
}

TEST_CASE("single crew works tasks sequentially") {
    const GridNetwork net = build_testbed(testutil::small_testbed_config(1));
    SystemState state = SystemState::intact_for(net);
    // pole (8 h) and a feeder line (12 h), both zero-benefit in isolation
    state.poles[net.pole_index(1001)].damage = Damage::failed;
    state.branches[net.branch_index(105)].damage = Damage::failed;
    std::vector<double> crews{0.0};
    const auto tasks = schedule_repairs(
        net, state,
        {{ComponentKind::pole, 1001}, {ComponentKind::branch, 105}}, RepairDurations{}, crews, 0.0);
    REQUIRE(tasks.size() == 2);
    // the line repair unlocks downstream load, the orphan pole none: line first
    CHECK(tasks[0].component_id == 105);
    CHECK(tasks[0].finish_h == doctest::Approx(12.0));
    CHECK(tasks[1].component_id == 1001);
    CHECK(tasks[1].start_h == doctest::Approx(12.0));
    CHECK(tasks[1].finish_h == doctest::Approx(20.0));
}

TEST_CASE("high benefit-per-hour repairs go first") {
    const GridNetwork net = build_testbed(testutil::small_testbed_config(1));
    SystemState state = SystemState::intact_for(net);
    // transformer cut (whole feeder dark, 72 h) vs a leaf branch (12 h).
    // leaf 117 feeds only bus 118 (0.09 weighted MW/h at 12 h); the transformer
    // unlocks the rest of the feeder: far higher weighted MW per hour.
    state.branches[net.branch_index(50)].damage = Damage::failed;
    state.branches[net.branch_index(117)].damage = Damage::failed;
    std::vector<double> crews{0.0};
    const auto tasks = schedule_repairs(
        net, state, {{ComponentKind::branch, 117}, {ComponentKind::branch, 50}}, RepairDurations{},
        crews, 0.0);
    REQUIRE(tasks.size() == 2);
    CHECK(tasks[0].component_id == 50);
    CHECK(tasks[0].benefit_weighted_mw > tasks[1].benefit_weighted_mw);
}

TEST_CASE("re_energize honors the path rule") {
    const GridNetwork net = build_testbed(testutil::small_testbed_config(1));
    SystemState state = SystemState::intact_for(net);
    state.branches[net.branch_index(50)].damage = Damage::failed;  // transformer
    state.branches[net.branch_index(101)].damage = Damage::failed; // feeder head span
    recompute_energization(net, state);

    SUBCASE("repair behind a break returns to service but stays dark") {
        RepairTask task;
        task.kind = ComponentKind::branch;
        task.component_id = 101;
        re_energize(net, state, {task});
        CHECK(state.branches[net.branch_index(101)].damage == Damage::intact);
        CHECK_FALSE(state.branches[net.branch_index(101)].energized);
        CHECK_FALSE(state.bus_energized[net.bus_index(102)]);
    }

    SUBCASE("repairing the transformer bridge re-energizes the feeder head") {
        RepairTask task;
        task.kind = ComponentKind::branch;
        task.component_id = 50;
        re_energize(net, state, {task});
        CHECK(state.bus_energized[net.bus_index(101)]);
        CHECK_FALSE(state.bus_energized[net.bus_index(102)]); // still cut at 101
    }

    SUBCASE("completion order does not change the final state") {
        RepairTask a;
        a.kind = ComponentKind::branch;
        a.component_id = 50;
        RepairTask b;
        b.kind = ComponentKind::branch;
        b.component_id = 101;
        SystemState s1 = state;
        re_energize(net, s1, {a});
        re_energize(net, s1, {b});
        SystemState s2 = state;
        re_energize(net, s2, {b});
        re_energize(net, s2, {a});
        CHECK(s1.bus_energized == s2.bus_energized);
        for (std::size_t i = 0; i < s1.branches.size(); ++i) {
            CHECK(s1.branches[i].energized == s2.branches[i].energized);
        }
    }
}

TEST_CASE("more crews never delay any repair") {
    const GridNetwork net = build_testbed(testutil::small_testbed_config(1));
    SystemState state = SystemState::intact_for(net);
    std::vector<DamagedComponent> damaged;
    for (int id : {103, 105, 107, 111, 120, 125}) {
        state.branches[net.branch_index(id)].damage = Damage::failed;
        damaged.push_back({ComponentKind::branch, id});
    }
    std::vector<double> finish_two, finish_three;
    {
        std::vector<double> crews(2, 0.0);
        auto tasks = schedule_repairs(net, state, damaged, RepairDurations{}, crews, 0.0);
        std::sort(tasks.begin(), tasks.end(),
                  [](const RepairTask& a, const RepairTask& b) { return a.component_id < b.component_id; });
        for (const auto& t : tasks) {
            finish_two.push_back(t.finish_h);
        }
    }
    {
        std::vector<double> crews(3, 0.0);
        auto tasks = schedule_repairs(net, state, damaged, RepairDurations{}, crews, 0.0);
        std::sort(tasks.begin(), tasks.end(),
                  [](const RepairTask& a, const RepairTask& b) { return a.component_id < b.component_id; });
        for (const auto& t : tasks) {
            finish_three.push_back(t.finish_h);
        }
    }
    REQUIRE(finish_two.size() == finish_three.size());
    for (std::size_t i = 0; i < finish_two.size(); ++i) {
        CHECK(finish_three[i] <= finish_two[i] + 1e-9);
    }
}

TEST_CASE("build_curve on a constant series") {
    std::vector<CurveSample> samples;
    for (int i = 0; i < 10; ++i) {
        samples.push_back({i * 0.5, 1.0});
    }
    const ResilienceCurve curve = build_curve(samples, 5.0, 100.0);
    CHECK(curve.robustness == 1.0);
    CHECK(curve.lost_performance_area == 0.0);
    CHECK(curve.weighted_energy_not_served_mwh == 0.0);
    CHECK_FALSE(curve.impact_start_h.has_value());
}

TEST_CASE("build_curve rectangle drop") {
    // 1.0 until 10 h, 0.6 on [10, 20), 1.0 from 20 h to 30 h
    std::vector<CurveSample> samples;
    for (int i = 0; i < 60; ++i) {
        const double t = i * 0.5;
        samples.push_back({t, (t >= 10.0 && t < 20.0) ? 0.6 : 1.0});
    }
    const ResilienceCurve curve = build_curve(samples, 30.0, 390.0);
    CHECK(curve.robustness == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(curve.lost_performance_area == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(curve.weighted_energy_not_served_mwh == doctest::Approx(4.0 * 390.0).epsilon(1e-12));
    REQUIRE(curve.impact_start_h.has_value());
    CHECK(*curve.impact_start_h == doctest::Approx(10.0));
    CHECK(*curve.degraded_start_h == doctest::Approx(10.0));
    CHECK(*curve.restoration_start_h == doctest::Approx(20.0));
    CHECK(*curve.recovered_at_h == doctest::Approx(20.0));
    CHECK(curve.rapidity_per_hour == doctest::Approx(0.4 / 10.0));
}

TEST_CASE("stepped recovery matches the trapezoid oracle within one step width") {
    // drop to 0.6 at 10 h, then climb linearly (in steps) from 20 h to 30 h
    const double dt = 0.5;
    std::vector<CurveSample> samples;
    for (int i = 0; i < 80; ++i) {
        const double t = i * dt;
        double perf = 1.0;
        if (t >= 10.0 && t < 20.0) {
            perf = 0.6;
        } else if (t >= 20.0 && t < 30.0) {
            perf = 0.6 + 0.4 * (t - 20.0) / 10.0;
        }
        samples.push_back({t, perf});
    }
    const ResilienceCurve curve = build_curve(samples, 40.0, 0.0);
    // exact trapezoid area: 0.4*10 + 0.4*10/2 = 6.0; step integration may differ
    // by at most one step of the ramp: 0.4 * dt
    CHECK(curve.lost_performance_area == doctest::Approx(6.0).epsilon(0.04));
    CHECK(std::abs(curve.lost_performance_area - 6.0) <= 0.4 * dt + 1e-12);
}

TEST_CASE("curve metrics are invariant under sample refinement") {
    std::vector<CurveSample> coarse;
    for (int i = 0; i < 30; ++i) {
        const double t = i * 1.0;
        coarse.push_back({t, (t >= 10.0 && t < 20.0) ? 0.6 : 1.0});
    }
    std::vector<CurveSample> fine;
    for (int i = 0; i < 120; ++i) {
        const double t = i * 0.25;
        fine.push_back({t, (t >= 10.0 && t < 20.0) ? 0.6 : 1.0});
    }
    const ResilienceCurve a = build_curve(coarse, 30.0, 50.0);
    const ResilienceCurve b = build_curve(fine, 30.0, 50.0);
    CHECK(a.robustness == b.robustness);
    CHECK(a.lost_performance_area == doctest::Approx(b.lost_performance_area).epsilon(1e-12));
}

TEST_CASE("build_curve rejects empty input") {
    CHECK_THROWS_AS(build_curve({}, 10.0, 0.0), ValidationError);
}

TEST_CASE("community metrics accumulate outage hours") {
    std::vector<Load> loads;
    Load crit;
    crit.id = 1;
    crit.bus = 1;
    crit.demand_mw = 2.0;
    crit.criticality = Criticality::critical;
    crit.customers = 10;
    Load std1;
    std1.id = 2;
    std1.bus = 1;
    std1.demand_mw = 5.0;
    std1.customers = 100;
    loads.push_back(crit);
    loads.push_back(std1);

    CommunityMetrics m;
    m.accumulate(loads, {2.0, 5.0}, 0.5); // all served
    CHECK(m.customer_interruption_hours == 0.0);
    m.accumulate(loads, {0.0, 2.5}, 0.5); // both short
    CHECK(m.critical_outage_hours[1] == doctest::Approx(0.5));
    CHECK(m.customer_interruption_hours == doctest::Approx(55.0));
}
