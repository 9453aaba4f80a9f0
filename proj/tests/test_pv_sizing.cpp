#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "oracle/billing_oracle.hpp"
#include "pvhc/errors.hpp"
#include "pvhc/load_profile.hpp"
#include "pvhc/pv_sizing.hpp"
#include "pvhc/rng.hpp"
#include "pvhc/tariff.hpp"

using namespace pvhc;

namespace {

TariffSchedule duke_tariff() { return parse_tariff(PVHC_DATA_DIR "/duke_tou_2018.json"); }

}  // namespace

TEST_CASE("capital recovery factor matches the closed form") {
    CHECK(capital_recovery_factor(0.08, 20) == doctest::Approx(0.101852).epsilon(1e-5));
    CHECK(std::abs(capital_recovery_factor(0.08, 20) - 0.1018522088) < 1e-9);
    CHECK(capital_recovery_factor(0.0, 20) == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(capital_recovery_factor(0.08, 1) == doctest::Approx(1.08).epsilon(1e-12));
    CHECK(capital_recovery_factor(0.3, 1) == doctest::Approx(1.3).epsilon(1e-12));
    CHECK_THROWS_AS(capital_recovery_factor(-0.1, 20), ValidationError);
    CHECK_THROWS_AS(capital_recovery_factor(0.08, 0), ValidationError);
}

TEST_CASE("levelized cost is linear and matches the paper constants") {
    PvCostModel model;  // $1000/kW, 20 y, 8%
    CHECK(levelized_cost(model, 0.0) == 0.0);
    CHECK(levelized_cost(model, 10.0) == doctest::Approx(1018.52).epsilon(1e-5));
    CHECK(levelized_cost(model, 7.0) == doctest::Approx(2.0 * levelized_cost(model, 3.5)));
    CHECK_THROWS_AS(levelized_cost(model, -1.0), ValidationError);
}

TEST_CASE("tariff fixture reproduces every TOU rate on single-interval bills") {
    TariffSchedule tariff = duke_tariff();
    YearCalendar cal(3600.0);
    BillingContext ctx = make_billing_context(tariff, cal);

    // (month index 0-based, hour, expected $/kWh)
    const struct {
        int month;
        int hour;
        double rate;
    } cases[] = {
        {6, 22, 0.07063},  // summer off-peak, 10 PM July
        {6, 5, 0.07063},   // summer off-peak, early morning
        {6, 11, 0.11996},  // summer partial-peak 11 AM
        {6, 18, 0.11996},  // summer partial-peak 6 PM
        {6, 13, 0.23507},  // summer peak 1 PM
        {8, 17, 0.23507},  // summer peak 5 PM September
        {0, 6, 0.22356},   // winter peak 6 AM January
        {11, 8, 0.22356},  // winter peak 8 AM December
        {0, 9, 0.11708},   // winter partial 9 AM
        {0, 14, 0.11708},  // winter partial 2 PM
        {0, 19, 0.11708},  // winter partial 7 PM
        {0, 12, 0.07063},  // winter noon gap resolves to off-peak
        {0, 21, 0.07063},  // winter off-peak evening
    };
    for (const auto& c : cases) {
        std::vector<double> load(ctx.intervals(), 0.0);
        load[ctx.month_offsets[static_cast<std::size_t>(c.month)] +
             static_cast<std::size_t>(c.hour)] = 1.0;
        BillResult bill = annual_bill(load, {}, 0.0, ctx);
        CAPTURE(c.month);
        CAPTURE(c.hour);
        CHECK(bill.energy_usd == doctest::Approx(c.rate).epsilon(1e-12));
        CHECK(bill.demand_usd == doctest::Approx(13.0).epsilon(1e-12));
    }
}

TEST_CASE("surplus PV earns nothing and the bill never goes negative") {
    TariffSchedule tariff = duke_tariff();
    YearCalendar cal(3600.0);
    BillingContext ctx = make_billing_context(tariff, cal);
    PvShape shape = clear_sky_year(cal);

    std::vector<double> load(ctx.intervals(), 0.0);
    // One midday interval in June with PV far above load.
    const std::size_t idx = ctx.month_offsets[5] + 12;
    REQUIRE(shape.pu[idx] > 0.5);
    load[idx] = 0.5;
    BillResult with_pv = annual_bill(load, shape.pu, 10.0, ctx);
    CHECK(with_pv.energy_usd == 0.0);
    CHECK(with_pv.demand_usd == 0.0);
    CHECK(with_pv.total() >= 0.0);
}

TEST_CASE("demand charge bills the monthly net peak") {
    TariffSchedule tariff = duke_tariff();
    YearCalendar cal(3600.0);
    BillingContext ctx = make_billing_context(tariff, cal);
    // Constant 2 kW across April (a 30-day month), nothing else all year.
    std::vector<double> load(ctx.intervals(), 0.0);
    for (std::size_t i = ctx.month_offsets[3]; i < ctx.month_offsets[4]; ++i) load[i] = 2.0;
    BillResult bill = annual_bill(load, {}, 0.0, ctx);
    CHECK(bill.demand_usd == doctest::Approx(26.0).epsilon(1e-12));
}

TEST_CASE("annual_bill matches the straight-line oracle") {
    TariffSchedule tariff = duke_tariff();
    for (double res : {3600.0, 1800.0}) {
        YearCalendar cal(res);
        BillingContext ctx = make_billing_context(tariff, cal);
        PvShape shape = clear_sky_year(cal);
        Rng rng(321);
        std::vector<double> load(ctx.intervals());
        for (double& x : load) x = rng.uniform(0.0, 4.0);
        for (double pv : {0.0, 2.0, 6.5, 15.0}) {
            BillResult ours = annual_bill(load, shape.pu, pv, ctx);
            auto ref = oracle::bill(load, shape.pu, pv, tariff, res, cal.n_days());
            CHECK(ours.energy_usd == doctest::Approx(ref.energy_usd).epsilon(1e-10));
            CHECK(ours.demand_usd == doctest::Approx(ref.demand_usd).epsilon(1e-10));
        }
    }
}

TEST_CASE("bills are non-increasing in installed PV") {
    TariffSchedule tariff = duke_tariff();
    YearCalendar cal(1800.0);
    BillingContext ctx = make_billing_context(tariff, cal);
    PvShape shape = clear_sky_year(cal);
    LoadPool pool = generate_synthetic_pool(3, 5, 1800.0);
    for (const LoadProfile& p : pool.profiles) {
        auto year = tile_weekly_to_year(p.kw, cal, {});
        double prev = annual_bill(year, shape.pu, 0.0, ctx).total();
        for (double pv = 0.5; pv <= 20.0; pv += 0.5) {
            const double cur = annual_bill(year, shape.pu, pv, ctx).total();
            CHECK(cur <= prev + 1e-9);
            prev = cur;
        }
    }
}

TEST_CASE("optimal size is zero when PV cannot offset anything") {
    TariffSchedule tariff = duke_tariff();
    YearCalendar cal(1800.0);
    BillingContext ctx = make_billing_context(tariff, cal);
    PvShape shape = clear_sky_year(cal);
    PvCostModel model;

    SUBCASE("all-zero load") {
        std::vector<double> load(ctx.intervals(), 0.0);
        SizingResult r = optimal_size(load, shape.pu, ctx, model, {});
        CHECK(r.optimal_kw == 0.0);
        CHECK(r.candidates.front().net_benefit_usd == 0.0);
        for (const auto& c : r.candidates)
            if (c.kw > 0.0) CHECK(c.net_benefit_usd < 0.0);
    }
    SUBCASE("night-only load") {
        std::vector<double> load(ctx.intervals(), 0.0);
        const std::size_t per_day = cal.intervals_per_day();
        for (int d = 0; d < cal.n_days(); ++d)
            for (std::size_t k = 0; k < per_day; ++k) {
                const double hour = static_cast<double>(k) * 1800.0 / 3600.0;
                if (hour < 4.0 || hour >= 22.0)
                    load[static_cast<std::size_t>(d) * per_day + k] = 3.0;
            }
        SizingResult r = optimal_size(load, shape.pu, ctx, model, {});
        CHECK(r.optimal_kw == 0.0);
    }
}

TEST_CASE("net benefit at zero kW is exactly zero and zero is always a candidate") {
    TariffSchedule tariff = duke_tariff();
    YearCalendar cal(1800.0);
    BillingContext ctx = make_billing_context(tariff, cal);
    PvShape shape = clear_sky_year(cal);
    LoadPool pool = generate_synthetic_pool(1, 8, 1800.0);
    auto year = tile_weekly_to_year(pool.profiles[0].kw, cal, {});
    SizingGrid grid{2.0, 6.0, 1.0};
    SizingResult r = optimal_size(year, shape.pu, ctx, PvCostModel{}, grid);
    CHECK(r.candidates.front().kw == 0.0);
    CHECK(r.candidates.front().net_benefit_usd == 0.0);
}

TEST_CASE("sizing search equals exhaustive oracle recomputation") {
    TariffSchedule tariff = duke_tariff();
    YearCalendar cal(1800.0);
    BillingContext ctx = make_billing_context(tariff, cal);
    PvShape shape = clear_sky_year(cal);
    PvCostModel model;
    LoadPool pool = generate_synthetic_pool(10, 17, 1800.0);
    SizingGrid grid{0.0, 20.0, 0.5};

    for (const LoadProfile& p : pool.profiles) {
        auto year = tile_weekly_to_year(p.kw, cal, {});
        SizingResult ours = optimal_size(year, shape.pu, ctx, model, grid);

        // Oracle: recompute every candidate bill with the straight-line path.
        const double bill0 = oracle::bill(year, shape.pu, 0.0, tariff, 1800.0, cal.n_days()).total();
        double best_net = -1e300, best_kw = -1.0;
        std::size_t k = 0;
        for (double kw = 0.0; kw <= 20.0 + 1e-9; kw += 0.5, ++k) {
            const double bill = oracle::bill(year, shape.pu, kw, tariff, 1800.0, cal.n_days()).total();
            const double net = (bill0 - bill) - levelized_cost(model, kw);
            CHECK(ours.candidates[k].net_benefit_usd == doctest::Approx(net).epsilon(1e-9));
            if (net > best_net) {
                best_net = net;
                best_kw = kw;
            }
        }
        CHECK(ours.optimal_kw == best_kw);
    }
}

TEST_CASE("net benefit eventually decreases, so wide grids keep an interior optimum") {
    TariffSchedule tariff = duke_tariff();
    YearCalendar cal(1800.0);
    BillingContext ctx = make_billing_context(tariff, cal);
    PvShape shape = clear_sky_year(cal);
    LoadPool pool = generate_synthetic_pool(4, 23, 1800.0);
    for (const LoadProfile& p : pool.profiles) {
        auto year = tile_weekly_to_year(p.kw, cal, {});
        SizingResult r = optimal_size(year, shape.pu, ctx, PvCostModel{}, {0.0, 40.0, 0.5});
        CHECK(r.optimal_kw < 40.0);
        CHECK(r.candidates.back().net_benefit_usd < r.candidates.front().net_benefit_usd + 1e-9);
    }
}

TEST_CASE("scaling every rate up moves the optimum weakly toward larger sizes") {
    TariffSchedule base = duke_tariff();
    YearCalendar cal(1800.0);
    PvShape shape = clear_sky_year(cal);
    LoadPool pool = generate_synthetic_pool(3, 29, 1800.0);
    for (const LoadProfile& p : pool.profiles) {
        auto year = tile_weekly_to_year(p.kw, cal, {});
        double prev_kw = -1.0;
        for (double lambda : {0.5, 1.0, 2.0}) {
            TariffSchedule t = base;
            t.demand_charge_usd_per_kw *= lambda;
            for (auto& s : t.seasons)
                for (auto& per : s.periods) per.rate_usd_per_kwh *= lambda;
            BillingContext ctx = make_billing_context(t, cal);
            SizingResult r = optimal_size(year, shape.pu, ctx, PvCostModel{}, {});
            CHECK(r.optimal_kw >= prev_kw);
            prev_kw = r.optimal_kw;
        }
    }
}

TEST_CASE("clear-sky shape is bounded, dark at night and consistent across horizons") {
    YearCalendar cal(1800.0);
    PvShape year = clear_sky_year(cal);
    for (double v : year.pu) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    const std::size_t per_day = cal.intervals_per_day();
    for (int d = 0; d < cal.n_days(); ++d) {
        CHECK(year.pu[static_cast<std::size_t>(d) * per_day] == 0.0);       // midnight
        CHECK(year.pu[static_cast<std::size_t>(d) * per_day + 8] == 0.0);   // 4 AM
        CHECK(year.pu[static_cast<std::size_t>(d) * per_day + 24] > 0.0);   // noon
    }
    PvShape week = clear_sky_week(1800.0, 25);
    for (std::size_t k = 0; k < week.pu.size(); ++k)
        CHECK(week.pu[k] == year.pu[25 * 7 * per_day + k]);
}

TEST_CASE("weekly tiling honors monthly scale factors") {
    YearCalendar cal(1800.0);
    std::vector<double> week(cal.intervals_per_day() * 7, 1.0);
    std::vector<double> factors(12, 1.0);
    factors[0] = 1.5;
    factors[6] = 0.5;
    auto year = tile_weekly_to_year(week, cal, factors);
    REQUIRE(year.size() == cal.intervals());
    CHECK(year[0] == 1.5);                                     // January
    CHECK(year[cal.month_offsets()[6]] == 0.5);                // July
    CHECK(year[cal.month_offsets()[2]] == 1.0);                // March
}

TEST_CASE("pv shape CSV parses spacing and bounds") {
    const std::string good = "t,pu_output\n0,0\n1800,0.25\n3600,1.0\n5400,0\n";
    PvShape s = parse_shape_csv_text(good);
    CHECK(s.resolution_s == 1800.0);
    CHECK(s.pu.size() == 4);
    const std::string bad = "t,pu_output\n0,0\n1800,1.25\n";
    CHECK_THROWS_AS(parse_shape_csv_text(bad), ParseError);
    const std::string uneven = "t,pu_output\n0,0\n1800,0.5\n4000,0.5\n";
    CHECK_THROWS_AS(parse_shape_csv_text(uneven), ParseError);
}
