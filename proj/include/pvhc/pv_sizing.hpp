#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "pvhc/tariff.hpp"

namespace pvhc {

struct PvCostModel {
    double a_pv_usd_per_kw = 1000.0;
    int lifetime_y = 20;
    double discount_rate = 0.08;
};

// Annuity factor i(1+i)^y / ((1+i)^y - 1); 1/y in the zero-interest limit.
double capital_recovery_factor(double i, int y);

// Levelized annual PV cost C = k_pv * a_pv * p_pv.
double levelized_cost(const PvCostModel& model, double p_pv_kw);

// Normalized PV production, per unit of installed kW.
struct PvShape {
    double resolution_s = 60.0;
    std::vector<double> pu;
};

// Clear-sky default: zero outside daylight, sin^2 bump peaking at solar noon,
// seasonal daylight/amplitude variation. One series per calendar year.
PvShape clear_sky_year(const YearCalendar& cal);
// Days [7*week, 7*week+7) of the clear-sky year at an arbitrary resolution.
PvShape clear_sky_week(double resolution_s, int week_index);

// CSV `t,pu_output`, equally spaced seconds, values in [0, 1].
PvShape parse_shape_csv(const std::filesystem::path& path);
PvShape parse_shape_csv_text(const std::string& text, const std::string& origin = "<string>");

// Tiles one week across the calendar year, scaling each month by its factor.
std::vector<double> tile_weekly_to_year(std::span<const double> week_kw, const YearCalendar& cal,
                                        std::span<const double> month_factors);

struct SizingGrid {
    double min_kw = 0.0;
    double max_kw = 20.0;
    double step_kw = 0.5;
};

struct SizingCandidate {
    double kw = 0.0;
    double annual_bill_usd = 0.0;
    double savings_usd = 0.0;
    double levelized_cost_usd = 0.0;
    double net_benefit_usd = 0.0;
};

struct SizingResult {
    double optimal_kw = 0.0;
    std::vector<SizingCandidate> candidates;
};

// Exhaustive grid search for the size with the greatest annual net benefit
// (bill savings minus levelized cost); ties go to the smaller size and 0 kW
// is always a candidate.
SizingResult optimal_size(std::span<const double> load_year, std::span<const double> shape_year,
                          const BillingContext& ctx, const PvCostModel& model,
                          const SizingGrid& grid);

}  // namespace pvhc
