#include "pvhc/pv_sizing.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "pvhc/errors.hpp"

namespace pvhc {

double capital_recovery_factor(double i, int y) {
    if (i < 0.0) throw ValidationError("discount rate must be non-negative");
    if (y < 1) throw ValidationError("lifetime must be at least one year");
    if (i == 0.0) return 1.0 / static_cast<double>(y);
    const double g = std::pow(1.0 + i, y);
    return i * g / (g - 1.0);
}

double levelized_cost(const PvCostModel& model, double p_pv_kw) {
    if (p_pv_kw < 0.0) throw ValidationError("PV capacity must be non-negative");
    return capital_recovery_factor(model.discount_rate, model.lifetime_y) *
           model.a_pv_usd_per_kw * p_pv_kw;
}

namespace {

// Daylight hours and clear-sky amplitude for a day of the year (northern
// mid-latitudes, solstice near day 171).
struct DayCurve {
    double sunrise_h;
    double daylight_h;
    double amplitude;
};

DayCurve day_curve(int day) {
    const double theta = 2.0 * std::numbers::pi * (day - 171) / 365.0;
    const double daylight = 12.0 + 2.8 * std::cos(theta);
    const double amplitude = 0.82 + 0.18 * std::cos(theta);
    return {12.0 - daylight / 2.0, daylight, amplitude};
}

double clear_sky_value(const DayCurve& c, double hour) {
    if (hour <= c.sunrise_h || hour >= c.sunrise_h + c.daylight_h) return 0.0;
    const double s = std::sin(std::numbers::pi * (hour - c.sunrise_h) / c.daylight_h);
    return c.amplitude * s * s;
}

}  // namespace

PvShape clear_sky_year(const YearCalendar& cal) {
    PvShape shape;
    shape.resolution_s = cal.resolution_s();
    shape.pu.resize(cal.intervals());
    const std::size_t per_day = cal.intervals_per_day();
    for (int day = 0; day < cal.n_days(); ++day) {
        const DayCurve c = day_curve(day);
        for (std::size_t k = 0; k < per_day; ++k) {
            const double hour = static_cast<double>(k) * cal.resolution_s() / 3600.0;
            shape.pu[static_cast<std::size_t>(day) * per_day + k] = clear_sky_value(c, hour);
        }
    }
    return shape;
}

PvShape clear_sky_week(double resolution_s, int week_index) {
    if (week_index < 0 || week_index > 51) throw ValidationError("week index must be in [0, 51]");
    const double per_day_d = 86400.0 / resolution_s;
    const std::size_t per_day = static_cast<std::size_t>(per_day_d);
    if (static_cast<double>(per_day) != per_day_d)
        throw ValidationError("resolution must divide one day evenly");
    PvShape shape;
    shape.resolution_s = resolution_s;
    shape.pu.resize(per_day * 7);
    for (int d = 0; d < 7; ++d) {
        const DayCurve c = day_curve(week_index * 7 + d);
        for (std::size_t k = 0; k < per_day; ++k) {
            const double hour = static_cast<double>(k) * resolution_s / 3600.0;
            shape.pu[static_cast<std::size_t>(d) * per_day + k] = clear_sky_value(c, hour);
        }
    }
    return shape;
}

PvShape parse_shape_csv_text(const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    PvShape shape;
    std::vector<double> times;
    bool header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!header) {
            if (line.rfind("t,", 0) != 0)
                throw ParseError(origin + ":1: header must be 't,pu_output'");
            header = true;
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw ParseError(origin + ":" + std::to_string(line_no) + ": expected 't,pu_output'");
        const double t = std::stod(line.substr(0, comma));
        const double v = std::stod(line.substr(comma + 1));
        if (v < 0.0 || v > 1.0)
            throw ParseError(origin + ":" + std::to_string(line_no) +
                             ": pu_output outside [0, 1]");
        times.push_back(t);
        shape.pu.push_back(v);
    }
    if (shape.pu.size() < 2) throw ParseError(origin + ": shape needs at least two samples");
    const double dt = times[1] - times[0];
    if (dt <= 0.0) throw ParseError(origin + ": time column must increase");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (std::abs((times[i] - times[i - 1]) - dt) > 1e-9)
            throw ParseError(origin + ": samples must be equally spaced");
    shape.resolution_s = dt;
    return shape;
}

PvShape parse_shape_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open shape CSV '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_shape_csv_text(ss.str(), path.string());
}

std::vector<double> tile_weekly_to_year(std::span<const double> week_kw, const YearCalendar& cal,
                                        std::span<const double> month_factors) {
    if (!month_factors.empty() && month_factors.size() != 12)
        throw ValidationError("month_factors must have 12 entries");
    const std::size_t week_len = week_kw.size();
    if (week_len != cal.intervals_per_day() * 7)
        throw ValidationError("weekly series does not match the calendar resolution");
    std::vector<double> year(cal.intervals());
    const std::size_t per_day = cal.intervals_per_day();
    for (int day = 0; day < cal.n_days(); ++day) {
        const double f =
            month_factors.empty() ? 1.0 : month_factors[static_cast<std::size_t>(cal.month_of_day(day))];
        const std::size_t src = (static_cast<std::size_t>(day) % 7) * per_day;
        const std::size_t dst = static_cast<std::size_t>(day) * per_day;
        for (std::size_t k = 0; k < per_day; ++k) year[dst + k] = f * week_kw[src + k];
    }
    return year;
}

SizingResult optimal_size(std::span<const double> load_year, std::span<const double> shape_year,
                          const BillingContext& ctx, const PvCostModel& model,
                          const SizingGrid& grid) {
    if (grid.step_kw <= 0.0) throw ValidationError("sizing grid step must be positive");
    if (grid.max_kw < grid.min_kw) throw ValidationError("sizing grid is empty");

    std::vector<double> sizes;
    if (grid.min_kw > 0.0) sizes.push_back(0.0);
    for (double kw = grid.min_kw; kw <= grid.max_kw + 1e-9; kw += grid.step_kw)
        sizes.push_back(kw);

    const double bill0 = annual_bill(load_year, shape_year, 0.0, ctx).total();

    SizingResult out;
    out.candidates.reserve(sizes.size());
    double best_net = -1e300;
    for (double kw : sizes) {
        SizingCandidate c;
        c.kw = kw;
        c.annual_bill_usd = annual_bill(load_year, shape_year, kw, ctx).total();
        c.savings_usd = bill0 - c.annual_bill_usd;
        c.levelized_cost_usd = levelized_cost(model, kw);
        c.net_benefit_usd = c.savings_usd - c.levelized_cost_usd;
        if (c.net_benefit_usd > best_net) {
            best_net = c.net_benefit_usd;
            out.optimal_kw = kw;
        }
        out.candidates.push_back(c);
    }
    return out;
}

}  // namespace pvhc
