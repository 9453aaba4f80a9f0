#include "pvhc/tariff.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

#include "pvhc/errors.hpp"
#include "pvhc/kernels.hpp"

namespace pvhc {

using nlohmann::json;

double TariffSchedule::rate(int month, int hour) const {
    for (const TouSeason& season : seasons) {
        if (!season.months[static_cast<std::size_t>(month - 1)]) continue;
        const TouPeriod* fallback = nullptr;
        for (const TouPeriod& p : season.periods) {
            if (p.is_fallback()) {
                fallback = &p;
                continue;
            }
            for (const auto& [a, b] : p.hours)
                if (hour >= a && hour < b) return p.rate_usd_per_kwh;
        }
        if (fallback) return fallback->rate_usd_per_kwh;
        throw ValidationError("no tariff period covers month " + std::to_string(month) +
                              " hour " + std::to_string(hour));
    }
    throw ValidationError("no tariff season covers month " + std::to_string(month));
}

void TariffSchedule::validate() const {
    if (seasons.empty()) throw ValidationError("tariff has no seasons");
    for (int m = 0; m < 12; ++m) {
        int covering = 0;
        for (const TouSeason& s : seasons)
            if (s.months[static_cast<std::size_t>(m)]) ++covering;
        if (covering != 1)
            throw ValidationError("month " + std::to_string(m + 1) + " is covered by " +
                                  std::to_string(covering) + " seasons");
    }
    for (const TouSeason& s : seasons) {
        int fallbacks = 0;
        for (const TouPeriod& p : s.periods) {
            if (p.rate_usd_per_kwh <= 0.0)
                throw ValidationError("season '" + s.name + "' period '" + p.label +
                                      "' has a non-positive rate");
            if (p.is_fallback()) {
                ++fallbacks;
                continue;
            }
            for (const auto& [a, b] : p.hours)
                if (a < 0 || b > 24 || a >= b)
                    throw ValidationError("season '" + s.name + "' period '" + p.label +
                                          "' has an invalid hour range");
        }
        if (fallbacks != 1)
            throw ValidationError("season '" + s.name +
                                  "' must have exactly one fallback period");
    }
    if (demand_charge_usd_per_kw < 0.0) throw ValidationError("negative demand charge");
    // Exhaustive resolution check: every (month, hour) maps to one period.
    for (int m = 1; m <= 12; ++m)
        for (int h = 0; h < 24; ++h) (void)rate(m, h);
}

namespace {

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) ok = true;
        if (!ok) throw ParseError(where + ": unknown key '" + it.key() + "'");
    }
}

}  // namespace

TariffSchedule parse_tariff_text(const std::string& text, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(origin + ": " + e.what());
    }
    check_keys(doc, origin, {"name", "demand_charge_usd_per_kw", "seasons"});
    TariffSchedule t;
    t.name = doc.value("name", "tariff");
    if (!doc.contains("demand_charge_usd_per_kw"))
        throw ParseError(origin + ": missing 'demand_charge_usd_per_kw'");
    t.demand_charge_usd_per_kw = doc["demand_charge_usd_per_kw"].get<double>();
    if (!doc.contains("seasons") || !doc["seasons"].is_array())
        throw ParseError(origin + ": 'seasons' must be an array");
    for (std::size_t i = 0; i < doc["seasons"].size(); ++i) {
        const json& js = doc["seasons"][i];
        const std::string where = origin + ": seasons[" + std::to_string(i) + "]";
        check_keys(js, where, {"name", "months", "periods"});
        TouSeason season;
        season.name = js.value("name", "season" + std::to_string(i));
        if (!js.contains("months") || !js["months"].is_array())
            throw ParseError(where + ": 'months' must be an array");
        for (const json& jm : js["months"]) {
            const int m = jm.get<int>();
            if (m < 1 || m > 12) throw ParseError(where + ": month out of range");
            season.months[static_cast<std::size_t>(m - 1)] = true;
        }
        if (!js.contains("periods") || !js["periods"].is_array())
            throw ParseError(where + ": 'periods' must be an array");
        for (std::size_t j = 0; j < js["periods"].size(); ++j) {
            const json& jp = js["periods"][j];
            const std::string pw = where + ".periods[" + std::to_string(j) + "]";
            check_keys(jp, pw, {"label", "rate_usd_per_kwh", "hours"});
            TouPeriod period;
            period.label = jp.value("label", "period" + std::to_string(j));
            if (!jp.contains("rate_usd_per_kwh"))
                throw ParseError(pw + ": missing 'rate_usd_per_kwh'");
            period.rate_usd_per_kwh = jp["rate_usd_per_kwh"].get<double>();
            if (jp.contains("hours")) {
                for (const json& jr : jp["hours"]) {
                    if (!jr.is_array() || jr.size() != 2)
                        throw ParseError(pw + ": hour ranges must be [start, end]");
                    period.hours.emplace_back(jr[0].get<int>(), jr[1].get<int>());
                }
            }
            season.periods.push_back(std::move(period));
        }
        t.seasons.push_back(std::move(season));
    }
    try {
        t.validate();
    } catch (const ValidationError& e) {
        throw ValidationError(origin + ": " + e.what());
    }
    return t;
}

TariffSchedule parse_tariff(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open tariff file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_tariff_text(ss.str(), path.string());
}

YearCalendar::YearCalendar(double resolution_s, int n_days)
    : resolution_s_(resolution_s), n_days_(n_days) {
    if (resolution_s <= 0.0) throw ValidationError("calendar resolution must be positive");
    const double per_day = 86400.0 / resolution_s;
    per_day_ = static_cast<std::size_t>(per_day);
    if (static_cast<double>(per_day_) != per_day)
        throw ValidationError("resolution must divide one day evenly");
    if (n_days != 364 && n_days != 365)
        throw ValidationError("calendar supports 364- or 365-day years");
    month_days_ = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (n_days == 364) month_days_[11] = 30;
    intervals_ = per_day_ * static_cast<std::size_t>(n_days);
    month_offsets_.resize(13);
    std::size_t off = 0;
    for (int m = 0; m < 12; ++m) {
        month_offsets_[static_cast<std::size_t>(m)] = off;
        off += per_day_ * static_cast<std::size_t>(month_days_[static_cast<std::size_t>(m)]);
    }
    month_offsets_[12] = off;
}

int YearCalendar::month_of_day(int day) const {
    int d = day;
    for (int m = 0; m < 12; ++m) {
        if (d < month_days_[static_cast<std::size_t>(m)]) return m;
        d -= month_days_[static_cast<std::size_t>(m)];
    }
    throw ValidationError("day index outside the calendar year");
}

std::vector<double> YearCalendar::rate_per_interval(const TariffSchedule& tariff) const {
    std::vector<double> out(intervals_);
    for (int day = 0; day < n_days_; ++day) {
        const int month = month_of_day(day) + 1;
        for (std::size_t k = 0; k < per_day_; ++k) {
            const int hour = static_cast<int>(static_cast<double>(k) * resolution_s_ / 3600.0);
            out[static_cast<std::size_t>(day) * per_day_ + k] = tariff.rate(month, hour);
        }
    }
    return out;
}

BillingContext make_billing_context(const TariffSchedule& tariff, const YearCalendar& cal) {
    BillingContext ctx;
    ctx.interval_h = cal.interval_hours();
    ctx.demand_charge_usd_per_kw = tariff.demand_charge_usd_per_kw;
    ctx.rate = cal.rate_per_interval(tariff);
    ctx.month_offsets = cal.month_offsets();
    return ctx;
}

BillResult annual_bill(std::span<const double> load_kw, std::span<const double> shape_pu,
                       double pv_kw, const BillingContext& ctx) {
    if (load_kw.size() != ctx.intervals())
        throw ValidationError("load series does not match the billing horizon");
    std::span<const double> shape = shape_pu;
    if (pv_kw == 0.0 && shape.empty()) {
        // fall through with a null shape; kernel multiplies it by zero anyway
    } else if (shape.size() != ctx.intervals()) {
        throw ValidationError("PV shape does not match the billing horizon");
    }

    const auto& ops = kernels::ops();
    BillResult bill;
    for (std::size_t m = 0; m < 12; ++m) {
        const std::size_t a = ctx.month_offsets[m];
        const std::size_t b = ctx.month_offsets[m + 1];
        double peak = 0.0;
        double weighted;
        if (shape.empty()) {
            weighted = ops.energy_peak(load_kw.data() + a, load_kw.data() + a, ctx.rate.data() + a,
                                       0.0, b - a, &peak);
        } else {
            weighted = ops.energy_peak(load_kw.data() + a, shape.data() + a, ctx.rate.data() + a,
                                       pv_kw, b - a, &peak);
        }
        bill.energy_usd += weighted * ctx.interval_h;
        bill.demand_usd += ctx.demand_charge_usd_per_kw * peak;
    }
    return bill;
}

}  // namespace pvhc
