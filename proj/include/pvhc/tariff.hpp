#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace pvhc {

struct TouPeriod {
    std::string label;
    double rate_usd_per_kwh = 0.0;
    // Half-open [start, end) hour ranges; empty marks the season's fallback
    // period covering every hour no earlier period claimed.
    std::vector<std::pair<int, int>> hours;
    bool is_fallback() const { return hours.empty(); }
};

struct TouSeason {
    std::string name;
    std::array<bool, 12> months{};  // index 0 = January
    std::vector<TouPeriod> periods;  // listing order is precedence
};

struct TariffSchedule {
    std::string name;
    double demand_charge_usd_per_kw = 0.0;
    std::vector<TouSeason> seasons;

    // month 1..12, hour 0..23; every pair maps to exactly one period.
    double rate(int month, int hour) const;
    void validate() const;
};

TariffSchedule parse_tariff(const std::filesystem::path& path);
TariffSchedule parse_tariff_text(const std::string& text, const std::string& origin = "<string>");

// Synthetic billing year starting January 1st. The default 364-day year is
// exactly 52 weeks so weekly profiles tile without a seam; December is
// shortened by one day to absorb the difference.
class YearCalendar {
  public:
    explicit YearCalendar(double resolution_s, int n_days = 364);

    double resolution_s() const { return resolution_s_; }
    double interval_hours() const { return resolution_s_ / 3600.0; }
    int n_days() const { return n_days_; }
    std::size_t intervals() const { return intervals_; }
    std::size_t intervals_per_day() const { return per_day_; }
    int month_of_day(int day) const;  // 0..11
    // Interval-index boundaries of the 12 months (13 entries).
    const std::vector<std::size_t>& month_offsets() const { return month_offsets_; }

    std::vector<double> rate_per_interval(const TariffSchedule& tariff) const;

  private:
    double resolution_s_;
    int n_days_;
    std::size_t per_day_;
    std::size_t intervals_;
    std::array<int, 12> month_days_{};
    std::vector<std::size_t> month_offsets_;
};

// Everything annual_bill needs, precomputed once per (tariff, calendar).
struct BillingContext {
    double interval_h = 0.0;
    double demand_charge_usd_per_kw = 0.0;
    std::vector<double> rate;                // per interval
    std::vector<std::size_t> month_offsets;  // 13 entries

    std::size_t intervals() const { return rate.size(); }
};

BillingContext make_billing_context(const TariffSchedule& tariff, const YearCalendar& cal);

struct BillResult {
    double energy_usd = 0.0;
    double demand_usd = 0.0;
    double total() const { return energy_usd + demand_usd; }
};

// TOU bill under net-of-PV demand with no export credit: each interval is
// charged on max(0, load - pv_kw*shape) and each month's demand charge on the
// monthly maximum of that quantity. shape may be empty when pv_kw is 0.
BillResult annual_bill(std::span<const double> load_kw, std::span<const double> shape_pu,
                       double pv_kw, const BillingContext& ctx);

}  // namespace pvhc
