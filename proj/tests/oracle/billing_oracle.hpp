#pragma once

// Straight-line re-implementation of the TOU billing rules: plain loops, its
// own month bookkeeping, no kernels and no precomputed context. Used to
// cross-check annual_bill and the sizing search.

#include <span>

#include "pvhc/tariff.hpp"

namespace pvhc::oracle {

struct OracleBill {
    double energy_usd = 0.0;
    double demand_usd = 0.0;
    double total() const { return energy_usd + demand_usd; }
};

OracleBill bill(std::span<const double> load_kw, std::span<const double> shape_pu, double pv_kw,
                const TariffSchedule& tariff, double resolution_s, int n_days);

}  // namespace pvhc::oracle
