#pragma once

// Independent power-flow oracle: full nodal-admittance Newton-Raphson in
// rectangular coordinates, one decoupled pass per phase, dense Eigen
// factorization. Shares nothing with the production sweep solver beyond the
// feeder data model; used to cross-check voltages on every test network.

#include <array>
#include <complex>
#include <span>
#include <vector>

#include "pvhc/feeder.hpp"
#include "pvhc/power_flow.hpp"

namespace pvhc::oracle {

struct NewtonResult {
    // Indexed [phase][bus]; NaN where the bus lacks the phase.
    std::array<std::vector<std::complex<double>>, 3> v;
    bool converged = false;
    int iterations = 0;
};

NewtonResult newton_solve(const FeederModel& feeder, std::span<const Injection> injections,
                          std::span<const int> taps = {}, double source_v_pu = 1.0,
                          double tol = 1e-10, int max_iterations = 60);

}  // namespace pvhc::oracle
