#pragma once

#include <array>
#include <complex>
#include <functional>
#include <span>
#include <vector>

#include "pvhc/feeder.hpp"

namespace pvhc {

// Per-step boundary condition. Load positive, generation negative; power on a
// multi-phase mask is split equally across the listed phases.
struct Injection {
    int bus = -1;
    PhaseMask phase = kPhaseABC;
    double p_kw = 0.0;
    double q_kvar = 0.0;
};

struct Solution {
    // Indexed [phase][bus]; NaN where the bus lacks the phase.
    std::array<std::vector<double>, 3> v_mag_pu;
    std::array<std::vector<double>, 3> v_ang_rad;
    // Indexed [phase][branch]; NaN where the branch lacks the phase.
    std::array<std::vector<double>, 3> i_branch_a;
    bool converged = false;
    int iterations = 0;
    double max_v_pu = 0.0;
    double min_v_pu = 0.0;
    int argmax_bus = -1;
};

// Radial backward/forward sweep (current summation), one decoupled pass per
// phase. Topology caches are immutable after construction; per-run state
// lives in State so one solver can serve concurrent runs.
class SweepSolver {
  public:
    explicit SweepSolver(const FeederModel& feeder);

    struct PhaseTopo {
        std::vector<int> bus_of_pos;
        std::vector<int> pos_of_bus;  // -1 when the bus lacks this phase
        // Branches carrying the phase, in BFS order from the source.
        std::vector<int> br_from_pos;
        std::vector<int> br_to_pos;
        std::vector<std::complex<double>> z_pu;
        std::vector<int> br_reg;    // regulator index or -1
        std::vector<int> br_index;  // feeder branch index
        int source_pos = -1;
    };

    struct State {
        std::array<std::vector<std::complex<double>>, 3> v;
        std::array<std::vector<std::complex<double>>, 3> i_acc;
        std::array<std::vector<std::complex<double>>, 3> i_br;
        bool warm = false;  // reuse v from the previous solve as the start
    };

    struct Stats {
        bool converged = false;
        int iterations = 0;
    };

    State make_state() const;

    // s_pu: per-phase consumption-positive complex power at each phase
    // position. taps: one entry per feeder regulator.
    Stats solve(State& state, const std::array<std::vector<std::complex<double>>, 3>& s_pu,
                std::span<const int> taps, double source_v_pu, double tol_pu,
                int max_iterations) const;

    const std::array<PhaseTopo, 3>& phases() const { return topo_; }
    const FeederModel& feeder() const { return *feeder_; }
    double i_base_amps() const { return i_base_amps_; }

    Solution build_solution(const State& state, Stats stats) const;

  private:
    const FeederModel* feeder_;
    std::array<PhaseTopo, 3> topo_;
    double i_base_amps_ = 0.0;
};

struct SnapshotOptions {
    double source_v_pu = 1.0;
    double tolerance_pu = 1e-8;
    int max_iterations = 100;
};

// One power flow. Non-convergence is reported through Solution::converged,
// never silently; unknown buses or phases throw ValidationError.
Solution solve_snapshot(const FeederModel& feeder, std::span<const Injection> injections,
                        std::span<const int> taps = {}, const SnapshotOptions& opts = {});

// Returns the tap after one control evaluation: unchanged inside the band,
// one step toward the band per timestep once the out-of-band time reaches
// the delay, clamped at the limits.
int apply_regulator_logic(const Regulator& reg, double regulated_voltage_pu,
                          double elapsed_out_of_band_s);

struct QstsOptions {
    double source_v_pu = 1.0;
    double tolerance_pu = 1e-8;
    int max_iterations = 100;
    bool regulators_enabled = true;
    // Optional bus subsets (feeder bus indices); the run records the
    // horizon-max voltage inside each subset.
    std::vector<std::vector<int>> track_bus_sets;
    // Optional per-step observer, e.g. the voltage-trace CSV writer.
    std::function<void(std::size_t step, const Solution&)> on_step;
};

struct QstsResult {
    std::vector<double> step_max_v_pu;
    std::vector<int> step_argmax_bus;
    std::vector<double> step_min_v_pu;
    std::vector<std::vector<int>> tap_trace;  // [regulator][step]
    std::vector<double> set_max_v_pu;         // per tracked bus set
    double max_v_pu = 0.0;
    int argmax_bus = -1;
    std::size_t argmax_step = 0;
    std::size_t steps() const { return step_max_v_pu.size(); }
};

struct QstsInput {
    // [load_node][t] kW demand.
    std::vector<std::vector<double>> node_load_kw;
    // Optional [load_node][t] kW PV production (aggregated per node); empty
    // for a PV-free run.
    std::vector<std::vector<double>> node_pv_kw;
    double resolution_s = 60.0;
    double tan_phi = 0.32868;  // pf 0.95 lagging on the load component
};

QstsResult run_qsts(const FeederModel& feeder, const QstsInput& input,
                    const QstsOptions& opts = {});

// Streaming form used by the studies: load in one time-major matrix
// [t * n_nodes + node], PV as per-node installed kW scaled by a shared
// per-step shape.
struct QstsFastInput {
    std::span<const double> load_tm;   // t-major kW, n_steps * n_nodes
    std::span<const double> q_tm;      // t-major kvar, same layout
    std::span<const double> pv_shape;  // per step, pu of installed kW (may be empty)
    std::span<const double> node_pv_kw;
    std::size_t n_steps = 0;
    double resolution_s = 60.0;
};

QstsResult run_qsts_fast(const SweepSolver& solver, const QstsFastInput& input,
                         const QstsOptions& opts = {});

}  // namespace pvhc
