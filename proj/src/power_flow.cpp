#include "pvhc/power_flow.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

#include "pvhc/errors.hpp"
#include "pvhc/kernels.hpp"

namespace pvhc {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

SweepSolver::SweepSolver(const FeederModel& feeder) : feeder_(&feeder) {
    const auto& order = feeder.bfs_branch_order();
    const int source = feeder.source_bus();

    // Orient every branch along the BFS direction (upstream -> downstream).
    std::vector<char> seen(feeder.buses.size(), 0);
    seen[static_cast<std::size_t>(source)] = 1;
    std::vector<int> up(feeder.branches.size()), down(feeder.branches.size());
    for (int bi : order) {
        const Branch& br = feeder.branches[static_cast<std::size_t>(bi)];
        if (seen[static_cast<std::size_t>(br.from)]) {
            up[static_cast<std::size_t>(bi)] = br.from;
            down[static_cast<std::size_t>(bi)] = br.to;
        } else {
            up[static_cast<std::size_t>(bi)] = br.to;
            down[static_cast<std::size_t>(bi)] = br.from;
        }
        seen[static_cast<std::size_t>(down[static_cast<std::size_t>(bi)])] = 1;
    }

    for (int p = 0; p < 3; ++p) {
        const PhaseMask pm = static_cast<PhaseMask>(1u << p);
        PhaseTopo& t = topo_[p];
        t.pos_of_bus.assign(feeder.buses.size(), -1);
        for (std::size_t b = 0; b < feeder.buses.size(); ++b) {
            if (feeder.buses[b].phases & pm) {
                t.pos_of_bus[b] = static_cast<int>(t.bus_of_pos.size());
                t.bus_of_pos.push_back(static_cast<int>(b));
            }
        }
        t.source_pos = t.pos_of_bus[static_cast<std::size_t>(source)];
        for (int bi : order) {
            const Branch& br = feeder.branches[static_cast<std::size_t>(bi)];
            if (!(br.phases & pm)) continue;
            t.br_from_pos.push_back(t.pos_of_bus[static_cast<std::size_t>(up[static_cast<std::size_t>(bi)])]);
            t.br_to_pos.push_back(t.pos_of_bus[static_cast<std::size_t>(down[static_cast<std::size_t>(bi)])]);
            t.z_pu.emplace_back(br.r_eff() / feeder.z_base_ohm(br.from),
                                br.x_eff() / feeder.z_base_ohm(br.from));
            int reg = -1;
            for (std::size_t r = 0; r < feeder.regulators.size(); ++r)
                if (feeder.regulators[r].branch == bi) reg = static_cast<int>(r);
            t.br_reg.push_back(reg);
            t.br_index.push_back(bi);
        }
    }

    const double kv = feeder.buses[static_cast<std::size_t>(source)].nominal_kv_ll;
    i_base_amps_ = feeder.base_kva / (std::sqrt(3.0) * kv);
}

SweepSolver::State SweepSolver::make_state() const {
    State st;
    for (int p = 0; p < 3; ++p) {
        st.v[p].assign(topo_[p].bus_of_pos.size(), {1.0, 0.0});
        st.i_acc[p].assign(topo_[p].bus_of_pos.size(), {0.0, 0.0});
        st.i_br[p].assign(topo_[p].br_to_pos.size(), {0.0, 0.0});
    }
    return st;
}

SweepSolver::Stats SweepSolver::solve(State& st,
                                      const std::array<std::vector<std::complex<double>>, 3>& s_pu,
                                      std::span<const int> taps, double source_v_pu,
                                      double tol_pu, int max_iterations) const {
    const auto& regs = feeder_->regulators;
    std::vector<double> reg_ratio(regs.size(), 1.0);
    for (std::size_t r = 0; r < regs.size(); ++r) {
        const int tap = taps.empty() ? regs[r].current_tap : taps[r];
        reg_ratio[r] = 1.0 + tap * regs[r].tap_step_pu;
    }

    Stats stats{true, 0};
    const double tol2 = tol_pu * tol_pu;
    for (int p = 0; p < 3; ++p) {
        const PhaseTopo& t = topo_[p];
        const std::size_t m = t.bus_of_pos.size();
        if (m == 0) continue;
        auto& v = st.v[p];
        auto& i_acc = st.i_acc[p];
        auto& i_br = st.i_br[p];
        if (!st.warm) {
            std::fill(v.begin(), v.end(), std::complex<double>{source_v_pu, 0.0});
        }
        v[static_cast<std::size_t>(t.source_pos)] = {source_v_pu, 0.0};

        const std::size_t nb = t.br_to_pos.size();
        bool converged = false;
        int iter = 0;
        while (iter < max_iterations) {
            ++iter;
            // Backward: nodal load currents, then accumulate toward the source.
            for (std::size_t i = 0; i < m; ++i) {
                const std::complex<double>& vi = v[i];
                const std::complex<double>& si = s_pu[p][i];
                const double inv = 1.0 / std::norm(vi);
                i_acc[i] = std::conj(si) * vi * inv;
            }
            for (std::size_t b = nb; b-- > 0;) {
                const int reg = t.br_reg[b];
                const double ratio = reg >= 0 ? reg_ratio[static_cast<std::size_t>(reg)] : 1.0;
                const std::complex<double> flow =
                    ratio * i_acc[static_cast<std::size_t>(t.br_to_pos[b])];
                i_br[b] = flow;
                i_acc[static_cast<std::size_t>(t.br_from_pos[b])] += flow;
            }
            // Forward: voltage drops from the source outward.
            double maxd2 = 0.0;
            for (std::size_t b = 0; b < nb; ++b) {
                const int reg = t.br_reg[b];
                const double ratio = reg >= 0 ? reg_ratio[static_cast<std::size_t>(reg)] : 1.0;
                const std::complex<double> vm =
                    v[static_cast<std::size_t>(t.br_from_pos[b])] - t.z_pu[b] * i_br[b];
                const std::complex<double> nv = ratio * vm;
                const std::size_t to = static_cast<std::size_t>(t.br_to_pos[b]);
                maxd2 = std::max(maxd2, std::norm(nv - v[to]));
                v[to] = nv;
            }
            if (maxd2 <= tol2) {
                converged = true;
                break;
            }
        }
        stats.converged = stats.converged && converged;
        stats.iterations = std::max(stats.iterations, iter);
    }
    return stats;
}

Solution SweepSolver::build_solution(const State& st, Stats stats) const {
    Solution sol;
    sol.converged = stats.converged;
    sol.iterations = stats.iterations;
    const std::size_t nbus = feeder_->buses.size();
    const std::size_t nbr = feeder_->branches.size();
    double mx = -1.0, mn = std::numeric_limits<double>::infinity();
    for (int p = 0; p < 3; ++p) {
        sol.v_mag_pu[p].assign(nbus, kNaN);
        sol.v_ang_rad[p].assign(nbus, kNaN);
        sol.i_branch_a[p].assign(nbr, kNaN);
        const PhaseTopo& t = topo_[p];
        for (std::size_t i = 0; i < t.bus_of_pos.size(); ++i) {
            const std::size_t b = static_cast<std::size_t>(t.bus_of_pos[i]);
            const double mag = std::abs(st.v[p][i]);
            sol.v_mag_pu[p][b] = mag;
            sol.v_ang_rad[p][b] = std::arg(st.v[p][i]);
            if (mag > mx) {
                mx = mag;
                sol.argmax_bus = static_cast<int>(b);
            }
            mn = std::min(mn, mag);
        }
        for (std::size_t b = 0; b < t.br_index.size(); ++b)
            sol.i_branch_a[p][static_cast<std::size_t>(t.br_index[b])] =
                std::abs(st.i_br[p][b]) * i_base_amps_;
    }
    sol.max_v_pu = mx;
    sol.min_v_pu = mn;
    return sol;
}

namespace {

struct ScatterEntry {
    int phase;
    int pos;
    double w;  // kW -> per-phase pu
};

std::vector<std::vector<ScatterEntry>> build_scatter(const FeederModel& feeder,
                                                     const SweepSolver& solver) {
    std::vector<std::vector<ScatterEntry>> plan(feeder.load_nodes.size());
    const double s_base_1ph = feeder.base_kva / 3.0;
    for (std::size_t n = 0; n < feeder.load_nodes.size(); ++n) {
        const LoadNode& ln = feeder.load_nodes[n];
        const int cnt = phase_count(ln.phase);
        for (int p = 0; p < 3; ++p) {
            if (!(ln.phase & (1u << p))) continue;
            const int pos = solver.phases()[p].pos_of_bus[static_cast<std::size_t>(ln.bus)];
            assert(pos >= 0);
            plan[n].push_back({p, pos, 1.0 / (cnt * s_base_1ph)});
        }
    }
    return plan;
}

}  // namespace

Solution solve_snapshot(const FeederModel& feeder, std::span<const Injection> injections,
                        std::span<const int> taps, const SnapshotOptions& opts) {
    SweepSolver solver(feeder);
    std::array<std::vector<std::complex<double>>, 3> s_pu;
    for (int p = 0; p < 3; ++p) s_pu[p].assign(solver.phases()[p].bus_of_pos.size(), {0.0, 0.0});
    const double s_base_1ph = feeder.base_kva / 3.0;
    for (const Injection& inj : injections) {
        if (inj.bus < 0 || inj.bus >= static_cast<int>(feeder.buses.size()))
            throw ValidationError("injection on unknown bus index " + std::to_string(inj.bus));
        const Bus& bus = feeder.buses[static_cast<std::size_t>(inj.bus)];
        if ((inj.phase & bus.phases) != inj.phase)
            throw ValidationError("injection on bus '" + bus.id + "' uses a phase the bus lacks");
        const int cnt = phase_count(inj.phase);
        for (int p = 0; p < 3; ++p) {
            if (!(inj.phase & (1u << p))) continue;
            const int pos = solver.phases()[p].pos_of_bus[static_cast<std::size_t>(inj.bus)];
            s_pu[p][static_cast<std::size_t>(pos)] +=
                std::complex<double>(inj.p_kw, inj.q_kvar) / (cnt * s_base_1ph);
        }
    }
    auto st = solver.make_state();
    auto stats = solver.solve(st, s_pu, taps, opts.source_v_pu, opts.tolerance_pu,
                              opts.max_iterations);
    return solver.build_solution(st, stats);
}

int apply_regulator_logic(const Regulator& reg, double regulated_voltage_pu,
                          double elapsed_out_of_band_s) {
    const double dev = regulated_voltage_pu - reg.setpoint_pu;
    if (std::abs(dev) <= reg.bandwidth_pu / 2.0) return reg.current_tap;
    if (elapsed_out_of_band_s < reg.delay_s) return reg.current_tap;
    const int dir = dev < 0.0 ? 1 : -1;
    return std::clamp(reg.current_tap + dir, reg.tap_min, reg.tap_max);
}

namespace {

template <typename FillFn>
QstsResult qsts_core(const SweepSolver& solver, std::size_t n_steps, double resolution_s,
                     const QstsOptions& opts, FillFn&& fill) {
    const FeederModel& feeder = solver.feeder();
    const std::size_t n_nodes = feeder.load_nodes.size();
    const auto scatter = build_scatter(feeder, solver);

    std::array<std::vector<std::complex<double>>, 3> s_pu;
    for (int p = 0; p < 3; ++p) s_pu[p].assign(solver.phases()[p].bus_of_pos.size(), {0.0, 0.0});

    const auto& regs = feeder.regulators;
    std::vector<int> taps(regs.size());
    std::vector<double> elapsed(regs.size(), 0.0);
    for (std::size_t r = 0; r < regs.size(); ++r) taps[r] = regs[r].current_tap;

    // Regulated bus (downstream end of the regulator branch) positions.
    std::vector<std::vector<std::pair<int, int>>> reg_probe(regs.size());
    for (std::size_t r = 0; r < regs.size(); ++r) {
        const Branch& br = feeder.branches[static_cast<std::size_t>(regs[r].branch)];
        const int down = feeder.parent_branch()[static_cast<std::size_t>(br.to)] == regs[r].branch
                             ? br.to
                             : br.from;
        for (int p = 0; p < 3; ++p) {
            const int pos = solver.phases()[p].pos_of_bus[static_cast<std::size_t>(down)];
            if (pos >= 0) reg_probe[r].push_back({p, pos});
        }
    }

    std::vector<std::vector<std::pair<int, int>>> set_probe;
    for (const auto& set : opts.track_bus_sets) {
        auto& probes = set_probe.emplace_back();
        for (int bus : set)
            for (int p = 0; p < 3; ++p) {
                const int pos = solver.phases()[p].pos_of_bus[static_cast<std::size_t>(bus)];
                if (pos >= 0) probes.push_back({p, pos});
            }
    }

    QstsResult res;
    res.step_max_v_pu.resize(n_steps);
    res.step_argmax_bus.resize(n_steps);
    res.step_min_v_pu.resize(n_steps);
    res.tap_trace.assign(regs.size(), std::vector<int>(n_steps, 0));
    std::vector<double> set_max2(set_probe.size(), 0.0);

    auto st = solver.make_state();
    std::vector<double> p_row(n_nodes), q_row(n_nodes);
    double run_max2 = -1.0;

    for (std::size_t t = 0; t < n_steps; ++t) {
        std::span<const double> p_span(p_row), q_span(q_row);
        fill(t, p_row, q_row, p_span, q_span);

        for (int p = 0; p < 3; ++p)
            std::fill(s_pu[p].begin(), s_pu[p].end(), std::complex<double>{0.0, 0.0});
        for (std::size_t n = 0; n < n_nodes; ++n)
            for (const ScatterEntry& e : scatter[n])
                s_pu[e.phase][static_cast<std::size_t>(e.pos)] +=
                    std::complex<double>(p_span[n] * e.w, q_span[n] * e.w);

        auto stats = solver.solve(st, s_pu, taps, opts.source_v_pu, opts.tolerance_pu,
                                  opts.max_iterations);
        if (!stats.converged)
            throw ConvergenceError("power flow did not converge at timestep " +
                                   std::to_string(t));
        st.warm = true;

        double mx2 = -1.0, mn2 = std::numeric_limits<double>::infinity();
        int argb = -1;
        for (int p = 0; p < 3; ++p) {
            const auto& topo = solver.phases()[p];
            for (std::size_t i = 0; i < topo.bus_of_pos.size(); ++i) {
                const double n2 = std::norm(st.v[p][i]);
                if (n2 > mx2) {
                    mx2 = n2;
                    argb = topo.bus_of_pos[i];
                }
                mn2 = std::min(mn2, n2);
            }
        }
        res.step_max_v_pu[t] = std::sqrt(mx2);
        res.step_min_v_pu[t] = std::sqrt(mn2);
        res.step_argmax_bus[t] = argb;
        if (mx2 > run_max2) {
            run_max2 = mx2;
            res.argmax_bus = argb;
            res.argmax_step = t;
        }
        for (std::size_t s = 0; s < set_probe.size(); ++s)
            for (const auto& [p, pos] : set_probe[s])
                set_max2[s] = std::max(set_max2[s], std::norm(st.v[p][static_cast<std::size_t>(pos)]));

        for (std::size_t r = 0; r < regs.size(); ++r) res.tap_trace[r][t] = taps[r];

        if (opts.regulators_enabled) {
            for (std::size_t r = 0; r < regs.size(); ++r) {
                if (reg_probe[r].empty()) continue;
                double vsum = 0.0;
                for (const auto& [p, pos] : reg_probe[r])
                    vsum += std::abs(st.v[p][static_cast<std::size_t>(pos)]);
                const double v_reg = vsum / static_cast<double>(reg_probe[r].size());
                Regulator reg = regs[r];
                reg.current_tap = taps[r];
                const double dev = v_reg - reg.setpoint_pu;
                if (std::abs(dev) <= reg.bandwidth_pu / 2.0) {
                    elapsed[r] = 0.0;
                } else {
                    elapsed[r] += resolution_s;
                    taps[r] = apply_regulator_logic(reg, v_reg, elapsed[r]);
                }
            }
        }

        if (opts.on_step) opts.on_step(t, solver.build_solution(st, stats));
    }

    res.max_v_pu = run_max2 >= 0.0 ? std::sqrt(run_max2) : 0.0;
    res.set_max_v_pu.resize(set_max2.size());
    for (std::size_t s = 0; s < set_max2.size(); ++s) res.set_max_v_pu[s] = std::sqrt(set_max2[s]);
    return res;
}

}  // namespace

QstsResult run_qsts(const FeederModel& feeder, const QstsInput& input, const QstsOptions& opts) {
    const std::size_t n_nodes = feeder.load_nodes.size();
    if (input.node_load_kw.size() != n_nodes)
        throw ValidationError("node_load_kw must provide one series per load node");
    const std::size_t n_steps = n_nodes == 0 ? 0 : input.node_load_kw[0].size();
    for (const auto& s : input.node_load_kw)
        if (s.size() != n_steps) throw ValidationError("load profile length mismatch");
    if (!input.node_pv_kw.empty()) {
        if (input.node_pv_kw.size() != n_nodes)
            throw ValidationError("node_pv_kw must provide one series per load node");
        for (const auto& s : input.node_pv_kw)
            if (s.size() != n_steps) throw ValidationError("PV profile length mismatch");
    }

    SweepSolver solver(feeder);
    return qsts_core(solver, n_steps, input.resolution_s, opts,
                     [&](std::size_t t, std::vector<double>& p_row, std::vector<double>& q_row,
                         std::span<const double>& p_span, std::span<const double>& q_span) {
                         for (std::size_t n = 0; n < n_nodes; ++n) {
                             const double load = input.node_load_kw[n][t];
                             const double pv =
                                 input.node_pv_kw.empty() ? 0.0 : input.node_pv_kw[n][t];
                             p_row[n] = load - pv;
                             q_row[n] = input.tan_phi * load;
                         }
                         p_span = p_row;
                         q_span = q_row;
                     });
}

QstsResult run_qsts_fast(const SweepSolver& solver, const QstsFastInput& input,
                         const QstsOptions& opts) {
    const std::size_t n_nodes = solver.feeder().load_nodes.size();
    if (input.load_tm.size() != input.n_steps * n_nodes ||
        input.q_tm.size() != input.n_steps * n_nodes)
        throw ValidationError("time-major load matrix size mismatch");
    const bool with_pv = !input.pv_shape.empty();
    if (with_pv && input.pv_shape.size() != input.n_steps)
        throw ValidationError("PV shape length mismatch");

    const auto& ops = kernels::ops();
    return qsts_core(solver, input.n_steps, input.resolution_s, opts,
                     [&](std::size_t t, std::vector<double>& p_row, std::vector<double>&,
                         std::span<const double>& p_span, std::span<const double>& q_span) {
                         const double* load_row = input.load_tm.data() + t * n_nodes;
                         const double* q_ptr = input.q_tm.data() + t * n_nodes;
                         if (with_pv) {
                             ops.sub_scaled(p_row.data(), load_row, input.node_pv_kw.data(),
                                            input.pv_shape[t], n_nodes);
                             p_span = p_row;
                         } else {
                             p_span = std::span<const double>(load_row, n_nodes);
                         }
                         q_span = std::span<const double>(q_ptr, n_nodes);
                     });
}

}  // namespace pvhc
