#include "pvhc/load_allocation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pvhc/errors.hpp"
#include "pvhc/kernels.hpp"
#include "pvhc/parallel.hpp"
#include "pvhc/rng.hpp"

namespace pvhc {

namespace {

NodeAllocation allocate_node_seeded(const LoadPool& pool, double peak_kw,
                                    const AllocationConfig& config, Rng rng, int node_index) {
    if (peak_kw <= 0.0) throw ValidationError("nodal peak must be positive");
    pool.validate();
    if (config.lower_factor >= 1.0 || config.upper_factor <= 1.0)
        throw ValidationError("allocation band must straddle 1.0");

    const double lo = config.lower_factor * peak_kw;
    const double hi = config.upper_factor * peak_kw;
    const std::size_t len = pool.steps();
    const auto& ops = kernels::ops();

    std::vector<double> agg(len);
    std::vector<int> chosen;
    std::vector<int> unused(pool.size());

    for (int attempt = 0; attempt < config.max_attempts; ++attempt) {
        std::fill(agg.begin(), agg.end(), 0.0);
        chosen.clear();
        std::iota(unused.begin(), unused.end(), 0);
        std::size_t n_unused = unused.size();

        while (n_unused > 0) {
            const std::size_t pick = static_cast<std::size_t>(rng.uniform_u64(n_unused));
            const int j = unused[pick];
            unused[pick] = unused[--n_unused];

            double new_peak;
            if (chosen.empty()) {
                new_peak = pool.peaks_kw[static_cast<std::size_t>(j)];
                if (new_peak > hi) continue;  // single house already overshoots
                ops.add(agg.data(), pool.profiles[static_cast<std::size_t>(j)].kw.data(), len);
            } else {
                new_peak = ops.add_reduce_max(
                    agg.data(), pool.profiles[static_cast<std::size_t>(j)].kw.data(), len);
                if (new_peak > hi) {
                    ops.sub(agg.data(), pool.profiles[static_cast<std::size_t>(j)].kw.data(),
                            len);
                    continue;  // discard and redraw
                }
            }
            chosen.push_back(j);
            if (new_peak > lo) {
                NodeAllocation out;
                out.node = node_index;
                out.profile_idx = chosen;
                out.aggregate_peak_kw = new_peak;
                return out;
            }
        }
    }
    throw AllocationError("allocation infeasible for nodal peak " + std::to_string(peak_kw) +
                          " kW after " + std::to_string(config.max_attempts) + " attempts" +
                          (node_index >= 0 ? " (load node " + std::to_string(node_index) + ")"
                                           : ""));
}

}  // namespace

NodeAllocation allocate_node(const LoadPool& pool, double peak_kw,
                             const AllocationConfig& config) {
    return allocate_node_seeded(pool, peak_kw, config,
                                Rng::substream(config.rng_seed, "alloc-node"), -1);
}

FeederAllocation allocate_feeder(const FeederModel& feeder, const LoadPool& pool,
                                 const AllocationConfig& config, unsigned workers) {
    pool.validate();
    const std::size_t n_nodes = feeder.load_nodes.size();
    FeederAllocation out;
    out.resolution_s = pool.resolution_s;
    out.nodes.resize(n_nodes);

    std::vector<std::string> failures(n_nodes);
    parallel_for(n_nodes, workers, [&](std::size_t i) {
        try {
            out.nodes[i] = allocate_node_seeded(
                pool, feeder.load_nodes[i].peak_kw, config,
                Rng::substream(config.rng_seed, "alloc-node", i), static_cast<int>(i));
        } catch (const AllocationError& e) {
            failures[i] = e.what();
        }
    });

    std::string all_failures;
    for (std::size_t i = 0; i < n_nodes; ++i) {
        if (!failures[i].empty()) {
            if (!all_failures.empty()) all_failures += "; ";
            all_failures += failures[i];
        }
    }
    if (!all_failures.empty()) throw AllocationError(all_failures);

    std::size_t serial = 0;
    for (std::size_t i = 0; i < n_nodes; ++i) {
        for (int profile : out.nodes[i].profile_idx) {
            char buf[16];
            std::snprintf(buf, sizeof buf, "h%04zu", ++serial);
            out.houses.push_back({buf, static_cast<int>(i), profile});
        }
    }
    return out;
}

std::vector<double> node_load_time_major(const FeederModel& feeder, const LoadPool& pool,
                                         const FeederAllocation& alloc) {
    const std::size_t n_nodes = feeder.load_nodes.size();
    const std::size_t steps = pool.steps();
    std::vector<double> tm(steps * n_nodes, 0.0);
    // Node-major aggregation first, then transpose into time-major rows.
    std::vector<double> node_series(steps);
    for (std::size_t n = 0; n < n_nodes; ++n) {
        std::fill(node_series.begin(), node_series.end(), 0.0);
        for (int profile : alloc.nodes[n].profile_idx)
            kernels::ops().add(node_series.data(),
                               pool.profiles[static_cast<std::size_t>(profile)].kw.data(), steps);
        for (std::size_t t = 0; t < steps; ++t) tm[t * n_nodes + n] = node_series[t];
    }
    return tm;
}

std::vector<double> feeder_head_series(const std::vector<double>& node_load_tm,
                                       std::size_t n_nodes) {
    const std::size_t steps = node_load_tm.size() / n_nodes;
    std::vector<double> head(steps, 0.0);
    for (std::size_t t = 0; t < steps; ++t) {
        const double* row = node_load_tm.data() + t * n_nodes;
        double s = 0.0;
        for (std::size_t n = 0; n < n_nodes; ++n) s += row[n];
        head[t] = s;
    }
    return head;
}

}  // namespace pvhc
