#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pvhc/feeder.hpp"
#include "pvhc/load_profile.hpp"

namespace pvhc {

struct AllocationConfig {
    double upper_factor = 1.03;
    double lower_factor = 0.97;
    int max_attempts = 1000;
    std::uint64_t rng_seed = 0;
};

struct NodeAllocation {
    int node = -1;                 // load node index
    std::vector<int> profile_idx;  // pool profile behind each simulated house
    double aggregate_peak_kw = 0.0;

    std::size_t n_houses() const { return profile_idx.size(); }
};

// One simulated household: a pool profile templated onto a load node.
struct House {
    std::string id;
    int node = -1;
    int profile = -1;
};

struct FeederAllocation {
    std::vector<NodeAllocation> nodes;
    std::vector<House> houses;  // node-major, stable ids h0001..
    double resolution_s = 60.0;

    std::size_t total_houses() const { return houses.size(); }
};

// Draws pool profiles (uniformly, with replacement across attempts, without
// replacement within one attempt) until the aggregate weekly peak lands in
// (lower_factor*P, upper_factor*P]. A draw that overshoots the upper bound is
// discarded and replaced. Throws AllocationError once max_attempts restarts
// are exhausted.
NodeAllocation allocate_node(const LoadPool& pool, double peak_kw, const AllocationConfig& config);

// allocate_node per load node with RNG substreams keyed by (seed, node), so
// the result is independent of processing order and worker count.
FeederAllocation allocate_feeder(const FeederModel& feeder, const LoadPool& pool,
                                 const AllocationConfig& config, unsigned workers = 1);

// Per-node aggregate demand, time-major [t * n_nodes + node] kW.
std::vector<double> node_load_time_major(const FeederModel& feeder, const LoadPool& pool,
                                         const FeederAllocation& alloc);

// Feeder-head series (sum over nodes per step) and its weekly peak.
std::vector<double> feeder_head_series(const std::vector<double>& node_load_tm,
                                       std::size_t n_nodes);

}  // namespace pvhc
