#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace pvhc {

// Phase presence as a bitmask over A/B/C.
using PhaseMask = std::uint8_t;
inline constexpr PhaseMask kPhaseA = 1;
inline constexpr PhaseMask kPhaseB = 2;
inline constexpr PhaseMask kPhaseC = 4;
inline constexpr PhaseMask kPhaseABC = kPhaseA | kPhaseB | kPhaseC;

std::string phase_mask_to_string(PhaseMask m);
PhaseMask phase_mask_from_string(const std::string& s);  // throws ParseError
inline int phase_count(PhaseMask m) {
    return ((m & kPhaseA) ? 1 : 0) + ((m & kPhaseB) ? 1 : 0) + ((m & kPhaseC) ? 1 : 0);
}

struct Bus {
    std::string id;
    PhaseMask phases = kPhaseABC;
    double nominal_kv_ll = 0.0;
    bool is_source = false;
};

struct Branch {
    std::string id;
    int from = -1;  // bus index
    int to = -1;
    PhaseMask phases = kPhaseABC;
    double r_ohm = 0.0;
    double x_ohm = 0.0;
    double length_factor = 1.0;

    double r_eff() const { return r_ohm * length_factor; }
    double x_eff() const { return x_ohm * length_factor; }
};

struct Regulator {
    int branch = -1;  // branch index
    double setpoint_pu = 1.0;
    double bandwidth_pu = 0.0167;
    double tap_step_pu = 0.00625;
    int tap_min = -16;
    int tap_max = 16;
    double delay_s = 30.0;
    int current_tap = 0;
};

struct LoadNode {
    int bus = -1;  // bus index
    PhaseMask phase = kPhaseABC;
    double peak_kw = 0.0;
    std::vector<std::string> houses;  // filled by load allocation
};

class FeederModel {
  public:
    std::string name;
    double base_kva = 0.0;
    std::vector<Bus> buses;
    std::vector<Branch> branches;
    std::vector<Regulator> regulators;
    std::vector<LoadNode> load_nodes;

    int source_bus() const { return source_; }
    int bus_index(const std::string& id) const;  // -1 when absent
    int require_bus(const std::string& id) const;  // throws ValidationError

    // Branch feeding each bus (-1 for the source) and BFS depth.
    const std::vector<int>& parent_branch() const { return parent_branch_; }
    const std::vector<int>& bfs_branch_order() const { return bfs_order_; }

    // Per-phase impedance base in ohms at a bus.
    double z_base_ohm(int bus) const;
    std::size_t n_load_nodes() const { return load_nodes.size(); }

    // Validates invariants and computes the traversal caches. Called by
    // parse_feeder; must be re-run after structural mutation.
    void finalize();

  private:
    int source_ = -1;
    std::vector<int> parent_branch_;
    std::vector<int> bfs_order_;
};

FeederModel parse_feeder(const std::filesystem::path& path);
FeederModel parse_feeder_text(const std::string& text, const std::string& origin = "<string>");
std::string serialize_feeder(const FeederModel& feeder);

// Branches in breadth-first order from the source; throws ValidationError on
// cycles or disconnected buses.
std::vector<int> validate_tree(const FeederModel& feeder);

// Sum of |z| over the tree path from the source, in ohms.
double electrical_distance(const FeederModel& feeder, const std::string& bus_id);
double electrical_distance(const FeederModel& feeder, int bus);

}  // namespace pvhc
