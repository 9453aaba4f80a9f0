#include "pvhc/feeder.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "pvhc/errors.hpp"

namespace pvhc {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string phase_mask_to_string(PhaseMask m) {
    std::string s;
    if (m & kPhaseA) s += 'A';
    if (m & kPhaseB) s += 'B';
    if (m & kPhaseC) s += 'C';
    return s;
}

PhaseMask phase_mask_from_string(const std::string& s) {
    PhaseMask m = 0;
    for (char c : s) {
        switch (c) {
            case 'A': m |= kPhaseA; break;
            case 'B': m |= kPhaseB; break;
            case 'C': m |= kPhaseC; break;
            default: throw ParseError("invalid phase designator '" + std::string(1, c) + "'");
        }
    }
    if (m == 0) throw ParseError("empty phase set");
    return m;
}

int FeederModel::bus_index(const std::string& id) const {
    for (std::size_t i = 0; i < buses.size(); ++i)
        if (buses[i].id == id) return static_cast<int>(i);
    return -1;
}

int FeederModel::require_bus(const std::string& id) const {
    int i = bus_index(id);
    if (i < 0) throw ValidationError("unknown bus id '" + id + "'");
    return i;
}

double FeederModel::z_base_ohm(int bus) const {
    const double kv = buses[static_cast<std::size_t>(bus)].nominal_kv_ll;
    return kv * kv * 1000.0 / base_kva;
}

void FeederModel::finalize() {
    if (base_kva <= 0.0) throw ValidationError("base_kva must be positive");
    if (buses.empty()) throw ValidationError("feeder has no buses");

    source_ = -1;
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < buses.size(); ++i) {
        const Bus& b = buses[i];
        if (!seen.insert(b.id).second)
            throw ValidationError("duplicate bus id '" + b.id + "'");
        if (b.phases == 0) throw ValidationError("bus '" + b.id + "' has empty phase set");
        if (b.nominal_kv_ll <= 0.0)
            throw ValidationError("bus '" + b.id + "' has non-positive kv_ll");
        if (b.is_source) {
            if (source_ >= 0)
                throw ValidationError("multiple source buses ('" + buses[source_].id + "' and '" +
                                      b.id + "')");
            source_ = static_cast<int>(i);
        }
    }
    if (source_ < 0) throw ValidationError("no source bus defined");

    seen.clear();
    for (const Branch& br : branches) {
        if (!seen.insert(br.id).second)
            throw ValidationError("duplicate branch id '" + br.id + "'");
        const Bus& f = buses[static_cast<std::size_t>(br.from)];
        const Bus& t = buses[static_cast<std::size_t>(br.to)];
        if ((br.phases & f.phases) != br.phases || (br.phases & t.phases) != br.phases)
            throw ValidationError("branch '" + br.id + "' carries phases not present on both endpoints");
        if (br.r_ohm < 0.0) throw ValidationError("branch '" + br.id + "' has negative resistance");
        if (std::hypot(br.r_eff(), br.x_eff()) <= 0.0)
            throw ValidationError("branch '" + br.id + "' has zero impedance");
        if (f.nominal_kv_ll != t.nominal_kv_ll)
            throw ValidationError("branch '" + br.id +
                                  "' connects buses at different voltage levels");
    }

    for (const Regulator& r : regulators) {
        const Branch& br = branches[static_cast<std::size_t>(r.branch)];
        if (r.current_tap < r.tap_min || r.current_tap > r.tap_max)
            throw ValidationError("regulator on branch '" + br.id + "' has tap outside limits");
        if (r.bandwidth_pu <= r.tap_step_pu)
            throw ValidationError("regulator on branch '" + br.id +
                                  "' bandwidth must exceed the tap step");
        if (r.delay_s < 0.0)
            throw ValidationError("regulator on branch '" + br.id + "' has negative delay");
        if (r.tap_step_pu <= 0.0)
            throw ValidationError("regulator on branch '" + br.id + "' has non-positive tap step");
    }

    if (load_nodes.empty()) throw ValidationError("feeder has no load nodes");
    for (const LoadNode& ln : load_nodes) {
        const Bus& b = buses[static_cast<std::size_t>(ln.bus)];
        if (ln.peak_kw <= 0.0)
            throw ValidationError("load node at bus '" + b.id + "' has non-positive peak_kw");
        if ((ln.phase & b.phases) != ln.phase)
            throw ValidationError("load node at bus '" + b.id + "' uses a phase the bus lacks");
    }

    bfs_order_ = validate_tree(*this);

    // Orient each branch along the BFS direction; files may list either end
    // first.
    parent_branch_.assign(buses.size(), -1);
    std::vector<char> reached(buses.size(), 0);
    reached[static_cast<std::size_t>(source_)] = 1;
    for (int bi : bfs_order_) {
        const Branch& br = branches[static_cast<std::size_t>(bi)];
        const int down = reached[static_cast<std::size_t>(br.from)] ? br.to : br.from;
        parent_branch_[static_cast<std::size_t>(down)] = bi;
        reached[static_cast<std::size_t>(down)] = 1;
    }

    // Phases must be continuously available along the path from the source,
    // otherwise a load on that phase would be electrically disconnected.
    for (std::size_t i = 0; i < buses.size(); ++i) {
        if (static_cast<int>(i) == source_) continue;
        int pb = parent_branch_[i];
        const Branch& br = branches[static_cast<std::size_t>(pb)];
        if ((buses[i].phases & br.phases) != buses[i].phases)
            throw ValidationError("bus '" + buses[i].id +
                                  "' declares phases its feeding branch does not carry");
    }
}

std::vector<int> validate_tree(const FeederModel& feeder) {
    const std::size_t n = feeder.buses.size();
    std::vector<std::vector<int>> adj(n);
    for (std::size_t i = 0; i < feeder.branches.size(); ++i) {
        const Branch& br = feeder.branches[i];
        adj[static_cast<std::size_t>(br.from)].push_back(static_cast<int>(i));
        adj[static_cast<std::size_t>(br.to)].push_back(static_cast<int>(i));
    }

    std::vector<int> order;
    order.reserve(feeder.branches.size());
    std::vector<char> bus_seen(n, 0);
    std::vector<char> branch_seen(feeder.branches.size(), 0);
    std::vector<int> queue;
    queue.push_back(feeder.source_bus());
    bus_seen[static_cast<std::size_t>(feeder.source_bus())] = 1;
    for (std::size_t head = 0; head < queue.size(); ++head) {
        int u = queue[head];
        for (int bi : adj[static_cast<std::size_t>(u)]) {
            if (branch_seen[static_cast<std::size_t>(bi)]) continue;
            branch_seen[static_cast<std::size_t>(bi)] = 1;
            const Branch& br = feeder.branches[static_cast<std::size_t>(bi)];
            int v = (br.from == u) ? br.to : br.from;
            if (bus_seen[static_cast<std::size_t>(v)])
                throw ValidationError("cycle detected at branch '" + br.id + "'");
            bus_seen[static_cast<std::size_t>(v)] = 1;
            order.push_back(bi);
            queue.push_back(v);
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        if (!bus_seen[i])
            throw ValidationError("bus '" + feeder.buses[i].id +
                                  "' is disconnected from the source");
    return order;
}

double electrical_distance(const FeederModel& feeder, int bus) {
    double d = 0.0;
    int cur = bus;
    while (cur != feeder.source_bus()) {
        int bi = feeder.parent_branch()[static_cast<std::size_t>(cur)];
        const Branch& br = feeder.branches[static_cast<std::size_t>(bi)];
        d += std::hypot(br.r_eff(), br.x_eff());
        cur = (br.to == cur) ? br.from : br.to;
    }
    return d;
}

double electrical_distance(const FeederModel& feeder, const std::string& bus_id) {
    return electrical_distance(feeder, feeder.require_bus(bus_id));
}

namespace {

[[noreturn]] void bad_field(const std::string& where, const std::string& what) {
    throw ParseError(where + ": " + what);
}

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                ok = true;
                break;
            }
        if (!ok) bad_field(where, "unknown key '" + it.key() + "'");
    }
}

double get_number(const json& obj, const std::string& where, const char* key) {
    if (!obj.contains(key)) bad_field(where, std::string("missing key '") + key + "'");
    if (!obj[key].is_number()) bad_field(where, std::string("key '") + key + "' must be a number");
    return obj[key].get<double>();
}

std::string get_string(const json& obj, const std::string& where, const char* key) {
    if (!obj.contains(key)) bad_field(where, std::string("missing key '") + key + "'");
    if (!obj[key].is_string()) bad_field(where, std::string("key '") + key + "' must be a string");
    return obj[key].get<std::string>();
}

}  // namespace

FeederModel parse_feeder_text(const std::string& text, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(origin + ": " + e.what());
    }
    if (!doc.is_object()) throw ParseError(origin + ": top level must be an object");
    check_keys(doc, origin, {"name", "base_kva", "buses", "branches", "regulators", "load_nodes"});

    FeederModel f;
    f.name = get_string(doc, origin, "name");
    f.base_kva = get_number(doc, origin, "base_kva");

    std::unordered_map<std::string, int> bus_idx;
    if (!doc.contains("buses") || !doc["buses"].is_array())
        throw ParseError(origin + ": 'buses' must be an array");
    for (std::size_t i = 0; i < doc["buses"].size(); ++i) {
        const json& jb = doc["buses"][i];
        const std::string where = origin + ": buses[" + std::to_string(i) + "]";
        check_keys(jb, where, {"id", "phases", "kv_ll", "source"});
        Bus b;
        b.id = get_string(jb, where, "id");
        try {
            b.phases = phase_mask_from_string(get_string(jb, where, "phases"));
        } catch (const ParseError& e) {
            bad_field(where, e.what());
        }
        b.nominal_kv_ll = get_number(jb, where, "kv_ll");
        if (jb.contains("source")) {
            if (!jb["source"].is_boolean()) bad_field(where, "'source' must be a boolean");
            b.is_source = jb["source"].get<bool>();
        }
        if (bus_idx.count(b.id)) bad_field(where, "duplicate bus id '" + b.id + "'");
        bus_idx[b.id] = static_cast<int>(f.buses.size());
        f.buses.push_back(std::move(b));
    }

    auto lookup_bus = [&](const std::string& id, const std::string& where) {
        auto it = bus_idx.find(id);
        if (it == bus_idx.end()) bad_field(where, "references unknown bus '" + id + "'");
        return it->second;
    };

    std::unordered_map<std::string, int> branch_idx;
    if (!doc.contains("branches") || !doc["branches"].is_array())
        throw ParseError(origin + ": 'branches' must be an array");
    for (std::size_t i = 0; i < doc["branches"].size(); ++i) {
        const json& jb = doc["branches"][i];
        const std::string where = origin + ": branches[" + std::to_string(i) + "]";
        check_keys(jb, where, {"id", "from", "to", "phases", "r_ohm", "x_ohm", "length_factor"});
        Branch br;
        br.id = get_string(jb, where, "id");
        br.from = lookup_bus(get_string(jb, where, "from"), where);
        br.to = lookup_bus(get_string(jb, where, "to"), where);
        try {
            br.phases = phase_mask_from_string(get_string(jb, where, "phases"));
        } catch (const ParseError& e) {
            bad_field(where, e.what());
        }
        br.r_ohm = get_number(jb, where, "r_ohm");
        br.x_ohm = get_number(jb, where, "x_ohm");
        if (jb.contains("length_factor")) br.length_factor = get_number(jb, where, "length_factor");
        if (branch_idx.count(br.id)) bad_field(where, "duplicate branch id '" + br.id + "'");
        branch_idx[br.id] = static_cast<int>(f.branches.size());
        f.branches.push_back(std::move(br));
    }

    if (doc.contains("regulators")) {
        if (!doc["regulators"].is_array()) throw ParseError(origin + ": 'regulators' must be an array");
        for (std::size_t i = 0; i < doc["regulators"].size(); ++i) {
            const json& jr = doc["regulators"][i];
            const std::string where = origin + ": regulators[" + std::to_string(i) + "]";
            check_keys(jr, where,
                       {"branch", "setpoint_pu", "bandwidth_pu", "tap_step_pu", "delay_s",
                        "tap_min", "tap_max", "current_tap"});
            Regulator r;
            const std::string bid = get_string(jr, where, "branch");
            auto it = branch_idx.find(bid);
            if (it == branch_idx.end()) bad_field(where, "references unknown branch '" + bid + "'");
            r.branch = it->second;
            r.setpoint_pu = get_number(jr, where, "setpoint_pu");
            r.bandwidth_pu = get_number(jr, where, "bandwidth_pu");
            if (jr.contains("tap_step_pu")) r.tap_step_pu = get_number(jr, where, "tap_step_pu");
            r.delay_s = get_number(jr, where, "delay_s");
            if (jr.contains("tap_min")) r.tap_min = static_cast<int>(get_number(jr, where, "tap_min"));
            if (jr.contains("tap_max")) r.tap_max = static_cast<int>(get_number(jr, where, "tap_max"));
            if (jr.contains("current_tap"))
                r.current_tap = static_cast<int>(get_number(jr, where, "current_tap"));
            f.regulators.push_back(r);
        }
    }

    if (!doc.contains("load_nodes") || !doc["load_nodes"].is_array())
        throw ParseError(origin + ": 'load_nodes' must be an array");
    for (std::size_t i = 0; i < doc["load_nodes"].size(); ++i) {
        const json& jl = doc["load_nodes"][i];
        const std::string where = origin + ": load_nodes[" + std::to_string(i) + "]";
        check_keys(jl, where, {"bus", "phase", "peak_kw"});
        LoadNode ln;
        ln.bus = lookup_bus(get_string(jl, where, "bus"), where);
        try {
            ln.phase = phase_mask_from_string(get_string(jl, where, "phase"));
        } catch (const ParseError& e) {
            bad_field(where, e.what());
        }
        ln.peak_kw = get_number(jl, where, "peak_kw");
        f.load_nodes.push_back(std::move(ln));
    }

    try {
        f.finalize();
    } catch (const ValidationError& e) {
        throw ValidationError(origin + ": " + e.what());
    }
    return f;
}

FeederModel parse_feeder(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open feeder file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_feeder_text(ss.str(), path.string());
}

std::string serialize_feeder(const FeederModel& f) {
    ordered_json doc;
    doc["name"] = f.name;
    doc["base_kva"] = f.base_kva;
    doc["buses"] = ordered_json::array();
    for (const Bus& b : f.buses) {
        ordered_json jb;
        jb["id"] = b.id;
        jb["phases"] = phase_mask_to_string(b.phases);
        jb["kv_ll"] = b.nominal_kv_ll;
        if (b.is_source) jb["source"] = true;
        doc["buses"].push_back(std::move(jb));
    }
    doc["branches"] = ordered_json::array();
    for (const Branch& br : f.branches) {
        ordered_json jb;
        jb["id"] = br.id;
        jb["from"] = f.buses[static_cast<std::size_t>(br.from)].id;
        jb["to"] = f.buses[static_cast<std::size_t>(br.to)].id;
        jb["phases"] = phase_mask_to_string(br.phases);
        jb["r_ohm"] = br.r_ohm;
        jb["x_ohm"] = br.x_ohm;
        if (br.length_factor != 1.0) jb["length_factor"] = br.length_factor;
        doc["branches"].push_back(std::move(jb));
    }
    doc["regulators"] = ordered_json::array();
    for (const Regulator& r : f.regulators) {
        ordered_json jr;
        jr["branch"] = f.branches[static_cast<std::size_t>(r.branch)].id;
        jr["setpoint_pu"] = r.setpoint_pu;
        jr["bandwidth_pu"] = r.bandwidth_pu;
        jr["tap_step_pu"] = r.tap_step_pu;
        jr["delay_s"] = r.delay_s;
        jr["tap_min"] = r.tap_min;
        jr["tap_max"] = r.tap_max;
        jr["current_tap"] = r.current_tap;
        doc["regulators"].push_back(std::move(jr));
    }
    doc["load_nodes"] = ordered_json::array();
    for (const LoadNode& ln : f.load_nodes) {
        ordered_json jl;
        jl["bus"] = f.buses[static_cast<std::size_t>(ln.bus)].id;
        jl["phase"] = phase_mask_to_string(ln.phase);
        jl["peak_kw"] = ln.peak_kw;
        doc["load_nodes"].push_back(std::move(jl));
    }
    return doc.dump(2) + "\n";
}

}  // namespace pvhc
