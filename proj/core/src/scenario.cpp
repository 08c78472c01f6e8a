#include "crmsim/scenario.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <set>

namespace crmsim {

using nlohmann::json;

const char* topology_kind_name(TopologyKind k) {
  switch (k) {
    case TopologyKind::short_hop: return "short_hop";
    case TopologyKind::chain: return "chain";
    case TopologyKind::cross: return "cross";
    case TopologyKind::random_area: return "random";
  }
  return "?";
}

const char* flow_rule_name(FlowRule r) {
  return r == FlowRule::region_pair ? "region_pair" : "k_hop";
}

namespace {

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& path) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key))
      throw ValidationError(path.empty() ? key : path + "." + key, "unknown key");
  }
}

double require_number(const json& obj, const char* key, const std::string& path) {
  const json& v = obj.at(key);
  if (!v.is_number()) throw ValidationError(path, "expected a number");
  return v.get<double>();
}

std::uint32_t as_u32(const json& v, const std::string& path) {
  if (!v.is_number_unsigned() && !v.is_number_integer())
    throw ValidationError(path, "expected a non-negative integer");
  const auto n = v.get<std::int64_t>();
  if (n < 0) throw ValidationError(path, "expected a non-negative integer");
  return static_cast<std::uint32_t>(n);
}

void parse_params(const json& obj, ProtocolParams& p) {
  static const std::set<std::string> allowed{
      "weight_local", "weight_relay", "mean_weight", "th_buffer", "buffer_capacity_packets",
      "mean_packet_bytes", "th_res", "th_low", "th_high", "th_less", "w_n", "inertia_depth_n",
      "clamp_mode", "t_min_us", "t_betmin_us", "d_max_us", "sifs_us", "slot_us",
      "wra_update_period_us", "t_access_us", "v_phy_bits_per_us", "t_rts_us", "t_cts_us",
      "t_ack_us", "cw_low", "cw_general", "cw_high", "fixed_offset_us", "txop_limit_us", "tx_power_mw",
      "rx_power_mw", "sleep_power_mw", "retry_limit"};
  reject_unknown_keys(obj, allowed, "params");

  auto num = [&](const char* key, double& out) {
    if (obj.contains(key)) out = require_number(obj, key, std::string("params.") + key);
  };
  auto u32 = [&](const char* key, std::uint32_t& out) {
    if (obj.contains(key)) out = as_u32(obj.at(key), std::string("params.") + key);
  };
  auto stime = [&](const char* key, SimTime& out) {
    if (obj.contains(key)) {
      const double v = require_number(obj, key, std::string("params.") + key);
      if (v < 0) throw ValidationError(std::string("params.") + key, "must be >= 0");
      out = to_sim_time(v);
    }
  };

  num("weight_local", p.weight_local);
  num("weight_relay", p.weight_relay);
  num("mean_weight", p.mean_weight);
  num("th_buffer", p.th_buffer);
  u32("buffer_capacity_packets", p.buffer_capacity_packets);
  u32("mean_packet_bytes", p.mean_packet_bytes);
  num("th_res", p.th_res);
  num("th_low", p.th_low);
  num("th_high", p.th_high);
  num("th_less", p.th_less);
  num("w_n", p.w_n);
  u32("inertia_depth_n", p.inertia_depth_n);
  if (obj.contains("clamp_mode")) {
    const std::string mode = obj.at("clamp_mode").get<std::string>();
    if (mode == "ratio")
      p.clamp_mode = ClampMode::ratio;
    else if (mode == "lambda")
      p.clamp_mode = ClampMode::lambda;
    else
      throw ValidationError("params.clamp_mode", "must be \"ratio\" or \"lambda\"");
  }
  stime("t_min_us", p.t_min_us);
  stime("t_betmin_us", p.t_betmin_us);
  stime("d_max_us", p.d_max_us);
  stime("sifs_us", p.sifs_us);
  stime("slot_us", p.slot_us);
  stime("wra_update_period_us", p.wra_update_period_us);
  if (obj.contains("t_access_us")) {
    if (obj.at("t_access_us").is_null()) {
      p.t_access_us.reset();
    } else {
      SimTime v = 0;
      stime("t_access_us", v);
      p.t_access_us = v;
    }
  }
  num("v_phy_bits_per_us", p.v_phy_bits_per_us);
  stime("t_rts_us", p.t_rts_us);
  stime("t_cts_us", p.t_cts_us);
  stime("t_ack_us", p.t_ack_us);
  u32("cw_low", p.cw_low);
  u32("cw_general", p.cw_general);
  u32("cw_high", p.cw_high);
  stime("fixed_offset_us", p.fixed_offset_us);
  stime("txop_limit_us", p.txop_limit_us);
  num("tx_power_mw", p.tx_power_mw);
  num("rx_power_mw", p.rx_power_mw);
  num("sleep_power_mw", p.sleep_power_mw);
  u32("retry_limit", p.retry_limit);
}

json params_to_json(const ProtocolParams& p) {
  json j;
  j["weight_local"] = p.weight_local;
  j["weight_relay"] = p.weight_relay;
  j["mean_weight"] = p.mean_weight;
  j["th_buffer"] = p.th_buffer;
  j["buffer_capacity_packets"] = p.buffer_capacity_packets;
  j["mean_packet_bytes"] = p.mean_packet_bytes;
  j["th_res"] = p.th_res;
  j["th_low"] = p.th_low;
  j["th_high"] = p.th_high;
  j["th_less"] = p.th_less;
  j["w_n"] = p.w_n;
  j["inertia_depth_n"] = p.inertia_depth_n;
  j["clamp_mode"] = p.clamp_mode == ClampMode::ratio ? "ratio" : "lambda";
  j["t_min_us"] = p.t_min_us;
  j["t_betmin_us"] = p.t_betmin_us;
  j["d_max_us"] = p.d_max_us;
  j["sifs_us"] = p.sifs_us;
  j["slot_us"] = p.slot_us;
  j["wra_update_period_us"] = p.wra_update_period_us;
  if (p.t_access_us)
    j["t_access_us"] = *p.t_access_us;
  else
    j["t_access_us"] = nullptr;
  j["v_phy_bits_per_us"] = p.v_phy_bits_per_us;
  j["t_rts_us"] = p.t_rts_us;
  j["t_cts_us"] = p.t_cts_us;
  j["t_ack_us"] = p.t_ack_us;
  j["cw_low"] = p.cw_low;
  j["cw_general"] = p.cw_general;
  j["cw_high"] = p.cw_high;
  j["fixed_offset_us"] = p.fixed_offset_us;
  j["txop_limit_us"] = p.txop_limit_us;
  j["tx_power_mw"] = p.tx_power_mw;
  j["rx_power_mw"] = p.rx_power_mw;
  j["sleep_power_mw"] = p.sleep_power_mw;
  j["retry_limit"] = p.retry_limit;
  return j;
}

void validate_config(const ScenarioConfig& c) {
  const std::string err = validate_params(c.params);
  if (!err.empty()) {
    const auto colon = err.find(':');
    throw ValidationError("params." + err.substr(0, colon), err.substr(colon + 2));
  }
  if (c.variants.empty()) throw ValidationError("variants", "at least one variant required");
  if (c.seeds.empty()) throw ValidationError("seeds", "at least one seed required");
  if (c.duration_s <= 0) throw ValidationError("duration_s", "must be > 0");
  if (c.kind == TopologyKind::random_area) {
    if (c.flow_rule != FlowRule::k_hop)
      throw ValidationError("traffic.flow_rule", "random topology requires k_hop flows");
    if (c.n_nodes < 2) throw ValidationError("topology.n_nodes", "must be >= 2");
  } else if (c.flow_rule != FlowRule::region_pair) {
    throw ValidationError("traffic.flow_rule", "region topologies use region_pair flows");
  }
  if (c.nodes_per_region < 1)
    throw ValidationError("topology.nodes_per_region", "must be >= 1");
  if (c.kind == TopologyKind::chain && c.regions < 2)
    throw ValidationError("topology.regions", "must be >= 2");
  if (!(c.realtime_fraction >= 0.0 && c.realtime_fraction <= 1.0))
    throw ValidationError("traffic.realtime_fraction", "must lie in [0, 1]");
  if (c.mode == TrafficMode::offered_load && c.offered_rate_bits_per_s <= 0.0)
    throw ValidationError("traffic.offered_rate_bits_per_s", "must be > 0");
  if (!c.sweep_key.empty()) {
    if (c.sweep_values.empty()) throw ValidationError("sweep.values", "must be non-empty");
    ScenarioConfig probe = c;
    probe.sweep_key.clear();
    apply_sweep_value(probe, c.sweep_key, c.sweep_values.front());
  }
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what());  // message carries line/column
  }
  if (!root.is_object()) throw ParseError("config root must be a JSON object");

  static const std::set<std::string> top_allowed{"name",     "topology", "traffic", "variants",
                                                 "params",   "duration_s", "seeds", "sweep"};
  reject_unknown_keys(root, top_allowed, "");

  ScenarioConfig c;
  if (root.contains("name")) c.name = root.at("name").get<std::string>();

  if (root.contains("topology")) {
    const json& t = root.at("topology");
    static const std::set<std::string> allowed{"kind",    "nodes_per_region", "regions",
                                               "arm_regions", "spacing_m",    "area_m",
                                               "n_nodes", "max_link_m"};
    reject_unknown_keys(t, allowed, "topology");
    const std::string kind = t.value("kind", "chain");
    if (kind == "short_hop")
      c.kind = TopologyKind::short_hop;
    else if (kind == "chain")
      c.kind = TopologyKind::chain;
    else if (kind == "cross")
      c.kind = TopologyKind::cross;
    else if (kind == "random")
      c.kind = TopologyKind::random_area;
    else
      throw ValidationError("topology.kind", "unknown topology kind");
    if (t.contains("nodes_per_region"))
      c.nodes_per_region = as_u32(t.at("nodes_per_region"), "topology.nodes_per_region");
    if (t.contains("regions")) c.regions = as_u32(t.at("regions"), "topology.regions");
    if (t.contains("arm_regions"))
      c.arm_regions = as_u32(t.at("arm_regions"), "topology.arm_regions");
    if (t.contains("spacing_m")) c.spacing_m = require_number(t, "spacing_m", "topology.spacing_m");
    if (t.contains("area_m")) c.area_m = require_number(t, "area_m", "topology.area_m");
    if (t.contains("n_nodes")) c.n_nodes = as_u32(t.at("n_nodes"), "topology.n_nodes");
    if (t.contains("max_link_m"))
      c.max_link_m = require_number(t, "max_link_m", "topology.max_link_m");
  }

  if (root.contains("traffic")) {
    const json& t = root.at("traffic");
    static const std::set<std::string> allowed{"mode", "offered_rate_bits_per_s", "flow_rule",
                                               "k", "realtime_fraction"};
    reject_unknown_keys(t, allowed, "traffic");
    const std::string mode = t.value("mode", "saturated");
    if (mode == "saturated")
      c.mode = TrafficMode::saturated;
    else if (mode == "offered_load")
      c.mode = TrafficMode::offered_load;
    else
      throw ValidationError("traffic.mode", "must be \"saturated\" or \"offered_load\"");
    if (t.contains("offered_rate_bits_per_s"))
      c.offered_rate_bits_per_s =
          require_number(t, "offered_rate_bits_per_s", "traffic.offered_rate_bits_per_s");
    const std::string rule = t.value("flow_rule", c.kind == TopologyKind::random_area
                                                      ? "k_hop"
                                                      : "region_pair");
    if (rule == "region_pair")
      c.flow_rule = FlowRule::region_pair;
    else if (rule == "k_hop")
      c.flow_rule = FlowRule::k_hop;
    else
      throw ValidationError("traffic.flow_rule", "must be \"region_pair\" or \"k_hop\"");
    if (t.contains("k")) c.k_hops = as_u32(t.at("k"), "traffic.k");
    if (t.contains("realtime_fraction"))
      c.realtime_fraction = require_number(t, "realtime_fraction", "traffic.realtime_fraction");
  } else if (c.kind == TopologyKind::random_area) {
    c.flow_rule = FlowRule::k_hop;
  }

  if (root.contains("variants")) {
    c.variants.clear();
    for (const json& v : root.at("variants")) {
      const auto parsed = variant_from_name(v.get<std::string>());
      if (!parsed) throw ValidationError("variants", "unknown variant " + v.get<std::string>());
      c.variants.push_back(*parsed);
    }
  }

  if (root.contains("params")) parse_params(root.at("params"), c.params);
  if (root.contains("duration_s"))
    c.duration_s = require_number(root, "duration_s", "duration_s");
  if (root.contains("seeds")) {
    c.seeds.clear();
    for (const json& s : root.at("seeds")) c.seeds.push_back(s.get<std::uint64_t>());
  }
  if (root.contains("sweep")) {
    const json& s = root.at("sweep");
    static const std::set<std::string> allowed{"key", "values"};
    reject_unknown_keys(s, allowed, "sweep");
    c.sweep_key = s.at("key").get<std::string>();
    for (const json& v : s.at("values")) c.sweep_values.push_back(v.get<double>());
  }

  validate_config(c);
  return c;
}

std::string scenario_to_json(const ScenarioConfig& c) {
  json root;
  root["name"] = c.name;
  json topo;
  topo["kind"] = topology_kind_name(c.kind);
  topo["nodes_per_region"] = c.nodes_per_region;
  topo["regions"] = c.regions;
  topo["arm_regions"] = c.arm_regions;
  topo["spacing_m"] = c.spacing_m;
  topo["area_m"] = c.area_m;
  topo["n_nodes"] = c.n_nodes;
  topo["max_link_m"] = c.max_link_m;
  root["topology"] = topo;
  json traffic;
  traffic["mode"] = c.mode == TrafficMode::saturated ? "saturated" : "offered_load";
  traffic["offered_rate_bits_per_s"] = c.offered_rate_bits_per_s;
  traffic["flow_rule"] = flow_rule_name(c.flow_rule);
  traffic["k"] = c.k_hops;
  traffic["realtime_fraction"] = c.realtime_fraction;
  root["traffic"] = traffic;
  json variants = json::array();
  for (Variant v : c.variants) variants.push_back(variant_name(v));
  root["variants"] = variants;
  root["params"] = params_to_json(c.params);
  root["duration_s"] = c.duration_s;
  root["seeds"] = c.seeds;
  if (!c.sweep_key.empty()) {
    json sweep;
    sweep["key"] = c.sweep_key;
    sweep["values"] = c.sweep_values;
    root["sweep"] = sweep;
  }
  return root.dump(2);
}

bool operator==(const ProtocolParams& a, const ProtocolParams& b) {
  return params_to_json(a) == params_to_json(b);
}

bool operator==(const ScenarioConfig& a, const ScenarioConfig& b) {
  return a.name == b.name && a.kind == b.kind && a.nodes_per_region == b.nodes_per_region &&
         a.regions == b.regions && a.arm_regions == b.arm_regions && a.spacing_m == b.spacing_m &&
         a.area_m == b.area_m && a.n_nodes == b.n_nodes && a.max_link_m == b.max_link_m &&
         a.mode == b.mode && a.offered_rate_bits_per_s == b.offered_rate_bits_per_s &&
         a.flow_rule == b.flow_rule && a.k_hops == b.k_hops &&
         a.realtime_fraction == b.realtime_fraction && a.variants == b.variants &&
         a.params == b.params && a.duration_s == b.duration_s && a.seeds == b.seeds &&
         a.sweep_key == b.sweep_key && a.sweep_values == b.sweep_values;
}

void apply_sweep_value(ScenarioConfig& c, const std::string& key, double value) {
  auto set_u32 = [&](std::uint32_t& field) { field = static_cast<std::uint32_t>(value); };
  auto set_time = [&](SimTime& field) { field = to_sim_time(value); };

  if (key == "traffic.offered_rate_bits_per_s") {
    c.offered_rate_bits_per_s = value;
  } else if (key == "traffic.realtime_fraction") {
    c.realtime_fraction = value;
  } else if (key == "topology.nodes_per_region") {
    set_u32(c.nodes_per_region);
  } else if (key == "topology.n_nodes") {
    set_u32(c.n_nodes);
  } else if (key == "params.fixed_offset_us") {
    set_time(c.params.fixed_offset_us);
  } else if (key == "params.th_res") {
    c.params.th_res = value;
  } else if (key == "params.th_low") {
    c.params.th_low = value;
  } else if (key == "params.th_high") {
    c.params.th_high = value;
  } else if (key == "params.th_less") {
    c.params.th_less = value;
  } else if (key == "params.th_buffer") {
    c.params.th_buffer = value;
  } else if (key == "params.w_n") {
    c.params.w_n = value;
  } else if (key == "params.t_min_us") {
    set_time(c.params.t_min_us);
  } else if (key == "params.t_betmin_us") {
    set_time(c.params.t_betmin_us);
  } else if (key == "params.d_max_us") {
    set_time(c.params.d_max_us);
  } else if (key == "params.wra_update_period_us") {
    set_time(c.params.wra_update_period_us);
  } else {
    throw ValidationError("sweep.key", "unsupported sweep key " + key);
  }
}

ScenarioWorld build_world(const ScenarioConfig& c, std::uint64_t seed) {
  ScenarioWorld world;
  switch (c.kind) {
    case TopologyKind::short_hop:
      world = make_short_hop(c.nodes_per_region, seed);
      break;
    case TopologyKind::chain:
      world = make_chain(c.regions, c.nodes_per_region, c.spacing_m, seed);
      break;
    case TopologyKind::cross:
      world = make_cross(c.arm_regions, c.nodes_per_region, c.spacing_m, seed);
      break;
    case TopologyKind::random_area: {
      world.topology = make_random(c.area_m, c.n_nodes, c.max_link_m, seed);
      world.traffic.flows = k_hop_flows(world.topology, c.k_hops, seed);
      break;
    }
  }
  world.traffic.mode = c.mode;
  world.traffic.offered_rate_bits_per_s = c.offered_rate_bits_per_s;
  world.traffic.realtime_fraction = c.realtime_fraction;
  world.traffic.packet_bytes = c.params.mean_packet_bytes;
  return world;
}

}  // namespace crmsim
