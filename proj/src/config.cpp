#include "bloomdtn/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>

namespace bloomdtn {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double as_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size() || !std::isfinite(out))
    throw ConfigError(key, "expected a number, got '" + v + "'");
  return out;
}

template <typename T>
T as_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
    throw ConfigError(key, "expected a non-negative integer, got '" + v + "'");
  if (out > std::numeric_limits<T>::max()) throw ConfigError(key, "value " + v + " is too large");
  return static_cast<T>(out);
}

bool as_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(key, "expected true or false, got '" + v + "'");
}

using Setter = std::function<void(ScenarioConfig&, const std::string& key, const std::string& v)>;

const std::vector<std::pair<std::string, Setter>>& schema() {
  static const std::vector<std::pair<std::string, Setter>> table = {
      {"mobility",
       [](ScenarioConfig& c, const std::string& k, const std::string& v) {
         if (v == "rwp") c.mobility = MobilityKind::Rwp;
         else if (v == "traces") c.mobility = MobilityKind::Traces;
         else throw ConfigError(k, "expected rwp or traces, got '" + v + "'");
       }},
      {"rwp.width", [](auto& c, auto& k, auto& v) { c.rwp.width = as_double(k, v); }},
      {"rwp.height", [](auto& c, auto& k, auto& v) { c.rwp.height = as_double(k, v); }},
      {"rwp.v_min", [](auto& c, auto& k, auto& v) { c.rwp.v_min = as_double(k, v); }},
      {"rwp.v_max", [](auto& c, auto& k, auto& v) { c.rwp.v_max = as_double(k, v); }},
      {"rwp.pause", [](auto& c, auto& k, auto& v) { c.rwp.pause = as_double(k, v); }},
      {"rwp.node_count",
       [](auto& c, auto& k, auto& v) { c.rwp.node_count = as_uint<std::uint32_t>(k, v); }},
      {"traces.dir", [](auto& c, auto&, auto& v) { c.traces.dir = v; }},
      {"traces.node_count",
       [](auto& c, auto& k, auto& v) { c.traces.node_count = as_uint<std::uint32_t>(k, v); }},
      {"traces.t_begin", [](auto& c, auto& k, auto& v) { c.traces.t_begin = as_double(k, v); }},
      {"traces.t_end", [](auto& c, auto& k, auto& v) { c.traces.t_end = as_double(k, v); }},
      {"traces.max_gap", [](auto& c, auto& k, auto& v) { c.traces.max_gap = as_double(k, v); }},
      {"channel.rate", [](auto& c, auto& k, auto& v) { c.channel.rate_bps = as_double(k, v); }},
      {"channel.range", [](auto& c, auto& k, auto& v) { c.channel.range = as_double(k, v); }},
      {"strategy.kind",
       [](ScenarioConfig& c, const std::string& k, const std::string& v) {
         const auto kind = parse_strategy(v);
         if (!kind) throw ConfigError(k, "expected A, B or C, got '" + v + "'");
         c.strategy.kind = *kind;
       }},
      {"strategy.window_n",
       [](auto& c, auto& k, auto& v) { c.strategy.window_n = as_uint<std::uint32_t>(k, v); }},
      {"strategy.small_n",
       [](auto& c, auto& k, auto& v) { c.strategy.small_n = as_uint<std::uint32_t>(k, v); }},
      {"strategy.received_j",
       [](auto& c, auto& k, auto& v) { c.strategy.received_j = as_uint<std::uint32_t>(k, v); }},
      {"strategy.p_target", [](auto& c, auto& k, auto& v) { c.strategy.p_target = as_double(k, v); }},
      {"strategy.exact", [](auto& c, auto& k, auto& v) { c.strategy.exact_sets = as_bool(k, v); }},
      {"buffer_capacity",
       [](auto& c, auto& k, auto& v) { c.buffer_capacity = as_uint<std::uint32_t>(k, v); }},
      {"beacon_interval", [](auto& c, auto& k, auto& v) { c.beacon_interval = as_double(k, v); }},
      {"duration", [](auto& c, auto& k, auto& v) { c.duration = as_double(k, v); }},
      {"source.model",
       [](ScenarioConfig& c, const std::string& k, const std::string& v) {
         if (v == "greedy") c.source.kind = SourceKind::Greedy;
         else if (v == "poisson") c.source.kind = SourceKind::Poisson;
         else throw ConfigError(k, "expected greedy or poisson, got '" + v + "'");
       }},
      {"source.rate", [](auto& c, auto& k, auto& v) { c.source.rate = as_double(k, v); }},
      {"source.count",
       [](ScenarioConfig& c, const std::string& k, const std::string& v) {
         if (v == "all") c.source.count.reset();
         else c.source.count = as_uint<std::uint32_t>(k, v);
       }},
      {"payload_len",
       [](auto& c, auto& k, auto& v) { c.payload_len = as_uint<std::uint16_t>(k, v); }},
      {"seed", [](auto& c, auto& k, auto& v) { c.seed = as_uint<std::uint64_t>(k, v); }},
      {"output.dir", [](auto& c, auto&, auto& v) { c.output_dir = v; }},
      {"metrics.bucket", [](auto& c, auto& k, auto& v) { c.bucket = as_double(k, v); }},
      {"debug.check_invariants",
       [](auto& c, auto& k, auto& v) { c.check_invariants = as_bool(k, v); }},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const auto& [k, _] : schema()) out.push_back(k);
    return out;
  }();
  return keys;
}

std::pair<std::string, std::string> split_setting(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw ConfigError(trim(text), "expected key=value");
  auto key = trim(std::string_view(text).substr(0, eq));
  if (key.empty()) throw ConfigError("<empty>", "missing key before '='");
  return {std::move(key), trim(std::string_view(text).substr(eq + 1))};
}

Settings read_settings(std::istream& in) {
  Settings out;
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    out.push_back(split_setting(line));
  }
  return out;
}

Settings read_settings(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("config", "cannot open " + file.string());
  return read_settings(in);
}

ScenarioConfig apply_settings(ScenarioConfig cfg, const Settings& settings) {
  bool window_given = false;
  for (const auto& [key, value] : settings) {
    const auto& table = schema();
    const auto it = std::find_if(table.begin(), table.end(), [&](const auto& e) { return e.first == key; });
    if (it == table.end()) throw ConfigError(key, "unknown key");
    it->second(cfg, key, value);
    window_given = window_given || key == "strategy.window_n";
  }
  if (!window_given) cfg.strategy.window_n = strategy_defaults(cfg.strategy.kind, cfg.buffer_capacity).window_n;
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    const std::string what = e.what();
    const auto cut = what.find_first_of(" :");
    throw ConfigError(what.substr(0, cut), trim(what.substr(std::min(what.size(), cut + 1))));
  }
  return cfg;
}

ScenarioConfig parse_config(const std::filesystem::path& file) {
  return apply_settings(paper_scenario(), read_settings(file));
}

}  // namespace bloomdtn
