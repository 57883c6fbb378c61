#pragma once

// Scenario files: a YAML document describing one experiment. Parsing is
// strict (unknown keys are errors that cite their line) and emit_config()
// writes a canonical form that parses back to an equal ScenarioConfig.

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "sara/core_types.hpp"
#include "sara/dram_model.hpp"
#include "sara/mem_controller.hpp"
#include "sara/noc_arbiter.hpp"
#include "sara/qos_meter.hpp"
#include "sara/traffic_gen.hpp"

namespace sara {

struct ScenarioConfig {
  std::string name = "scenario";
  std::uint64_t seed = 1;
  Cycle duration_cycles = 0;
  std::optional<double> duration_ms;  // alternative to duration_cycles
  Cycle epoch_cycles = 100;           // priority re-evaluation period E
  std::uint64_t series_stride = 100;  // epochs folded into one output sample
  DramTimingConfig dram{};
  ControllerConfig controller{};
  Topology topology = Topology::default_tree();
  std::vector<DmaSpec> dmas;

  double clock_hz() const { return dram.command_clock_hz(); }

  Cycle duration() const {
    if (duration_ms) return static_cast<Cycle>(std::llround(*duration_ms * 1e-3 * clock_hz()));
    return duration_cycles;
  }

  void validate() const;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

inline std::string_view to_string(MeterKind k) {
  switch (k) {
    case MeterKind::latency: return "latency";
    case MeterKind::frame_progress: return "frame_progress";
    case MeterKind::occupancy: return "occupancy";
    case MeterKind::bandwidth: return "bandwidth";
  }
  return "?";
}

inline std::string_view to_string(OccupancyDirection d) { return d == OccupancyDirection::drain ? "drain" : "fill"; }

namespace detail {

[[noreturn]] inline void invalid(const std::string& what) { throw Error(ErrorCode::validation_error, what); }

inline std::string dma_key(std::size_t i, std::string_view field) {
  return "dmas[" + std::to_string(i) + "]." + std::string(field);
}

}  // namespace detail

inline void validate_dma(const DmaSpec& d, std::size_t i, const DramTimingConfig& dram) {
  using detail::dma_key;
  using detail::invalid;
  if (d.name.empty()) invalid(dma_key(i, "name") + " must not be empty");
  if (!find_core(d.core)) invalid(dma_key(i, "core") + " '" + d.core + "' is not a known core (see list-cores)");
  if (!(d.rate_bytes_per_s >= 0.0) || !std::isfinite(d.rate_bytes_per_s)) invalid(dma_key(i, "rate") + " must be >= 0");
  if (!(d.locality >= 0.0 && d.locality <= 1.0)) invalid(dma_key(i, "locality") + " must be in [0, 1]");
  if (!(d.read_fraction >= 0.0 && d.read_fraction <= 1.0)) invalid(dma_key(i, "read_fraction") + " must be in [0, 1]");
  if (d.size_bytes == 0 || d.size_bytes > dram.row_bytes || !std::has_single_bit(d.size_bytes))
    invalid(dma_key(i, "size_bytes") + " must be a power of two no larger than a row");
  if (d.address_region.length < d.size_bytes) invalid(dma_key(i, "region_bytes") + " must hold at least one request");
  if (d.address_region.base % d.size_bytes != 0) invalid(dma_key(i, "region_base") + " must be aligned to size_bytes");
  if (d.address_region.base + d.address_region.length > dram.capacity_bytes() ||
      d.address_region.base + d.address_region.length < d.address_region.base)
    invalid(dma_key(i, "region") + " exceeds DRAM capacity");
  if (d.max_backlog == 0) invalid(dma_key(i, "max_backlog") + " must be > 0");
  if (d.source_kind == SourceKind::bursty_frame) {
    if (!(d.frame_period_s > 0.0) || !std::isfinite(d.frame_period_s))
      invalid(dma_key(i, "frame_period_s") + " must be > 0");
  }
  if (d.fixed_priority && *d.fixed_priority > kMaxPriority) invalid(dma_key(i, "fixed_priority") + " must be <= 7");
  if (d.lut) {
    try {
      d.lut->validate();
    } catch (const Error& e) {
      invalid(dma_key(i, "lut") + ": " + e.what());
    }
  }
  const MeterSpec& m = d.meter;
  switch (m.kind) {
    case MeterKind::latency:
      if (!(m.latency_limit_ns > 0.0)) invalid(dma_key(i, "meter.latency_limit_ns") + " must be > 0");
      break;
    case MeterKind::frame_progress:
      if (!(m.reference_slope > 0.0)) invalid(dma_key(i, "meter.reference_slope") + " must be > 0");
      if (d.frame_bytes == 0) invalid(dma_key(i, "frame_bytes") + " must be > 0 for a frame_progress meter");
      if (!(d.frame_period_s > 0.0)) invalid(dma_key(i, "frame_period_s") + " must be > 0");
      break;
    case MeterKind::occupancy:
      if (!(m.buffer_bytes > 0.0)) invalid(dma_key(i, "meter.buffer_bytes") + " must be > 0");
      if (!(m.initial_fraction >= 0.0 && m.initial_fraction <= 1.0))
        invalid(dma_key(i, "meter.initial_fraction") + " must be in [0, 1]");
      if (m.window_cycles == 0) invalid(dma_key(i, "meter.window_cycles") + " must be > 0");
      break;
    case MeterKind::bandwidth:
      if (!(m.target_bytes_per_s >= 0.0)) invalid(dma_key(i, "meter.target") + " must be >= 0");
      if (m.window_cycles == 0) invalid(dma_key(i, "meter.window_cycles") + " must be > 0");
      break;
  }
}

inline void ScenarioConfig::validate() const {
  using detail::invalid;
  dram.validate();
  controller.validate();
  if (duration_ms && duration_cycles != 0) invalid("give either duration_cycles or duration_ms, not both");
  if (duration_ms && !(*duration_ms > 0.0)) invalid("duration_ms must be > 0");
  if (duration() == 0) invalid("duration must be > 0");
  if (epoch_cycles == 0) invalid("epoch_cycles must be > 0");
  if (series_stride == 0) invalid("series_stride must be > 0");

  std::set<std::string> names;
  std::vector<std::string> ports;
  for (std::size_t i = 0; i < dmas.size(); ++i) {
    const DmaSpec& d = dmas[i];
    if (d.dma_id.value != i) invalid(detail::dma_key(i, "dma_id") + " must equal its position");
    validate_dma(d, i, dram);
    if (!names.insert(d.name).second) invalid("duplicate DMA name '" + d.name + "'");
    for (std::size_t j = 0; j < i; ++j)
      if (d.address_region.overlaps(dmas[j].address_region))
        invalid("address regions of '" + dmas[j].name + "' and '" + d.name + "' overlap");
    ports.push_back(d.port);
  }
  try {
    topology.validate(ports);
  } catch (const Error& e) {
    invalid(std::string("topology: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

inline int line_of(const YAML::Node& n) { return n.Mark().line + 1; }

[[noreturn]] inline void parse_fail(const YAML::Node& n, const std::string& what) {
  throw Error(ErrorCode::parse_error, "line " + std::to_string(line_of(n)) + ": " + what);
}

[[noreturn]] inline void field_fail(const YAML::Node& n, const std::string& what) {
  throw Error(ErrorCode::validation_error, "line " + std::to_string(line_of(n)) + ": " + what);
}

/// Typed, strict access to one YAML mapping. Every key must be consumed by
/// a getter before finish(), otherwise the first leftover key is reported.
class MapReader {
 public:
  MapReader(const YAML::Node& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node.IsMap()) parse_fail(node, (path_.empty() ? std::string("document") : path_) + " must be a mapping");
    for (const auto& kv : node) {
      const std::string k = kv.first.as<std::string>();
      if (!keys_.insert(k).second) parse_fail(kv.first, "duplicate key '" + qualified(k) + "'");
    }
  }

  bool has(const std::string& key) const { return keys_.count(key) != 0; }

  std::optional<YAML::Node> node(const std::string& key) {
    if (!has(key)) return std::nullopt;
    used_.insert(key);
    return node_[key];
  }

  std::optional<std::string> str(const std::string& key) {
    auto n = node(key);
    if (!n) return std::nullopt;
    if (!n->IsScalar()) parse_fail(*n, qualified(key) + " must be a scalar");
    return n->Scalar();
  }

  template <class T>
  std::optional<T> integer(const std::string& key) {
    auto n = node(key);
    if (!n) return std::nullopt;
    return parse_integer<T>(*n, qualified(key));
  }

  std::optional<double> real(const std::string& key) {
    auto n = node(key);
    if (!n) return std::nullopt;
    return parse_real(*n, qualified(key));
  }

  std::optional<bool> boolean(const std::string& key) {
    auto s = str(key);
    if (!s) return std::nullopt;
    if (*s == "true") return true;
    if (*s == "false") return false;
    parse_fail(node_[key], qualified(key) + " must be true or false");
  }

  void finish() const {
    for (const auto& kv : node_) {
      const std::string k = kv.first.as<std::string>();
      if (!used_.count(k)) parse_fail(kv.first, "unknown key '" + qualified(k) + "'");
    }
  }

  std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  const YAML::Node& yaml() const { return node_; }

  template <class T>
  static T parse_integer(const YAML::Node& n, const std::string& what) {
    if (!n.IsScalar()) parse_fail(n, what + " must be an integer");
    std::string_view s = n.Scalar();
    int base = 10;
    if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
      s.remove_prefix(2);
      base = 16;
    }
    T v{};
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v, base);
    if (ec == std::errc::result_out_of_range) parse_fail(n, what + " is out of range");
    if (ec != std::errc{} || p != s.data() + s.size()) parse_fail(n, what + " must be an integer, got '" + n.Scalar() + "'");
    return v;
  }

  static double parse_real(const YAML::Node& n, const std::string& what) {
    if (!n.IsScalar()) parse_fail(n, what + " must be a number");
    const std::string& s = n.Scalar();
    double v = 0.0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size() || !std::isfinite(v))
      parse_fail(n, what + " must be a finite number, got '" + s + "'");
    return v;
  }

 private:
  YAML::Node node_;
  std::string path_;
  std::set<std::string> keys_;
  std::set<std::string> used_;
};

template <class T>
void assign(std::optional<T> v, T& out) {
  if (v) out = *v;
}

inline std::uint32_t u32(MapReader& r, const std::string& key, std::uint32_t fallback) {
  return r.integer<std::uint32_t>(key).value_or(fallback);
}

inline PriorityLut parse_lut(const YAML::Node& n, const std::string& what) {
  if (!n.IsSequence()) parse_fail(n, what + " must be a list of numbers");
  PriorityLut lut;
  for (const auto& e : n) lut.entries.push_back(MapReader::parse_real(e, what));
  if (lut.entries.empty() || !std::has_single_bit(lut.entries.size()))
    field_fail(n, what + " must have a power-of-two number of entries");
  lut.k = static_cast<unsigned>(std::countr_zero(lut.entries.size()));
  try {
    lut.validate();
  } catch (const Error& e) {
    field_fail(n, what + ": " + e.what());
  }
  return lut;
}

inline MeterSpec parse_meter(MapReader& r) {
  MeterSpec m;
  const auto kind = r.str("kind");
  if (!kind) parse_fail(r.yaml(), r.qualified("kind") + " is required");
  if (*kind == "latency") m.kind = MeterKind::latency;
  else if (*kind == "frame_progress") m.kind = MeterKind::frame_progress;
  else if (*kind == "occupancy") m.kind = MeterKind::occupancy;
  else if (*kind == "bandwidth") m.kind = MeterKind::bandwidth;
  else parse_fail(r.yaml()["kind"], r.qualified("kind") + " must be latency, frame_progress, occupancy or bandwidth");
  assign(r.real("latency_limit_ns"), m.latency_limit_ns);
  assign(r.real("reference_slope"), m.reference_slope);
  assign(r.real("buffer_bytes"), m.buffer_bytes);
  assign(r.real("initial_fraction"), m.initial_fraction);
  if (auto d = r.str("direction")) {
    if (*d == "drain") m.direction = OccupancyDirection::drain;
    else if (*d == "fill") m.direction = OccupancyDirection::fill;
    else parse_fail(r.yaml()["direction"], r.qualified("direction") + " must be drain or fill");
  }
  assign(r.integer<Cycle>("window_cycles"), m.window_cycles);
  assign(r.integer<Cycle>("device_start_cycles"), m.device_start_cycles);
  assign(r.integer<std::uint32_t>("warmup_samples"), m.warmup_samples);
  if (r.has("target_mbps") && r.has("target_bytes_per_s"))
    parse_fail(r.yaml()["target_mbps"], "give either target_mbps or target_bytes_per_s");
  if (auto v = r.real("target_mbps")) m.target_bytes_per_s = *v * 1e6;
  assign(r.real("target_bytes_per_s"), m.target_bytes_per_s);
  r.finish();
  return m;
}

inline DmaSpec parse_dma(const YAML::Node& n, std::size_t i, const DramTimingConfig& dram) {
  MapReader r(n, "dmas[" + std::to_string(i) + "]");
  DmaSpec d;
  d.dma_id = DmaId{static_cast<std::uint32_t>(i)};
  d.name = r.str("name").value_or("");
  if (d.name.empty()) parse_fail(n, r.qualified("name") + " is required");
  d.core = r.str("core").value_or(d.name);
  const auto info = find_core(d.core);
  if (!info) field_fail(r.has("core") ? n["core"] : n, r.qualified("core") + " '" + d.core + "' is not a known core");
  d.core_class = info->core_class;

  const auto source = r.str("source");
  if (!source) parse_fail(n, r.qualified("source") + " is required");
  if (*source == "bursty_frame") d.source_kind = SourceKind::bursty_frame;
  else if (*source == "constant_rate") d.source_kind = SourceKind::constant_rate;
  else if (*source == "latency_probe") d.source_kind = SourceKind::latency_probe;
  else if (*source == "bandwidth_stream") d.source_kind = SourceKind::bandwidth_stream;
  else parse_fail(n["source"], r.qualified("source") + " must be bursty_frame, constant_rate, latency_probe or bandwidth_stream");

  if (r.has("rate_mbps") && r.has("rate_bytes_per_s")) parse_fail(n["rate_mbps"], "give either rate_mbps or rate_bytes_per_s");
  if (auto v = r.real("rate_mbps")) d.rate_bytes_per_s = *v * 1e6;
  assign(r.real("rate_bytes_per_s"), d.rate_bytes_per_s);
  if (r.has("fps") && r.has("frame_period_s")) parse_fail(n["fps"], "give either fps or frame_period_s");
  if (auto f = r.real("fps")) {
    if (!(*f > 0.0)) field_fail(n["fps"], r.qualified("fps") + " must be > 0");
    d.frame_period_s = 1.0 / *f;
  }
  assign(r.real("frame_period_s"), d.frame_period_s);
  assign(r.integer<std::uint64_t>("frame_bytes"), d.frame_bytes);
  assign(r.integer<std::uint64_t>("region_base"), d.address_region.base);
  assign(r.integer<std::uint64_t>("region_bytes"), d.address_region.length);
  assign(r.real("locality"), d.locality);
  assign(r.real("read_fraction"), d.read_fraction);
  assign(r.integer<std::uint32_t>("size_bytes"), d.size_bytes);
  assign(r.integer<std::uint64_t>("lead_bytes"), d.lead_bytes);
  assign(r.integer<std::uint32_t>("max_backlog"), d.max_backlog);
  d.port = r.str("port").value_or(Topology::default_port(d.core_class));
  if (auto m = r.node("meter")) {
    MapReader mr(*m, r.qualified("meter"));
    d.meter = parse_meter(mr);
  } else {
    parse_fail(n, r.qualified("meter") + " is required");
  }
  if (auto l = r.node("lut")) d.lut = parse_lut(*l, r.qualified("lut"));
  if (auto p = r.integer<unsigned>("fixed_priority")) {
    if (*p > kMaxPriority) field_fail(n["fixed_priority"], r.qualified("fixed_priority") + " must be <= 7");
    d.fixed_priority = static_cast<PriorityLevel>(*p);
  }
  r.finish();
  try {
    validate_dma(d, i, dram);
  } catch (const Error& e) {
    field_fail(n, e.what());
  }
  return d;
}

}  // namespace detail

/// Parses and validates a scenario document.
inline ScenarioConfig parse_config(const std::string& text) {
  using namespace detail;
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::parse_error, "line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  if (!root || root.IsNull()) throw Error(ErrorCode::parse_error, "empty scenario");

  ScenarioConfig cfg;
  MapReader r(root, "");
  assign(r.str("name"), cfg.name);
  assign(r.integer<std::uint64_t>("seed"), cfg.seed);
  assign(r.integer<Cycle>("duration_cycles"), cfg.duration_cycles);
  cfg.duration_ms = r.real("duration_ms");
  assign(r.integer<Cycle>("epoch_cycles"), cfg.epoch_cycles);
  assign(r.integer<std::uint64_t>("series_stride"), cfg.series_stride);

  if (auto n = r.node("dram")) {
    MapReader d(*n, "dram");
    DramTimingConfig& t = cfg.dram;
    assign(d.real("io_freq_mhz"), t.io_freq_mhz);
    t.CL = u32(d, "CL", t.CL);
    t.tRCD = u32(d, "tRCD", t.tRCD);
    t.tRP = u32(d, "tRP", t.tRP);
    t.tWTR = u32(d, "tWTR", t.tWTR);
    t.tRTP = u32(d, "tRTP", t.tRTP);
    t.tWR = u32(d, "tWR", t.tWR);
    t.tRRD = u32(d, "tRRD", t.tRRD);
    t.tFAW = u32(d, "tFAW", t.tFAW);
    t.tBURST = u32(d, "tBURST", t.tBURST);
    t.channels = u32(d, "channels", t.channels);
    t.ranks = u32(d, "ranks", t.ranks);
    t.banks = u32(d, "banks", t.banks);
    t.row_bytes = u32(d, "row_bytes", t.row_bytes);
    t.rows = u32(d, "rows", t.rows);
    d.finish();
    try {
      t.validate();
    } catch (const Error& e) {
      field_fail(*n, e.what());
    }
  }

  if (auto n = r.node("controller")) {
    MapReader c(*n, "controller");
    if (auto p = c.str("policy")) {
      auto pol = parse_policy(*p);
      if (!pol) parse_fail((*n)["policy"], "controller.policy must be one of FCFS, RR, FRAME_QOS, QOS, QOS_RB, FR_FCFS");
      cfg.controller.policy = *pol;
    }
    assign(c.integer<Cycle>("aging_period"), cfg.controller.aging_period);
    assign(c.integer<unsigned>("delta"), cfg.controller.delta);
    assign(c.integer<unsigned>("capacity"), cfg.controller.capacity);
    assign(c.boolean("static_split"), cfg.controller.static_split);
    c.finish();
    try {
      cfg.controller.validate();
    } catch (const Error& e) {
      field_fail(*n, e.what());
    }
  }

  if (auto n = r.node("topology")) {
    MapReader t(*n, "topology");
    assign(t.integer<std::size_t>("port_depth"), cfg.topology.port_depth);
    if (auto arbs = t.node("arbiters")) {
      if (!arbs->IsSequence()) parse_fail(*arbs, "topology.arbiters must be a list");
      cfg.topology.arbiters.clear();
      std::size_t i = 0;
      for (const auto& a : *arbs) {
        MapReader ar(a, "topology.arbiters[" + std::to_string(i++) + "]");
        Topology::Arbiter arb{ar.str("name").value_or(""), ar.str("parent").value_or("")};
        if (arb.name.empty() || arb.parent.empty()) parse_fail(a, ar.qualified("name/parent") + " are required");
        ar.finish();
        cfg.topology.arbiters.push_back(std::move(arb));
      }
    }
    t.finish();
  }

  if (auto n = r.node("dmas")) {
    if (!n->IsSequence()) parse_fail(*n, "dmas must be a list");
    std::size_t i = 0;
    for (const auto& d : *n) cfg.dmas.push_back(parse_dma(d, i++, cfg.dram));
  }
  r.finish();
  cfg.validate();
  return cfg;
}

// ---------------------------------------------------------------------------
// Emission

namespace detail {

/// Shortest text that parses back to exactly `v`.
inline std::string num(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

template <class T>
std::string num(T v)
  requires std::is_integral_v<T>
{
  return std::to_string(v);
}

}  // namespace detail

/// Canonical text for a configuration; parse_config(emit_config(c)) == c.
inline std::string emit_config(const ScenarioConfig& c) {
  using detail::num;
  std::ostringstream o;
  const auto quoted = [](const std::string& s) {
    std::string q = "\"";
    for (char ch : s) {
      if (ch == '"' || ch == '\\') q += '\\';
      q += ch;
    }
    return q + "\"";
  };
  o << "name: " << quoted(c.name) << "\n";
  o << "seed: " << c.seed << "\n";
  if (c.duration_ms) {
    o << "duration_ms: " << num(*c.duration_ms) << "\n";
  } else {
    o << "duration_cycles: " << c.duration_cycles << "\n";
  }
  o << "epoch_cycles: " << c.epoch_cycles << "\n";
  o << "series_stride: " << c.series_stride << "\n";

  const DramTimingConfig& t = c.dram;
  o << "dram:\n"
    << "  io_freq_mhz: " << num(t.io_freq_mhz) << "\n"
    << "  CL: " << t.CL << "\n  tRCD: " << t.tRCD << "\n  tRP: " << t.tRP << "\n"
    << "  tWTR: " << t.tWTR << "\n  tRTP: " << t.tRTP << "\n  tWR: " << t.tWR << "\n"
    << "  tRRD: " << t.tRRD << "\n  tFAW: " << t.tFAW << "\n  tBURST: " << t.tBURST << "\n"
    << "  channels: " << t.channels << "\n  ranks: " << t.ranks << "\n  banks: " << t.banks << "\n"
    << "  row_bytes: " << t.row_bytes << "\n  rows: " << t.rows << "\n";

  o << "controller:\n"
    << "  policy: " << to_string(c.controller.policy) << "\n"
    << "  aging_period: " << c.controller.aging_period << "\n"
    << "  delta: " << c.controller.delta << "\n"
    << "  capacity: " << c.controller.capacity << "\n"
    << "  static_split: " << (c.controller.static_split ? "true" : "false") << "\n";

  o << "topology:\n  port_depth: " << c.topology.port_depth << "\n  arbiters:\n";
  for (const auto& a : c.topology.arbiters)
    o << "    - {name: " << quoted(a.name) << ", parent: " << quoted(a.parent) << "}\n";

  o << "dmas:" << (c.dmas.empty() ? " []\n" : "\n");
  const DmaSpec dd{};
  const MeterSpec md{};
  for (const DmaSpec& d : c.dmas) {
    o << "  - name: " << quoted(d.name) << "\n"
      << "    core: " << quoted(d.core) << "\n"
      << "    source: " << to_string(d.source_kind) << "\n"
      << "    rate_bytes_per_s: " << num(d.rate_bytes_per_s) << "\n";
    if (d.frame_period_s != dd.frame_period_s) o << "    frame_period_s: " << num(d.frame_period_s) << "\n";
    if (d.frame_bytes != dd.frame_bytes) o << "    frame_bytes: " << d.frame_bytes << "\n";
    o << "    region_base: " << d.address_region.base << "\n"
      << "    region_bytes: " << d.address_region.length << "\n"
      << "    locality: " << num(d.locality) << "\n"
      << "    read_fraction: " << num(d.read_fraction) << "\n";
    if (d.size_bytes != dd.size_bytes) o << "    size_bytes: " << d.size_bytes << "\n";
    if (d.lead_bytes != dd.lead_bytes) o << "    lead_bytes: " << d.lead_bytes << "\n";
    if (d.max_backlog != dd.max_backlog) o << "    max_backlog: " << d.max_backlog << "\n";
    o << "    port: " << quoted(d.port) << "\n";
    const MeterSpec& m = d.meter;
    o << "    meter:\n      kind: " << to_string(m.kind) << "\n";
    if (m.latency_limit_ns != md.latency_limit_ns) o << "      latency_limit_ns: " << num(m.latency_limit_ns) << "\n";
    if (m.reference_slope != md.reference_slope) o << "      reference_slope: " << num(m.reference_slope) << "\n";
    if (m.buffer_bytes != md.buffer_bytes) o << "      buffer_bytes: " << num(m.buffer_bytes) << "\n";
    if (m.initial_fraction != md.initial_fraction) o << "      initial_fraction: " << num(m.initial_fraction) << "\n";
    if (m.direction != md.direction) o << "      direction: " << to_string(m.direction) << "\n";
    if (m.window_cycles != md.window_cycles) o << "      window_cycles: " << m.window_cycles << "\n";
    if (m.device_start_cycles != md.device_start_cycles)
      o << "      device_start_cycles: " << m.device_start_cycles << "\n";
    if (m.warmup_samples != md.warmup_samples) o << "      warmup_samples: " << m.warmup_samples << "\n";
    if (m.target_bytes_per_s != md.target_bytes_per_s)
      o << "      target_bytes_per_s: " << num(m.target_bytes_per_s) << "\n";
    if (d.lut) {
      o << "    lut: [";
      for (std::size_t p = 0; p < d.lut->entries.size(); ++p) o << (p ? ", " : "") << num(d.lut->entries[p]);
      o << "]\n";
    }
    if (d.fixed_priority) o << "    fixed_priority: " << unsigned{*d.fixed_priority} << "\n";
  }
  return o.str();
}

/// FNV-1a over the canonical text with the policy field neutralized; equal
/// for two scenarios that differ only in controller policy.
inline std::uint64_t scenario_fingerprint(ScenarioConfig c) {
  c.controller.policy = Policy::qos;
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : emit_config(c)) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace sara
