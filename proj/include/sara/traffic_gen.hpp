#pragma once

// Synthetic per-DMA request streams for the camcorder dataflow.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sara/core_types.hpp"
#include "sara/dram_model.hpp"
#include "sara/qos_meter.hpp"
#include "sara/rng.hpp"

namespace sara {

enum class SourceKind : std::uint8_t { bursty_frame, constant_rate, latency_probe, bandwidth_stream };

inline std::string_view to_string(SourceKind k) {
  switch (k) {
    case SourceKind::bursty_frame: return "bursty_frame";
    case SourceKind::constant_rate: return "constant_rate";
    case SourceKind::latency_probe: return "latency_probe";
    case SourceKind::bandwidth_stream: return "bandwidth_stream";
  }
  return "?";
}

/// One row of the heterogeneous-core table.
struct CoreInfo {
  std::string_view name;
  CoreClass core_class;
  std::string_view performance_type;
};

inline constexpr CoreInfo kCores[] = {
    {"cpu", CoreClass::cpu, "bandwidth"},
    {"gpu", CoreClass::gpu, "frame rate"},
    {"dsp", CoreClass::dsp, "latency"},
    {"image_processor", CoreClass::media, "frame rate"},
    {"video_codec", CoreClass::media, "frame rate"},
    {"rotator", CoreClass::media, "frame rate"},
    {"jpeg", CoreClass::media, "frame rate"},
    {"camera", CoreClass::media, "buffer occupancy"},
    {"display", CoreClass::media, "buffer occupancy"},
    {"gps", CoreClass::system, "processing time"},
    {"wifi", CoreClass::system, "bandwidth"},
    {"usb", CoreClass::system, "bandwidth"},
    {"modem", CoreClass::system, "processing time"},
    {"audio", CoreClass::system, "latency"},
};

inline std::optional<CoreInfo> find_core(std::string_view name) {
  for (const CoreInfo& c : kCores)
    if (c.name == name) return c;
  return std::nullopt;
}

struct AddressRegion {
  std::uint64_t base = 0;
  std::uint64_t length = 0;

  bool overlaps(const AddressRegion& o) const { return base < o.base + o.length && o.base < base + length; }
  friend bool operator==(const AddressRegion&, const AddressRegion&) = default;
};

/// Meter configuration as written in a scenario; resolved into a QosMeter
/// against the run's clock.
struct MeterSpec {
  MeterKind kind = MeterKind::bandwidth;
  double latency_limit_ns = 0.0;        // latency
  double reference_slope = 1.0;         // frame_progress
  double buffer_bytes = 0.0;            // occupancy
  double initial_fraction = 0.5;        // occupancy
  OccupancyDirection direction = OccupancyDirection::drain;
  Cycle window_cycles = 10000;          // occupancy horizon / bandwidth window / frame allowance
  Cycle device_start_cycles = 0;        // occupancy: when the consumer/producer starts
  std::uint32_t warmup_samples = 0;     // latency: reads collected before the first verdict
  double target_bytes_per_s = 0.0;      // bandwidth

  friend bool operator==(const MeterSpec&, const MeterSpec&) = default;
};

struct DmaSpec {
  DmaId dma_id{};
  std::string name;
  std::string core;
  CoreClass core_class = CoreClass::system;
  SourceKind source_kind = SourceKind::constant_rate;
  double rate_bytes_per_s = 0.0;
  double frame_period_s = 1.0 / 30.0;  // bursty_frame
  std::uint64_t frame_bytes = 0;       // bursty_frame
  AddressRegion address_region{};
  double locality = 0.0;
  double read_fraction = 1.0;
  std::uint32_t size_bytes = 64;
  /// Head start, in bytes, that a constant-rate source may request at t = 0
  /// (the buffer content already present in front of the consumer).
  std::uint64_t lead_bytes = 0;
  /// Cap on owed-but-unissued transactions of paced sources.
  std::uint32_t max_backlog = 4096;
  std::string port;  // arbiter the DMA attaches to
  MeterSpec meter{};
  std::optional<PriorityLut> lut;
  std::optional<PriorityLevel> fixed_priority;

  Cycle frame_period_cycles(double clock_hz) const {
    return std::max<Cycle>(1, static_cast<Cycle>(std::llround(frame_period_s * clock_hz)));
  }

  friend bool operator==(const DmaSpec&, const DmaSpec&) = default;
};

struct GeneratorState {
  double byte_credit = 0.0;             // fractional bytes, [0, size_bytes)
  std::uint64_t due = 0;                // whole transactions owed
  std::uint64_t bytes_left_in_frame = 0;
  std::uint64_t next_address = 0;
  bool has_address = false;
  Cycle next_frame = 0;
  double next_arrival = 0.0;            // latency_probe, in cycles
  RandomStream rng;
};

/// Paces one DMA. advance() accrues eligibility once per cycle; peek()
/// materializes the next transaction (address, kind) and keeps it until
/// pop() confirms the network accepted it, so backpressure never loses or
/// reorders requests.
class TrafficGenerator {
 public:
  TrafficGenerator(const DmaSpec& spec, const AddressMap& map, double clock_hz, std::uint64_t seed)
      : spec_(spec), map_(map), clock_hz_(clock_hz), period_(spec.frame_period_cycles(clock_hz)) {
    state_.rng = seeded_rng(seed, spec.dma_id);
    bytes_per_cycle_ = spec.rate_bytes_per_s / clock_hz;
    if (spec.source_kind == SourceKind::constant_rate || spec.source_kind == SourceKind::bandwidth_stream)
      state_.due = spec.lead_bytes / spec.size_bytes;
    if (spec.source_kind == SourceKind::latency_probe && spec.rate_bytes_per_s > 0.0)
      state_.next_arrival = state_.rng.exponential(mean_gap());
  }

  const DmaSpec& spec() const { return spec_; }
  const GeneratorState& state() const { return state_; }

  void advance(const SimClock& clock) {
    const Cycle now = clock.cycle;
    switch (spec_.source_kind) {
      case SourceKind::bursty_frame:
        if (now >= state_.next_frame) {
          state_.bytes_left_in_frame = spec_.frame_bytes;
          state_.next_frame = (now / period_ + 1) * period_;
        }
        break;
      case SourceKind::constant_rate:
      case SourceKind::bandwidth_stream:
        state_.byte_credit += bytes_per_cycle_;
        if (state_.byte_credit >= spec_.size_bytes) {
          const auto whole = static_cast<std::uint64_t>(state_.byte_credit / spec_.size_bytes);
          state_.byte_credit -= static_cast<double>(whole * spec_.size_bytes);
          state_.due = std::min<std::uint64_t>(state_.due + whole, spec_.max_backlog);
        }
        break;
      case SourceKind::latency_probe:
        if (spec_.rate_bytes_per_s <= 0.0) break;
        while (static_cast<double>(now) >= state_.next_arrival) {
          state_.due = std::min<std::uint64_t>(state_.due + 1, spec_.max_backlog);
          state_.next_arrival += state_.rng.exponential(mean_gap());
        }
        break;
    }
  }

  bool eligible() const {
    return spec_.source_kind == SourceKind::bursty_frame ? state_.bytes_left_in_frame > 0 : state_.due > 0;
  }

  /// Next transaction to inject, or nullptr when nothing is eligible.
  const Transaction* peek(const SimClock& clock) {
    if (!pending_) {
      if (!eligible()) return nullptr;
      Transaction t;
      t.source = spec_.dma_id;
      t.size_bytes = spec_.size_bytes;
      t.core_class = spec_.core_class;
      t.address = next_address();
      t.kind = spec_.read_fraction >= 1.0 || state_.rng.bernoulli(spec_.read_fraction) ? TxnKind::read
                                                                                          : TxnKind::write;
      t.coord = map_.decode(t.address);
      t.t_created = clock.cycle;
      pending_ = t;
    }
    return &*pending_;
  }

  /// Confirms the peeked transaction left the generator.
  Transaction pop() {
    Transaction t = *pending_;
    pending_.reset();
    if (spec_.source_kind == SourceKind::bursty_frame) {
      state_.bytes_left_in_frame -= std::min<std::uint64_t>(state_.bytes_left_in_frame, t.size_bytes);
    } else {
      --state_.due;
    }
    return t;
  }

 private:
  double mean_gap() const { return spec_.size_bytes / spec_.rate_bytes_per_s * clock_hz_; }

  /// With probability `locality` the next request stays in the previous
  /// request's DRAM row (next column); otherwise it jumps to a random
  /// 64-byte block of the region.
  std::uint64_t next_address() {
    const AddressRegion& r = spec_.address_region;
    if (state_.has_address && state_.rng.bernoulli(spec_.locality)) {
      DramCoord c = map_.decode(state_.next_address);
      c.column = (c.column + 1) % map_.columns();
      state_.next_address = map_.encode(c);
    } else {
      const std::uint64_t blocks = std::max<std::uint64_t>(1, r.length / spec_.size_bytes);
      state_.next_address = r.base + state_.rng.below(blocks) * spec_.size_bytes;
      state_.has_address = true;
    }
    return state_.next_address;
  }

  DmaSpec spec_;
  AddressMap map_;
  double clock_hz_;
  Cycle period_;
  double bytes_per_cycle_ = 0.0;
  GeneratorState state_;
  std::optional<Transaction> pending_;
};

/// Emits what the source would inject this cycle, given whether the network
/// port can take a request. At most one transaction per cycle.
inline std::optional<Transaction> next_request(TrafficGenerator& gen, const SimClock& clock, bool port_has_space) {
  gen.advance(clock);
  if (!port_has_space || gen.peek(clock) == nullptr) return std::nullopt;
  return gen.pop();
}

enum class DataflowCase : std::uint8_t { a, b };

/// Case A keeps every core of the catalog; case B drops the cores that are
/// inactive in that test case (GPS, camera, rotator, JPEG).
inline std::vector<DmaSpec> make_dataflow_scenario(DataflowCase which, const std::vector<DmaSpec>& catalog) {
  static constexpr std::string_view kInactiveInB[] = {"gps", "camera", "rotator", "jpeg"};
  std::vector<DmaSpec> out;
  for (const DmaSpec& d : catalog) {
    if (which == DataflowCase::b &&
        std::find(std::begin(kInactiveInB), std::end(kInactiveInB), d.core) != std::end(kInactiveInB))
      continue;
    out.push_back(d);
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i].dma_id = DmaId{static_cast<std::uint32_t>(i)};
  return out;
}

inline double default_io_freq_mhz(DataflowCase which) { return which == DataflowCase::a ? 1866.0 : 1700.0; }

}  // namespace sara
