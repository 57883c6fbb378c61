#pragma once

// Per-DMA self-monitoring. Each meter turns completion feedback into a
// Normalized Performance Indicator (NPI, >= 1 when the DMA meets its target)
// and a lookup table translates the NPI into a priority level.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "sara/core_types.hpp"

namespace sara {

inline constexpr double kNpiMax = 16.0;

struct NpiValue {
  double value = kNpiMax;

  /// Clamps into [0, kNpiMax]; +inf and NaN saturate high, -inf low.
  static NpiValue clamped(double x) {
    if (std::isnan(x)) return {kNpiMax};
    return {std::clamp(x, 0.0, kNpiMax)};
  }
  friend constexpr auto operator<=>(NpiValue, NpiValue) = default;
};

// ---------------------------------------------------------------------------
// Lookup table

/// entries[p] is the lowest NPI admitted at level p. Entries are
/// non-increasing and the last one is 0 so every NPI maps somewhere.
struct PriorityLut {
  unsigned k = kPriorityBits;
  std::vector<double> entries;

  void validate() const {
    if (k == 0 || k > 8) throw Error(ErrorCode::malformed_lut, "k must be in [1, 8]");
    if (entries.size() != (std::size_t{1} << k))
      throw Error(ErrorCode::malformed_lut, "expected " + std::to_string(1u << k) + " entries, got " +
                                                std::to_string(entries.size()));
    for (std::size_t p = 0; p < entries.size(); ++p) {
      if (!std::isfinite(entries[p]) || entries[p] < 0.0)
        throw Error(ErrorCode::malformed_lut, "entry " + std::to_string(p) + " is not a finite non-negative value");
      if (p > 0 && entries[p] > entries[p - 1])
        throw Error(ErrorCode::malformed_lut, "entries must be non-increasing (entry " + std::to_string(p) + ")");
    }
    if (entries.back() != 0.0) throw Error(ErrorCode::malformed_lut, "floor entry must be 0");
  }

  friend bool operator==(const PriorityLut&, const PriorityLut&) = default;
};

/// Default table for latency, bandwidth and occupancy meters.
inline PriorityLut default_lut() { return {3, {1.0, 0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.0}}; }

/// Frame-progress table keyed to reference slopes 1, 0.75 and 0.5.
inline PriorityLut frame_progress_lut() { return {3, {1.0, 1.0, 1.0, 0.75, 0.75, 0.5, 0.5, 0.0}}; }

/// Lowest level whose lower bound the NPI reaches.
inline PriorityLevel translate(const PriorityLut& lut, NpiValue npi) {
  lut.validate();
  for (std::size_t p = 0; p < lut.entries.size(); ++p)
    if (npi.value >= lut.entries[p]) return static_cast<PriorityLevel>(p);
  return static_cast<PriorityLevel>(lut.entries.size() - 1);
}

/// translate() without re-validating; for the per-epoch hot path after the
/// table was validated once.
inline PriorityLevel translate_unchecked(const PriorityLut& lut, NpiValue npi) {
  std::size_t p = 0;
  while (p + 1 < lut.entries.size() && npi.value < lut.entries[p]) ++p;
  return static_cast<PriorityLevel>(p);
}

// ---------------------------------------------------------------------------
// Meter kinds

struct LatencyMeter {
  double max_latency_limit = 0.0;  // cycles
  std::size_t capacity = 64;       // W
  std::vector<Cycle> window;       // ring of the last W read latencies
  std::size_t next = 0;
  Cycle sum = 0;
  /// Samples needed before the meter gives a verdict; 0 means the first one.
  std::size_t warmup_samples = 0;

  void push(Cycle latency) {
    if (window.size() < capacity) {
      window.push_back(latency);
    } else {
      sum -= window[next];
      window[next] = latency;
      next = (next + 1) % capacity;
    }
    sum += latency;
  }

  double average_latency() const {
    return window.empty() ? 0.0 : static_cast<double>(sum) / static_cast<double>(window.size());
  }
};

inline NpiValue npi_latency(const LatencyMeter& m) {
  const double avg = m.average_latency();
  if (m.window.empty() || avg == 0.0) return {kNpiMax};
  return NpiValue::clamped(m.max_latency_limit / avg);
}

struct FrameProgressMeter {
  std::uint64_t frame_bytes = 0;
  std::uint64_t bytes_done = 0;
  Cycle frame_period_cycles = 1;
  Cycle frame_elapsed_cycles = 0;
  double reference_slope = 1.0;
  Cycle frame_start = 0;
  /// The reference line starts this many cycles into each frame, leaving
  /// room for the first requests to travel to DRAM and back.
  Cycle allowance_cycles = 0;

  /// Moves the frame window to `now`, starting a new frame at each period boundary.
  void advance(Cycle now) {
    const Cycle start = now - now % frame_period_cycles;
    if (start != frame_start) {
      frame_start = start;
      bytes_done = 0;
    }
    frame_elapsed_cycles = now - frame_start;
  }
};

inline NpiValue npi_frame_progress(const FrameProgressMeter& m) {
  if (m.frame_bytes == 0) return {kNpiMax};
  const double progress = static_cast<double>(m.bytes_done) / static_cast<double>(m.frame_bytes);
  const Cycle judged = m.frame_elapsed_cycles > m.allowance_cycles ? m.frame_elapsed_cycles - m.allowance_cycles : 0;
  const double reference =
      m.reference_slope * static_cast<double>(judged) / static_cast<double>(m.frame_period_cycles);
  if (reference <= 0.0) return {kNpiMax};
  return NpiValue::clamped(progress / reference);
}

enum class OccupancyDirection : std::uint8_t {
  drain,  // a consumer (display) empties the buffer, DMA refills it
  fill,   // a producer (camera) fills the buffer, DMA empties it
};

struct OccupancyMeter {
  double buffer_bytes = 0.0;
  double occupancy = 0.0;
  double initial_occupancy = 0.0;
  double drain_rate_bytes_per_s = 0.0;  // R_read
  Cycle window_cycles = 100;             // horizon: the "time" of the ratio
  OccupancyDirection direction = OccupancyDirection::drain;
  Cycle last_update = 0;
  /// The consumer (or producer) starts at this cycle; until then only the
  /// DMA moves data, e.g. a display prefilling before scan-out.
  Cycle device_start = 0;

  /// Applies the consumer/producer side up to `now`.
  void advance(Cycle now, double clock_hz) {
    if (now <= last_update) return;
    const Cycle from = std::max(last_update, device_start);
    last_update = now;
    if (now <= from) return;
    const double moved = drain_rate_bytes_per_s * static_cast<double>(now - from) / clock_hz;
    occupancy = direction == OccupancyDirection::drain ? std::max(0.0, occupancy - moved)
                                                       : std::min(buffer_bytes, occupancy + moved);
  }
};

inline NpiValue npi_occupancy(const OccupancyMeter& m, Cycle elapsed_cycles, const SimClock& clock) {
  if (elapsed_cycles == 0) throw Error(ErrorCode::invalid_window, "occupancy NPI needs elapsed_cycles > 0");
  double delta = m.occupancy - m.initial_occupancy;
  if (m.direction == OccupancyDirection::fill) delta = -delta;
  const double expected = m.drain_rate_bytes_per_s * clock.seconds(elapsed_cycles);
  if (expected == 0.0) return {delta < 0.0 ? 0.0 : kNpiMax};
  return NpiValue::clamped(1.0 + delta / expected);
}

/// Sliding-window bandwidth: `buckets` epochs of completed bytes.
struct BandwidthMeter {
  double target_bytes_per_s = 0.0;
  Cycle window_cycles = 100;
  std::uint64_t bytes_in_window = 0;

  Cycle bucket_cycles = 100;
  std::vector<std::uint64_t> ring;  // closed buckets
  std::size_t next = 0;
  std::size_t filled = 0;
  std::uint64_t current = 0;  // bucket being accumulated

  void configure(Cycle bucket, Cycle window) {
    bucket_cycles = bucket;
    const std::size_t n = std::max<Cycle>(1, window / bucket);
    window_cycles = n * bucket;
    ring.assign(n, 0);
    next = filled = 0;
    bytes_in_window = current = 0;
  }

  /// Closes the current bucket; called once per epoch.
  void roll() {
    if (ring.empty()) configure(bucket_cycles, window_cycles);
    bytes_in_window -= ring[next];
    ring[next] = current;
    bytes_in_window += current;
    current = 0;
    next = (next + 1) % ring.size();
    filled = std::min(filled + 1, ring.size());
  }

  Cycle covered_cycles() const { return filled * bucket_cycles; }
};

inline NpiValue npi_bandwidth(const BandwidthMeter& m, Cycle elapsed_cycles, const SimClock& clock) {
  if (elapsed_cycles == 0) throw Error(ErrorCode::invalid_window, "bandwidth NPI needs elapsed_cycles > 0");
  if (m.target_bytes_per_s <= 0.0) return {kNpiMax};
  const double measured = static_cast<double>(m.bytes_in_window) / clock.seconds(elapsed_cycles);
  return NpiValue::clamped(measured / m.target_bytes_per_s);
}

// ---------------------------------------------------------------------------
// Meter owned by one DMA

enum class MeterKind : std::uint8_t { latency, frame_progress, occupancy, bandwidth };

class QosMeter {
 public:
  using State = std::variant<LatencyMeter, FrameProgressMeter, OccupancyMeter, BandwidthMeter>;

  QosMeter() = default;
  QosMeter(DmaId owner, State state) : owner_(owner), state_(std::move(state)) {}

  DmaId owner() const { return owner_; }
  MeterKind kind() const { return static_cast<MeterKind>(state_.index()); }
  const State& state() const { return state_; }
  State& state() { return state_; }

  template <class T>
  const T& as() const { return std::get<T>(state_); }
  template <class T>
  T& as() { return std::get<T>(state_); }

  /// Brings time-driven state (frame window, buffer drain) up to `now`.
  void advance(const SimClock& clock) {
    if (auto* f = std::get_if<FrameProgressMeter>(&state_)) f->advance(clock.cycle);
    if (auto* o = std::get_if<OccupancyMeter>(&state_)) o->advance(clock.cycle, clock.controller_freq_hz);
  }

  /// Epoch boundary: closes the bandwidth bucket.
  void end_epoch() {
    if (auto* b = std::get_if<BandwidthMeter>(&state_)) b->roll();
  }

  /// Current NPI. The bandwidth meter reports kNpiMax until its window has
  /// filled once, the frame meter once the frame is complete, the latency
  /// meter until it holds warmup_samples reads.
  NpiValue npi(const SimClock& clock) const {
    return std::visit(
        [&](const auto& m) -> NpiValue {
          using M = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<M, LatencyMeter>) {
            if (m.window.size() < std::min(m.warmup_samples, m.capacity)) return {kNpiMax};
            return npi_latency(m);
          } else if constexpr (std::is_same_v<M, FrameProgressMeter>) {
            // Nothing left to fetch this period: on target regardless of the clock.
            if (m.frame_bytes > 0 && m.bytes_done >= m.frame_bytes) return {kNpiMax};
            return npi_frame_progress(m);
          } else if constexpr (std::is_same_v<M, OccupancyMeter>) {
            return npi_occupancy(m, m.window_cycles, clock);
          } else {
            if (m.filled < m.ring.size() || m.ring.empty()) return {kNpiMax};
            return npi_bandwidth(m, m.covered_cycles(), clock);
          }
        },
        state_);
  }

 private:
  friend void on_completion(QosMeter&, const Transaction&, const SimClock&);

  DmaId owner_{};
  State state_{LatencyMeter{}};
};

/// Feeds one completed transaction back to its DMA's meter. Latency meters
/// only sample reads (writes are posted).
inline void on_completion(QosMeter& meter, const Transaction& txn, const SimClock& clock) {
  if (txn.source != meter.owner_)
    throw Error(ErrorCode::wrong_dma, "transaction " + std::to_string(txn.id) + " from DMA " +
                                          std::to_string(txn.source.value) + " fed to meter of DMA " +
                                          std::to_string(meter.owner_.value));
  std::visit(
      [&](auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, LatencyMeter>) {
          if (txn.kind == TxnKind::read) m.push(txn.t_completed - txn.t_created);
        } else if constexpr (std::is_same_v<M, FrameProgressMeter>) {
          m.advance(clock.cycle);
          m.bytes_done = std::min<std::uint64_t>(m.frame_bytes, m.bytes_done + txn.size_bytes);
        } else if constexpr (std::is_same_v<M, OccupancyMeter>) {
          m.advance(clock.cycle, clock.controller_freq_hz);
          m.occupancy = m.direction == OccupancyDirection::drain
                            ? std::min(m.buffer_bytes, m.occupancy + txn.size_bytes)
                            : std::max(0.0, m.occupancy - txn.size_bytes);
        } else {
          m.current += txn.size_bytes;
        }
      },
      meter.state_);
}

}  // namespace sara
