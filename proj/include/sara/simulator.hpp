#pragma once

// Cycle-driven simulation of the whole memory subsystem. Every cycle runs the
// same five phases: traffic generation, meter/priority update (every epoch),
// NoC arbitration, controller scheduling with DRAM issue, completion delivery.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "sara/core_types.hpp"
#include "sara/dram_model.hpp"
#include "sara/mem_controller.hpp"
#include "sara/metrics.hpp"
#include "sara/noc_arbiter.hpp"
#include "sara/qos_meter.hpp"
#include "sara/scenario.hpp"
#include "sara/traffic_gen.hpp"

namespace sara {

struct SimulationOptions {
  bool keep_completion_ids = false;  // ids of completed transactions, in delivery order
  bool log_commands = false;         // per-channel DRAM command log
};

/// LUT in force for a DMA: its override, else the default for its meter kind.
inline PriorityLut effective_lut(const DmaSpec& d) {
  if (d.lut) return *d.lut;
  return d.meter.kind == MeterKind::frame_progress ? frame_progress_lut() : default_lut();
}

inline QosMeter make_meter(const DmaSpec& d, double clock_hz, Cycle epoch) {
  const MeterSpec& m = d.meter;
  switch (m.kind) {
    case MeterKind::latency: {
      LatencyMeter l;
      l.max_latency_limit = m.latency_limit_ns * 1e-9 * clock_hz;
      l.warmup_samples = m.warmup_samples;
      return QosMeter(d.dma_id, l);
    }
    case MeterKind::frame_progress: {
      FrameProgressMeter f;
      f.frame_bytes = d.frame_bytes;
      f.frame_period_cycles = d.frame_period_cycles(clock_hz);
      f.reference_slope = m.reference_slope;
      f.allowance_cycles = m.window_cycles;
      return QosMeter(d.dma_id, f);
    }
    case MeterKind::occupancy: {
      OccupancyMeter o;
      o.buffer_bytes = m.buffer_bytes;
      o.initial_occupancy = o.occupancy = m.initial_fraction * m.buffer_bytes;
      o.drain_rate_bytes_per_s = d.rate_bytes_per_s;
      o.window_cycles = m.window_cycles;
      o.device_start = m.device_start_cycles;
      o.direction = m.direction;
      return QosMeter(d.dma_id, o);
    }
    case MeterKind::bandwidth: {
      BandwidthMeter b;
      b.target_bytes_per_s = m.target_bytes_per_s;
      b.configure(epoch, m.window_cycles);
      return QosMeter(d.dma_id, b);
    }
  }
  return {};
}

class World {
 public:
  struct DmaRuntime {
    TrafficGenerator gen;
    QosMeter meter;
    PriorityLut lut;
    PriorityLevel priority = 0;
    NpiValue npi{};
    DmaReport stats;
    std::uint64_t reads_completed = 0;
    long double read_latency_sum = 0;
    std::uint64_t interval_bytes = 0;
  };

  struct Channel {
    DramChannel dram;
    MemController controller;
    Network network;
  };

  explicit World(const ScenarioConfig& cfg, SimulationOptions opt = {})
      : cfg_((cfg.validate(), cfg)),
        opt_(opt),
        map_(cfg.dram),
        clock_{0, cfg.clock_hz()},
        mode_(noc_mode(cfg.controller.policy)),
        metrics_(cfg.dmas.size(), cfg.series_stride) {
    std::vector<std::string> ports;
    for (const DmaSpec& d : cfg.dmas) ports.push_back(d.port);
    for (std::uint32_t c = 0; c < cfg.dram.channels; ++c)
      channels_.push_back({DramChannel(cfg.dram, opt.log_commands), MemController(cfg.controller),
                           Network(cfg.topology, ports)});
    for (const DmaSpec& d : cfg.dmas) {
      DmaRuntime rt{TrafficGenerator(d, map_, clock_.controller_freq_hz, cfg.seed),
                    make_meter(d, clock_.controller_freq_hz, cfg.epoch_cycles), effective_lut(d),
                    0, NpiValue{}, DmaReport{}, 0, 0, 0};
      rt.lut.validate();
      rt.priority = d.fixed_priority.value_or(0);
      rt.stats.dma_id = d.dma_id;
      rt.stats.name = d.name;
      rt.stats.core = d.core;
      rt.stats.core_class = d.core_class;
      rt.stats.meter = d.meter.kind;
      rt.stats.rate_bytes_per_s = d.rate_bytes_per_s;
      dmas_.push_back(std::move(rt));
    }
    lagging_.assign(cfg.dmas.size(), 0);
  }

  const ScenarioConfig& config() const { return cfg_; }
  const SimClock& clock() const { return clock_; }
  Cycle now() const { return clock_.cycle; }
  const Channel& channel(std::size_t c) const { return channels_.at(c); }
  const DmaRuntime& dma(std::size_t d) const { return dmas_.at(d); }
  const MetricsSink& metrics() const { return metrics_; }
  std::uint64_t injected() const { return injected_; }
  std::uint64_t completed() const { return completed_; }
  std::size_t in_flight() const { return inflight_.size(); }

  /// Transactions held by the NoC, the controllers or the DRAM.
  std::uint64_t resident() const {
    std::uint64_t n = inflight_.size();
    for (const Channel& ch : channels_) n += ch.network.resident() + ch.controller.occupancy();
    return n;
  }

  /// Advances exactly one cycle.
  void step() {
    const Cycle now = clock_.cycle;
    generate(now);
    if (now % cfg_.epoch_cycles == 0) reevaluate(now);
    arbitrate_noc(now);
    schedule(now);
    deliver(now);
    ++clock_.cycle;
  }

  void run_for(Cycle cycles) {
    for (Cycle i = 0; i < cycles; ++i) step();
  }

  /// Closes statistics at the current cycle and assembles the report; call once.
  SimulationReport report() {
    const Cycle end = clock_.cycle;
    metrics_.finish(end);
    SimulationReport r;
    r.scenario = cfg_.name;
    r.fingerprint = scenario_fingerprint(cfg_);
    r.seed = cfg_.seed;
    r.policy = cfg_.controller.policy;
    r.duration_cycles = end;
    r.clock_hz = clock_.controller_freq_hz;
    for (const Channel& ch : channels_) {
      r.row_hits += ch.dram.stats().row_hits;
      r.accesses += ch.dram.stats().accesses();
    }
    for (DmaRuntime& d : dmas_) {
      DmaReport s = d.stats;
      const auto& track = metrics_.track(s.dma_id);
      if (track.last_cycle) {
        s.min_npi = track.min_npi;
        s.min_npi_cycle = track.min_npi_cycle;
        s.histogram = metrics_.histogram(s.dma_id);
      }
      s.histogram.dma_id = s.dma_id;
      s.npi_series = track.series;
      if (end > last_interval_)
        s.bandwidth_series.push_back({end, bandwidth(d.interval_bytes, end - last_interval_, clock_.controller_freq_hz)});
      s.mean_bw_bytes_s = end == 0 ? 0.0 : bandwidth(s.bytes, end, clock_.controller_freq_hz);
      s.mean_read_latency = d.reads_completed == 0 ? 0.0 : static_cast<double>(d.read_latency_sum / d.reads_completed);
      r.max_queue_wait = std::max(r.max_queue_wait, s.max_wait);
      r.total_bytes += s.bytes;  // delivered, so it matches the per-DMA sums
      r.dmas.push_back(std::move(s));
    }
    r.injected = injected_;
    r.completed = completed_;
    r.resident = resident();
    r.completion_ids = completion_ids_;
    return r;
  }

  /// Concatenated DRAM command logs (requires SimulationOptions::log_commands).
  std::vector<CommandRecord> command_log(std::size_t c) const { return channels_.at(c).dram.command_log(); }

 private:
  struct Pending {
    Cycle at;
    std::uint64_t id;
    Transaction txn;
    bool operator>(const Pending& o) const { return at != o.at ? at > o.at : id > o.id; }
  };

  void generate(Cycle now) {
    for (DmaRuntime& d : dmas_) {
      d.gen.advance(clock_);
      if (!d.gen.eligible()) continue;
      const Transaction* t = d.gen.peek(clock_);
      Network& net = channels_[t->coord.channel].network;
      if (!net.can_inject(t->source)) continue;
      Transaction txn = d.gen.pop();
      txn.id = next_id_++;
      txn.priority = d.priority;
      net.inject(txn, now);
      ++d.stats.injected;
      ++injected_;
    }
  }

  void reevaluate(Cycle now) {
    const bool interval_end = now > 0 && (now / cfg_.epoch_cycles) % cfg_.series_stride == 0;
    for (DmaRuntime& d : dmas_) {
      d.meter.advance(clock_);
      if (now > 0) d.meter.end_epoch();
      d.npi = d.meter.npi(clock_);
      const DmaSpec& spec = d.gen.spec();
      d.priority = spec.fixed_priority ? *spec.fixed_priority : translate_unchecked(d.lut, d.npi);
      lagging_[spec.dma_id.value] = spec.core_class == CoreClass::media && d.npi.value < d.lut.entries.front();
      metrics_.record({spec.dma_id, now, d.npi, d.priority});
      if (interval_end) {
        d.stats.bandwidth_series.push_back(
            {now, bandwidth(d.interval_bytes, now - last_interval_, clock_.controller_freq_hz)});
        d.interval_bytes = 0;
      }
    }
    if (interval_end) last_interval_ = now;
    if (uses_priorities(cfg_.controller.policy) && now > 0 && now % cfg_.controller.aging_period == 0) {
      for (Channel& ch : channels_) {
        ch.controller.apply_aging(now);
        ch.network.apply_aging(now, cfg_.controller.aging_period);
      }
    }
  }

  void arbitrate_noc(Cycle now) {
    const ArbitrationContext ctx{now, mode_, lagging_};
    for (Channel& ch : channels_) {
      ch.network.step(
          ctx, [&](const Transaction& t) { return ch.controller.has_space(t.core_class); },
          [&](Transaction t) { ch.controller.enqueue(std::move(t), ch.dram); });
    }
  }

  void schedule(Cycle now) {
    for (Channel& ch : channels_) {
      auto pick = ch.controller.select(now, ch.dram, lagging_);
      if (!pick) continue;
      Transaction t = *pick;
      const bool hit = ch.dram.classify(t.coord) == RowState::row_hit;
      t.t_completed = ch.dram.issue(t, now);
      ch.controller.on_issue(t.coord, now);
      DmaRuntime& d = dmas_[t.source.value];
      d.stats.max_wait = std::max(d.stats.max_wait, now - t.t_created);
      if (hit) ++d.stats.row_hits;
      inflight_.push({t.t_completed, t.id, t});
    }
  }

  void deliver(Cycle now) {
    while (!inflight_.empty() && inflight_.top().at <= now) {
      const Transaction t = inflight_.top().txn;
      inflight_.pop();
      DmaRuntime& d = dmas_[t.source.value];
      on_completion(d.meter, t, clock_);
      ++d.stats.completed;
      d.stats.bytes += t.size_bytes;
      d.interval_bytes += t.size_bytes;
      if (t.kind == TxnKind::read) {
        ++d.reads_completed;
        d.read_latency_sum += static_cast<long double>(t.t_completed - t.t_created);
      }
      ++completed_;
      if (opt_.keep_completion_ids) completion_ids_.push_back(t.id);
    }
  }

  ScenarioConfig cfg_;
  SimulationOptions opt_;
  AddressMap map_;
  SimClock clock_;
  ArbitrationMode mode_;
  std::vector<Channel> channels_;
  std::vector<DmaRuntime> dmas_;
  std::vector<std::uint8_t> lagging_;
  MetricsSink metrics_;
  std::priority_queue<Pending, std::vector<Pending>, std::greater<>> inflight_;
  std::uint64_t next_id_ = 0;
  std::uint64_t injected_ = 0;
  std::uint64_t completed_ = 0;
  Cycle last_interval_ = 0;
  std::vector<std::uint64_t> completion_ids_;
};

/// Runs a scenario for `duration_cycles` cycles.
inline SimulationReport run(const ScenarioConfig& scenario, Cycle duration_cycles, SimulationOptions opt = {}) {
  World w(scenario, opt);
  w.run_for(duration_cycles);
  return w.report();
}

/// Runs a scenario for its configured duration.
inline SimulationReport run(const ScenarioConfig& scenario, SimulationOptions opt = {}) {
  return run(scenario, scenario.duration(), opt);
}

}  // namespace sara
