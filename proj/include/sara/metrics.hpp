#pragma once

// NPI time series, time-weighted priority histograms and policy comparison
// tables.

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sara/core_types.hpp"
#include "sara/mem_controller.hpp"
#include "sara/qos_meter.hpp"

namespace sara {

struct NpiSample {
  DmaId dma_id{};
  Cycle cycle = 0;
  NpiValue npi{};
  PriorityLevel priority = 0;
  friend bool operator==(const NpiSample&, const NpiSample&) = default;
};

/// Half-open cycle interval [begin, end).
struct Window {
  Cycle begin = 0;
  Cycle end = kNever;
  bool contains(Cycle c) const { return c >= begin && c < end; }
};

struct PriorityHistogram {
  DmaId dma_id{};
  std::array<double, kPriorityLevels> fraction_of_time{};

  double mean_level() const {
    double m = 0.0;
    for (std::size_t p = 0; p < fraction_of_time.size(); ++p) m += static_cast<double>(p) * fraction_of_time[p];
    return m;
  }
};

/// Exact minimum NPI among the samples whose cycle lies in the window.
inline NpiValue min_npi(std::span<const NpiSample> series, Window w) {
  std::optional<NpiValue> best;
  for (const NpiSample& s : series)
    if (w.contains(s.cycle) && (!best || s.npi < *best)) best = s.npi;
  if (!best) throw Error(ErrorCode::empty_window, "no NPI samples in window");
  return *best;
}

/// Fraction of the window's cycles spent at each level. A sample's level holds
/// until the next sample; cycles before the first sample take the level of the
/// latest earlier sample, or of the first sample when there is none.
inline PriorityHistogram priority_histogram(std::span<const NpiSample> series, Window w) {
  if (w.end <= w.begin) throw Error(ErrorCode::empty_window, "window has no cycles");
  std::size_t first = 0;
  while (first < series.size() && series[first].cycle < w.begin) ++first;
  if (first == series.size() || series[first].cycle >= w.end)
    throw Error(ErrorCode::empty_window, "no NPI samples in window");

  PriorityHistogram h;
  h.dma_id = series[first].dma_id;
  std::array<Cycle, kPriorityLevels> cycles{};
  PriorityLevel level = first > 0 ? series[first - 1].priority : series[first].priority;
  Cycle from = w.begin;
  for (std::size_t i = first; i < series.size() && series[i].cycle < w.end; ++i) {
    cycles[level] += series[i].cycle - from;
    from = series[i].cycle;
    level = series[i].priority;
  }
  cycles[level] += w.end - from;
  const double total = static_cast<double>(w.end - w.begin);
  for (std::size_t p = 0; p < kPriorityLevels; ++p) h.fraction_of_time[p] = static_cast<double>(cycles[p]) / total;
  return h;
}

/// Per-run recorder. Keeps exact whole-run statistics online and, for output,
/// a decimated series holding the lowest-NPI sample of every `stride` samples
/// (so dips survive decimation). With stride 1 the full series is kept.
class MetricsSink {
 public:
  struct DmaTrack {
    std::optional<Cycle> last_cycle;
    PriorityLevel level = 0;
    NpiValue min_npi{};
    Cycle min_npi_cycle = 0;
    std::array<Cycle, kPriorityLevels> level_cycles{};
    std::vector<NpiSample> series;
    std::optional<NpiSample> block_min;
    std::size_t in_block = 0;
  };

  MetricsSink() = default;
  MetricsSink(std::size_t dmas, std::size_t stride) : tracks_(dmas), stride_(std::max<std::size_t>(1, stride)) {}

  void record(const NpiSample& s) {
    if (s.dma_id.value >= tracks_.size())
      throw Error(ErrorCode::wrong_dma, "unknown DMA " + std::to_string(s.dma_id.value));
    DmaTrack& t = tracks_[s.dma_id.value];
    if (t.last_cycle && s.cycle <= *t.last_cycle)
      throw Error(ErrorCode::out_of_order, "sample at cycle " + std::to_string(s.cycle) + " for DMA " +
                                               std::to_string(s.dma_id.value) + " after cycle " +
                                               std::to_string(*t.last_cycle));
    if (t.last_cycle) {
      t.level_cycles[t.level] += s.cycle - *t.last_cycle;
    } else {
      t.level_cycles[s.priority] += s.cycle - start_;
    }
    if (!t.last_cycle || s.npi < t.min_npi) {
      t.min_npi = s.npi;
      t.min_npi_cycle = s.cycle;
    }
    t.last_cycle = s.cycle;
    t.level = s.priority;

    if (!t.block_min || s.npi < t.block_min->npi) t.block_min = s;
    if (++t.in_block == stride_) flush_block(t);
  }

  /// Closes the run at `end` (exclusive); attributes the tail to the last level.
  void finish(Cycle end) {
    for (DmaTrack& t : tracks_) {
      if (t.last_cycle && end > *t.last_cycle) t.level_cycles[t.level] += end - *t.last_cycle;
      if (t.block_min) flush_block(t);
    }
    end_ = end;
  }

  const DmaTrack& track(DmaId d) const { return tracks_.at(d.value); }
  std::size_t size() const { return tracks_.size(); }

  /// Whole-run histogram; needs finish() and at least one sample.
  PriorityHistogram histogram(DmaId d) const {
    const DmaTrack& t = track(d);
    if (!t.last_cycle || end_ <= start_) throw Error(ErrorCode::empty_window, "no samples recorded");
    PriorityHistogram h;
    h.dma_id = d;
    Cycle total = 0;
    for (Cycle c : t.level_cycles) total += c;
    for (std::size_t p = 0; p < kPriorityLevels; ++p)
      h.fraction_of_time[p] = static_cast<double>(t.level_cycles[p]) / static_cast<double>(total);
    return h;
  }

 private:
  static void flush_block(DmaTrack& t) {
    t.series.push_back(*t.block_min);
    t.block_min.reset();
    t.in_block = 0;
  }

  std::vector<DmaTrack> tracks_;
  std::size_t stride_ = 1;
  Cycle start_ = 0;
  Cycle end_ = 0;
};

// ---------------------------------------------------------------------------
// Run results and comparison

struct BandwidthSample {
  Cycle cycle = 0;  // end of the interval
  double bytes_per_s = 0.0;
  friend bool operator==(const BandwidthSample&, const BandwidthSample&) = default;
};

struct DmaReport {
  DmaId dma_id{};
  std::string name;
  std::string core;
  CoreClass core_class = CoreClass::system;
  MeterKind meter = MeterKind::bandwidth;
  double rate_bytes_per_s = 0.0;

  std::uint64_t injected = 0;
  std::uint64_t completed = 0;
  std::uint64_t bytes = 0;
  std::uint64_t row_hits = 0;
  Cycle max_wait = 0;        // issue cycle - t_created, worst case
  double mean_read_latency = 0.0;

  std::optional<NpiValue> min_npi;  // empty if no sample was taken
  Cycle min_npi_cycle = 0;
  PriorityHistogram histogram{};
  double mean_bw_bytes_s = 0.0;
  std::vector<NpiSample> npi_series;
  std::vector<BandwidthSample> bandwidth_series;
};

struct SimulationReport {
  std::string scenario;
  std::uint64_t fingerprint = 0;  // scenario identity ignoring the policy
  std::uint64_t seed = 0;
  Policy policy = Policy::qos;
  Cycle duration_cycles = 0;
  double clock_hz = 0.0;

  std::vector<DmaReport> dmas;
  std::uint64_t total_bytes = 0;
  std::uint64_t row_hits = 0;
  std::uint64_t accesses = 0;
  Cycle max_queue_wait = 0;

  std::uint64_t injected = 0;
  std::uint64_t completed = 0;
  std::uint64_t resident = 0;  // still in a queue or in flight at the end
  std::vector<std::uint64_t> completion_ids;  // filled on request

  double total_bw_bytes_s() const {
    return duration_cycles == 0 ? 0.0 : bandwidth(total_bytes, duration_cycles, clock_hz);
  }
  double row_hit_rate() const {
    return accesses == 0 ? 0.0 : static_cast<double>(row_hits) / static_cast<double>(accesses);
  }
  const DmaReport* find(std::string_view name) const {
    for (const DmaReport& d : dmas)
      if (d.name == name) return &d;
    return nullptr;
  }
};

struct SummaryRow {
  Policy policy = Policy::qos;
  std::string dma;
  double min_npi = kNpiMax;
  double mean_bw_bytes_s = 0.0;
  double total_bw_bytes_s = 0.0;
  double row_hit_rate = 0.0;
};

struct PolicyTotals {
  Policy policy = Policy::qos;
  double total_bw_bytes_s = 0.0;
  double row_hit_rate = 0.0;
  double worst_min_npi = kNpiMax;
  double bw_delta_vs_first = 0.0;  // relative, 0 for the first report
};

struct PolicyComparison {
  std::vector<SummaryRow> rows;
  std::vector<PolicyTotals> totals;
};

/// Lines up runs of one scenario under different policies.
inline PolicyComparison policy_comparison(std::span<const SimulationReport> reports) {
  PolicyComparison out;
  if (reports.empty()) return out;
  const SimulationReport& ref = reports.front();
  for (const SimulationReport& r : reports) {
    if (r.fingerprint != ref.fingerprint || r.seed != ref.seed || r.duration_cycles != ref.duration_cycles)
      throw Error(ErrorCode::mismatched_scenario, "report for " + std::string(to_string(r.policy)) +
                                                      " does not come from the same scenario, seed and duration");
    PolicyTotals t{r.policy, r.total_bw_bytes_s(), r.row_hit_rate(), kNpiMax, 0.0};
    if (ref.total_bw_bytes_s() > 0.0) t.bw_delta_vs_first = t.total_bw_bytes_s / ref.total_bw_bytes_s() - 1.0;
    for (const DmaReport& d : r.dmas) {
      const double m = d.min_npi ? d.min_npi->value : kNpiMax;
      t.worst_min_npi = std::min(t.worst_min_npi, m);
      out.rows.push_back({r.policy, d.name, m, d.mean_bw_bytes_s, t.total_bw_bytes_s, t.row_hit_rate});
    }
    out.totals.push_back(t);
  }
  return out;
}

}  // namespace sara
