#pragma once

// Experiment orchestration: policy comparisons, DRAM frequency sweeps and the
// CSV files they produce. Runs may execute on several threads; results are
// always ordered by input position, so output bytes never depend on timing.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "sara/metrics.hpp"
#include "sara/scenario.hpp"
#include "sara/simulator.hpp"

namespace sara {

/// Calls job(i) for i in [0, n) on up to `jobs` threads; rethrows the first
/// failure by index.
inline void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& job) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        job(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(n)));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

/// One run per policy, in the given order.
inline std::vector<SimulationReport> run_comparison(const ScenarioConfig& scenario, std::span<const Policy> policies,
                                                    unsigned jobs = 1) {
  std::vector<SimulationReport> out(policies.size());
  parallel_for(policies.size(), jobs, [&](std::size_t i) {
    ScenarioConfig c = scenario;
    c.controller.policy = policies[i];
    out[i] = run(c);
  });
  return out;
}

struct SweepRow {
  double io_freq_mhz = 0.0;
  std::string dma;
  PriorityHistogram histogram{};
  double mean_priority = 0.0;
  double bw_bytes_s = 0.0;
  double target_bytes_s = 0.0;
};

/// Bandwidth a DMA must sustain: a frame per period for frame sources,
/// otherwise its configured rate.
inline double target_bandwidth(const DmaSpec& d) {
  if (d.source_kind == SourceKind::bursty_frame) return static_cast<double>(d.frame_bytes) / d.frame_period_s;
  return d.rate_bytes_per_s;
}

inline std::vector<SweepRow> run_sweep(const ScenarioConfig& scenario, std::span<const double> freqs_mhz,
                                       const std::string& dma, unsigned jobs = 1) {
  for (double f : freqs_mhz)
    if (!(f > 0.0)) throw Error(ErrorCode::validation_error, "sweep frequencies must be > 0");
  auto it = std::find_if(scenario.dmas.begin(), scenario.dmas.end(), [&](const DmaSpec& d) { return d.name == dma; });
  if (it == scenario.dmas.end()) throw Error(ErrorCode::validation_error, "sweep DMA '" + dma + "' is not in the scenario");
  const double target = target_bandwidth(*it);

  std::vector<SweepRow> rows(freqs_mhz.size());
  parallel_for(freqs_mhz.size(), jobs, [&](std::size_t i) {
    ScenarioConfig c = scenario;
    c.dram.io_freq_mhz = freqs_mhz[i];
    const SimulationReport r = run(c);
    const DmaReport* d = r.find(dma);
    rows[i] = {freqs_mhz[i], dma, d->histogram, d->histogram.mean_level(), d->mean_bw_bytes_s, target};
  });
  return rows;
}

// ---------------------------------------------------------------------------
// CSV

inline std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

inline void write_npi_csv(std::ostream& o, const DmaReport& d) {
  o << "cycle,dma,npi,priority\n";
  for (const NpiSample& s : d.npi_series)
    o << s.cycle << ',' << d.name << ',' << fixed6(s.npi.value) << ',' << unsigned{s.priority} << '\n';
}

inline void write_bandwidth_csv(std::ostream& o, const DmaReport& d) {
  o << "cycle,dma,bw_bytes_s\n";
  for (const BandwidthSample& s : d.bandwidth_series) o << s.cycle << ',' << d.name << ',' << fixed6(s.bytes_per_s) << '\n';
}

inline void write_summary_csv(std::ostream& o, const PolicyComparison& cmp) {
  o << "policy,dma,min_npi,mean_bw_bytes_s,total_bw_bytes_s,row_hit_rate\n";
  for (const SummaryRow& r : cmp.rows)
    o << to_string(r.policy) << ',' << r.dma << ',' << fixed6(r.min_npi) << ',' << fixed6(r.mean_bw_bytes_s) << ','
      << fixed6(r.total_bw_bytes_s) << ',' << fixed6(r.row_hit_rate) << '\n';
}

inline void write_sweep_csv(std::ostream& o, std::span<const SweepRow> rows) {
  o << "io_freq_mhz,dma";
  for (unsigned p = 0; p < kPriorityLevels; ++p) o << ",p" << p;
  o << ",mean_priority,bw_bytes_s,target_bytes_s\n";
  for (const SweepRow& r : rows) {
    o << fixed6(r.io_freq_mhz) << ',' << r.dma;
    for (double f : r.histogram.fraction_of_time) o << ',' << fixed6(f);
    o << ',' << fixed6(r.mean_priority) << ',' << fixed6(r.bw_bytes_s) << ',' << fixed6(r.target_bytes_s) << '\n';
  }
}

namespace detail {

inline void write_file(const std::filesystem::path& p, const std::function<void(std::ostream&)>& body) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  body(f);
  if (!f) throw std::runtime_error("error writing " + p.string());
}

}  // namespace detail

/// Writes <dir>/<POLICY>/npi_<dma>.csv and bw_<dma>.csv for every run plus
/// <dir>/summary.csv. Returns the list of files written, in write order.
inline std::vector<std::filesystem::path> write_comparison(const std::filesystem::path& dir,
                                                           std::span<const SimulationReport> reports) {
  std::vector<std::filesystem::path> files;
  if (reports.empty()) return files;
  const PolicyComparison cmp = policy_comparison(reports);
  for (const SimulationReport& r : reports) {
    const auto sub = dir / std::string(to_string(r.policy));
    std::filesystem::create_directories(sub);
    for (const DmaReport& d : r.dmas) {
      files.push_back(sub / ("npi_" + d.name + ".csv"));
      detail::write_file(files.back(), [&](std::ostream& o) { write_npi_csv(o, d); });
      files.push_back(sub / ("bw_" + d.name + ".csv"));
      detail::write_file(files.back(), [&](std::ostream& o) { write_bandwidth_csv(o, d); });
    }
  }
  files.push_back(dir / "summary.csv");
  detail::write_file(files.back(), [&](std::ostream& o) { write_summary_csv(o, cmp); });
  return files;
}

inline std::filesystem::path write_sweep(const std::filesystem::path& dir, std::span<const SweepRow> rows) {
  std::filesystem::create_directories(dir);
  const auto p = dir / "sweep.csv";
  detail::write_file(p, [&](std::ostream& o) { write_sweep_csv(o, rows); });
  return p;
}

}  // namespace sara
