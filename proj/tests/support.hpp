#pragma once

// Helpers shared by the test executables.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "sara/sara.hpp"

namespace sara::test {

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + p.string());
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

inline std::filesystem::path scenario_path(const std::string& file) {
  return std::filesystem::path(SARA_SCENARIO_DIR) / file;
}

inline ScenarioConfig load_scenario(const std::string& file) { return parse_config(read_file(scenario_path(file))); }

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& tag) {
  auto p = std::filesystem::temp_directory_path() / ("sara_test_" + tag);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

/// A DMA spec with a bandwidth meter and a 1 MiB region, ready to tweak.
inline DmaSpec make_dma(std::uint32_t id, const std::string& core, SourceKind kind, double rate_bytes_per_s) {
  DmaSpec d;
  d.dma_id = DmaId{id};
  d.name = core + "_" + std::to_string(id);
  d.core = core;
  d.core_class = find_core(core)->core_class;
  d.source_kind = kind;
  d.rate_bytes_per_s = rate_bytes_per_s;
  d.address_region = {std::uint64_t{id} << 24, 1u << 20};
  d.port = Topology::default_port(d.core_class);
  d.meter.kind = MeterKind::bandwidth;
  d.meter.target_bytes_per_s = rate_bytes_per_s;
  return d;
}

inline ScenarioConfig make_scenario(std::vector<DmaSpec> dmas, Cycle duration) {
  ScenarioConfig c;
  c.name = "unit";
  c.duration_cycles = duration;
  c.series_stride = 1;
  c.dmas = std::move(dmas);
  for (std::size_t i = 0; i < c.dmas.size(); ++i) c.dmas[i].dma_id = DmaId{static_cast<std::uint32_t>(i)};
  return c;
}

}  // namespace sara::test
