#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sara {

using Cycle = std::uint64_t;
inline constexpr Cycle kNever = std::numeric_limits<Cycle>::max();

/// Priority levels are k-bit values; k = 3 gives 0..7 with 7 the most urgent.
using PriorityLevel = std::uint8_t;
inline constexpr unsigned kPriorityBits = 3;
inline constexpr unsigned kPriorityLevels = 1u << kPriorityBits;
inline constexpr PriorityLevel kMaxPriority = kPriorityLevels - 1;

struct DmaId {
  std::uint32_t value = 0;
  friend constexpr auto operator<=>(DmaId, DmaId) = default;
};

enum class TxnKind : std::uint8_t { read, write };

/// Core classes double as the controller's five transaction queues.
enum class CoreClass : std::uint8_t { cpu = 0, gpu = 1, dsp = 2, media = 3, system = 4 };
inline constexpr unsigned kNumCoreClasses = 5;

inline std::string_view to_string(CoreClass c) {
  switch (c) {
    case CoreClass::cpu: return "cpu";
    case CoreClass::gpu: return "gpu";
    case CoreClass::dsp: return "dsp";
    case CoreClass::media: return "media";
    case CoreClass::system: return "system";
  }
  return "?";
}

enum class ErrorCode {
  config_invalid,
  parse_error,
  validation_error,
  invalid_window,
  malformed_lut,
  wrong_dma,
  illegal_issue,
  out_of_order,
  empty_window,
  mismatched_scenario,
};

inline std::string_view to_string(ErrorCode e) {
  switch (e) {
    case ErrorCode::config_invalid: return "ConfigInvalid";
    case ErrorCode::parse_error: return "ParseError";
    case ErrorCode::validation_error: return "ValidationError";
    case ErrorCode::invalid_window: return "InvalidWindow";
    case ErrorCode::malformed_lut: return "MalformedLut";
    case ErrorCode::wrong_dma: return "WrongDma";
    case ErrorCode::illegal_issue: return "IllegalIssue";
    case ErrorCode::out_of_order: return "OutOfOrder";
    case ErrorCode::empty_window: return "EmptyWindow";
    case ErrorCode::mismatched_scenario: return "MismatchedScenario";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// The simulator clock is the DRAM command clock.
struct SimClock {
  Cycle cycle = 0;
  double controller_freq_hz = 933e6;

  double seconds(Cycle cycles) const { return static_cast<double>(cycles) / controller_freq_hz; }
  double now_seconds() const { return seconds(cycle); }
};

/// DRAM coordinates of a transaction, filled in by the address map.
struct DramCoord {
  std::uint32_t channel = 0;
  std::uint32_t rank = 0;
  std::uint32_t bank = 0;
  std::uint32_t row = 0;
  std::uint32_t column = 0;
};

struct Transaction {
  std::uint64_t id = 0;
  DmaId source{};
  TxnKind kind = TxnKind::read;
  std::uint64_t address = 0;
  std::uint32_t size_bytes = 64;
  PriorityLevel priority = 0;
  bool aged = false;
  Cycle t_created = 0;
  Cycle t_enqueued = kNever;
  Cycle t_completed = kNever;

  CoreClass core_class = CoreClass::system;
  DramCoord coord{};
  /// First cycle at which the current holder may forward or schedule it.
  Cycle ready_at = 0;
  std::uint16_t hops = 0;
};

/// Aged transactions outrank every priority level.
inline constexpr unsigned effective_rank(const Transaction& t) {
  return t.aged ? kPriorityLevels : t.priority;
}

}  // namespace sara
