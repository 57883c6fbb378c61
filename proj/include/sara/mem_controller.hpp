#pragma once

// Memory controller: five transaction queues (CPU, GPU, DSP, media, system)
// sharing one pool of entries, and the scheduling policies compared in the
// evaluation. Policy 1 (QOS) is priority-first with round-robin ties;
// Policy 2 (QOS_RB) lets row hits go first while nothing ready is urgent.

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sara/core_types.hpp"
#include "sara/dram_model.hpp"
#include "sara/noc_arbiter.hpp"

namespace sara {

enum class Policy : std::uint8_t { fcfs, rr, frame_qos, qos, qos_rb, fr_fcfs };

inline constexpr Policy kAllPolicies[] = {Policy::fcfs, Policy::rr, Policy::frame_qos,
                                          Policy::qos, Policy::qos_rb, Policy::fr_fcfs};

inline std::string_view to_string(Policy p) {
  switch (p) {
    case Policy::fcfs: return "FCFS";
    case Policy::rr: return "RR";
    case Policy::frame_qos: return "FRAME_QOS";
    case Policy::qos: return "QOS";
    case Policy::qos_rb: return "QOS_RB";
    case Policy::fr_fcfs: return "FR_FCFS";
  }
  return "?";
}

inline std::optional<Policy> parse_policy(std::string_view s) {
  for (Policy p : kAllPolicies)
    if (to_string(p) == s) return p;
  return std::nullopt;
}

/// Priority-aware policies also age transactions and drive the NoC by priority.
inline bool uses_priorities(Policy p) { return p == Policy::qos || p == Policy::qos_rb; }

/// The same policy family applied at the network arbiters.
inline ArbitrationMode noc_mode(Policy p) {
  switch (p) {
    case Policy::fcfs: return ArbitrationMode::fcfs;
    case Policy::rr: return ArbitrationMode::round_robin;
    case Policy::frame_qos: return ArbitrationMode::frame_qos;
    case Policy::qos:
    case Policy::qos_rb: return ArbitrationMode::priority;
    case Policy::fr_fcfs: return ArbitrationMode::fcfs;
  }
  return ArbitrationMode::fcfs;
}

struct ControllerConfig {
  Policy policy = Policy::qos;
  Cycle aging_period = 10000;  // T
  unsigned delta = 6;          // row-hit threshold for QOS_RB
  unsigned capacity = 42;      // entries shared by the five queues
  bool static_split = false;   // split capacity evenly across queues instead

  void validate() const {
    if (aging_period == 0) throw Error(ErrorCode::validation_error, "controller.aging_period must be > 0");
    if (delta > kPriorityLevels) throw Error(ErrorCode::validation_error, "controller.delta must be <= 8");
    if (capacity < kNumCoreClasses)
      throw Error(ErrorCode::validation_error, "controller.capacity must be >= 5");
  }

  /// Per-queue limit under the static split; remainder goes to the last queues.
  unsigned queue_capacity(CoreClass c) const {
    const unsigned base = capacity / kNumCoreClasses, extra = capacity % kNumCoreClasses;
    return base + (static_cast<unsigned>(c) >= kNumCoreClasses - extra ? 1u : 0u);
  }

  friend bool operator==(const ControllerConfig&, const ControllerConfig&) = default;
};

/// A DRAM-ready transaction as seen by a scheduling policy.
struct Candidate {
  std::size_t slot = 0;  // caller's handle
  unsigned queue = 0;
  unsigned rank = 0;     // priority, or kPriorityLevels when aged
  bool row_hit = false;
  bool lagging_media = false;
  Cycle arrival = 0;
  std::uint64_t id = 0;
};

struct SchedulerState {
  unsigned rr_queue = kNumCoreClasses - 1;  // last queue served
};

namespace policy {

inline bool earlier(const Candidate& a, const Candidate& b) {
  return a.arrival != b.arrival ? a.arrival < b.arrival : a.id < b.id;
}

template <class Pred>
std::optional<std::size_t> oldest(std::span<const Candidate> c, Pred&& keep) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < c.size(); ++i)
    if (keep(c[i]) && (!best || earlier(c[i], c[*best]))) best = i;
  return best;
}

inline std::optional<std::size_t> fcfs(std::span<const Candidate> c) {
  return oldest(c, [](const Candidate&) { return true; });
}

/// First queue after the pointer that holds a candidate passing `keep`;
/// oldest such candidate within it.
template <class Pred>
std::optional<std::size_t> round_robin(std::span<const Candidate> c, SchedulerState& s, Pred&& keep) {
  for (unsigned off = 1; off <= kNumCoreClasses; ++off) {
    const unsigned q = (s.rr_queue + off) % kNumCoreClasses;
    auto pick = oldest(c, [&](const Candidate& x) { return x.queue == q && keep(x); });
    if (pick) {
      s.rr_queue = q;
      return pick;
    }
  }
  return std::nullopt;
}

/// Policy 1: highest priority wins; equal priorities alternate round-robin.
inline std::optional<std::size_t> qos(std::span<const Candidate> c, SchedulerState& s) {
  if (c.empty()) return std::nullopt;
  unsigned top = 0;
  for (const Candidate& x : c) top = std::max(top, x.rank);
  return round_robin(c, s, [&](const Candidate& x) { return x.rank == top; });
}

/// Policy 2 over n transactions: when nothing ready reaches delta, or all
/// priorities are equal, row hits go first (oldest first); otherwise Policy 1.
inline std::optional<std::size_t> qos_rb(std::span<const Candidate> c, SchedulerState& s, unsigned delta) {
  if (c.empty()) return std::nullopt;
  bool urgent = false, all_equal = true;
  for (const Candidate& x : c) {
    urgent = urgent || x.rank >= delta;
    all_equal = all_equal && x.rank == c.front().rank;
  }
  if (!urgent || all_equal) {
    if (auto hit = oldest(c, [](const Candidate& x) { return x.row_hit; })) return hit;
  }
  return qos(c, s);
}

inline std::optional<std::size_t> fr_fcfs(std::span<const Candidate> c) {
  if (auto hit = oldest(c, [](const Candidate& x) { return x.row_hit; })) return hit;
  return fcfs(c);
}

/// Media cores behind their target first, otherwise first-come-first-serve.
inline std::optional<std::size_t> frame_qos(std::span<const Candidate> c) {
  if (auto lag = oldest(c, [](const Candidate& x) { return x.lagging_media; })) return lag;
  return fcfs(c);
}

}  // namespace policy

inline std::optional<std::size_t> select(Policy p, std::span<const Candidate> c, SchedulerState& s, unsigned delta) {
  switch (p) {
    case Policy::fcfs: return policy::fcfs(c);
    case Policy::rr: return policy::round_robin(c, s, [](const Candidate&) { return true; });
    case Policy::frame_qos: return policy::frame_qos(c);
    case Policy::qos: return policy::qos(c, s);
    case Policy::qos_rb: return policy::qos_rb(c, s, delta);
    case Policy::fr_fcfs: return policy::fr_fcfs(c);
  }
  return std::nullopt;
}

/// Controller of one channel. Each resident transaction caches a lower bound
/// on the cycle its command sequence could start, so cycles on which nothing
/// can issue cost one comparison per entry.
class MemController {
 public:
  explicit MemController(const ControllerConfig& cfg) : cfg_(cfg) { entries_.reserve(cfg.capacity); }

  const ControllerConfig& config() const { return cfg_; }
  std::size_t occupancy() const { return entries_.size(); }
  std::size_t queue_occupancy(CoreClass c) const { return per_queue_[static_cast<unsigned>(c)]; }

  bool has_space(CoreClass c) const {
    if (entries_.size() >= cfg_.capacity) return false;
    return !cfg_.static_split || per_queue_[static_cast<unsigned>(c)] < cfg_.queue_capacity(c);
  }

  /// Appends to the transaction's core-class queue; false means backpressure.
  /// The transaction becomes schedulable at txn.ready_at.
  bool enqueue(Transaction txn, const DramChannel& dram) {
    if (!has_space(txn.core_class)) return false;
    txn.t_enqueued = txn.ready_at;
    const Cycle e = std::max(txn.ready_at, dram.earliest_issue(txn.coord, txn.kind, txn.ready_at));
    entries_.push_back({txn, e});
    ++per_queue_[static_cast<unsigned>(txn.core_class)];
    wake_ = std::min(wake_, e);
    return true;
  }

  /// Chooses at most one DRAM-ready transaction at `now` and removes it.
  ///
  /// A cached start is a lower bound, not a promise: commands already
  /// scheduled in the future (activates after a precharge, reserved data
  /// slots) can make a cycle after it illegal again, so entries that look
  /// ready are re-checked against the current cycle.
  std::optional<Transaction> select(Cycle now, const DramChannel& dram, std::span<const std::uint8_t> lagging_media) {
    if (now < wake_ || entries_.empty()) return std::nullopt;
    candidates_.clear();
    Cycle next_wake = kNever;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      Entry& e = entries_[i];
      if (e.earliest <= now) e.earliest = dram.earliest_issue(e.txn.coord, e.txn.kind, now);
      if (e.earliest > now) {
        next_wake = std::min(next_wake, e.earliest);
        continue;
      }
      const Transaction& t = e.txn;
      candidates_.push_back({i, static_cast<unsigned>(t.core_class), effective_rank(t),
                             dram.classify(t.coord) == RowState::row_hit,
                             t.core_class == CoreClass::media && t.source.value < lagging_media.size() &&
                                 lagging_media[t.source.value] != 0,
                             t.t_enqueued, t.id});
    }
    if (candidates_.empty()) {
      wake_ = next_wake;
      return std::nullopt;
    }
    const auto pick = sara::select(cfg_.policy, candidates_, state_, cfg_.delta);
    const std::size_t slot = candidates_[*pick].slot;
    Transaction t = entries_[slot].txn;
    --per_queue_[static_cast<unsigned>(t.core_class)];
    entries_[slot] = entries_.back();
    entries_.pop_back();
    return t;
  }

  /// Called after the channel issued a sequence to `c` at `now`. New
  /// reservations only push other banks' starts later, so their cached
  /// values stay valid lower bounds; the target bank's open row changed, so
  /// its residents are re-derived at the next select.
  void on_issue(const DramCoord& c, Cycle now) {
    for (Entry& e : entries_)
      if (e.txn.coord.rank == c.rank && e.txn.coord.bank == c.bank) e.earliest = std::max(now + 1, e.txn.ready_at);
    wake_ = std::min(wake_, now + 1);
  }

  /// Marks residents that have waited at least T cycles; aged transactions
  /// outrank every priority level until they are served.
  void apply_aging(Cycle now) {
    for (Entry& e : entries_)
      if (now - e.txn.t_created >= cfg_.aging_period) e.txn.aged = true;
  }

  template <class F>
  void for_each_resident(F&& f) const {
    for (const Entry& e : entries_) f(e.txn);
  }

  const SchedulerState& scheduler_state() const { return state_; }

 private:
  struct Entry {
    Transaction txn;
    Cycle earliest;
  };

  ControllerConfig cfg_;
  std::vector<Entry> entries_;
  std::array<std::size_t, kNumCoreClasses> per_queue_{};
  std::vector<Candidate> candidates_;
  SchedulerState state_;
  Cycle wake_ = kNever;
};

}  // namespace sara
