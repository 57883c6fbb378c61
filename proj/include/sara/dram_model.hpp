#pragma once

// Bank-level DRAM timing model. A transaction is issued as one atomic
// command sequence (PRE/ACT as needed, then RD or WR) whose command times are
// fixed at issue; the model only admits a sequence whose every command
// honors the timing windows against everything already scheduled. Rows stay
// open until a conflicting access (open-page policy); refresh is not modeled.

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sara/core_types.hpp"

namespace sara {

/// Timings are in command-clock cycles; the command clock runs at half the
/// I/O data rate (1866 MHz I/O -> 933 MHz).
struct DramTimingConfig {
  std::uint32_t CL = 36;
  std::uint32_t tRCD = 34;
  std::uint32_t tRP = 34;
  std::uint32_t tWTR = 19;
  std::uint32_t tRTP = 14;
  std::uint32_t tWR = 34;
  std::uint32_t tRRD = 19;
  std::uint32_t tFAW = 75;
  std::uint32_t tBURST = 8;  // data-bus cycles per 64-byte transaction
  double io_freq_mhz = 1866.0;
  std::uint32_t channels = 2;
  std::uint32_t ranks = 2;
  std::uint32_t banks = 8;
  std::uint32_t row_bytes = 2048;  // per-bank row buffer
  std::uint32_t rows = 32768;

  double command_clock_hz() const { return io_freq_mhz * 1e6 / 2.0; }
  std::uint64_t capacity_bytes() const {
    return std::uint64_t{channels} * ranks * banks * rows * row_bytes;
  }

  void validate() const {
    for (auto [name, v] : {std::pair{"CL", CL}, {"tRCD", tRCD}, {"tRP", tRP}, {"tWTR", tWTR}, {"tRTP", tRTP},
                           {"tWR", tWR}, {"tRRD", tRRD}, {"tFAW", tFAW}, {"tBURST", tBURST}})
      if (v == 0) throw Error(ErrorCode::validation_error, std::string("dram.") + name + " must be > 0");
    if (!(io_freq_mhz > 0.0)) throw Error(ErrorCode::validation_error, "dram.io_freq_mhz must be > 0");
    for (auto [name, v] : {std::pair{"channels", channels}, {"ranks", ranks}, {"banks", banks},
                           {"row_bytes", row_bytes}, {"rows", rows}})
      if (v == 0 || !std::has_single_bit(v))
        throw Error(ErrorCode::validation_error, std::string("dram.") + name + " must be a power of two");
    if (row_bytes < 64) throw Error(ErrorCode::validation_error, "dram.row_bytes must be >= 64");
  }

  friend bool operator==(const DramTimingConfig&, const DramTimingConfig&) = default;
};

/// Bit-field layout, low to high: 64-byte offset | channel | column | bank | rank | row.
class AddressMap {
 public:
  static constexpr unsigned kOffsetBits = 6;

  AddressMap() : AddressMap(DramTimingConfig{}) {}
  explicit AddressMap(const DramTimingConfig& cfg)
      : channel_bits_(log2(cfg.channels)),
        column_bits_(log2(cfg.row_bytes >> kOffsetBits)),
        bank_bits_(log2(cfg.banks)),
        rank_bits_(log2(cfg.ranks)),
        row_bits_(log2(cfg.rows)) {}

  DramCoord decode(std::uint64_t addr) const {
    DramCoord c;
    addr >>= kOffsetBits;
    c.channel = take(addr, channel_bits_);
    c.column = take(addr, column_bits_);
    c.bank = take(addr, bank_bits_);
    c.rank = take(addr, rank_bits_);
    c.row = take(addr, row_bits_);
    return c;
  }

  std::uint64_t encode(const DramCoord& c) const {
    std::uint64_t a = c.row;
    a = (a << rank_bits_) | c.rank;
    a = (a << bank_bits_) | c.bank;
    a = (a << column_bits_) | c.column;
    a = (a << channel_bits_) | c.channel;
    return a << kOffsetBits;
  }

  std::uint32_t columns() const { return 1u << column_bits_; }
  std::uint64_t capacity_bytes() const {
    return std::uint64_t{1} << (kOffsetBits + channel_bits_ + column_bits_ + bank_bits_ + rank_bits_ + row_bits_);
  }
  /// Bytes spanned by one row index across every channel, bank and rank.
  std::uint64_t row_span_bytes() const { return capacity_bytes() >> row_bits_; }

 private:
  static unsigned log2(std::uint32_t v) { return static_cast<unsigned>(std::countr_zero(v)); }
  static std::uint32_t take(std::uint64_t& a, unsigned bits) {
    const auto v = static_cast<std::uint32_t>(a & ((std::uint64_t{1} << bits) - 1));
    a >>= bits;
    return v;
  }

  unsigned channel_bits_, column_bits_, bank_bits_, rank_bits_, row_bits_;
};

enum class RowState : std::uint8_t { row_hit, row_miss, bank_closed };

inline std::string_view to_string(RowState s) {
  switch (s) {
    case RowState::row_hit: return "row_hit";
    case RowState::row_miss: return "row_miss";
    case RowState::bank_closed: return "bank_closed";
  }
  return "?";
}

struct BankState {
  std::optional<std::uint32_t> open_row;
  Cycle earliest_activate = 0;
  Cycle earliest_read = 0;
  Cycle earliest_write = 0;
  Cycle earliest_precharge = 0;
};

inline RowState classify(const DramCoord& c, const BankState& bank) {
  if (!bank.open_row) return RowState::bank_closed;
  return *bank.open_row == c.row ? RowState::row_hit : RowState::row_miss;
}

/// Issue-to-data-complete latency of an unobstructed sequence.
inline Cycle service_latency(RowState s, const DramTimingConfig& t) {
  switch (s) {
    case RowState::row_hit: return t.CL + t.tBURST;
    case RowState::bank_closed: return t.tRCD + t.CL + t.tBURST;
    case RowState::row_miss: return t.tRP + t.tRCD + t.CL + t.tBURST;
  }
  return 0;
}

/// Bytes per second over a window of command-clock cycles.
inline double bandwidth(std::uint64_t bytes, Cycle window_cycles, double clock_hz) {
  if (window_cycles == 0) throw Error(ErrorCode::invalid_window, "bandwidth over an empty window");
  return static_cast<double>(bytes) * clock_hz / static_cast<double>(window_cycles);
}

enum class DramCommand : std::uint8_t { precharge, activate, read, write };

struct CommandRecord {
  Cycle at = 0;
  DramCommand cmd = DramCommand::read;
  std::uint32_t rank = 0;
  std::uint32_t bank = 0;
  std::uint32_t row = 0;
};

struct DramStats {
  std::uint64_t row_hits = 0;
  std::uint64_t row_misses = 0;
  std::uint64_t bank_closed = 0;
  std::uint64_t bytes = 0;

  std::uint64_t accesses() const { return row_hits + row_misses + bank_closed; }
};

/// One DRAM channel: banks of every rank, per-rank activate/turnaround
/// history and the shared data bus.
class DramChannel {
 public:
  explicit DramChannel(const DramTimingConfig& cfg, bool log_commands = false)
      : cfg_(cfg), banks_(std::size_t{cfg.ranks} * cfg.banks), ranks_(cfg.ranks), log_enabled_(log_commands) {}

  const DramTimingConfig& timing() const { return cfg_; }
  const BankState& bank(std::uint32_t rank, std::uint32_t bank) const { return banks_[rank * cfg_.banks + bank]; }
  RowState classify(const DramCoord& c) const { return sara::classify(c, bank(c.rank, c.bank)); }
  const DramStats& stats() const { return stats_; }
  const std::vector<CommandRecord>& command_log() const { return log_; }

  /// Earliest cycle >= now at which the sequence for (c, kind) could start.
  Cycle earliest_issue(const DramCoord& c, TxnKind kind, Cycle now) const {
    const BankState& b = bank(c.rank, c.bank);
    const Offsets off = offsets(sara::classify(c, b));
    const Cycle cas_ready = kind == TxnKind::read ? b.earliest_read : b.earliest_write;

    Cycle t = now;
    if (off.pre) t = std::max(t, b.earliest_precharge);
    if (off.act) t = std::max(t, sub_floor(b.earliest_activate, off.act_at));
    t = std::max(t, sub_floor(cas_ready, off.cas_at));

    const RankHistory& r = ranks_[c.rank];
    for (;;) {
      Cycle next = t;
      if (off.act) next = std::max(next, r.next_legal_activate(t + off.act_at, cfg_) - off.act_at);
      const Cycle cas = next + off.cas_at;
      if (kind == TxnKind::read) {
        next = std::max(next, r.next_legal_read(cas, cfg_) - off.cas_at);
      } else {
        next = std::max(next, r.next_legal_write(cas, cfg_) - off.cas_at);
      }
      next = std::max(next, next_bus_slot(next + off.cas_at + cfg_.CL) - cfg_.CL - off.cas_at);
      if (next == t) return t;
      t = next;
    }
  }

  bool can_issue(const DramCoord& c, TxnKind kind, Cycle now) const { return earliest_issue(c, kind, now) == now; }

  /// Commits the command sequence starting at `now` and returns the cycle at
  /// which the last data beat completes.
  Cycle issue(const Transaction& txn, Cycle now) {
    const DramCoord& c = txn.coord;
    if (earliest_issue(c, txn.kind, now) != now)
      throw Error(ErrorCode::illegal_issue, "transaction " + std::to_string(txn.id) + " at cycle " +
                                                std::to_string(now) + " violates a timing window");
    prune(now);
    BankState& b = banks_[c.rank * cfg_.banks + c.bank];
    RankHistory& r = ranks_[c.rank];
    const RowState state = sara::classify(c, b);
    const Offsets off = offsets(state);

    switch (state) {
      case RowState::row_hit: ++stats_.row_hits; break;
      case RowState::row_miss: ++stats_.row_misses; break;
      case RowState::bank_closed: ++stats_.bank_closed; break;
    }

    if (off.pre) {
      record(now, DramCommand::precharge, c);
      b.earliest_activate = std::max(b.earliest_activate, now + cfg_.tRP);
    }
    if (off.act) {
      const Cycle act = now + off.act_at;
      record(act, DramCommand::activate, c);
      r.acts.insert(std::upper_bound(r.acts.begin(), r.acts.end(), act), act);
      b.open_row = c.row;
    }
    const Cycle cas = now + off.cas_at;
    const Cycle data_start = cas + cfg_.CL;
    const Cycle data_end = data_start + cfg_.tBURST;
    b.earliest_read = std::max(b.earliest_read, cas + cfg_.tBURST);
    b.earliest_write = std::max(b.earliest_write, cas + cfg_.tBURST);
    if (txn.kind == TxnKind::read) {
      record(cas, DramCommand::read, c);
      b.earliest_precharge = std::max(b.earliest_precharge, cas + cfg_.tRTP);
      r.reads.insert(std::upper_bound(r.reads.begin(), r.reads.end(), cas), cas);
    } else {
      record(cas, DramCommand::write, c);
      b.earliest_precharge = std::max(b.earliest_precharge, data_end + cfg_.tWR);
      const WriteRecord w{cas, data_end};
      r.writes.insert(std::upper_bound(r.writes.begin(), r.writes.end(), w,
                                       [](const WriteRecord& a, const WriteRecord& b2) { return a.cas < b2.cas; }),
                      w);
    }
    bus_.insert(std::upper_bound(bus_.begin(), bus_.end(), data_start,
                                 [](Cycle v, const std::pair<Cycle, Cycle>& iv) { return v < iv.first; }),
                {data_start, data_end});
    stats_.bytes += txn.size_bytes;
    return data_end;
  }

 private:
  struct Offsets {
    bool pre = false;
    bool act = false;
    Cycle act_at = 0;
    Cycle cas_at = 0;
  };

  struct WriteRecord {
    Cycle cas;
    Cycle data_end;
  };

  struct RankHistory {
    std::vector<Cycle> acts;  // sorted; may include scheduled future activates
    std::vector<Cycle> reads;
    std::vector<WriteRecord> writes;

    /// Smallest a' >= a keeping tRRD to every activate and at most four
    /// activates inside any tFAW window.
    Cycle next_legal_activate(Cycle a, const DramTimingConfig& cfg) const {
      for (;;) {
        Cycle next = a;
        for (Cycle x : acts)
          if (x + cfg.tRRD > next && next + cfg.tRRD > x) next = x + cfg.tRRD;
        if (next == a) {
          // Walk each window of five consecutive activates containing `a`:
          // up to four neighbours on either side.
          std::array<Cycle, 9> win{};
          const auto split = static_cast<std::size_t>(std::upper_bound(acts.begin(), acts.end(), a) - acts.begin());
          const std::size_t before = std::min<std::size_t>(split, 4);
          const std::size_t after = std::min<std::size_t>(acts.size() - split, 4);
          std::size_t n = 0;
          for (std::size_t i = split - before; i < split; ++i) win[n++] = acts[i];
          const std::size_t pos = n;
          win[n++] = a;
          for (std::size_t i = split; i < split + after; ++i) win[n++] = acts[i];
          for (std::size_t first = pos >= 4 ? pos - 4 : 0; first <= pos && first + 4 < n; ++first) {
            if (win[first + 4] - win[first] < cfg.tFAW) {
              next = first + 4 == pos ? win[first] + cfg.tFAW : a + 1;
              break;
            }
          }
        }
        if (next == a) return a;
        a = next;
      }
    }

    /// Reads must trail the data of every earlier write by tWTR.
    Cycle next_legal_read(Cycle cas, const DramTimingConfig& cfg) const {
      for (const WriteRecord& w : writes)
        if (w.cas < cas && cas < w.data_end + cfg.tWTR) cas = w.data_end + cfg.tWTR;
      return cas;
    }

    /// A write placed before an already scheduled read must leave that read
    /// its tWTR gap; otherwise it moves behind the read.
    Cycle next_legal_write(Cycle cas, const DramTimingConfig& cfg) const {
      for (;;) {
        Cycle next = cas;
        for (Cycle r : reads)
          if (cas < r && r < cas + cfg.CL + cfg.tBURST + cfg.tWTR) next = std::max(next, r);
        if (next == cas) return cas;
        cas = next;
      }
    }
  };

  Offsets offsets(RowState s) const {
    switch (s) {
      case RowState::row_hit: return {false, false, 0, 0};
      case RowState::bank_closed: return {false, true, 0, cfg_.tRCD};
      case RowState::row_miss: return {true, true, cfg_.tRP, Cycle{cfg_.tRP} + cfg_.tRCD};
    }
    return {};
  }

  static Cycle sub_floor(Cycle a, Cycle b) { return a > b ? a - b : 0; }

  /// Earliest data start >= d whose burst does not overlap a reservation.
  Cycle next_bus_slot(Cycle d) const {
    for (const auto& [s, e] : bus_) {
      if (e <= d) continue;
      if (s >= d + cfg_.tBURST) break;
      d = e;
    }
    return d;
  }

  void prune(Cycle now) {
    // Keep anything that can still constrain a command issued at or after now.
    const Cycle horizon = now > kHistory ? now - kHistory : 0;
    for (RankHistory& r : ranks_) {
      std::erase_if(r.acts, [&](Cycle x) { return x + cfg_.tFAW < horizon; });
      std::erase_if(r.reads, [&](Cycle x) { return x < horizon; });
      std::erase_if(r.writes, [&](const WriteRecord& w) { return w.data_end + cfg_.tWTR < horizon; });
    }
    std::erase_if(bus_, [&](const std::pair<Cycle, Cycle>& iv) { return iv.second < horizon; });
  }

  void record(Cycle at, DramCommand cmd, const DramCoord& c) {
    if (log_enabled_) log_.push_back({at, cmd, c.rank, c.bank, c.row});
  }

  static constexpr Cycle kHistory = 8;

  DramTimingConfig cfg_;
  std::vector<BankState> banks_;
  std::vector<RankHistory> ranks_;
  std::vector<std::pair<Cycle, Cycle>> bus_;  // data-bus reservations, sorted
  DramStats stats_;
  bool log_enabled_;
  std::vector<CommandRecord> log_;
};

/// Replays a channel's command log and reports every timing violation. It
/// shares no code with DramChannel's admission logic.
struct ProtocolViolation {
  Cycle at;
  std::string rule;
};

inline std::vector<ProtocolViolation> check_protocol(std::vector<CommandRecord> log, const DramTimingConfig& t) {
  std::vector<ProtocolViolation> out;
  std::stable_sort(log.begin(), log.end(), [](const CommandRecord& a, const CommandRecord& b) { return a.at < b.at; });

  struct Bank {
    bool open = false;
    std::uint32_t row = 0;
    std::optional<Cycle> last_pre, last_act, last_cas, last_read, last_write_data_end;
  };
  std::vector<Bank> banks(std::size_t{t.ranks} * t.banks);
  std::vector<std::vector<Cycle>> acts(t.ranks);
  std::vector<std::optional<Cycle>> last_write_end(t.ranks), last_write_cas(t.ranks);
  std::vector<std::pair<Cycle, Cycle>> bursts;

  auto fail = [&](Cycle at, std::string rule) { out.push_back({at, std::move(rule)}); };

  for (const CommandRecord& c : log) {
    Bank& b = banks[c.rank * t.banks + c.bank];
    switch (c.cmd) {
      case DramCommand::precharge:
        if (!b.open) fail(c.at, "PRE to a closed bank");
        if (b.last_read && c.at < *b.last_read + t.tRTP) fail(c.at, "tRTP");
        if (b.last_write_data_end && c.at < *b.last_write_data_end + t.tWR) fail(c.at, "tWR");
        b.open = false;
        b.last_pre = c.at;
        break;
      case DramCommand::activate: {
        if (b.open) fail(c.at, "ACT to an open bank");
        if (b.last_pre && c.at < *b.last_pre + t.tRP) fail(c.at, "tRP");
        auto& a = acts[c.rank];
        if (!a.empty() && c.at < a.back() + t.tRRD) fail(c.at, "tRRD");
        if (a.size() >= 4 && c.at < a[a.size() - 4] + t.tFAW) fail(c.at, "tFAW");
        a.push_back(c.at);
        b.open = true;
        b.row = c.row;
        b.last_act = c.at;
        break;
      }
      case DramCommand::read:
      case DramCommand::write: {
        if (!b.open || b.row != c.row) fail(c.at, "CAS to a row that is not open");
        if (b.last_act && c.at < *b.last_act + t.tRCD) fail(c.at, "tRCD");
        if (b.last_cas && c.at < *b.last_cas + t.tBURST) fail(c.at, "tCCD");
        const Cycle data_start = c.at + t.CL;
        bursts.emplace_back(data_start, data_start + t.tBURST);
        if (c.cmd == DramCommand::read) {
          if (last_write_cas[c.rank] && *last_write_cas[c.rank] < c.at &&
              c.at < *last_write_end[c.rank] + t.tWTR)
            fail(c.at, "tWTR");
          b.last_read = c.at;
        } else {
          b.last_write_data_end = data_start + t.tBURST;
          last_write_cas[c.rank] = c.at;
          last_write_end[c.rank] = data_start + t.tBURST;
        }
        b.last_cas = c.at;
        break;
      }
    }
  }
  std::sort(bursts.begin(), bursts.end());
  for (std::size_t i = 1; i < bursts.size(); ++i)
    if (bursts[i].first < bursts[i - 1].second) fail(bursts[i].first, "data-bus overlap");
  return out;
}

}  // namespace sara
