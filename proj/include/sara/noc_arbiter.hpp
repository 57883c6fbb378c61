#pragma once

// The on-chip network as a tree of arbiters between DMAs and the memory
// controller of one channel. Each arbiter input is a bounded FIFO; each
// arbiter grants at most one transaction per cycle and a granted transaction
// takes one cycle to reach the next stage.

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sara/core_types.hpp"

namespace sara {

enum class ArbitrationMode : std::uint8_t {
  fcfs,         // oldest head first
  round_robin,  // inputs served in turn, priority ignored
  frame_qos,    // lagging media DMAs first, otherwise oldest head
  priority,     // highest priority head (aged first), round-robin ties
};

class PortQueue {
 public:
  explicit PortQueue(std::size_t depth = 8) : depth_(depth) {}

  bool empty() const { return q_.empty(); }
  bool full() const { return q_.size() >= depth_; }
  std::size_t size() const { return q_.size(); }
  std::size_t depth() const { return depth_; }
  const Transaction& head() const { return q_.front(); }
  Transaction& head() { return q_.front(); }

  void push(const Transaction& t) { q_.push_back(t); }
  Transaction pop() {
    Transaction t = q_.front();
    q_.pop_front();
    return t;
  }

  auto begin() { return q_.begin(); }
  auto end() { return q_.end(); }
  auto begin() const { return q_.begin(); }
  auto end() const { return q_.end(); }

 private:
  std::deque<Transaction> q_;
  std::size_t depth_;
};

struct ArbiterNode {
  std::string name;
  std::vector<PortQueue> inputs;
  std::size_t rr_pointer = 0;
  /// Downstream arbiter index, or nullopt when the output feeds the controller.
  std::optional<std::size_t> parent;
  std::size_t parent_port = 0;
};

struct ArbitrationContext {
  Cycle now = 0;
  ArbitrationMode mode = ArbitrationMode::priority;
  /// Per DmaId: the DMA is a media core running behind its target.
  std::span<const std::uint8_t> lagging_media;
};

namespace detail {

inline bool older(const Transaction& a, const Transaction& b) {
  return a.t_created != b.t_created ? a.t_created < b.t_created : a.id < b.id;
}

inline bool lagging(const Transaction& t, const ArbitrationContext& ctx) {
  return t.source.value < ctx.lagging_media.size() && ctx.lagging_media[t.source.value] != 0;
}

}  // namespace detail

/// Picks the input to grant this cycle among ports whose head is ready and
/// accepted downstream, and advances the round-robin pointer to it.
template <class Accepts>
std::optional<std::size_t> arbitrate(ArbiterNode& node, const ArbitrationContext& ctx, Accepts&& accepts) {
  const std::size_t n = node.inputs.size();
  if (n == 0) return std::nullopt;
  std::optional<std::size_t> best;
  // Scan in round-robin order so that the first candidate found among equals wins.
  for (std::size_t off = 1; off <= n; ++off) {
    const std::size_t p = (node.rr_pointer + off) % n;
    const PortQueue& q = node.inputs[p];
    if (q.empty() || q.head().ready_at > ctx.now || !accepts(q.head())) continue;
    if (!best) {
      best = p;
      if (ctx.mode == ArbitrationMode::round_robin) break;
      continue;
    }
    const Transaction& cand = q.head();
    const Transaction& cur = node.inputs[*best].head();
    bool better = false;
    switch (ctx.mode) {
      case ArbitrationMode::priority:
        better = effective_rank(cand) > effective_rank(cur);
        break;
      case ArbitrationMode::fcfs:
        better = detail::older(cand, cur);
        break;
      case ArbitrationMode::frame_qos: {
        const bool lc = detail::lagging(cand, ctx), lb = detail::lagging(cur, ctx);
        better = lc != lb ? lc : detail::older(cand, cur);
        break;
      }
      case ArbitrationMode::round_robin:
        break;
    }
    if (better) best = p;
  }
  if (best) node.rr_pointer = *best;
  return best;
}

inline std::optional<std::size_t> arbitrate(ArbiterNode& node, const ArbitrationContext& ctx) {
  return arbitrate(node, ctx, [](const Transaction&) { return true; });
}

/// Arbiter tree description. DMAs attach to an arbiter by name; the single
/// arbiter whose parent is "controller" is the root.
struct Topology {
  struct Arbiter {
    std::string name;
    std::string parent;
    friend bool operator==(const Arbiter&, const Arbiter&) = default;
  };

  std::vector<Arbiter> arbiters;
  std::size_t port_depth = 8;

  static constexpr std::string_view kController = "controller";

  /// Media cluster, system cluster and direct root ports for CPU/GPU/DSP.
  static Topology default_tree() {
    return {{{"media", "root"}, {"system", "root"}, {"root", std::string(kController)}}, 8};
  }

  static std::string default_port(CoreClass c) {
    switch (c) {
      case CoreClass::media: return "media";
      case CoreClass::system: return "system";
      default: return "root";
    }
  }

  void validate(std::span<const std::string> dma_ports) const {
    if (port_depth == 0) throw Error(ErrorCode::validation_error, "topology.port_depth must be > 0");
    std::map<std::string, std::size_t> index;
    std::size_t roots = 0;
    for (std::size_t i = 0; i < arbiters.size(); ++i) {
      if (arbiters[i].name == kController)
        throw Error(ErrorCode::validation_error, "arbiter may not be named 'controller'");
      if (!index.emplace(arbiters[i].name, i).second)
        throw Error(ErrorCode::validation_error, "duplicate arbiter '" + arbiters[i].name + "'");
      if (arbiters[i].parent == kController) ++roots;
    }
    if (roots != 1) throw Error(ErrorCode::validation_error, "topology needs exactly one arbiter feeding the controller");
    for (const Arbiter& a : arbiters) {
      if (a.parent != kController && !index.count(a.parent))
        throw Error(ErrorCode::validation_error, "arbiter '" + a.name + "' has unknown parent '" + a.parent + "'");
      // Every arbiter must reach the controller without revisiting a node.
      std::string cur = a.name;
      for (std::size_t steps = 0; cur != kController; ++steps) {
        if (steps > arbiters.size())
          throw Error(ErrorCode::validation_error, "arbiter '" + a.name + "' is part of a cycle");
        cur = arbiters[index.at(cur)].parent;
      }
    }
    for (const std::string& p : dma_ports)
      if (!index.count(p)) throw Error(ErrorCode::validation_error, "DMA attached to unknown arbiter '" + p + "'");
  }

  friend bool operator==(const Topology&, const Topology&) = default;
};

/// One channel's arbiter tree.
class Network {
 public:
  Network(const Topology& topo, std::span<const std::string> dma_ports) {
    topo.validate(dma_ports);
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < topo.arbiters.size(); ++i) index[topo.arbiters[i].name] = i;

    nodes_.resize(topo.arbiters.size());
    for (std::size_t i = 0; i < topo.arbiters.size(); ++i) nodes_[i].name = topo.arbiters[i].name;

    // Ports: attached DMAs in DmaId order, then child arbiters in declaration order.
    dma_port_.resize(dma_ports.size());
    for (std::size_t d = 0; d < dma_ports.size(); ++d) {
      ArbiterNode& n = nodes_[index.at(dma_ports[d])];
      dma_port_[d] = {index.at(dma_ports[d]), n.inputs.size()};
      n.inputs.emplace_back(topo.port_depth);
    }
    for (std::size_t i = 0; i < topo.arbiters.size(); ++i) {
      if (topo.arbiters[i].parent == Topology::kController) {
        root_ = i;
        continue;
      }
      ArbiterNode& p = nodes_[index.at(topo.arbiters[i].parent)];
      nodes_[i].parent = index.at(topo.arbiters[i].parent);
      nodes_[i].parent_port = p.inputs.size();
      p.inputs.emplace_back(topo.port_depth);
    }

    // Bottom-up order: deepest first, ties by declaration order.
    std::vector<std::size_t> depth(nodes_.size(), 0);
    for (std::size_t i = 0; i < nodes_.size(); ++i)
      for (auto p = nodes_[i].parent; p; p = nodes_[*p].parent) ++depth[i];
    order_.resize(nodes_.size());
    for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
    std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) { return depth[a] > depth[b]; });
  }

  bool can_inject(DmaId dma) const {
    const auto [node, port] = dma_port_[dma.value];
    return !nodes_[node].inputs[port].full();
  }

  void inject(Transaction t, Cycle now) {
    const auto [node, port] = dma_port_[dma_port_index(t.source)];
    t.ready_at = now;
    nodes_[node].inputs[port].push(t);
  }

  /// One cycle of switch allocation, leaves first. `sink` receives what the
  /// root grants; `sink_accepts` tells whether the controller has room.
  template <class SinkAccepts, class Sink>
  void step(const ArbitrationContext& ctx, SinkAccepts&& sink_accepts, Sink&& sink) {
    for (std::size_t i : order_) {
      ArbiterNode& n = nodes_[i];
      if (n.parent) {
        PortQueue& down = nodes_[*n.parent].inputs[n.parent_port];
        if (down.full()) continue;
        auto g = arbitrate(n, ctx);
        if (!g) continue;
        Transaction t = n.inputs[*g].pop();
        t.ready_at = ctx.now + 1;
        ++t.hops;
        down.push(t);
      } else {
        auto g = arbitrate(n, ctx, sink_accepts);
        if (!g) continue;
        Transaction t = n.inputs[*g].pop();
        t.ready_at = ctx.now + 1;
        ++t.hops;
        sink(std::move(t));
      }
    }
  }

  /// Marks every buffered transaction that has waited at least `period` cycles.
  void apply_aging(Cycle now, Cycle period) {
    for (ArbiterNode& n : nodes_)
      for (PortQueue& q : n.inputs)
        for (Transaction& t : q)
          if (now - t.t_created >= period) t.aged = true;
  }

  std::size_t resident() const {
    std::size_t s = 0;
    for (const ArbiterNode& n : nodes_)
      for (const PortQueue& q : n.inputs) s += q.size();
    return s;
  }

  template <class F>
  void for_each_resident(F&& f) const {
    for (const ArbiterNode& n : nodes_)
      for (const PortQueue& q : n.inputs)
        for (const Transaction& t : q) f(t);
  }

  const std::vector<ArbiterNode>& nodes() const { return nodes_; }
  std::size_t root() const { return root_; }

 private:
  std::size_t dma_port_index(DmaId d) const { return d.value; }

  std::vector<ArbiterNode> nodes_;
  std::vector<std::pair<std::size_t, std::size_t>> dma_port_;  // (node, port) per DmaId
  std::vector<std::size_t> order_;
  std::size_t root_ = 0;
};

}  // namespace sara
