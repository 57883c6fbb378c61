#include <gtest/gtest.h>

#include <vector>

#include "sara/mem_controller.hpp"
#include "sara/traffic_gen.hpp"

using namespace sara;

namespace {

const DramTimingConfig kT{};

Transaction txn(CoreClass cls, PriorityLevel p, std::uint32_t bank, std::uint32_t row, Cycle created = 0,
                TxnKind kind = TxnKind::read) {
  static std::uint64_t id = 0;
  Transaction t;
  t.id = id++;
  t.core_class = cls;
  t.priority = p;
  t.kind = kind;
  t.t_created = created;
  t.ready_at = created;
  t.coord = {0, 0, bank, row, 0};
  return t;
}

Candidate cand(std::size_t slot, unsigned queue, unsigned rank, bool hit, Cycle arrival = 0) {
  return {slot, queue, rank, hit, false, arrival, slot};
}

std::size_t pick(Policy p, const std::vector<Candidate>& c, SchedulerState& s, unsigned delta = 6) {
  return c[*select(p, c, s, delta)].slot;
}

}  // namespace

TEST(Enqueue, CoreClassSelectsQueue) {
  MemController mc({});
  DramChannel dram(kT);
  Transaction dsp = txn(find_core("dsp")->core_class, 0, 0, 0);
  Transaction codec = txn(find_core("video_codec")->core_class, 0, 1, 0, 0, TxnKind::write);
  ASSERT_TRUE(mc.enqueue(dsp, dram));
  ASSERT_TRUE(mc.enqueue(codec, dram));
  EXPECT_EQ(mc.queue_occupancy(CoreClass::dsp), 1u);
  EXPECT_EQ(mc.queue_occupancy(CoreClass::media), 1u);
  EXPECT_EQ(mc.occupancy(), 2u);
}

TEST(Enqueue, FortyTwoEntriesThenBackpressure) {
  MemController mc({});
  DramChannel dram(kT);
  for (int i = 0; i < 42; ++i) ASSERT_TRUE(mc.enqueue(txn(static_cast<CoreClass>(i % 5), 0, 0, 0), dram));
  EXPECT_FALSE(mc.has_space(CoreClass::cpu));
  EXPECT_FALSE(mc.enqueue(txn(CoreClass::cpu, 0, 0, 0), dram));
  EXPECT_EQ(mc.occupancy(), 42u);
  std::size_t per_queue = 0;
  for (unsigned q = 0; q < kNumCoreClasses; ++q) per_queue += mc.queue_occupancy(static_cast<CoreClass>(q));
  EXPECT_EQ(per_queue, 42u);
}

TEST(Enqueue, StaticSplitLimitsEachQueue) {
  ControllerConfig cfg;
  cfg.static_split = true;
  unsigned total = 0;
  for (unsigned q = 0; q < kNumCoreClasses; ++q) total += cfg.queue_capacity(static_cast<CoreClass>(q));
  EXPECT_EQ(total, 42u);
  EXPECT_EQ(cfg.queue_capacity(CoreClass::cpu), 8u);
  EXPECT_EQ(cfg.queue_capacity(CoreClass::system), 9u);
  MemController mc(cfg);
  DramChannel dram(kT);
  for (int i = 0; i < 8; ++i) ASSERT_TRUE(mc.enqueue(txn(CoreClass::gpu, 0, 0, 0), dram));
  EXPECT_FALSE(mc.has_space(CoreClass::gpu));
  EXPECT_TRUE(mc.has_space(CoreClass::dsp));
}

// --- policies over candidate sets ----------------------------------------------

TEST(Policy1, HigherPriorityWins) {
  SchedulerState s;
  EXPECT_EQ(pick(Policy::qos, {cand(0, 1, 3, false), cand(1, 2, 1, true)}, s), 0u);
}

TEST(Policy1, EqualPrioritiesAlternate) {
  SchedulerState s;
  const std::vector<Candidate> c{cand(0, 1, 4, false), cand(1, 3, 4, false)};
  const std::size_t first = pick(Policy::qos, c, s);
  const std::size_t second = pick(Policy::qos, c, s);
  const std::size_t third = pick(Policy::qos, c, s);
  EXPECT_NE(first, second);
  EXPECT_EQ(first, third);
}

TEST(Policy2, HitWinsWhileNothingIsUrgent) {
  SchedulerState s;
  EXPECT_EQ(pick(Policy::qos_rb, {cand(0, 1, 2, true), cand(1, 2, 5, false)}, s), 0u);
}

TEST(Policy2, UrgentMissBeatsHit) {
  SchedulerState s;
  EXPECT_EQ(pick(Policy::qos_rb, {cand(0, 1, 2, true), cand(1, 2, 7, false)}, s), 1u);
}

TEST(Policy2, EqualUrgentPrioritiesPreferHit) {
  SchedulerState s;
  EXPECT_EQ(pick(Policy::qos_rb, {cand(0, 1, 7, false), cand(1, 2, 7, true)}, s), 1u);
  EXPECT_EQ(pick(Policy::qos_rb, {cand(1, 2, 7, true), cand(0, 1, 7, false)}, s), 1u);
}

TEST(Policy2, DeltaIsInclusive) {
  SchedulerState s;
  EXPECT_EQ(pick(Policy::qos_rb, {cand(0, 1, 2, true), cand(1, 2, 6, false)}, s), 1u);
  EXPECT_EQ(pick(Policy::qos_rb, {cand(0, 1, 2, true), cand(1, 2, 5, false)}, s), 0u);
}

TEST(Baselines, FcfsOldestFirst) {
  SchedulerState s;
  EXPECT_EQ(pick(Policy::fcfs, {cand(0, 1, 7, true, 20), cand(1, 2, 0, false, 10)}, s), 1u);
}

TEST(Baselines, FrFcfsHitsThenOldest) {
  SchedulerState s;
  EXPECT_EQ(pick(Policy::fr_fcfs, {cand(0, 1, 0, false, 1), cand(1, 2, 0, true, 9), cand(2, 3, 0, true, 5)}, s), 2u);
  EXPECT_EQ(pick(Policy::fr_fcfs, {cand(0, 1, 0, false, 9), cand(1, 2, 0, false, 3)}, s), 1u);
}

TEST(Baselines, RoundRobinVisitsQueuesInTurn) {
  SchedulerState s;
  const std::vector<Candidate> c{cand(0, 0, 0, false), cand(1, 2, 0, false), cand(2, 4, 0, false)};
  std::vector<std::size_t> order;
  for (int i = 0; i < 6; ++i) order.push_back(pick(Policy::rr, c, s));
  EXPECT_EQ(order, (std::vector<std::size_t>{0, 1, 2, 0, 1, 2}));
}

TEST(Baselines, FrameQosLaggingMediaFirst) {
  SchedulerState s;
  std::vector<Candidate> c{cand(0, 2, 0, true, 1), cand(1, 3, 0, false, 9)};
  c[1].lagging_media = true;
  EXPECT_EQ(pick(Policy::frame_qos, c, s), 1u);
  c[1].lagging_media = false;
  EXPECT_EQ(pick(Policy::frame_qos, c, s), 0u);
}

TEST(Policies, EmptyReadySetSelectsNothing) {
  SchedulerState s;
  for (Policy p : kAllPolicies) EXPECT_FALSE(select(p, std::span<const Candidate>{}, s, 6).has_value());
}

// --- aging ---------------------------------------------------------------------------

TEST(Aging, ThresholdIsInclusive) {
  MemController mc({});
  DramChannel dram(kT);
  mc.enqueue(txn(CoreClass::gpu, 0, 0, 0, 0), dram);
  mc.enqueue(txn(CoreClass::gpu, 0, 1, 0, 1), dram);
  mc.apply_aging(10000);
  std::vector<bool> aged;
  mc.for_each_resident([&](const Transaction& t) { aged.push_back(t.aged); });
  EXPECT_EQ(aged, (std::vector<bool>{true, false}));
}

TEST(Aging, AgedLowPriorityBeatsFreshTop) {
  MemController mc({});
  DramChannel dram(kT);
  Transaction old = txn(CoreClass::system, 0, 0, 0, 0);
  Transaction fresh = txn(CoreClass::gpu, 7, 1, 0, 9000);
  mc.enqueue(old, dram);
  mc.enqueue(fresh, dram);
  mc.apply_aging(10000);
  const std::vector<std::uint8_t> none;
  auto got = mc.select(10000, dram, none);
  ASSERT_TRUE(got.has_value());
  EXPECT_EQ(got->id, old.id);
  EXPECT_TRUE(got->aged);
}

TEST(Controller, NotReadyBeforeArrival) {
  MemController mc({});
  DramChannel dram(kT);
  Transaction t = txn(CoreClass::cpu, 0, 0, 0, 50);
  mc.enqueue(t, dram);
  const std::vector<std::uint8_t> none;
  EXPECT_FALSE(mc.select(49, dram, none).has_value());
  EXPECT_TRUE(mc.select(50, dram, none).has_value());
  EXPECT_EQ(mc.occupancy(), 0u);
}

TEST(Controller, SelectionRespectsDramReadiness) {
  MemController mc({});
  DramChannel dram(kT);
  const std::vector<std::uint8_t> none;
  Transaction a = txn(CoreClass::cpu, 0, 0, 1, 0);
  dram.issue(a, 0);
  // Same bank, other row: the precharge must wait for tRTP after the read.
  Transaction b = txn(CoreClass::cpu, 0, 0, 2, 1);
  mc.enqueue(b, dram);
  Cycle now = 1;
  while (!mc.select(now, dram, none)) ++now;
  EXPECT_EQ(now, dram.earliest_issue(b.coord, b.kind, 1));
  EXPECT_TRUE(dram.can_issue(b.coord, b.kind, now));
}

TEST(ControllerConfig, Validation) {
  ControllerConfig c;
  c.aging_period = 0;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.delta = 9;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.capacity = 4;
  EXPECT_THROW(c.validate(), Error);
}
