#include <gtest/gtest.h>

#include <map>
#include <vector>

#include "support.hpp"

using namespace sara;
using namespace sara::test;

namespace {

const AddressMap kMap{};
constexpr double kClockHz = 933e6;

std::vector<Transaction> drive(TrafficGenerator& g, Cycle cycles, bool space = true) {
  std::vector<Transaction> out;
  for (Cycle c = 0; c < cycles; ++c)
    if (auto t = next_request(g, SimClock{c, kClockHz}, space)) out.push_back(*t);
  return out;
}

}  // namespace

TEST(Generator, ConstantRateInterArrival) {
  DmaSpec d = make_dma(0, "display", SourceKind::constant_rate, 89e6);
  TrafficGenerator g(d, kMap, kClockHz, 1);
  const Cycle cycles = 10'000'000;
  const auto got = drive(g, cycles);
  ASSERT_GT(got.size(), 1000u);
  const double gap_ns = (got.back().t_created - got.front().t_created) / double(got.size() - 1) / kClockHz * 1e9;
  EXPECT_NEAR(gap_ns, 64.0 / 89e6 * 1e9, 0.5);  // 719.1 ns
  EXPECT_NEAR(gap_ns, 719.0, 1.0);
}

TEST(Generator, LatencyProbeMeanRate) {
  DmaSpec d = make_dma(0, "modem", SourceKind::latency_probe, 89e6);
  TrafficGenerator g(d, kMap, kClockHz, 3);
  const auto got = drive(g, 20'000'000);
  const double gap_ns = 20'000'000 / double(got.size()) / kClockHz * 1e9;
  EXPECT_NEAR(gap_ns, 719.1, 719.1 * 0.02);
}

TEST(Generator, FrameBytesEligibleAtFrameStart) {
  DmaSpec d = make_dma(0, "rotator", SourceKind::bursty_frame, 0);
  d.frame_bytes = 1920 * 1080 * 3 / 2;
  EXPECT_EQ(d.frame_bytes, 3'110'400u);
  d.address_region.length = 8u << 20;
  TrafficGenerator g(d, kMap, kClockHz, 1);
  g.advance(SimClock{0, kClockHz});
  EXPECT_EQ(g.state().bytes_left_in_frame, 3'110'400u);
  EXPECT_TRUE(g.eligible());

  const Cycle period = d.frame_period_cycles(kClockHz);
  EXPECT_EQ(period, 31'100'000u);
  // One request per cycle drains the frame long before the period ends.
  const auto first = drive(g, 100'000);
  EXPECT_EQ(first.size(), 3'110'400u / 64);
  EXPECT_FALSE(g.eligible());
  g.advance(SimClock{period, kClockHz});
  EXPECT_EQ(g.state().bytes_left_in_frame, 3'110'400u);
}

TEST(Generator, ZeroRateNeverEmits) {
  for (SourceKind k : {SourceKind::constant_rate, SourceKind::latency_probe, SourceKind::bandwidth_stream}) {
    TrafficGenerator g(make_dma(0, "wifi", k, 0.0), kMap, kClockHz, 1);
    EXPECT_TRUE(drive(g, 200'000).empty()) << to_string(k);
  }
  DmaSpec f = make_dma(0, "jpeg", SourceKind::bursty_frame, 0.0);
  f.frame_bytes = 0;
  TrafficGenerator g(f, kMap, kClockHz, 1);
  EXPECT_TRUE(drive(g, 200'000).empty());
}

TEST(Generator, BackpressureLosesNothing) {
  DmaSpec d = make_dma(0, "display", SourceKind::constant_rate, 933e6 * 8);  // 0.125 txn/cycle
  TrafficGenerator open(d, kMap, kClockHz, 4), blocked(d, kMap, kClockHz, 4);
  std::vector<Transaction> a = drive(open, 80'000), b;
  for (Cycle c = 0; c < 80'000 + 20'000; ++c)
    if (auto t = next_request(blocked, SimClock{c, kClockHz}, c % 3 == 0 && (c < 10'000 || c > 12'000)))
      b.push_back(*t);
  ASSERT_GE(b.size(), a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    ASSERT_EQ(a[i].address, b[i].address);
    ASSERT_EQ(a[i].kind, b[i].kind);
  }
}

TEST(Generator, BacklogIsCapped) {
  DmaSpec d = make_dma(0, "display", SourceKind::constant_rate, 933e6 * 16);
  d.max_backlog = 10;
  TrafficGenerator g(d, kMap, kClockHz, 1);
  drive(g, 10'000, false);
  EXPECT_EQ(g.state().due, 10u);
}

TEST(Generator, LeadBytesOwedAtStart) {
  DmaSpec d = make_dma(0, "display", SourceKind::constant_rate, 1e6);
  d.lead_bytes = 640;
  TrafficGenerator g(d, kMap, kClockHz, 1);
  EXPECT_EQ(drive(g, 20).size(), 10u);
}

TEST(Generator, ReadFractionExtremes) {
  for (double rf : {0.0, 1.0}) {
    DmaSpec d = make_dma(0, "usb", SourceKind::bandwidth_stream, 5e9);
    d.read_fraction = rf;
    TrafficGenerator g(d, kMap, kClockHz, 1);
    for (const Transaction& t : drive(g, 5000))
      ASSERT_EQ(t.kind, rf == 1.0 ? TxnKind::read : TxnKind::write);
  }
  DmaSpec d = make_dma(0, "usb", SourceKind::bandwidth_stream, 5e9);
  d.read_fraction = 0.3;
  TrafficGenerator g(d, kMap, kClockHz, 1);
  const auto got = drive(g, 200'000);
  std::size_t reads = 0;
  for (const Transaction& t : got) reads += t.kind == TxnKind::read;
  EXPECT_NEAR(double(reads) / got.size(), 0.3, 0.01);
}

TEST(Generator, AddressesStayInRegionAndFollowLocality) {
  for (double loc : {0.0, 0.5, 0.97, 1.0}) {
    DmaSpec d = make_dma(3, "gpu", SourceKind::bandwidth_stream, 5e9);
    d.locality = loc;
    d.address_region = {64ull << 20, 64ull << 20};
    TrafficGenerator g(d, kMap, kClockHz, 7);
    const auto got = drive(g, 1'000'000);
    std::size_t same_row = 0;
    for (std::size_t i = 0; i < got.size(); ++i) {
      const Transaction& t = got[i];
      ASSERT_GE(t.address, d.address_region.base);
      ASSERT_LT(t.address, d.address_region.base + d.address_region.length);
      ASSERT_EQ(t.address % 64, 0u);
      const DramCoord c = kMap.decode(t.address);
      ASSERT_EQ(c.channel, t.coord.channel);
      if (i > 0) {
        const DramCoord p = kMap.decode(got[i - 1].address);
        same_row += p.channel == c.channel && p.rank == c.rank && p.bank == c.bank && p.row == c.row;
      }
    }
    const double frac = double(same_row) / (got.size() - 1);
    if (loc == 1.0) {
      EXPECT_DOUBLE_EQ(frac, 1.0);
    } else {
      // Random jumps land in the same row only by chance (1 in 2048 here).
      EXPECT_NEAR(frac, loc, 0.01) << loc;
    }
  }
}

TEST(Generator, SameSeedSameStream) {
  DmaSpec d = make_dma(0, "modem", SourceKind::latency_probe, 200e6);
  d.read_fraction = 0.5;
  d.locality = 0.5;
  TrafficGenerator a(d, kMap, kClockHz, 42), b(d, kMap, kClockHz, 42), c(d, kMap, kClockHz, 43);
  const auto ta = drive(a, 50'000), tb = drive(b, 50'000), tc = drive(c, 50'000);
  ASSERT_EQ(ta.size(), tb.size());
  for (std::size_t i = 0; i < ta.size(); ++i) {
    ASSERT_EQ(ta[i].address, tb[i].address);
    ASSERT_EQ(ta[i].t_created, tb[i].t_created);
  }
  bool differs = ta.size() != tc.size();
  for (std::size_t i = 0; !differs && i < ta.size(); ++i) differs = ta[i].address != tc[i].address;
  EXPECT_TRUE(differs);
}

// --- dataflow cases --------------------------------------------------------------

TEST(Dataflow, CaseBDropsInactiveCores) {
  const ScenarioConfig a = load_scenario("case_a.yaml");
  const auto b = make_dataflow_scenario(DataflowCase::b, a.dmas);
  for (const DmaSpec& d : b) {
    for (const char* idle : {"gps", "camera", "rotator", "jpeg"}) EXPECT_NE(d.core, idle);
  }
  for (std::size_t i = 0; i < b.size(); ++i) EXPECT_EQ(b[i].dma_id.value, i);
  EXPECT_EQ(make_dataflow_scenario(DataflowCase::a, a.dmas), a.dmas);
  EXPECT_DOUBLE_EQ(default_io_freq_mhz(DataflowCase::a), 1866.0);
  EXPECT_DOUBLE_EQ(default_io_freq_mhz(DataflowCase::b), 1700.0);

  // The shipped case B file is case A filtered, with its regions packed
  // back to back.
  const ScenarioConfig shipped_b = load_scenario("case_b.yaml");
  ASSERT_EQ(shipped_b.dmas.size(), b.size());
  for (std::size_t i = 0; i < b.size(); ++i) {
    DmaSpec s = shipped_b.dmas[i];
    EXPECT_EQ(s.address_region.length, b[i].address_region.length) << s.name;
    s.address_region.base = b[i].address_region.base;
    EXPECT_EQ(s, b[i]) << s.name;
    if (i > 0) {
      const AddressRegion& prev = shipped_b.dmas[i - 1].address_region;
      EXPECT_GE(shipped_b.dmas[i].address_region.base, prev.base + prev.length);
    }
  }
}

TEST(Dataflow, CaseASourceKinds) {
  const ScenarioConfig a = load_scenario("case_a.yaml");
  std::map<std::string, std::vector<const DmaSpec*>> by_core;
  for (const DmaSpec& d : a.dmas) by_core[d.core].push_back(&d);
  EXPECT_EQ(by_core["display"].at(0)->source_kind, SourceKind::constant_rate);
  EXPECT_EQ(by_core["camera"].at(0)->source_kind, SourceKind::constant_rate);
  EXPECT_EQ(by_core["video_codec"].at(0)->source_kind, SourceKind::bursty_frame);

  ASSERT_EQ(by_core["rotator"].size(), 2u);
  double rotator = 0;
  for (const DmaSpec* d : by_core["rotator"]) {
    EXPECT_EQ(d->frame_bytes, 3'110'400u);
    rotator += d->frame_bytes / d->frame_period_s;
  }
  // 178 MB/s in binary megabytes.
  EXPECT_NEAR(rotator / (1 << 20), 178.0, 178.0 * 0.01);
}

TEST(Catalog, CoreTable) {
  EXPECT_EQ(std::size(kCores), 14u);
  EXPECT_EQ(find_core("gps")->core_class, CoreClass::system);
  EXPECT_EQ(find_core("jpeg")->core_class, CoreClass::media);
  EXPECT_EQ(find_core("gpu")->core_class, CoreClass::gpu);
  EXPECT_FALSE(find_core("npu").has_value());
}
