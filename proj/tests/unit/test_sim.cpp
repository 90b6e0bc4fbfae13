#include <doctest.h>

#include <algorithm>

#include "fisheye/errors.hpp"
#include "fisheye/io.hpp"
#include "fisheye/net_sim.hpp"
#include "support.hpp"

using namespace fisheye;

namespace {

const ProcessId P0{0}, P1{1}, P2{2};

SimConfig base(std::size_t n, ProximityGraph g, std::uint64_t seed = 0, std::uint64_t lo = 1, std::uint64_t hi = 10) {
  SimConfig cfg;
  cfg.n = n;
  cfg.graph = std::move(g);
  cfg.delays = DelayModel{seed, lo, hi, {}};
  return cfg;
}

}  // namespace

TEST_CASE("delay samples are pure and in range") {
  DelayModel d{9, 2, 6, {}};
  d.per_channel[{0, 1}] = {30, 40};
  for (std::uint64_t k = 0; k < 200; ++k) {
    const auto a = d.sample(P1, P2, k);
    CHECK(a == d.sample(P1, P2, k));
    CHECK(a >= 2);
    CHECK(a <= 6);
    const auto b = d.sample(P0, P1, k);
    CHECK(b >= 30);
    CHECK(b <= 40);
  }
  CHECK_THROWS_AS((DelayModel{0, 0, 3, {}}.validate()), ContractViolation);
  CHECK_THROWS_AS((DelayModel{0, 5, 3, {}}.validate()), ContractViolation);
}

TEST_CASE("FIFO: a fast message sent after a slow one arrives no earlier") {
  // find a seed whose first two samples on 0->1 are 5 then 1
  std::optional<std::uint64_t> seed;
  for (std::uint64_t s = 0; s < 100000 && !seed; ++s) {
    DelayModel d{s, 1, 5, {}};
    if (d.sample(P0, P1, 0) == 5 && d.sample(P0, P1, 1) == 1) seed = s;
  }
  REQUIRE(seed);
  Simulator sim(base(2, ProximityGraph::empty(2), *seed, 1, 5), {true});
  sim.schedule_send(P0, P1, CatchUp{1, P0});
  sim.schedule_send(P0, P1, CatchUp{2, P0});
  while (sim.step()) {
  }
  const auto& arr = sim.arrivals();
  REQUIRE(arr.size() == 2);
  CHECK(arr[0].time == 5);
  CHECK(arr[1].time == 5);
  CHECK(arr[0].send_index == 0);
  CHECK(arr[1].send_index == 1);
  CHECK(sim.replica(P1).broadcast().total()[P0] == 2);
}

TEST_CASE("fixed delay of one tick") {
  auto cfg = base(3, ProximityGraph::complete(3), 4, 1, 1);
  cfg.programs.push_back({P0, {WriteStep{"X", 1}}});
  Simulator sim(cfg, {true});
  sim.run_until_quiescence();
  for (const auto& a : sim.arrivals()) CHECK(a.time >= 1);
  // every arrival is exactly one tick after some send; with one write and
  // the catch-ups it triggers, nothing can land later than t=2
  CHECK(std::all_of(sim.arrivals().begin(), sim.arrivals().end(), [](const ArrivalRecord& a) { return a.time <= 2; }));
}

TEST_CASE("no programs gives an empty history") {
  Simulator sim(base(3, ProximityGraph::complete(3)), {true});
  const auto& h = sim.run_until_quiescence();
  CHECK(h.ops.empty());
  CHECK(h.events.empty());
  CHECK(sim.now() == 0);
}

TEST_CASE("a single writer on three processes") {
  auto cfg = base(3, ProximityGraph::complete(3), 11);
  cfg.programs.push_back({P0, {WriteStep{"X", 1}}});
  Simulator sim(cfg, {true});
  const auto& h = sim.run_until_quiescence();
  REQUIRE(h.ops.size() == 1);
  CHECK(h.ops[0].is_write());
  CHECK(h.ops[0].msg == TotalStamp{1, P0});
  const auto deliveries = std::count_if(h.events.begin(), h.events.end(),
                                        [](const BroadcastEvent& e) { return e.kind == EventKind::Deliver; });
  CHECK(deliveries == 3);
  for (std::uint32_t p = 0; p < 3; ++p) CHECK(sim.replica(ProcessId{p}).read("X") == 1);
  CHECK(sim.status(P0) == ProcessStatus::Done);
}

TEST_CASE("identical configs give identical histories") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto cfg = testing::random_store_config(seed);
    Simulator a(cfg, {true});
    Simulator b(cfg, {true});
    a.run_until_quiescence();
    b.run_until_quiescence();
    CHECK(a.history() == b.history());
    CHECK(emit_history(a.history()) == emit_history(b.history()));
    CHECK(a.arrivals() == b.arrivals());
  }
}

TEST_CASE("a repeat read that can never succeed is a liveness failure") {
  auto cfg = base(2, ProximityGraph::empty(2));
  cfg.programs.push_back({P0, {RepeatReadUntil{"X", 9}}});
  cfg.programs.push_back({P1, {WriteStep{"X", 1}}});
  Simulator sim(cfg, {true});
  CHECK_THROWS_AS(sim.run_until_quiescence(), LivenessFailure);
  CHECK(sim.status(P0) == ProcessStatus::BlockedRepeat);
}

TEST_CASE("sleeping advances virtual time") {
  auto cfg = base(1, ProximityGraph::empty(1));
  cfg.programs.push_back({P0, {Nop{7}, ReadStep{"X", "x"}}});
  Simulator sim(cfg, {true});
  const auto& h = sim.run_until_quiescence();
  REQUIRE(h.ops.size() == 1);
  CHECK(sim.now() == 7);
  CHECK(sim.observed(P0, 1) == std::optional<MaybeValue>(MaybeValue{}));
  CHECK_FALSE(sim.observed(P0, 0));
}

TEST_CASE("raw broadcasts may not look like writes") {
  auto cfg = base(2, ProximityGraph::empty(2));
  cfg.programs.push_back({P0, {BroadcastStep{encode_write({"X", 1, P0})}}});
  Simulator sim(cfg, {true});
  CHECK_THROWS_AS(sim.run_until_quiescence(), ContractViolation);
}

TEST_CASE("the three-city scenario never lets berlin read 1") {
  auto sc = load_scenario(testing::source_path("scenarios/cities.scenario"));
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    sc.config.delays.seed = seed;
    Simulator sim(sc.config, {true});
    sim.run_until_quiescence();
    for (const auto& w : sc.watches) {
      const auto v = sim.observed(w.pid, w.step);
      REQUIRE(v);
      REQUIRE(w.allowed);
      CHECK(w.allowed->count(*v) == 1);
    }
  }
}
