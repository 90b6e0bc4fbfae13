#include <doctest.h>

#include <algorithm>
#include <array>
#include <sstream>

#include "fisheye/brute_force.hpp"
#include "fisheye/checker.hpp"
#include "fisheye/errors.hpp"
#include "fisheye/io.hpp"
#include "support.hpp"

using namespace fisheye;

namespace {

const ProcessId P0{0}, P1{1}, P2{2}, P3{3};

History hist(const std::string& rel) { return load_history(testing::source_path(rel)); }

History from_text(const std::string& text) {
  std::istringstream in(text);
  return parse_history(in);
}

ProximityGraph two_edge_graph() {
  ProximityGraph g(4);
  g.add_edge(P0, P1);
  g.add_edge(P2, P3);
  return g;
}

}  // namespace

TEST_CASE("order relation closes and refuses cycles") {
  OrderRelation o(4);
  CHECK(o.add(0, 1, EdgeKind::Process));
  CHECK(o.add(1, 2, EdgeKind::ReadFrom));
  CHECK(o.before(0, 2));
  CHECK_FALSE(o.before(2, 0));
  CHECK_FALSE(o.add(2, 0, EdgeKind::WW));
  CHECK_FALSE(o.before(2, 0));
  CHECK(o.add(0, 2, EdgeKind::WW));  // implied, accepted
  CHECK(o.edges().size() == 2);
  CHECK(o.predecessor_count(2) == 2);
  CHECK_FALSE(o.ordered(3, 0));
  const auto r = o.restricted({2, 0});
  CHECK(r.before(1, 0));
  CHECK_FALSE(r.before(0, 1));
}

TEST_CASE("message causal order") {
  const auto h = hist("histories/golden/cities_seed1.hist");
  const auto mo = build_message_causal_order(h);
  const auto writes = std::count_if(h.ops.begin(), h.ops.end(), [](const Operation& op) { return op.is_write(); });
  REQUIRE(mo.messages.size() == static_cast<std::size_t>(writes));
  for (std::size_t a = 0; a < mo.messages.size(); ++a) {
    CHECK_FALSE(mo.order.before(a, a));
    for (std::size_t b = 0; b < mo.messages.size(); ++b) {
      if (mo.messages[a].pid == mo.messages[b].pid && mo.messages[a].time < mo.messages[b].time) {
        CHECK(mo.order.before(a, b));
      }
    }
  }
  CHECK(mo.index_of(TotalStamp{99, P0}) == std::nullopt);
}

TEST_CASE("message causal order rejects a cycle and a double broadcast") {
  CHECK_THROWS_AS(build_message_causal_order(from_text("# fisheye-history v1\nn 2\n"
                                                       "ev 1 0 dlv p0 1@1\nev 2 0 bcast p0 1@0\n"
                                                       "ev 3 0 dlv p1 1@0\nev 4 0 bcast p1 1@1\n")),
                  MalformedHistory);
  CHECK_THROWS_AS(build_message_causal_order(from_text("# fisheye-history v1\nn 2\n"
                                                       "ev 1 0 bcast p0 1@0\nev 2 0 bcast p0 1@0\n")),
                  MalformedHistory);
}

TEST_CASE("broadcast properties: opposite delivery orders depend on the graph") {
  const auto h = from_text(
      "# fisheye-history v1\nn 2\n"
      "ev 1 0 bcast p0 1@0\nev 2 0 bcast p1 1@1\n"
      "ev 3 1 dlv p0 1@0\nev 4 2 dlv p0 1@1\n"
      "ev 5 1 dlv p1 1@1\nev 6 2 dlv p1 1@0\n");
  CHECK(check_broadcast_properties(h, ProximityGraph::empty(2)).accepted);
  const auto v = check_broadcast_properties(h, ProximityGraph::complete(2));
  CHECK_FALSE(v.accepted);
  CHECK_FALSE(v.reason.empty());
}

TEST_CASE("broadcast properties: causal, validity, integrity, termination") {
  const std::string ok =
      "# fisheye-history v1\nn 2\n"
      "ev 1 0 bcast p0 1@0\nev 2 0 dlv p0 1@0\nev 3 0 bcast p0 2@0\n"
      "ev 4 1 dlv p0 2@0\n";
  CHECK(check_broadcast_properties(from_text(ok + "ev 5 1 dlv p1 1@0\nev 6 1 dlv p1 2@0\n"),
                                   ProximityGraph::empty(2)).accepted);
  // p1 delivers the second message first
  CHECK_FALSE(check_broadcast_properties(from_text(ok + "ev 5 1 dlv p1 2@0\nev 6 1 dlv p1 1@0\n"),
                                         ProximityGraph::empty(2)).accepted);
  // never broadcast
  CHECK_FALSE(check_broadcast_properties(
                  from_text(ok + "ev 5 1 dlv p1 1@0\nev 6 1 dlv p1 2@0\nev 7 1 dlv p1 4@1\n"),
                  ProximityGraph::empty(2)).accepted);
  // delivered twice
  CHECK_FALSE(check_broadcast_properties(
                  from_text(ok + "ev 5 1 dlv p1 1@0\nev 6 1 dlv p1 2@0\nev 7 1 dlv p1 2@0\n"),
                  ProximityGraph::empty(2)).accepted);
  // p1 never delivers 2@0
  CHECK_FALSE(check_broadcast_properties(from_text(ok + "ev 5 1 dlv p1 1@0\n"), ProximityGraph::empty(2)).accepted);
}

TEST_CASE("read-from by value and by events") {
  const auto opposite = hist("histories/opposite_orders.hist");
  const auto rf = derive_read_from(opposite);
  CHECK_FALSE(rf.from_events);
  CHECK(rf.source[1] == OpId{0});
  CHECK(rf.source[2] == OpId{3});
  CHECK(rf.source[5] == OpId{0});

  const auto sim = hist("histories/golden/quad_fisheye_seed1.hist");
  const auto rf2 = derive_read_from(sim);
  CHECK(rf2.from_events);
  CHECK(rf2.source[2] == std::nullopt);
  CHECK(rf2.source[17] == OpId{12});

  CHECK_THROWS_AS(derive_read_from(HistoryBuilder(1).read(0, "X", 5).build()), MalformedHistory);
}

TEST_CASE("causal legality") {
  // p1 sees 2 then 1 although p0 wrote 1 before 2
  const auto h = HistoryBuilder(2).write(0, "X", 1).write(0, "X", 2).read(1, "X", 2).read(1, "X", 1).build();
  auto base = build_read_from(h);
  REQUIRE_FALSE(base.cycle);
  CHECK_FALSE(check_causal_legality(base.order, h, base.rf).accepted);
  CHECK_FALSE(check_cc(h).accepted);

  const auto bot = HistoryBuilder(1).write(0, "X", 1).read(0, "X", std::nullopt).build();
  auto b2 = build_read_from(bot);
  CHECK_FALSE(check_causal_legality(b2.order, bot, b2.rf).accepted);

  const auto fine = HistoryBuilder(2).write(0, "X", 1).read(1, "X", std::nullopt).read(1, "X", 1).build();
  auto b3 = build_read_from(fine);
  CHECK(check_causal_legality(b3.order, fine, b3.rf).accepted);
}

TEST_CASE("a read-from cycle is reported") {
  // each process reads the other's later write before writing
  const auto h = HistoryBuilder(2).read(0, "X", 2).write(0, "Y", 1).read(1, "Y", 1).write(1, "X", 2).build();
  const auto base = build_read_from(h);
  CHECK(base.cycle);
  CHECK_FALSE(check_cc(h).accepted);
}

TEST_CASE("ww extension follows delivery order between neighbors only") {
  const auto h = hist("histories/golden/quad_fisheye_seed1.hist");
  auto base = build_read_from(h);
  REQUIRE_FALSE(base.cycle);
  auto order = base.order;
  std::string why;
  REQUIRE(extend_ww(order, h, two_edge_graph(), &why));
  CHECK(order.before(0, 1));  // 1@0 before 1@1
  CHECK_FALSE(order.ordered(12, 15));

  auto empty = base.order;
  REQUIRE(extend_ww(empty, h, ProximityGraph::empty(4)));
  CHECK(empty.edges().size() == base.order.edges().size());
}

TEST_CASE("rw links order a read before the write that replaced its value") {
  // p1 reads X=1 and then the neighbor write 2 is linked after it
  const auto h = HistoryBuilder(2).write(0, "X", 1).read(1, "X", 1).write(0, "X", 2).read(1, "X", 2).build();
  auto base = build_read_from(h);
  auto order = base.order;
  REQUIRE(extend_ww(order, h, ProximityGraph::complete(2)));
  extend_rw_links(order, h, base.rf, ProximityGraph::complete(2));
  CHECK(order.before(1, 2));
  extend_r_rw_links(order, h, ProximityGraph::complete(2));
  CHECK(order.before(0, 3));
}

TEST_CASE("classic histories") {
  CHECK(check_cc(hist("histories/two_writers_sc.hist")).accepted);
  CHECK(check_sc(hist("histories/two_writers_sc.hist")).accepted);
  const auto opposite = hist("histories/opposite_orders.hist");
  CHECK(check_cc(opposite).accepted);
  CHECK_FALSE(check_sc(opposite).accepted);
  // only the readers are neighbors: nothing beyond causal order is forced
  CHECK(check_fisheye(opposite, ProximityGraph::from_edges(4, std::array{ProximityGraph::Edge{P2, P3}})).accepted);
  // the writers are neighbors, so both readers must agree on their order
  CHECK_FALSE(check_fisheye(opposite, ProximityGraph::from_edges(4, std::array{ProximityGraph::Edge{P0, P1}})).accepted);
}

TEST_CASE("four-process histories under the two-edge graph") {
  const auto g = two_edge_graph();
  struct Row {
    const char* file;
    bool cc, sc, fe;
  };
  const Row rows[] = {
      {"histories/quad_x3_y4.hist", true, false, true},
      {"histories/quad_x3_y5.hist", true, true, true},
      {"histories/quad_x2_y4.hist", true, false, false},
      {"histories/quad_x2_y5.hist", true, false, false},
  };
  for (const auto& row : rows) {
    CAPTURE(row.file);
    const auto h = hist(row.file);
    CHECK(check_cc(h).accepted == row.cc);
    CHECK(check_sc(h).accepted == row.sc);
    const auto v = check_fisheye(h, g);
    CHECK(v.accepted == row.fe);
    CHECK(check_fisheye(h, g, {false, 2'000'000}).accepted == row.fe);
    if (v.accepted) CHECK(validate_witness(h, g, v) == std::nullopt);
  }
}

TEST_CASE("simulated histories are accepted with a valid witness") {
  for (const char* file : {"histories/golden/quad_fisheye_seed0.hist", "histories/golden/quad_fisheye_seed1.hist",
                           "histories/golden/cities_seed1.hist"}) {
    CAPTURE(file);
    const auto h = hist(file);
    REQUIRE(h.graph);
    const auto v = check_fisheye(h, *h.graph);
    REQUIRE(v.accepted);
    CHECK(v.method == "guided");
    CHECK(validate_witness(h, *h.graph, v) == std::nullopt);
    CHECK(check_broadcast_properties(h, *h.graph).accepted);
  }
  CHECK_FALSE(check_sc(hist("histories/golden/quad_fisheye_seed1.hist")).accepted);
}

TEST_CASE("a tampered witness is caught") {
  const auto h = hist("histories/quad_x3_y4.hist");
  auto v = check_fisheye(h, two_edge_graph());
  REQUIRE(v.accepted);
  auto bad = v;
  auto& seq = bad.witness.at(3);
  REQUIRE(seq.size() >= 2);
  std::reverse(seq.begin(), seq.end());
  CHECK(validate_witness(h, two_edge_graph(), bad));
  auto missing = v;
  missing.witness.at(0).pop_back();
  CHECK(validate_witness(h, two_edge_graph(), missing));
}

TEST_CASE("search budget exhaustion is reported") {
  const auto h = hist("histories/quad_x3_y4.hist");
  CHECK_THROWS_AS(check_fisheye(h, two_edge_graph(), {false, 1}), SearchBudgetExceeded);
}

TEST_CASE("end points of the graph range") {
  std::mt19937_64 rng(77);
  for (int k = 0; k < 300; ++k) {
    const auto h = testing::random_history(rng, 3, 7);
    CAPTURE(emit_history(h));
    CHECK(check_fisheye(h, ProximityGraph::empty(3)).accepted == check_cc(h).accepted);
    CHECK(check_fisheye(h, ProximityGraph::complete(3)).accepted == check_sc(h).accepted);
  }
}

TEST_CASE("dropping edges never turns acceptance into rejection") {
  std::mt19937_64 rng(78);
  const auto graphs = testing::all_graphs(3);
  for (int k = 0; k < 200; ++k) {
    const auto h = testing::random_history(rng, 3, 7);
    std::vector<bool> acc;
    for (const auto& g : graphs) acc.push_back(check_fisheye(h, g).accepted);
    for (std::size_t a = 0; a < graphs.size(); ++a) {
      for (std::size_t b = 0; b < graphs.size(); ++b) {
        if (graphs[a].subgraph_of(graphs[b]) && acc[b]) CHECK(acc[a]);
      }
    }
  }
}

TEST_CASE("oracle basics") {
  const auto opposite = hist("histories/opposite_orders.hist");
  CHECK(brute_force_check(opposite, ProximityGraph::empty(4)).accepted);
  CHECK_FALSE(brute_force_check(opposite, ProximityGraph::complete(4)).accepted);
  HistoryBuilder big(2);
  for (int k = 0; k < 11; ++k) big.write(k % 2, "X", k + 1);
  CHECK_THROWS_AS(brute_force_check(big.build(), ProximityGraph::empty(2)), OracleSizeExceeded);
}

TEST_CASE("checker agrees with the oracle on random small histories") {
  std::mt19937_64 rng(79);
  const auto graphs = testing::all_graphs(3);
  for (int k = 0; k < 300; ++k) {
    const auto h = testing::random_history(rng, 3, 7);
    const auto& g = graphs[k % graphs.size()];
    const auto fast = check_fisheye(h, g);
    const auto slow = brute_force_check(h, g);
    CAPTURE(emit_history(h));
    CAPTURE(k);
    CHECK(fast.accepted == slow.accepted);
    if (fast.accepted) CHECK(validate_witness(h, g, fast) == std::nullopt);
  }
}
