#include "fisheye/cli.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "fisheye/checker.hpp"
#include "fisheye/errors.hpp"

namespace fisheye {

using nlohmann::json;

namespace {

std::string graph_text(const ProximityGraph& g) {
  if (g.edges().empty()) return "empty";
  std::string s;
  for (const auto& [a, b] : g.edges()) {
    if (!s.empty()) s += ',';
    s += std::to_string(a.index) + "-" + std::to_string(b.index);
  }
  return s;
}

std::string process_name(const std::vector<std::string>& names, ProcessId p) {
  return p.index < names.size() ? names[p.index] : "p" + std::to_string(p.index);
}

json value_json(const MaybeValue& v) { return v ? json(*v) : json(nullptr); }

WatchSpec parse_watch(const std::string& text, const Scenario& sc) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos) throw ParseError(0, "watch must be proc:step, got '" + text + "'");
  const std::string proc = text.substr(0, colon);
  std::optional<ProcessId> pid;
  for (std::uint32_t i = 0; i < sc.config.n && !pid; ++i) {
    if (process_name(sc.config.names, ProcessId{i}) == proc || std::to_string(i) == proc ||
        "p" + std::to_string(i) == proc) {
      pid = ProcessId{i};
    }
  }
  if (!pid) throw ParseError(0, "unknown process '" + proc + "'");
  std::size_t step{};
  const std::string s = text.substr(colon + 1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), step);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw ParseError(0, "bad step in watch '" + text + "'");
  return WatchSpec{*pid, step, text, std::nullopt};
}

}  // namespace

bool WatchTally::within_allowed() const {
  if (!spec.allowed) return true;
  return std::all_of(counts.begin(), counts.end(), [&](const auto& kv) { return spec.allowed->contains(kv.first); });
}

std::pair<std::uint64_t, std::uint64_t> parse_seed_range(const std::string& text) {
  auto num = [&](const std::string& s) {
    std::uint64_t v{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
      throw ParseError(0, "bad seed range '" + text + "'");
    }
    return v;
  };
  const auto dots = text.find("..");
  if (dots == std::string::npos) {
    const auto v = num(text);
    return {v, v};
  }
  const auto a = num(text.substr(0, dots));
  const auto b = num(text.substr(dots + 2));
  if (b < a) throw ParseError(0, "empty seed range '" + text + "'");
  return {a, b};
}

SweepResult run_sweep(const Scenario& sc, std::uint64_t first, std::uint64_t last, unsigned jobs,
                      bool debug_checks) {
  const std::uint64_t count = last - first + 1;
  struct Outcome {
    bool live = true;
    std::vector<std::optional<MaybeValue>> seen;
  };
  std::vector<Outcome> outcomes(count);
  std::atomic<std::uint64_t> next{0};
  auto worker = [&] {
    for (std::uint64_t k; (k = next.fetch_add(1)) < count;) {
      SimConfig cfg = sc.config;
      cfg.delays.seed = first + k;
      Simulator sim(std::move(cfg), SimOptions{debug_checks});
      try {
        sim.run_until_quiescence();
      } catch (const LivenessFailure&) {
        outcomes[k].live = false;
      }
      for (const auto& w : sc.watches) outcomes[k].seen.push_back(sim.observed(w.pid, w.step));
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::min<std::uint64_t>(count, 64))));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  SweepResult res;
  res.runs = count;
  for (const auto& w : sc.watches) res.tallies.push_back(WatchTally{w, {}, {}});
  for (std::uint64_t k = 0; k < count; ++k) {
    if (!outcomes[k].live) res.liveness_failures.push_back(first + k);
    for (std::size_t i = 0; i < sc.watches.size(); ++i) {
      if (!outcomes[k].seen[i]) continue;
      const MaybeValue v = *outcomes[k].seen[i];
      ++res.tallies[i].counts[v];
      res.tallies[i].first_seed.emplace(v, first + k);
    }
  }
  return res;
}

////////////////////////////////////////////////////////////////////////////////

int cmd_run(const RunArgs& args, std::ostream& out, std::ostream& err) {
  Scenario sc;
  try {
    sc = load_scenario(args.scenario);
    if (args.seed) sc.config.delays.seed = *args.seed;
    if (args.graph) sc.config.graph = parse_graph_spec(*args.graph, sc.config.n, sc.config.names);
  } catch (const ParseError& e) {
    err << args.scenario.string() << ": " << e.what() << '\n';
    return kExitBadInput;
  }

  Simulator sim(sc.config, SimOptions{args.debug_checks});
  try {
    sim.run_until_quiescence();
  } catch (const LivenessFailure& e) {
    err << "liveness failure (seed " << sc.config.delays.seed << "): " << e.what() << '\n';
    return kExitLiveness;
  }
  const History& h = sim.history();
  const std::string text = emit_history(h);
  if (!args.output) {
    out << text;
    return kExitOk;
  }
  std::ofstream file(*args.output);
  file << text;
  if (!file) {
    err << "cannot write " << args.output->string() << '\n';
    return kExitBadInput;
  }

  if (args.report == ReportFormat::Json) {
    json j{{"status", "quiescent"},
           {"seed", sc.config.delays.seed},
           {"graph", graph_text(sc.config.graph)},
           {"operations", h.ops.size()},
           {"events", h.events.size()},
           {"virtual_time", sim.now()}};
    json watches = json::array();
    for (const auto& w : sc.watches) {
      auto v = sim.observed(w.pid, w.step);
      watches.push_back({{"name", w.name}, {"value", v ? value_json(*v) : json("not reached")}});
    }
    j["watches"] = watches;
    out << j.dump(2) << '\n';
  } else {
    out << "quiescent at virtual time " << sim.now() << ": " << h.ops.size() << " operations, " << h.events.size()
        << " events, seed " << sc.config.delays.seed << '\n';
    for (const auto& w : sc.watches) {
      auto v = sim.observed(w.pid, w.step);
      out << "  " << w.name << " = " << (v ? value_to_text(*v) : std::string("not reached")) << '\n';
    }
  }
  return kExitOk;
}

int cmd_check(const CheckArgs& args, std::ostream& out, std::ostream& err) {
  History h;
  ProximityGraph g;
  try {
    h = load_history(args.history);
    validate_history(h);
    if (args.condition == "cc") {
      g = ProximityGraph::empty(h.n);
    } else if (args.condition == "sc") {
      g = ProximityGraph::complete(h.n);
    } else if (args.condition == "fisheye" || args.condition == "broadcast") {
      if (args.graph == "from-history") {
        if (!h.graph) throw ParseError(0, "history records no graph; pass --graph");
        g = *h.graph;
      } else {
        g = parse_graph_spec(args.graph, h.n, h.names);
      }
    } else {
      throw ParseError(0, "unknown condition '" + args.condition + "'");
    }
  } catch (const ParseError& e) {
    err << args.history.string() << ": " << e.what() << '\n';
    return kExitBadInput;
  } catch (const MalformedHistory& e) {
    err << args.history.string() << ": malformed history: " << e.what() << '\n';
    return kExitBadInput;
  }

  Verdict v;
  try {
    v = args.condition == "broadcast" ? check_broadcast_properties(h, g)
                                      : check_fisheye(h, g, CheckOptions{true, args.search_budget});
  } catch (const MalformedHistory& e) {
    err << args.history.string() << ": malformed history: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const SearchBudgetExceeded& e) {
    err << "inconclusive: " << e.what() << '\n';
    return kExitInconclusive;
  }

  if (args.report == ReportFormat::Json) {
    json j{{"condition", args.condition},
           {"graph", graph_text(g)},
           {"accepted", v.accepted},
           {"method", v.method}};
    if (!v.accepted) j["reason"] = v.reason;
    json wit = json::object();
    for (std::size_t i = 0; i < v.witness.size(); ++i) {
      json seq = json::array();
      for (OpId id : v.witness[i]) seq.push_back(op_label(h, id));
      wit[process_name(h.names, ProcessId{static_cast<std::uint32_t>(i)})] = seq;
    }
    if (v.accepted && args.condition != "broadcast") j["witness"] = wit;
    json ext = json::array();
    for (const auto& e : v.extension) {
      ext.push_back({{"kind", to_string(e.kind)}, {"from", op_label(h, e.from)}, {"to", op_label(h, e.to)}});
    }
    if (!ext.empty()) j["extension"] = ext;
    out << j.dump(2) << '\n';
  } else {
    out << (v.accepted ? "accepted" : "rejected") << " (" << args.condition << ", graph " << graph_text(g);
    if (!v.method.empty()) out << ", " << v.method;
    out << ")\n";
    if (!v.accepted) out << "  " << v.reason << '\n';
    for (std::size_t i = 0; i < v.witness.size(); ++i) {
      out << "  " << process_name(h.names, ProcessId{static_cast<std::uint32_t>(i)}) << ':';
      for (OpId id : v.witness[i]) out << ' ' << op_label(h, id);
      out << '\n';
    }
  }
  return v.accepted ? kExitOk : kExitRejected;
}

int cmd_sweep(const SweepArgs& args, std::ostream& out, std::ostream& err) {
  Scenario sc;
  try {
    sc = load_scenario(args.scenario);
    if (args.graph) sc.config.graph = parse_graph_spec(*args.graph, sc.config.n, sc.config.names);
    for (const auto& w : args.watches) sc.watches.push_back(parse_watch(w, sc));
    if (args.last_seed < args.first_seed) throw ParseError(0, "empty seed range");
  } catch (const ParseError& e) {
    err << args.scenario.string() << ": " << e.what() << '\n';
    return kExitBadInput;
  }

  const SweepResult res = run_sweep(sc, args.first_seed, args.last_seed, args.jobs, args.debug_checks);
  bool contained = true;
  for (const auto& t : res.tallies) contained &= t.within_allowed();

  if (args.report == ReportFormat::Json) {
    json j{{"seeds", {args.first_seed, args.last_seed}},
           {"runs", res.runs},
           {"graph", graph_text(sc.config.graph)},
           {"liveness_failures", res.liveness_failures},
           {"ok", contained && res.liveness_failures.empty()}};
    json ws = json::array();
    for (const auto& t : res.tallies) {
      json counts = json::array();
      for (const auto& [v, c] : t.counts) {
        counts.push_back({{"value", value_json(v)}, {"count", c}, {"first_seed", t.first_seed.at(v)}});
      }
      json w{{"name", t.spec.name},
             {"process", process_name(sc.config.names, t.spec.pid)},
             {"step", t.spec.step},
             {"observed", counts},
             {"within_allowed", t.within_allowed()}};
      if (t.spec.allowed) {
        json allowed = json::array();
        for (const auto& v : *t.spec.allowed) allowed.push_back(value_json(v));
        w["allowed"] = allowed;
      }
      ws.push_back(w);
    }
    j["watches"] = ws;
    out << j.dump(2) << '\n';
  } else {
    out << "sweep seeds " << args.first_seed << ".." << args.last_seed << " (" << res.runs << " runs), graph "
        << graph_text(sc.config.graph) << '\n';
    for (const auto& t : res.tallies) {
      out << "  " << t.spec.name << " observed {";
      bool first = true;
      for (const auto& [v, c] : t.counts) {
        out << (first ? "" : ", ") << value_to_text(v) << " x" << c;
        first = false;
      }
      out << '}';
      if (t.spec.allowed) {
        out << " allowed {";
        first = true;
        for (const auto& v : *t.spec.allowed) {
          out << (first ? "" : ", ") << value_to_text(v);
          first = false;
        }
        out << "} " << (t.within_allowed() ? "ok" : "VIOLATION");
      }
      out << '\n';
    }
    if (!res.liveness_failures.empty()) {
      out << "  liveness failures at " << res.liveness_failures.size() << " seeds, first "
          << res.liveness_failures.front() << '\n';
    }
  }
  if (!res.liveness_failures.empty()) return kExitLiveness;
  return contained ? kExitOk : kExitRejected;
}

}  // namespace fisheye
