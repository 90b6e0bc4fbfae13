#include "fisheye/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "fisheye/errors.hpp"

namespace fisheye {

namespace {

constexpr std::string_view kScenarioHeader = "# fisheye-scenario v1";
constexpr std::string_view kHistoryHeader = "# fisheye-history v1";

std::vector<std::string> split(const std::string& line) {
  std::istringstream is(line);
  std::vector<std::string> out;
  for (std::string tok; is >> tok;) out.push_back(tok);
  return out;
}

template <typename Int>
Int to_int(const std::string& s, std::size_t line, std::string_view what) {
  Int v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ParseError(line, "expected " + std::string(what) + ", got '" + s + "'");
  }
  return v;
}

MaybeValue to_value(const std::string& s, std::size_t line) {
  if (s == "_") return std::nullopt;
  return to_int<Value>(s, line, "integer value or _");
}

/// Reads lines, tracking numbers; skips blanks and '#' comments after the header.
class LineReader {
 public:
  LineReader(std::istream& in, std::string_view header) : in_(in) {
    std::string first;
    if (!std::getline(in_, first) || trim(first) != header) {
      throw ParseError(1, "missing header '" + std::string(header) + "'");
    }
    line_ = 1;
  }

  bool next(std::vector<std::string>& toks, std::string& raw) {
    while (std::getline(in_, raw)) {
      ++line_;
      const std::string t = trim(raw);
      if (t.empty() || t.front() == '#') continue;
      toks = split(t);
      raw = t;
      return true;
    }
    return false;
  }

  std::size_t line() const noexcept { return line_; }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  std::istream& in_;
  std::size_t line_ = 0;
};

std::optional<std::uint32_t> resolve_process(const std::string& tok, std::size_t n,
                                             const std::vector<std::string>& names) {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == tok) return static_cast<std::uint32_t>(i);
  }
  std::string_view digits = tok;
  if (digits.size() > 1 && digits.front() == 'p') digits.remove_prefix(1);
  std::uint32_t v{};
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
  if (ec != std::errc{} || ptr != digits.data() + digits.size() || v >= n) return std::nullopt;
  return v;
}

void expect_args(const std::vector<std::string>& toks, std::size_t min, std::size_t max, std::size_t line) {
  if (toks.size() < min || toks.size() > max) {
    throw ParseError(line, "wrong number of fields for '" + toks.front() + "'");
  }
}

std::string stamp_text(TotalStamp s) { return std::to_string(s.time) + "@" + std::to_string(s.pid.index); }

TotalStamp parse_stamp(const std::string& s, std::size_t n, std::size_t line) {
  const auto at = s.find('@');
  if (at == std::string::npos) throw ParseError(line, "expected stamp time@pid, got '" + s + "'");
  const auto pid = to_int<std::uint32_t>(s.substr(at + 1), line, "stamp pid");
  if (pid >= n) throw ParseError(line, "stamp names process " + std::to_string(pid) + " but n is " + std::to_string(n));
  return {to_int<std::uint64_t>(s.substr(0, at), line, "stamp time"), ProcessId{pid}};
}

ProcessId parse_pid(const std::string& tok, std::size_t n, std::size_t line) {
  if (tok.size() < 2 || tok.front() != 'p') throw ParseError(line, "expected p<index>, got '" + tok + "'");
  const auto v = to_int<std::uint32_t>(tok.substr(1), line, "process index");
  if (v >= n) throw ParseError(line, "process " + tok + " out of range (n = " + std::to_string(n) + ")");
  return ProcessId{v};
}

}  // namespace

std::string value_to_text(const MaybeValue& v) { return v ? std::to_string(*v) : std::string("_"); }

ProximityGraph parse_graph_spec(const std::string& spec, std::size_t n, const std::vector<std::string>& names) {
  if (n == 0) throw ParseError(0, "graph needs at least one process");
  if (spec == "empty") return ProximityGraph::empty(n);
  if (spec == "complete") return ProximityGraph::complete(n);
  ProximityGraph g(n);
  std::stringstream ss(spec);
  for (std::string edge; std::getline(ss, edge, ',');) {
    bool done = false;
    // names may contain '-', so try every split point
    for (auto pos = edge.find('-'); pos != std::string::npos && !done; pos = edge.find('-', pos + 1)) {
      auto a = resolve_process(edge.substr(0, pos), n, names);
      auto b = resolve_process(edge.substr(pos + 1), n, names);
      if (a && b && *a != *b) {
        g.add_edge(ProcessId{*a}, ProcessId{*b});
        done = true;
      }
    }
    if (!done) throw ParseError(0, "bad graph edge '" + edge + "'");
  }
  return g;
}

////////////////////////////////////////////////////////////////////////////////

Scenario parse_scenario(std::istream& in) {
  LineReader reader(in, kScenarioHeader);
  Scenario sc;
  std::optional<std::size_t> n;
  std::vector<std::string> names;
  std::optional<ProximityGraph> graph;
  std::map<std::uint32_t, ProcessProgram> programs;
  std::optional<ProcessProgram> open;  // program being read
  struct RepeatSite {
    std::string reg;
    Value value;
    std::size_t line;
  };
  std::vector<RepeatSite> repeats;
  std::map<std::pair<std::string, Value>, bool> written;

  auto need_n = [&](std::size_t line) {
    if (!n) throw ParseError(line, "'n' must come first");
    return *n;
  };
  auto proc = [&](const std::string& tok, std::size_t line) {
    auto p = resolve_process(tok, need_n(line), names);
    if (!p) throw ParseError(line, "unknown process '" + tok + "'");
    return ProcessId{*p};
  };
  auto need_graph = [&](std::size_t line) -> ProximityGraph& {
    if (!graph) graph = ProximityGraph(need_n(line));
    return *graph;
  };

  std::vector<std::string> toks;
  std::string raw;
  while (reader.next(toks, raw)) {
    const std::size_t line = reader.line();
    const std::string& kw = toks.front();

    if (open) {
      if (kw == "end") {
        expect_args(toks, 1, 1, line);
        const auto pid = open->pid.index;
        programs.emplace(pid, std::move(*open));
        open.reset();
      } else if (kw == "write") {
        expect_args(toks, 3, 3, line);
        const auto v = to_int<Value>(toks[2], line, "integer value");
        open->steps.push_back(WriteStep{toks[1], v});
        written[{toks[1], v}] = true;
      } else if (kw == "read") {
        expect_args(toks, 2, 3, line);
        open->steps.push_back(ReadStep{toks[1], toks.size() == 3 ? toks[2] : std::string{}});
      } else if (kw == "repeat") {
        expect_args(toks, 3, 3, line);
        const auto v = to_int<Value>(toks[2], line, "integer value");
        open->steps.push_back(RepeatReadUntil{toks[1], v});
        repeats.push_back({toks[1], v, line});
      } else if (kw == "nop") {
        expect_args(toks, 1, 2, line);
        open->steps.push_back(Nop{toks.size() == 2 ? to_int<std::uint64_t>(toks[1], line, "tick count") : 0});
      } else if (kw == "bcast") {
        expect_args(toks, 2, SIZE_MAX, line);
        Payload payload = raw.substr(raw.find_first_not_of(' ', kw.size()));
        if (decode_write(payload)) throw ParseError(line, "raw payload must not look like a write");
        open->steps.push_back(BroadcastStep{std::move(payload)});
      } else {
        throw ParseError(line, "unknown instruction '" + kw + "'");
      }
      continue;
    }

    if (kw == "n") {
      expect_args(toks, 2, 2, line);
      if (n) throw ParseError(line, "'n' given twice");
      n = to_int<std::size_t>(toks[1], line, "process count");
      if (*n == 0) throw ParseError(line, "n must be at least 1");
    } else if (kw == "names") {
      if (toks.size() - 1 != need_n(line)) throw ParseError(line, "need exactly n names");
      names.assign(toks.begin() + 1, toks.end());
      for (std::size_t i = 0; i < names.size(); ++i) {
        if (std::count(names.begin(), names.end(), names[i]) > 1) {
          throw ParseError(line, "duplicate name '" + names[i] + "'");
        }
      }
    } else if (kw == "graph") {
      expect_args(toks, 2, 2, line);
      if (toks[1] == "empty") {
        graph = ProximityGraph::empty(need_n(line));
      } else if (toks[1] == "complete") {
        graph = ProximityGraph::complete(need_n(line));
      } else {
        throw ParseError(line, "graph must be 'empty' or 'complete'; use 'edge' lines otherwise");
      }
    } else if (kw == "edge") {
      expect_args(toks, 3, 3, line);
      const auto a = proc(toks[1], line);
      const auto b = proc(toks[2], line);
      if (a == b) throw ParseError(line, "self-loop edge");
      need_graph(line).add_edge(a, b);
    } else if (kw == "delay") {
      expect_args(toks, 3, 3, line);
      sc.config.delays.min_delay = to_int<std::uint64_t>(toks[1], line, "delay");
      sc.config.delays.max_delay = to_int<std::uint64_t>(toks[2], line, "delay");
    } else if (kw == "channel") {
      expect_args(toks, 5, 5, line);
      const auto a = proc(toks[1], line);
      const auto b = proc(toks[2], line);
      if (a == b) throw ParseError(line, "channel from a process to itself");
      sc.config.delays.per_channel[{a.index, b.index}] = {to_int<std::uint64_t>(toks[3], line, "delay"),
                                                          to_int<std::uint64_t>(toks[4], line, "delay")};
    } else if (kw == "seed") {
      expect_args(toks, 2, 2, line);
      sc.config.delays.seed = to_int<std::uint64_t>(toks[1], line, "seed");
    } else if (kw == "program") {
      expect_args(toks, 2, 2, line);
      const auto p = proc(toks[1], line);
      if (programs.contains(p.index)) throw ParseError(line, "second program for " + toks[1]);
      open = ProcessProgram{p, {}};
    } else if (kw == "watch") {
      expect_args(toks, 4, SIZE_MAX, line);
      WatchSpec w{proc(toks[1], line), to_int<std::size_t>(toks[2], line, "step index"), toks[3], std::nullopt};
      if (toks.size() > 4) {
        if (toks[4] != "allow") throw ParseError(line, "expected 'allow'");
        w.allowed.emplace();
        for (std::size_t k = 5; k < toks.size(); ++k) w.allowed->insert(to_value(toks[k], line));
      }
      sc.watches.push_back(std::move(w));
    } else {
      throw ParseError(line, "unknown keyword '" + kw + "'");
    }
  }
  if (open) throw ParseError(reader.line(), "program not closed with 'end'");
  const std::size_t count = need_n(reader.line());

  for (const auto& r : repeats) {
    if (!written.contains({r.reg, r.value})) {
      throw ParseError(r.line, "no program ever writes " + std::to_string(r.value) + " to " + r.reg);
    }
  }
  for (const auto& w : sc.watches) {
    auto it = programs.find(w.pid.index);
    if (it == programs.end() || w.step >= it->second.steps.size()) {
      throw ParseError(reader.line(), "watch '" + w.name + "' names a missing program step");
    }
    const auto& ins = it->second.steps[w.step];
    if (!std::holds_alternative<ReadStep>(ins) && !std::holds_alternative<RepeatReadUntil>(ins)) {
      throw ParseError(reader.line(), "watch '" + w.name + "' does not name a read");
    }
  }
  try {
    sc.config.delays.validate();
  } catch (const ContractViolation& e) {
    throw ParseError(reader.line(), e.what());
  }

  sc.config.n = count;
  sc.config.graph = graph ? std::move(*graph) : ProximityGraph(count);
  sc.config.names = std::move(names);
  for (auto& [pid, prog] : programs) sc.config.programs.push_back(std::move(prog));
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(0, "cannot open " + path.string());
  return parse_scenario(in);
}

////////////////////////////////////////////////////////////////////////////////

std::string emit_history(const History& h) {
  std::ostringstream os;
  os << kHistoryHeader << '\n';
  os << "n " << h.n << '\n';
  if (!h.names.empty()) {
    os << "names";
    for (const auto& nm : h.names) os << ' ' << nm;
    os << '\n';
  }
  if (h.graph) {
    os << "graph";
    for (const auto& [a, b] : h.graph->edges()) os << ' ' << a.index << '-' << b.index;
    os << '\n';
  }
  if (h.seed) os << "seed " << *h.seed << '\n';
  for (const auto& op : h.ops) {
    os << "op " << op.id << " p" << op.pid.index << ' ' << (op.is_write() ? "write" : "read") << ' ' << op.reg << ' '
       << value_to_text(op.value) << " inv " << op.invoked << " resp " << op.responded;
    if (op.msg) os << " msg " << stamp_text(*op.msg);
    if (op.step) os << " step " << *op.step;
    os << '\n';
  }
  for (const auto& e : h.events) {
    const char* kind = e.kind == EventKind::Broadcast ? "bcast" : e.kind == EventKind::Receive ? "recv" : "dlv";
    os << "ev " << e.tick << ' ' << e.time << ' ' << kind << " p" << e.at.index << ' ' << stamp_text(e.msg) << '\n';
  }
  return os.str();
}

History parse_history(std::istream& in) {
  LineReader reader(in, kHistoryHeader);
  History h;
  bool have_n = false;
  std::vector<std::string> toks;
  std::string raw;
  while (reader.next(toks, raw)) {
    const std::size_t line = reader.line();
    const std::string& kw = toks.front();
    if (kw != "n" && !have_n) throw ParseError(line, "'n' must come first");
    if (kw == "n") {
      expect_args(toks, 2, 2, line);
      if (have_n) throw ParseError(line, "'n' given twice");
      h.n = to_int<std::size_t>(toks[1], line, "process count");
      if (h.n == 0) throw ParseError(line, "n must be at least 1");
      have_n = true;
    } else if (kw == "names") {
      if (toks.size() - 1 != h.n) throw ParseError(line, "need exactly n names");
      h.names.assign(toks.begin() + 1, toks.end());
    } else if (kw == "graph") {
      ProximityGraph g(h.n);
      for (std::size_t k = 1; k < toks.size(); ++k) {
        const auto dash = toks[k].find('-');
        if (dash == std::string::npos) throw ParseError(line, "expected edge a-b, got '" + toks[k] + "'");
        const auto a = to_int<std::uint32_t>(toks[k].substr(0, dash), line, "process index");
        const auto b = to_int<std::uint32_t>(toks[k].substr(dash + 1), line, "process index");
        if (a >= h.n || b >= h.n || a == b) throw ParseError(line, "bad edge '" + toks[k] + "'");
        g.add_edge(ProcessId{a}, ProcessId{b});
      }
      h.graph = std::move(g);
    } else if (kw == "seed") {
      expect_args(toks, 2, 2, line);
      h.seed = to_int<std::uint64_t>(toks[1], line, "seed");
    } else if (kw == "op") {
      if (toks.size() < 10 || toks[6] != "inv" || toks[8] != "resp") {
        throw ParseError(line, "expected: op <id> p<i> read|write <reg> <value> inv <t> resp <t> ...");
      }
      Operation op;
      op.id = to_int<OpId>(toks[1], line, "operation id");
      if (op.id != h.ops.size()) throw ParseError(line, "operation ids must be dense and in order");
      op.pid = parse_pid(toks[2], h.n, line);
      if (toks[3] == "write") {
        op.kind = OpKind::Write;
      } else if (toks[3] != "read") {
        throw ParseError(line, "operation kind must be read or write");
      }
      op.reg = toks[4];
      op.value = to_value(toks[5], line);
      if (op.is_write() && !op.value) throw ParseError(line, "a write needs a value");
      op.invoked = to_int<std::uint64_t>(toks[7], line, "tick");
      op.responded = to_int<std::uint64_t>(toks[9], line, "tick");
      for (std::size_t k = 10; k < toks.size(); k += 2) {
        if (k + 1 >= toks.size()) throw ParseError(line, "dangling field '" + toks[k] + "'");
        if (toks[k] == "msg" && !op.msg) {
          op.msg = parse_stamp(toks[k + 1], h.n, line);
        } else if (toks[k] == "step" && !op.step) {
          op.step = to_int<std::size_t>(toks[k + 1], line, "step index");
        } else {
          throw ParseError(line, "unexpected field '" + toks[k] + "'");
        }
      }
      h.ops.push_back(std::move(op));
    } else if (kw == "ev") {
      expect_args(toks, 6, 6, line);
      BroadcastEvent e;
      e.tick = to_int<std::uint64_t>(toks[1], line, "tick");
      e.time = to_int<std::uint64_t>(toks[2], line, "time");
      if (toks[3] == "bcast") {
        e.kind = EventKind::Broadcast;
      } else if (toks[3] == "recv") {
        e.kind = EventKind::Receive;
      } else if (toks[3] == "dlv") {
        e.kind = EventKind::Deliver;
      } else {
        throw ParseError(line, "event kind must be bcast, recv or dlv");
      }
      e.at = parse_pid(toks[4], h.n, line);
      e.msg = parse_stamp(toks[5], h.n, line);
      h.events.push_back(e);
    } else {
      throw ParseError(line, "unknown keyword '" + kw + "'");
    }
  }
  if (!have_n) throw ParseError(reader.line(), "history has no 'n' line");
  return h;
}

History load_history(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(0, "cannot open " + path.string());
  return parse_history(in);
}

}  // namespace fisheye
