// Shared generators for the unit and acceptance suites.
#pragma once

#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "fisheye/checker.hpp"
#include "fisheye/history.hpp"
#include "fisheye/net_sim.hpp"

namespace fisheye::testing {

inline std::filesystem::path source_path(const std::string& rel) {
  return std::filesystem::path(FISHEYE_SOURCE_DIR) / rel;
}

/// Empty, complete, or a coin-flip edge set, each about a third of the time.
inline ProximityGraph random_graph(std::size_t n, std::mt19937_64& rng) {
  switch (std::uniform_int_distribution<int>(0, 2)(rng)) {
    case 0: return ProximityGraph::empty(n);
    case 1: return ProximityGraph::complete(n);
    default: break;
  }
  ProximityGraph g(n);
  std::bernoulli_distribution coin(0.5);
  for (std::uint32_t a = 0; a < n; ++a) {
    for (std::uint32_t b = a + 1; b < n; ++b) {
      if (coin(rng)) g.add_edge(ProcessId{a}, ProcessId{b});
    }
  }
  return g;
}

/// All 2^(n(n-1)/2) graphs on n processes.
inline std::vector<ProximityGraph> all_graphs(std::size_t n) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> slots;
  for (std::uint32_t a = 0; a < n; ++a) {
    for (std::uint32_t b = a + 1; b < n; ++b) slots.emplace_back(a, b);
  }
  std::vector<ProximityGraph> out;
  for (std::uint32_t mask = 0; mask < (1u << slots.size()); ++mask) {
    ProximityGraph g(n);
    for (std::size_t k = 0; k < slots.size(); ++k) {
      if (mask & (1u << k)) g.add_edge(ProcessId{slots[k].first}, ProcessId{slots[k].second});
    }
    out.push_back(std::move(g));
  }
  return out;
}

/// n in 2..6, random graph, up to 40 raw broadcasts spread over the
/// processes with random pauses in between.
inline SimConfig random_broadcast_config(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  SimConfig cfg;
  cfg.n = std::uniform_int_distribution<std::size_t>(2, 6)(rng);
  cfg.graph = random_graph(cfg.n, rng);
  cfg.delays = DelayModel{seed, 1, std::uniform_int_distribution<std::uint64_t>(1, 12)(rng), {}};
  const int total = std::uniform_int_distribution<int>(1, 40)(rng);
  std::vector<ProcessProgram> progs(cfg.n);
  for (std::uint32_t i = 0; i < cfg.n; ++i) progs[i].pid = ProcessId{i};
  std::uniform_int_distribution<std::size_t> who(0, cfg.n - 1);
  std::uniform_int_distribution<std::uint64_t> pause(0, 8);
  for (int k = 0; k < total; ++k) {
    auto& p = progs[who(rng)];
    if (const auto t = pause(rng); t > 0) p.steps.push_back(Nop{t});
    p.steps.push_back(BroadcastStep{"m" + std::to_string(k)});
  }
  cfg.programs = std::move(progs);
  return cfg;
}

/// Register workload in the same regime: n in 2..6, random graph, up to 40
/// writes of distinct values plus reads and pauses, over registers X Y Z.
inline SimConfig random_store_config(std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x5eedULL);
  SimConfig cfg;
  cfg.n = std::uniform_int_distribution<std::size_t>(2, 6)(rng);
  cfg.graph = random_graph(cfg.n, rng);
  cfg.delays = DelayModel{seed, 1, std::uniform_int_distribution<std::uint64_t>(1, 12)(rng), {}};
  const int writes = std::uniform_int_distribution<int>(1, 40)(rng);
  const int reads = std::uniform_int_distribution<int>(0, 40)(rng);
  const std::vector<std::string> regs{"X", "Y", "Z"};
  std::vector<ProcessProgram> progs(cfg.n);
  for (std::uint32_t i = 0; i < cfg.n; ++i) progs[i].pid = ProcessId{i};
  std::uniform_int_distribution<std::size_t> who(0, cfg.n - 1);
  std::uniform_int_distribution<std::size_t> reg(0, regs.size() - 1);
  std::uniform_int_distribution<std::uint64_t> pause(0, 6);
  std::uniform_int_distribution<int> kind(0, writes + reads - 1);
  int w = 0;
  int r = 0;
  while (w < writes || r < reads) {
    auto& p = progs[who(rng)];
    if (const auto t = pause(rng); t > 0) p.steps.push_back(Nop{t});
    const bool write = r >= reads || (w < writes && kind(rng) < writes);
    if (write) {
      p.steps.push_back(WriteStep{regs[reg(rng)], 100 + w++});
    } else {
      p.steps.push_back(ReadStep{regs[reg(rng)], {}});
      ++r;
    }
  }
  cfg.programs = std::move(progs);
  return cfg;
}

/// Random history with 1..max_ops operations on n processes over one or two
/// registers. Written values are distinct; each read returns the initial
/// value or some value written to its register.
inline History random_history(std::mt19937_64& rng, std::size_t n, std::size_t max_ops) {
  const std::size_t count = std::uniform_int_distribution<std::size_t>(1, max_ops)(rng);
  const int nregs = std::uniform_int_distribution<int>(1, 2)(rng);
  std::uniform_int_distribution<std::uint32_t> who(0, static_cast<std::uint32_t>(n - 1));
  std::uniform_int_distribution<int> reg(0, nregs - 1);
  std::bernoulli_distribution is_write(0.45);

  struct Draft {
    std::uint32_t pid;
    bool write;
    std::string reg;
  };
  std::vector<Draft> drafts;
  for (std::size_t k = 0; k < count; ++k) drafts.push_back({who(rng), is_write(rng), reg(rng) == 0 ? "X" : "Y"});

  HistoryBuilder b(n);
  Value next = 1;
  std::vector<std::pair<std::string, Value>> written;
  for (const auto& d : drafts) {
    if (d.write) written.emplace_back(d.reg, next++);
  }
  next = 1;
  for (const auto& d : drafts) {
    if (d.write) {
      b.write(d.pid, d.reg, next++);
      continue;
    }
    std::vector<MaybeValue> choices{std::nullopt};
    for (const auto& [r, v] : written) {
      if (r == d.reg) choices.push_back(v);
    }
    b.read(d.pid, d.reg, choices[std::uniform_int_distribution<std::size_t>(0, choices.size() - 1)(rng)]);
  }
  return b.build();
}

/// Every history over n processes with 1..max_ops operations on `regs`:
/// every split of the ops among processes, every read/write and register
/// choice, every possible read result. Written values are numbered by
/// position, so histories equal up to value renaming appear once.
inline void for_each_small_history(std::size_t n, std::size_t max_ops, const std::vector<std::string>& regs,
                                   const std::function<void(const History&)>& visit) {
  struct Slot {
    std::uint32_t pid;
    bool write;
    std::size_t reg;
  };
  std::vector<Slot> slots;

  std::function<void(std::size_t, HistoryBuilder)> fill = [&](std::size_t k, HistoryBuilder b) {
    if (k == slots.size()) {
      visit(b.build());
      return;
    }
    const Slot& s = slots[k];
    if (s.write) {
      b.write(s.pid, regs[s.reg], static_cast<Value>(k + 1));
      fill(k + 1, b);
      return;
    }
    std::vector<MaybeValue> choices{std::nullopt};
    for (std::size_t j = 0; j < slots.size(); ++j) {
      if (slots[j].write && slots[j].reg == s.reg) choices.push_back(static_cast<Value>(j + 1));
    }
    for (const auto& c : choices) {
      HistoryBuilder next = b;
      next.read(s.pid, regs[s.reg], c);
      fill(k + 1, next);
    }
  };

  std::vector<std::size_t> lengths(n, 0);
  std::function<void(std::uint32_t, std::size_t)> split = [&](std::uint32_t pid, std::size_t left) {
    if (pid == n) {
      std::vector<std::uint32_t> owners;
      for (std::uint32_t p = 0; p < n; ++p) owners.insert(owners.end(), lengths[p], p);
      if (owners.empty()) return;
      const std::size_t kinds = 2 * regs.size();
      std::size_t combos = 1;
      for (std::size_t k = 0; k < owners.size(); ++k) combos *= kinds;
      for (std::size_t code = 0; code < combos; ++code) {
        slots.clear();
        std::size_t c = code;
        for (std::uint32_t owner : owners) {
          slots.push_back({owner, c % 2 == 1, (c / 2) % regs.size()});
          c /= kinds;
        }
        fill(0, HistoryBuilder(n));
      }
      return;
    }
    for (std::size_t len = 0; len <= left; ++len) {
      lengths[pid] = len;
      split(pid + 1, left - len);
    }
    lengths[pid] = 0;
  };
  split(0, max_ops);
}

}  // namespace fisheye::testing
