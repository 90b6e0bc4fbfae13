#include "fisheye/brute_force.hpp"

#include <map>

#include "fisheye/errors.hpp"

namespace fisheye {

namespace {

using Matrix = std::vector<std::vector<bool>>;

void close(Matrix& r) {
  const std::size_t m = r.size();
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t i = 0; i < m; ++i) {
      if (!r[i][k]) continue;
      for (std::size_t j = 0; j < m; ++j) {
        if (r[k][j]) r[i][j] = true;
      }
    }
  }
}

bool cyclic(const Matrix& r) {
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r[i][i]) return true;
  }
  return false;
}

// -1 = pair not inside this process's sequence, 0 = second first, 1 = first first
using Signature = std::vector<signed char>;

struct Oracle {
  const History& h;
  const ProximityGraph& g;
  Matrix base;
  std::vector<std::pair<OpId, OpId>> pairs;
  std::vector<std::map<Signature, std::vector<std::vector<OpId>>>> groups;  // per process

  void enumerate(std::uint32_t p) {
    std::vector<OpId> nodes;
    for (const auto& op : h.ops) {
      if (op.is_write() || op.pid.index == p) nodes.push_back(op.id);
    }
    std::vector<OpId> seq;
    std::vector<bool> used(h.ops.size(), false);
    std::map<std::string, MaybeValue> regs;
    extend(p, nodes, seq, used, regs);
  }

  void extend(std::uint32_t p, const std::vector<OpId>& nodes, std::vector<OpId>& seq, std::vector<bool>& used,
              std::map<std::string, MaybeValue>& regs) {
    if (seq.size() == nodes.size()) {
      std::vector<std::size_t> at(h.ops.size(), SIZE_MAX);
      for (std::size_t k = 0; k < seq.size(); ++k) at[seq[k]] = k;
      Signature sig(pairs.size(), -1);
      for (std::size_t k = 0; k < pairs.size(); ++k) {
        const auto [a, b] = pairs[k];
        if (at[a] != SIZE_MAX && at[b] != SIZE_MAX) sig[k] = at[a] < at[b] ? 1 : 0;
      }
      groups[p][sig].push_back(seq);
      return;
    }
    for (OpId x : nodes) {
      if (used[x]) continue;
      bool ready = true;
      for (OpId y : nodes) {
        if (!used[y] && y != x && base[y][x]) ready = false;
      }
      if (!ready) continue;
      const auto& op = h.ops[x];
      if (op.is_read() && regs[op.reg] != op.value) continue;
      const MaybeValue saved = regs[op.reg];
      if (op.is_write()) regs[op.reg] = op.value;
      used[x] = true;
      seq.push_back(x);
      extend(p, nodes, seq, used, regs);
      seq.pop_back();
      used[x] = false;
      regs[op.reg] = saved;
    }
  }

  bool respects(const std::vector<OpId>& seq, const Matrix& order) const {
    for (std::size_t x = 0; x < seq.size(); ++x) {
      for (std::size_t y = x + 1; y < seq.size(); ++y) {
        if (order[seq[y]][seq[x]]) return false;
      }
    }
    return true;
  }

  std::optional<Verdict> choose(std::uint32_t p, Signature& assigned) {
    if (p == h.n) return finish(assigned);
    for (const auto& [sig, seqs] : groups[p]) {
      Signature next = assigned;
      bool clash = false;
      for (std::size_t k = 0; k < sig.size() && !clash; ++k) {
        if (sig[k] < 0) continue;
        if (next[k] >= 0 && next[k] != sig[k]) clash = true;
        next[k] = sig[k];
      }
      if (clash) continue;
      if (auto v = choose(p + 1, next)) return v;
    }
    return std::nullopt;
  }

  std::optional<Verdict> finish(const Signature& assigned) {
    Matrix order = base;
    std::vector<LabeledEdge> edges;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      if (assigned[k] < 0) throw InvariantViolation("oracle left a neighbor pair unassigned");
      auto [a, b] = pairs[k];
      if (assigned[k] == 0) std::swap(a, b);
      order[a][b] = true;
      edges.push_back({a, b, EdgeKind::Search});
    }
    close(order);
    if (cyclic(order)) return std::nullopt;
    Verdict v = Verdict::accept("oracle");
    v.extension = std::move(edges);
    for (std::uint32_t p = 0; p < h.n; ++p) {
      const std::vector<OpId>* pick = nullptr;
      Signature mine(pairs.size(), -1);
      for (const auto& [sig, seqs] : groups[p]) {
        bool agrees = true;
        for (std::size_t k = 0; k < sig.size(); ++k) {
          if (sig[k] >= 0 && sig[k] != assigned[k]) agrees = false;
        }
        if (!agrees) continue;
        for (const auto& s : seqs) {
          if (respects(s, order)) {
            pick = &s;
            break;
          }
        }
        if (pick) break;
      }
      if (!pick) return std::nullopt;
      v.witness.push_back(*pick);
    }
    return v;
  }
};

}  // namespace

Verdict brute_force_check(const History& h, const ProximityGraph& g) {
  if (h.ops.size() > kOracleMaxOps) {
    throw OracleSizeExceeded("oracle handles at most " + std::to_string(kOracleMaxOps) + " operations");
  }
  validate_history(h);
  if (g.size() != h.n) throw ContractViolation("graph size does not match the history");
  const std::size_t m = h.ops.size();

  Oracle o{h, g, Matrix(m, std::vector<bool>(m, false)), {}, std::vector<std::map<Signature, std::vector<std::vector<OpId>>>>(h.n)};
  for (const auto& a : h.ops) {
    for (const auto& b : h.ops) {
      if (a.pid == b.pid && a.invoked < b.invoked) o.base[a.id][b.id] = true;
    }
  }
  for (const auto& r : h.ops) {
    if (!r.is_read() || !r.value) continue;
    std::optional<OpId> src;
    for (const auto& w : h.ops) {
      if (!w.is_write() || w.reg != r.reg || w.value != r.value) continue;
      if (src) throw MalformedHistory("value written twice; the oracle needs distinct values");
      src = w.id;
    }
    if (!src) throw MalformedHistory("read " + op_label(h, r.id) + " returns a value nobody wrote");
    o.base[*src][r.id] = true;
  }
  close(o.base);
  if (cyclic(o.base)) return Verdict::reject("process order and read-from form a cycle", "oracle");

  for (const auto& a : h.ops) {
    for (const auto& b : h.ops) {
      if (a.id < b.id && a.pid != b.pid && g.connected(a.pid, b.pid) && (a.is_write() || b.is_write())) {
        o.pairs.emplace_back(a.id, b.id);
      }
    }
  }
  for (std::uint32_t p = 0; p < h.n; ++p) {
    o.enumerate(p);
    if (o.groups[p].empty()) {
      return Verdict::reject("no legal sequence for p" + std::to_string(p), "oracle");
    }
  }
  Signature assigned(o.pairs.size(), -1);
  if (auto v = o.choose(0, assigned)) return *v;
  return Verdict::reject("no orientation of neighbor pairs admits legal sequences", "oracle");
}

}  // namespace fisheye
