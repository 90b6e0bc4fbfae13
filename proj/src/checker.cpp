#include "fisheye/checker.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <variant>

#include "fisheye/errors.hpp"

namespace fisheye {

std::string_view to_string(EdgeKind k) {
  switch (k) {
    case EdgeKind::Process: return "po";
    case EdgeKind::ReadFrom: return "rf";
    case EdgeKind::WW: return "ww";
    case EdgeKind::RW: return "rw";
    case EdgeKind::RRW: return "r-rw";
    case EdgeKind::Search: return "search";
  }
  return "?";
}

OrderRelation::OrderRelation(std::size_t size) : succ_(size, boost::dynamic_bitset<>(size)) {}

bool OrderRelation::add(std::size_t a, std::size_t b, EdgeKind kind) {
  if (a >= size() || b >= size()) throw ContractViolation("order edge out of range");
  if (a == b || before(b, a)) return false;
  if (before(a, b)) return true;
  edges_.push_back({a, b, kind});
  const boost::dynamic_bitset<> gained = succ_[b];
  for (std::size_t x = 0; x < size(); ++x) {
    if (x == a || succ_[x].test(a)) {
      succ_[x] |= gained;
      succ_[x].set(b);
    }
  }
  return true;
}

std::size_t OrderRelation::predecessor_count(std::size_t b) const {
  std::size_t c = 0;
  for (const auto& row : succ_) c += row.test(b) ? 1 : 0;
  return c;
}

OrderRelation OrderRelation::restricted(const std::vector<std::size_t>& nodes) const {
  OrderRelation out(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      if (before(nodes[i], nodes[j])) out.succ_[i].set(j);
    }
  }
  return out;
}

////////////////////////////////////////////////////////////////////////////////

namespace {

using StampKey = std::pair<std::uint64_t, std::uint32_t>;

StampKey key(TotalStamp s) { return {s.time, s.pid.index}; }

bool has_deliveries(const History& h) {
  return std::any_of(h.events.begin(), h.events.end(),
                     [](const BroadcastEvent& e) { return e.kind == EventKind::Deliver; });
}

std::vector<OpId> writes_of(const History& h) {
  std::vector<OpId> w;
  for (const auto& op : h.ops) {
    if (op.is_write()) w.push_back(op.id);
  }
  return w;
}

/// Delivery position of every write message at every process, when known.
struct DeliveryPositions {
  std::vector<std::map<StampKey, std::size_t>> at;  // per process

  explicit DeliveryPositions(const History& h) : at(h.n) {
    for (const auto& e : h.events) {
      if (e.kind == EventKind::Deliver) at[e.at.index].emplace(key(e.msg), at[e.at.index].size());
    }
  }

  /// +1 if a first everywhere both were delivered, -1 if b first, 0 if
  /// unknown. Throws IntegrityViolation if processes disagree.
  int compare(const Operation& a, const Operation& b) const {
    if (!a.msg || !b.msg) return 0;
    int verdict = 0;
    for (const auto& pos : at) {
      auto ia = pos.find(key(*a.msg));
      auto ib = pos.find(key(*b.msg));
      if (ia == pos.end() || ib == pos.end()) continue;
      const int here = ia->second < ib->second ? 1 : -1;
      if (verdict != 0 && here != verdict) throw IntegrityViolation("processes disagree on a delivery order");
      verdict = here;
    }
    return verdict;
  }
};

bool neighbor_ops(const ProximityGraph& g, const Operation& a, const Operation& b) {
  return a.pid != b.pid && g.connected(a.pid, b.pid);
}

std::string value_text(const MaybeValue& v) { return v ? std::to_string(*v) : std::string("_|_"); }

}  // namespace

ReadFrom derive_read_from(const History& h) {
  ReadFrom rf;
  rf.source.resize(h.ops.size());
  const bool all_stamped = std::all_of(h.ops.begin(), h.ops.end(),
                                       [](const Operation& op) { return !op.is_write() || op.msg.has_value(); });
  rf.from_events = has_deliveries(h) && all_stamped;

  if (rf.from_events) {
    std::map<StampKey, OpId> by_stamp;
    for (const auto& op : h.ops) {
      if (op.is_write() && !by_stamp.emplace(key(*op.msg), op.id).second) {
        throw MalformedHistory("two writes carry the same message stamp");
      }
    }
    std::vector<std::vector<const BroadcastEvent*>> deliveries(h.n);
    for (const auto& e : h.events) {
      if (e.kind == EventKind::Deliver) deliveries[e.at.index].push_back(&e);
    }
    for (auto& d : deliveries) {
      std::stable_sort(d.begin(), d.end(), [](auto* a, auto* b) { return a->tick < b->tick; });
    }
    for (const auto& r : h.ops) {
      if (!r.is_read()) continue;
      std::optional<OpId> last;
      for (const auto* e : deliveries[r.pid.index]) {
        if (e->tick >= r.invoked) break;
        auto it = by_stamp.find(key(e->msg));
        if (it != by_stamp.end() && h.ops[it->second].reg == r.reg) last = it->second;
      }
      const MaybeValue expected = last ? h.ops[*last].value : MaybeValue{};
      if (expected != r.value) {
        throw MalformedHistory("read " + op_label(h, r.id) + " disagrees with the last delivered write (" +
                               value_text(expected) + ")");
      }
      rf.source[r.id] = last;
    }
    return rf;
  }

  std::map<std::pair<std::string, Value>, OpId> by_value;
  for (const auto& op : h.ops) {
    if (op.is_write() && !by_value.emplace(std::make_pair(op.reg, *op.value), op.id).second) {
      throw MalformedHistory("value " + std::to_string(*op.value) + " written twice to " + op.reg);
    }
  }
  for (const auto& r : h.ops) {
    if (!r.is_read() || !r.value) continue;
    auto it = by_value.find({r.reg, *r.value});
    if (it == by_value.end()) {
      throw MalformedHistory("read " + op_label(h, r.id) + " returns a value nobody wrote");
    }
    rf.source[r.id] = it->second;
  }
  return rf;
}

BaseOrder build_read_from(const History& h) {
  BaseOrder base{derive_read_from(h), OrderRelation(h.ops.size()), std::nullopt};
  for (const auto& seq : process_order(h)) {
    for (std::size_t k = 1; k < seq.size(); ++k) base.order.add(seq[k - 1], seq[k], EdgeKind::Process);
  }
  for (const auto& r : h.ops) {
    const auto& src = base.rf.source[r.id];
    if (!r.is_read() || !src) continue;
    if (!base.order.add(*src, r.id, EdgeKind::ReadFrom)) {
      base.cycle = "read " + op_label(h, r.id) + " is causally before the write it reads, " + op_label(h, *src);
      return base;
    }
  }
  return base;
}

Verdict check_causal_legality(const OrderRelation& order, const History& h, const ReadFrom& rf) {
  for (const auto& r : h.ops) {
    if (!r.is_read()) continue;
    const auto& src = rf.source[r.id];
    for (const auto& w : h.ops) {
      if (!w.is_write() || w.reg != r.reg || (src && w.id == *src)) continue;
      if (!order.before(w.id, r.id)) continue;
      if (!src) {
        return Verdict::reject("read " + op_label(h, r.id) + " returns the initial value after " +
                               op_label(h, w.id));
      }
      if (order.before(*src, w.id)) {
        return Verdict::reject("read " + op_label(h, r.id) + " returns a value overwritten by " +
                               op_label(h, w.id));
      }
    }
  }
  return Verdict::accept("causal");
}

bool extend_ww(OrderRelation& order, const History& h, const ProximityGraph& g, std::string* why) {
  const DeliveryPositions pos(h);
  const auto ws = writes_of(h);
  for (std::size_t i = 0; i < ws.size(); ++i) {
    for (std::size_t j = i + 1; j < ws.size(); ++j) {
      const auto& a = h.ops[ws[i]];
      const auto& b = h.ops[ws[j]];
      if (!neighbor_ops(g, a, b) || order.ordered(a.id, b.id)) continue;
      int c = 0;
      try {
        c = pos.compare(a, b);
      } catch (const IntegrityViolation& e) {
        if (why) *why = std::string(e.what()) + ": " + op_label(h, a.id) + ", " + op_label(h, b.id);
        return false;
      }
      if (c == 0) {
        if (why) *why = "no delivery order recorded for " + op_label(h, a.id) + ", " + op_label(h, b.id);
        return false;
      }
      const auto [x, y] = c > 0 ? std::pair{a.id, b.id} : std::pair{b.id, a.id};
      if (!order.add(x, y, EdgeKind::WW)) {
        if (why) *why = "delivery order " + op_label(h, x) + " before " + op_label(h, y) + " contradicts causality";
        return false;
      }
    }
  }
  return true;
}

void extend_rw_links(OrderRelation& order, const History& h, const ReadFrom& rf, const ProximityGraph& g) {
  const auto ws = writes_of(h);
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& r : h.ops) {
      if (!r.is_read()) continue;
      const auto& src = rf.source[r.id];
      for (OpId w : ws) {
        if (!neighbor_ops(g, r, h.ops[w]) || order.ordered(r.id, w)) continue;
        // the initial value precedes every write
        if (!src || order.before(*src, w)) changed |= order.add(r.id, w, EdgeKind::RW);
      }
    }
  }
}

void extend_r_rw_links(OrderRelation& order, const History& h, const ProximityGraph& g) {
  const auto ws = writes_of(h);
  for (const auto& r : h.ops) {
    if (!r.is_read()) continue;
    for (OpId w : ws) {
      if (neighbor_ops(g, r, h.ops[w]) && !order.ordered(r.id, w)) order.add(r.id, w, EdgeKind::RRW);
    }
  }
}

////////////////////////////////////////////////////////////////////////////////

namespace {

/// Either a witness sequence or the read that cannot be made legal.
using WitnessResult = std::variant<std::vector<OpId>, OpId>;

WitnessResult build_witness(const OrderRelation& order, const History& h, const ReadFrom& rf, ProcessId p,
                            const std::vector<OpId>& chain) {
  std::vector<OpId> nodes;
  std::vector<std::size_t> local(h.ops.size(), SIZE_MAX);
  for (const auto& op : h.ops) {
    if (op.is_write() || op.pid == p) {
      local[op.id] = nodes.size();
      nodes.push_back(op.id);
    }
  }
  OrderRelation L = order.restricted(nodes);

  // Saturation: every other write to X goes before the source of a read of
  // X or after the read itself, as soon as the order already hints which.
  for (bool changed = true; changed;) {
    changed = false;
    for (OpId rid : chain) {
      const auto& r = h.ops[rid];
      if (!r.is_read()) continue;
      const std::size_t lr = local[rid];
      const auto& src = rf.source[rid];
      for (OpId wid : nodes) {
        const auto& w = h.ops[wid];
        if (!w.is_write() || w.reg != r.reg || (src && wid == *src)) continue;
        const std::size_t lw = local[wid];
        if (!src) {
          if (L.before(lw, lr)) return rid;
          if (!L.before(lr, lw)) {
            if (!L.add(lr, lw, EdgeKind::Search)) return rid;
            changed = true;
          }
          continue;
        }
        const std::size_t ls = local[*src];
        if (L.before(lw, lr) && !L.before(lw, ls)) {
          if (!L.add(lw, ls, EdgeKind::Search)) return rid;
          changed = true;
        }
        if (L.before(ls, lw) && !L.before(lr, lw)) {
          if (!L.add(lr, lw, EdgeKind::Search)) return rid;
          changed = true;
        }
      }
    }
  }

  // Lazy placement: a write enters the sequence only when some op of p
  // needs it, so unconstrained writes never land between a read and its source.
  std::vector<std::size_t> preds(nodes.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) preds[k] = L.predecessor_count(k);
  std::vector<bool> placed(nodes.size(), false);
  std::vector<OpId> seq;
  auto place_sorted = [&](std::vector<std::size_t> batch) {
    std::sort(batch.begin(), batch.end(), [&](std::size_t a, std::size_t b) {
      return preds[a] != preds[b] ? preds[a] < preds[b] : nodes[a] < nodes[b];
    });
    for (std::size_t k : batch) {
      placed[k] = true;
      seq.push_back(nodes[k]);
    }
  };
  for (OpId c : chain) {
    const std::size_t lc = local[c];
    std::vector<std::size_t> down;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      if (!placed[k] && L.before(k, lc)) down.push_back(k);
    }
    down.push_back(lc);
    place_sorted(std::move(down));
  }
  std::vector<std::size_t> rest;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (!placed[k]) rest.push_back(k);
  }
  place_sorted(std::move(rest));

  std::map<std::string, MaybeValue> current;
  for (OpId id : seq) {
    const auto& op = h.ops[id];
    if (op.is_write()) {
      current[op.reg] = op.value;
    } else if (current[op.reg] != op.value) {
      throw InvariantViolation("witness construction produced an illegal read " + op_label(h, id));
    }
  }
  return seq;
}

/// Write-involving operation pairs of distinct neighbors, each with its
/// preferred orientation first.
std::vector<std::pair<OpId, OpId>> neighbor_pairs(const History& h, const ProximityGraph& g) {
  const DeliveryPositions pos(h);
  std::vector<std::pair<OpId, OpId>> out;
  for (const auto& a : h.ops) {
    for (const auto& b : h.ops) {
      if (b.id <= a.id || !neighbor_ops(g, a, b) || (!a.is_write() && !b.is_write())) continue;
      if (a.is_write() && b.is_write()) {
        int c = 0;
        try {
          c = pos.compare(a, b);
        } catch (const IntegrityViolation&) {
        }
        out.push_back(c < 0 ? std::pair{b.id, a.id} : std::pair{a.id, b.id});
      } else {
        out.push_back(a.is_read() ? std::pair{a.id, b.id} : std::pair{b.id, a.id});
      }
    }
  }
  return out;
}

class Search {
 public:
  Search(const History& h, const ReadFrom& rf, const ProximityGraph& g, std::uint64_t budget)
      : h_(h), rf_(rf), chains_(process_order(h)), pairs_(neighbor_pairs(h, g)), budget_(budget) {}

  /// Per-process witnesses for `order`, or the first process lacking one.
  std::variant<std::vector<std::vector<OpId>>, std::pair<ProcessId, OpId>> witnesses(
      const OrderRelation& order) const {
    std::vector<std::vector<OpId>> all;
    for (std::uint32_t i = 0; i < h_.n; ++i) {
      auto res = build_witness(order, h_, rf_, ProcessId{i}, chains_[i]);
      if (auto* bad = std::get_if<OpId>(&res)) return std::pair{ProcessId{i}, *bad};
      all.push_back(std::move(std::get<std::vector<OpId>>(res)));
    }
    return all;
  }

  std::optional<std::pair<OrderRelation, std::vector<std::vector<OpId>>>> run(const OrderRelation& base) {
    return dfs(base, 0);
  }

 private:
  std::optional<std::pair<OrderRelation, std::vector<std::vector<OpId>>>> dfs(const OrderRelation& order,
                                                                              std::size_t k) {
    if (++nodes_ > budget_) {
      throw SearchBudgetExceeded("search gave up after " + std::to_string(budget_) + " nodes");
    }
    while (k < pairs_.size() && order.ordered(pairs_[k].first, pairs_[k].second)) ++k;
    if (k == pairs_.size()) {
      auto w = witnesses(order);
      if (auto* ok = std::get_if<std::vector<std::vector<OpId>>>(&w)) return std::pair{order, std::move(*ok)};
      return std::nullopt;
    }
    const auto [a, b] = pairs_[k];
    for (const auto& [x, y] : {std::pair{a, b}, std::pair{b, a}}) {
      OrderRelation next = order;
      if (!next.add(x, y, EdgeKind::Search)) continue;
      if (!std::holds_alternative<std::vector<std::vector<OpId>>>(witnesses(next))) continue;
      if (auto found = dfs(next, k + 1)) return found;
    }
    return std::nullopt;
  }

  const History& h_;
  const ReadFrom& rf_;
  std::vector<std::vector<OpId>> chains_;
  std::vector<std::pair<OpId, OpId>> pairs_;
  std::uint64_t budget_;
  std::uint64_t nodes_ = 0;
};

std::vector<LabeledEdge> extension_edges(const OrderRelation& order) {
  std::vector<LabeledEdge> out;
  for (const auto& e : order.edges()) {
    if (e.kind != EdgeKind::Process && e.kind != EdgeKind::ReadFrom) out.push_back(e);
  }
  return out;
}

}  // namespace

std::optional<std::vector<OpId>> process_witness(const OrderRelation& order, const History& h, const ReadFrom& rf,
                                                 ProcessId p) {
  const auto chains = process_order(h);
  auto res = build_witness(order, h, rf, p, chains.at(p.index));
  if (auto* seq = std::get_if<std::vector<OpId>>(&res)) return std::move(*seq);
  return std::nullopt;
}

Verdict check_fisheye(const History& h, const ProximityGraph& g, const CheckOptions& opts) {
  validate_history(h);
  if (g.size() != h.n) throw ContractViolation("graph size does not match the history");

  BaseOrder base = build_read_from(h);
  if (base.cycle) return Verdict::reject(*base.cycle);
  if (Verdict v = check_causal_legality(base.order, h, base.rf); !v.accepted) return v;

  Search search(h, base.rf, g, opts.search_budget);

  if (opts.use_guided && base.rf.from_events) {
    OrderRelation order = base.order;
    if (extend_ww(order, h, g)) {
      extend_rw_links(order, h, base.rf, g);
      extend_r_rw_links(order, h, g);
      auto w = search.witnesses(order);
      if (auto* ok = std::get_if<std::vector<std::vector<OpId>>>(&w)) {
        Verdict v = Verdict::accept("guided");
        v.witness = std::move(*ok);
        v.extension = extension_edges(order);
        return v;
      }
    }
  }

  auto w0 = search.witnesses(base.order);
  if (auto* bad = std::get_if<std::pair<ProcessId, OpId>>(&w0)) {
    std::ostringstream os;
    os << "no legal sequence for " << bad->first << ": read " << op_label(h, bad->second)
       << " cannot see its value";
    return Verdict::reject(os.str(), "search");
  }
  auto found = search.run(base.order);
  if (!found) {
    return Verdict::reject("no order of neighbor operations admits legal sequences for every process", "search");
  }
  Verdict v = Verdict::accept("search");
  v.witness = std::move(found->second);
  v.extension = extension_edges(found->first);
  return v;
}

Verdict check_sc(const History& h, const CheckOptions& opts) {
  return check_fisheye(h, ProximityGraph::complete(h.n), opts);
}

Verdict check_cc(const History& h, const CheckOptions& opts) {
  return check_fisheye(h, ProximityGraph::empty(h.n), opts);
}

std::optional<std::string> validate_witness(const History& h, const ProximityGraph& g, const Verdict& v) {
  if (!v.accepted) return "verdict is a rejection";
  if (v.witness.size() != h.n) return "witness does not cover every process";
  const ReadFrom rf = derive_read_from(h);

  OrderRelation order(h.ops.size());
  for (const auto& seq : process_order(h)) {
    for (std::size_t k = 1; k < seq.size(); ++k) {
      if (!order.add(seq[k - 1], seq[k], EdgeKind::Process)) return "process order is cyclic";
    }
  }
  for (const auto& op : h.ops) {
    if (op.is_read() && rf.source[op.id] && !order.add(*rf.source[op.id], op.id, EdgeKind::ReadFrom)) {
      return "read-from closes a cycle at " + op_label(h, op.id);
    }
  }
  for (const auto& e : v.extension) {
    if (e.from >= h.ops.size() || e.to >= h.ops.size()) return "extension edge out of range";
    if (!order.add(e.from, e.to, e.kind)) {
      return "extension edge " + op_label(h, e.from) + " -> " + op_label(h, e.to) + " closes a cycle";
    }
  }
  for (const auto& a : h.ops) {
    for (const auto& b : h.ops) {
      if (a.id < b.id && neighbor_ops(g, a, b) && (a.is_write() || b.is_write()) && !order.ordered(a.id, b.id)) {
        return "neighbor operations " + op_label(h, a.id) + " and " + op_label(h, b.id) + " are unordered";
      }
    }
  }

  for (std::uint32_t i = 0; i < h.n; ++i) {
    const auto& seq = v.witness[i];
    std::vector<int> seen(h.ops.size(), 0);
    for (OpId id : seq) {
      if (id >= h.ops.size()) return "witness names an unknown operation";
      ++seen[id];
    }
    for (const auto& op : h.ops) {
      const int want = (op.is_write() || op.pid.index == i) ? 1 : 0;
      if (seen[op.id] != want) {
        return "witness of p" + std::to_string(i) + " mishandles " + op_label(h, op.id);
      }
    }
    for (std::size_t x = 0; x < seq.size(); ++x) {
      for (std::size_t y = x + 1; y < seq.size(); ++y) {
        if (order.before(seq[y], seq[x])) {
          return "witness of p" + std::to_string(i) + " puts " + op_label(h, seq[x]) + " before " +
                 op_label(h, seq[y]) + " against the order";
        }
      }
    }
    std::map<std::string, MaybeValue> current;
    for (OpId id : seq) {
      const auto& op = h.ops[id];
      if (op.is_write()) {
        current[op.reg] = op.value;
      } else if (current[op.reg] != op.value) {
        return "witness of p" + std::to_string(i) + " makes " + op_label(h, id) + " illegal";
      }
    }
  }
  return std::nullopt;
}

}  // namespace fisheye
