#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "fisheye/checker.hpp"
#include "fisheye/errors.hpp"

namespace fisheye {

namespace {

using StampKey = std::pair<std::uint64_t, std::uint32_t>;

StampKey key(TotalStamp s) { return {s.time, s.pid.index}; }

std::vector<const BroadcastEvent*> by_tick(const History& h) {
  std::vector<const BroadcastEvent*> evs;
  for (const auto& e : h.events) evs.push_back(&e);
  std::stable_sort(evs.begin(), evs.end(), [](auto* a, auto* b) { return a->tick < b->tick; });
  return evs;
}

std::string describe(TotalStamp m) {
  std::ostringstream os;
  os << "message " << m;
  return os.str();
}

}  // namespace

std::optional<std::size_t> MessageOrder::index_of(TotalStamp s) const {
  auto it = std::find(messages.begin(), messages.end(), s);
  if (it == messages.end()) return std::nullopt;
  return static_cast<std::size_t>(it - messages.begin());
}

MessageOrder build_message_causal_order(const History& h) {
  const auto evs = by_tick(h);
  std::map<StampKey, std::size_t> index;
  MessageOrder mo;
  for (const auto* e : evs) {
    if (e->kind != EventKind::Broadcast) continue;
    if (e->msg.pid != e->at) throw MalformedHistory("broadcast event carries another process's stamp");
    if (!index.emplace(key(e->msg), mo.messages.size()).second) {
      throw MalformedHistory(describe(e->msg) + " is broadcast twice");
    }
    mo.messages.push_back(e->msg);
  }
  mo.order = OrderRelation(mo.messages.size());

  std::vector<std::vector<std::size_t>> seen(h.n);  // delivered or sent so far, per process
  for (const auto* e : evs) {
    auto it = index.find(key(e->msg));
    if (it == index.end() || e->kind == EventKind::Receive) continue;
    auto& before = seen[e->at.index];
    if (e->kind == EventKind::Broadcast) {
      for (std::size_t m : before) {
        if (m != it->second && !mo.order.add(m, it->second, EdgeKind::Process)) {
          throw MalformedHistory("message causal order is cyclic at " + describe(e->msg));
        }
      }
    }
    before.push_back(it->second);
  }
  return mo;
}

Verdict check_broadcast_properties(const History& h, const ProximityGraph& g) {
  if (g.size() != h.n) throw ContractViolation("graph size does not match the history");
  const MessageOrder mo = build_message_causal_order(h);
  const auto evs = by_tick(h);

  std::map<StampKey, std::uint64_t> sent_at;
  for (const auto* e : evs) {
    if (e->kind == EventKind::Broadcast) sent_at.emplace(key(e->msg), e->tick);
  }

  // position of each message in each process's delivery sequence
  std::vector<std::vector<std::size_t>> pos(h.n, std::vector<std::size_t>(mo.messages.size(), SIZE_MAX));
  std::vector<std::size_t> count(h.n, 0);
  for (const auto* e : evs) {
    if (e->kind != EventKind::Deliver) continue;
    auto sent = sent_at.find(key(e->msg));
    if (sent == sent_at.end() || sent->second > e->tick) {
      std::ostringstream os;
      os << "validity: " << e->at << " delivered " << describe(e->msg) << " that was never broadcast before";
      return Verdict::reject(os.str(), "broadcast");
    }
    const std::size_t m = *mo.index_of(e->msg);
    auto& slot = pos[e->at.index][m];
    if (slot != SIZE_MAX) {
      std::ostringstream os;
      os << "integrity: " << e->at << " delivered " << describe(e->msg) << " twice";
      return Verdict::reject(os.str(), "broadcast");
    }
    slot = count[e->at.index]++;
  }

  for (std::uint32_t p = 0; p < h.n; ++p) {
    for (std::size_t m = 0; m < mo.messages.size(); ++m) {
      if (pos[p][m] == SIZE_MAX) {
        std::ostringstream os;
        os << "termination: " << ProcessId{p} << " never delivered " << describe(mo.messages[m]);
        return Verdict::reject(os.str(), "broadcast");
      }
    }
  }

  for (std::uint32_t p = 0; p < h.n; ++p) {
    for (std::size_t a = 0; a < mo.messages.size(); ++a) {
      for (std::size_t b = 0; b < mo.messages.size(); ++b) {
        if (mo.order.before(a, b) && pos[p][b] < pos[p][a]) {
          std::ostringstream os;
          os << "causal order: " << ProcessId{p} << " delivered " << describe(mo.messages[b]) << " before "
             << describe(mo.messages[a]);
          return Verdict::reject(os.str(), "broadcast");
        }
      }
    }
  }

  for (const auto& [x, y] : g.edges()) {
    for (std::size_t a = 0; a < mo.messages.size(); ++a) {
      if (mo.messages[a].pid != x) continue;
      for (std::size_t b = 0; b < mo.messages.size(); ++b) {
        if (mo.messages[b].pid != y) continue;
        for (std::uint32_t p = 1; p < h.n; ++p) {
          if ((pos[0][a] < pos[0][b]) != (pos[p][a] < pos[p][b])) {
            std::ostringstream os;
            os << "G-delivery order: p0 and " << ProcessId{p} << " deliver " << describe(mo.messages[a]) << " and "
               << describe(mo.messages[b]) << " in different orders";
            return Verdict::reject(os.str(), "broadcast");
          }
        }
      }
    }
  }
  return Verdict::accept("broadcast");
}

}  // namespace fisheye
