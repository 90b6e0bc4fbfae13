#include "fisheye/toco_broadcast.hpp"

#include <algorithm>
#include <sstream>

#include "fisheye/errors.hpp"

namespace fisheye {

BroadcastState::BroadcastState(ProcessId self, ProximityGraph graph)
    : self_(self), graph_(std::move(graph)), causal_(graph_.size()), total_(graph_.size()) {
  if (self_.index >= graph_.size()) {
    throw ContractViolation("broadcast state: self id out of range");
  }
}

std::vector<Outgoing> BroadcastState::to_all_peers(const ProtocolMessage& msg) const {
  std::vector<Outgoing> out;
  out.reserve(graph_.size() - 1);
  for (std::uint32_t j = 0; j < graph_.size(); ++j) {
    if (j != self_.index) out.push_back({ProcessId{j}, msg});
  }
  return out;
}

void BroadcastState::insert_pending(PendingEntry entry) {
  const TotalStamp stamp = entry.stamp();
  for (const auto& e : pending_) {
    if (e.stamp() == stamp) {
      std::ostringstream os;
      os << "duplicate pending stamp " << stamp << " at " << self_;
      throw IntegrityViolation(os.str());
    }
  }
  for (const auto& d : delivered_) {
    if (d.stamp == stamp) {
      std::ostringstream os;
      os << "stamp " << stamp << " received again after delivery at " << self_;
      throw IntegrityViolation(os.str());
    }
  }
  pending_.push_back(std::move(entry));
}

std::vector<Outgoing> BroadcastState::broadcast(Payload payload) {
  // Order matters: bump the Lamport clock, send, queue locally, then bump
  // causal[self] so later broadcasts depend on this one.
  total_.set(self_, total_[self_] + 1);
  Tocobc msg{std::move(payload), causal_, total_[self_], self_};
  auto out = to_all_peers(msg);
  insert_pending({std::move(msg.payload), std::move(msg.s_caus), msg.s_tot, msg.sender});
  causal_.increment(self_);
  return out;
}

std::vector<Outgoing> BroadcastState::on_receive_tocobc(Tocobc msg) {
  if (msg.sender == self_) {
    throw IntegrityViolation("received own TOCOBC over the network");
  }
  if (msg.s_caus.size() != graph_.size()) {
    throw IntegrityViolation("TOCOBC causal vector has wrong length");
  }
  const ProcessId from = msg.sender;
  const std::uint64_t s_tot = msg.s_tot;
  insert_pending({std::move(msg.payload), std::move(msg.s_caus), s_tot, from});
  total_.set(from, s_tot);
  if (total_[self_] <= s_tot) {
    total_.set(self_, s_tot + 1);
    return to_all_peers(CatchUp{total_[self_], self_});
  }
  return {};
}

void BroadcastState::on_receive_catch_up(const CatchUp& msg) {
  if (msg.sender == self_) {
    throw IntegrityViolation("received own CATCH_UP over the network");
  }
  total_.set(msg.sender, msg.last_date);
}

std::vector<Outgoing> BroadcastState::on_receive(ProtocolMessage msg) {
  if (auto* t = std::get_if<Tocobc>(&msg)) return on_receive_tocobc(std::move(*t));
  on_receive_catch_up(std::get<CatchUp>(msg));
  return {};
}

bool BroadcastState::deliverable(const PendingEntry& e) const {
  // C: causally ready.
  if (!vc_leq(e.s_caus, causal_)) return false;
  const TotalStamp mine = e.stamp();
  const auto& around = graph_.neighbors(e.sender);
  // T1: no neighbor of the sender can still issue a smaller stamp.
  for (ProcessId k : around) {
    if (!stamp_less(mine, TotalStamp{total_[k], k})) return false;
  }
  // T2: no pending message from a neighbor of the sender has a smaller stamp.
  for (const auto& f : pending_) {
    if (std::binary_search(around.begin(), around.end(), f.sender) && !stamp_less(mine, f.stamp())) {
      return false;
    }
  }
  return true;
}

std::optional<Delivery> BroadcastState::deliver_next() {
  auto best = pending_.end();
  for (auto it = pending_.begin(); it != pending_.end(); ++it) {
    if (!deliverable(*it)) continue;
    if (best == pending_.end() || stamp_less(it->stamp(), best->stamp())) best = it;
  }
  if (best == pending_.end()) return std::nullopt;

  Delivery d{std::move(best->payload), best->stamp(), std::move(best->s_caus)};
  pending_.erase(best);
  if (d.stamp.pid != self_) causal_.increment(d.stamp.pid);
  delivered_.push_back(d);
  return d;
}

std::vector<Delivery> BroadcastState::try_deliver() {
  std::vector<Delivery> out;
  while (auto d = deliver_next()) out.push_back(std::move(*d));
  return out;
}

}  // namespace fisheye
