#pragma once

#include <optional>
#include <vector>

#include "fisheye/core.hpp"

namespace fisheye {

/// A received (or self-sent) message that has not been toco-delivered yet.
struct PendingEntry {
  Payload payload;
  VectorClock s_caus;
  std::uint64_t s_tot{0};
  ProcessId sender{};

  TotalStamp stamp() const noexcept { return {s_tot, sender}; }
};

struct Delivery {
  Payload payload;
  TotalStamp stamp;
  VectorClock s_caus;
};

/// State machine of one process running the hybrid total/causal order
/// broadcast over a proximity graph.
///
/// Messages from neighbors in the graph are delivered in the same order
/// everywhere; all other messages only respect causal order. The engine is
/// event driven: after any call that may enable a delivery, drain it with
/// deliver_next() (or try_deliver()) until it returns nothing.
class BroadcastState {
 public:
  BroadcastState(ProcessId self, ProximityGraph graph);

  /// Stamps `payload`, queues it locally, and returns one TOCOBC per peer.
  std::vector<Outgoing> broadcast(Payload payload);

  /// Throws IntegrityViolation if the stamp is already pending or delivered,
  /// or if the message claims to come from this process.
  std::vector<Outgoing> on_receive_tocobc(Tocobc msg);
  void on_receive_catch_up(const CatchUp& msg);
  std::vector<Outgoing> on_receive(ProtocolMessage msg);

  /// Delivers the single stamp-minimal stable message, if any.
  std::optional<Delivery> deliver_next();

  /// Repeats deliver_next() to a fixpoint.
  std::vector<Delivery> try_deliver();

  ProcessId self() const noexcept { return self_; }
  const ProximityGraph& graph() const noexcept { return graph_; }
  const VectorClock& causal() const noexcept { return causal_; }
  const TotalView& total() const noexcept { return total_; }
  const std::vector<PendingEntry>& pending() const noexcept { return pending_; }
  const std::vector<Delivery>& delivered_log() const noexcept { return delivered_; }

 private:
  std::vector<Outgoing> to_all_peers(const ProtocolMessage& msg) const;
  void insert_pending(PendingEntry entry);
  bool deliverable(const PendingEntry& e) const;

  ProcessId self_;
  ProximityGraph graph_;
  VectorClock causal_;
  TotalView total_;
  std::vector<PendingEntry> pending_;
  std::vector<Delivery> delivered_;
};

}  // namespace fisheye
