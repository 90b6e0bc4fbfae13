#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/dynamic_bitset.hpp>

#include "fisheye/core.hpp"
#include "fisheye/history.hpp"

namespace fisheye {

enum class EdgeKind { Process, ReadFrom, WW, RW, RRW, Search };

std::string_view to_string(EdgeKind k);

struct LabeledEdge {
  OpId from{0};
  OpId to{0};
  EdgeKind kind{EdgeKind::Process};

  bool operator==(const LabeledEdge&) const = default;
};

/// Strict partial order over 0..size-1 kept transitively closed on every
/// insertion. Refuses edges that would close a cycle.
class OrderRelation {
 public:
  OrderRelation() = default;
  explicit OrderRelation(std::size_t size);

  std::size_t size() const noexcept { return succ_.size(); }
  bool before(std::size_t a, std::size_t b) const { return succ_[a].test(b); }
  bool ordered(std::size_t a, std::size_t b) const { return before(a, b) || before(b, a); }

  /// Adds a -> b and closes. Returns false (and changes nothing) if b
  /// already reaches a. Already implied edges are accepted silently.
  bool add(std::size_t a, std::size_t b, EdgeKind kind);

  const boost::dynamic_bitset<>& successors(std::size_t a) const { return succ_[a]; }
  std::size_t predecessor_count(std::size_t b) const;

  /// The relation induced on `nodes`; node k of the result is nodes[k].
  OrderRelation restricted(const std::vector<std::size_t>& nodes) const;

  /// Generating edges in insertion order (implied ones are not listed).
  const std::vector<LabeledEdge>& edges() const noexcept { return edges_; }

 private:
  std::vector<boost::dynamic_bitset<>> succ_;
  std::vector<LabeledEdge> edges_;
};

////////////////////////////////////////////////////////////////////////////////

struct Verdict {
  bool accepted{false};
  std::string reason;  // why it was rejected; empty on acceptance
  // one legal sequence per process (own ops plus all writes), on acceptance
  std::vector<std::vector<OpId>> witness;
  // edges added on top of process order and read-from
  std::vector<LabeledEdge> extension;
  std::string method;  // "guided", "search", "broadcast"

  static Verdict accept(std::string method) { return Verdict{true, {}, {}, {}, std::move(method)}; }
  static Verdict reject(std::string reason, std::string method = {}) {
    return Verdict{false, std::move(reason), {}, {}, std::move(method)};
  }
};

////////////////////////////////////////////////////////////////////////////////
// Broadcast level

/// Messages of a history, by order of their broadcast events.
struct MessageOrder {
  std::vector<TotalStamp> messages;
  OrderRelation order;  // over indices into `messages`

  std::optional<std::size_t> index_of(TotalStamp s) const;
};

/// Same-sender order plus delivered-before-broadcast, closed. Throws
/// MalformedHistory on a cycle or a duplicate broadcast.
MessageOrder build_message_causal_order(const History& h);

/// Validity, integrity, G-delivery order, causal order, termination.
Verdict check_broadcast_properties(const History& h, const ProximityGraph& g);

////////////////////////////////////////////////////////////////////////////////
// Register level

/// source[r] for every read r: the write it read from, nullopt for a read of
/// the initial value. Entries of writes are unused.
struct ReadFrom {
  std::vector<std::optional<OpId>> source;
  bool from_events{false};
};

/// Derives read-from from delivery events when the history records them,
/// otherwise by matching values (which must then be distinct per register).
/// Throws MalformedHistory for a read of a value nobody wrote.
ReadFrom derive_read_from(const History& h);

struct BaseOrder {
  ReadFrom rf;
  OrderRelation order;            // process order plus read-from, closed
  std::optional<std::string> cycle;  // set when the edges do not form an order
};

BaseOrder build_read_from(const History& h);

/// Rejects a read whose source is overwritten on a causal path to it, and a
/// read of the initial value that follows some write to its register.
Verdict check_causal_legality(const OrderRelation& order, const History& h, const ReadFrom& rf);

/// Each stage returns false (leaving a partial result) when an edge it must
/// add would close a cycle; `why` then says which.
bool extend_ww(OrderRelation& order, const History& h, const ProximityGraph& g, std::string* why = nullptr);
void extend_rw_links(OrderRelation& order, const History& h, const ReadFrom& rf, const ProximityGraph& g);
void extend_r_rw_links(OrderRelation& order, const History& h, const ProximityGraph& g);

/// Legal sequence of p's ops plus all writes respecting `order`, or nullopt
/// if none exists for this order.
std::optional<std::vector<OpId>> process_witness(const OrderRelation& order, const History& h, const ReadFrom& rf,
                                                 ProcessId p);

struct CheckOptions {
  bool use_guided = true;          // try the delivery-order construction first
  std::uint64_t search_budget = 2'000'000;  // nodes of the fallback search
};

Verdict check_fisheye(const History& h, const ProximityGraph& g, const CheckOptions& opts = {});
Verdict check_sc(const History& h, const CheckOptions& opts = {});
Verdict check_cc(const History& h, const CheckOptions& opts = {});

/// Re-validates an accepted verdict from scratch. Returns a description of
/// the first problem, or nullopt if the witness holds up.
std::optional<std::string> validate_witness(const History& h, const ProximityGraph& g, const Verdict& v);

}  // namespace fisheye
