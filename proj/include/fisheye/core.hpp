#pragma once

#include <compare>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace fisheye {

////////////////////////////////////////////////////////////////////////////////

struct ProcessId {
  std::uint32_t index{0};

  constexpr auto operator<=>(const ProcessId&) const = default;
};

inline std::ostream& operator<<(std::ostream& out, ProcessId p) {
  return out << 'p' << p.index;
}

////////////////////////////////////////////////////////////////////////////////

/// Per-process causal delivery vector. Length is fixed at construction.
class VectorClock {
 public:
  VectorClock() = default;
  explicit VectorClock(std::size_t n) : entries_(n, 0) {}
  explicit VectorClock(std::vector<std::uint64_t> entries) : entries_(std::move(entries)) {}

  std::size_t size() const noexcept { return entries_.size(); }
  std::uint64_t operator[](ProcessId p) const;
  void increment(ProcessId p);

  std::span<const std::uint64_t> entries() const noexcept { return entries_; }

  bool operator==(const VectorClock&) const = default;

 private:
  std::vector<std::uint64_t> entries_;
};

std::ostream& operator<<(std::ostream& out, const VectorClock& vc);

/// Entry-wise <=. Throws ContractViolation on length mismatch.
bool vc_leq(const VectorClock& a, const VectorClock& b);

////////////////////////////////////////////////////////////////////////////////

/// Lamport clock value paired with the process that issued it.
struct TotalStamp {
  std::uint64_t time{0};
  ProcessId pid{};

  bool operator==(const TotalStamp&) const = default;
};

/// Strict total order on stamps: by time, ties broken by ascending pid.
constexpr bool stamp_less(TotalStamp a, TotalStamp b) noexcept {
  return a.time < b.time || (a.time == b.time && a.pid < b.pid);
}

struct StampLess {
  constexpr bool operator()(TotalStamp a, TotalStamp b) const noexcept { return stamp_less(a, b); }
};

inline std::ostream& operator<<(std::ostream& out, TotalStamp s) {
  return out << s.time << '@' << s.pid.index;
}

/// total_i[1..n]: own Lamport clock plus the last known clock of every peer.
class TotalView {
 public:
  TotalView() = default;
  explicit TotalView(std::size_t n) : entries_(n, 0) {}

  std::size_t size() const noexcept { return entries_.size(); }
  std::uint64_t operator[](ProcessId p) const;
  void set(ProcessId p, std::uint64_t value);

  std::span<const std::uint64_t> entries() const noexcept { return entries_; }

  bool operator==(const TotalView&) const = default;

 private:
  std::vector<std::uint64_t> entries_;
};

////////////////////////////////////////////////////////////////////////////////

/// Undirected proximity graph over processes 0..n-1. Neighbor pairs get the
/// strong ordering guarantee.
class ProximityGraph {
 public:
  using Edge = std::pair<ProcessId, ProcessId>;

  ProximityGraph() = default;
  explicit ProximityGraph(std::size_t n);

  static ProximityGraph empty(std::size_t n) { return ProximityGraph(n); }
  static ProximityGraph complete(std::size_t n);
  static ProximityGraph from_edges(std::size_t n, std::span<const Edge> edges);

  void add_edge(ProcessId p, ProcessId q);

  std::size_t size() const noexcept { return adjacency_.size(); }
  bool connected(ProcessId p, ProcessId q) const;

  /// Sorted ascending; never contains p itself.
  const std::vector<ProcessId>& neighbors(ProcessId p) const;

  /// Each undirected edge once, as (smaller, larger), sorted.
  std::vector<Edge> edges() const;

  /// Same vertex count and every edge of this graph is in `other`.
  bool subgraph_of(const ProximityGraph& other) const;

  bool operator==(const ProximityGraph&) const = default;

 private:
  void check(ProcessId p) const;

  std::vector<std::vector<ProcessId>> adjacency_;
};

const std::vector<ProcessId>& neighbors(const ProximityGraph& g, ProcessId p);

////////////////////////////////////////////////////////////////////////////////

/// Opaque application payload carried by the broadcast layer.
using Payload = std::string;

struct Tocobc {
  Payload payload;
  VectorClock s_caus;
  std::uint64_t s_tot{0};
  ProcessId sender{};

  TotalStamp stamp() const noexcept { return {s_tot, sender}; }
};

struct CatchUp {
  std::uint64_t last_date{0};
  ProcessId sender{};
};

using ProtocolMessage = std::variant<Tocobc, CatchUp>;

ProcessId sender_of(const ProtocolMessage& msg);

struct Outgoing {
  ProcessId to;
  ProtocolMessage msg;
};

}  // namespace fisheye
