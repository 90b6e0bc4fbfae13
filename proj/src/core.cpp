#include "fisheye/core.hpp"

#include <algorithm>

#include "fisheye/errors.hpp"

namespace fisheye {

std::uint64_t VectorClock::operator[](ProcessId p) const {
  if (p.index >= entries_.size()) {
    throw ContractViolation("vector clock index out of range");
  }
  return entries_[p.index];
}

void VectorClock::increment(ProcessId p) {
  if (p.index >= entries_.size()) {
    throw ContractViolation("vector clock index out of range");
  }
  ++entries_[p.index];
}

std::ostream& operator<<(std::ostream& out, const VectorClock& vc) {
  out << '[';
  for (std::size_t i = 0; i < vc.size(); ++i) {
    if (i != 0) out << ',';
    out << vc.entries()[i];
  }
  return out << ']';
}

bool vc_leq(const VectorClock& a, const VectorClock& b) {
  if (a.size() != b.size()) {
    throw ContractViolation("vc_leq: vector clocks of different length");
  }
  auto ea = a.entries();
  auto eb = b.entries();
  for (std::size_t i = 0; i < ea.size(); ++i) {
    if (ea[i] > eb[i]) return false;
  }
  return true;
}

std::uint64_t TotalView::operator[](ProcessId p) const {
  if (p.index >= entries_.size()) {
    throw ContractViolation("total view index out of range");
  }
  return entries_[p.index];
}

void TotalView::set(ProcessId p, std::uint64_t value) {
  if (p.index >= entries_.size()) {
    throw ContractViolation("total view index out of range");
  }
  entries_[p.index] = value;
}

ProximityGraph::ProximityGraph(std::size_t n) : adjacency_(n) {
  if (n == 0) throw ContractViolation("proximity graph needs at least one process");
}

ProximityGraph ProximityGraph::complete(std::size_t n) {
  ProximityGraph g(n);
  for (std::uint32_t p = 0; p < n; ++p) {
    for (std::uint32_t q = p + 1; q < n; ++q) g.add_edge({p}, {q});
  }
  return g;
}

ProximityGraph ProximityGraph::from_edges(std::size_t n, std::span<const Edge> edges) {
  ProximityGraph g(n);
  for (const auto& [p, q] : edges) g.add_edge(p, q);
  return g;
}

void ProximityGraph::check(ProcessId p) const {
  if (p.index >= adjacency_.size()) {
    throw ContractViolation("process id p" + std::to_string(p.index) + " out of range for graph of " +
                            std::to_string(adjacency_.size()) + " processes");
  }
}

void ProximityGraph::add_edge(ProcessId p, ProcessId q) {
  check(p);
  check(q);
  if (p == q) throw ContractViolation("proximity graph cannot contain self-loops");
  auto insert = [](std::vector<ProcessId>& list, ProcessId x) {
    auto it = std::lower_bound(list.begin(), list.end(), x);
    if (it == list.end() || *it != x) list.insert(it, x);
  };
  insert(adjacency_[p.index], q);
  insert(adjacency_[q.index], p);
}

bool ProximityGraph::connected(ProcessId p, ProcessId q) const {
  check(p);
  check(q);
  const auto& list = adjacency_[p.index];
  return std::binary_search(list.begin(), list.end(), q);
}

const std::vector<ProcessId>& ProximityGraph::neighbors(ProcessId p) const {
  check(p);
  return adjacency_[p.index];
}

std::vector<ProximityGraph::Edge> ProximityGraph::edges() const {
  std::vector<Edge> out;
  for (std::uint32_t p = 0; p < adjacency_.size(); ++p) {
    for (ProcessId q : adjacency_[p]) {
      if (ProcessId{p} < q) out.emplace_back(ProcessId{p}, q);
    }
  }
  return out;
}

bool ProximityGraph::subgraph_of(const ProximityGraph& other) const {
  if (size() != other.size()) return false;
  for (const auto& [p, q] : edges()) {
    if (!other.connected(p, q)) return false;
  }
  return true;
}

const std::vector<ProcessId>& neighbors(const ProximityGraph& g, ProcessId p) {
  return g.neighbors(p);
}

ProcessId sender_of(const ProtocolMessage& msg) {
  return std::visit([](const auto& m) { return m.sender; }, msg);
}

}  // namespace fisheye
