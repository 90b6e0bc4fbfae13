#include "fisheye/history.hpp"

#include <algorithm>
#include <sstream>

#include "fisheye/errors.hpp"

namespace fisheye {

std::vector<std::vector<OpId>> process_order(const History& h) {
  std::vector<std::vector<OpId>> order(h.n);
  for (const auto& op : h.ops) {
    if (op.pid.index < h.n) order[op.pid.index].push_back(op.id);
  }
  for (auto& seq : order) {
    std::stable_sort(seq.begin(), seq.end(),
                     [&](OpId a, OpId b) { return h.ops[a].invoked < h.ops[b].invoked; });
  }
  return order;
}

void validate_history(const History& h) {
  if (h.n == 0) throw MalformedHistory("history has zero processes");
  if (h.graph && h.graph->size() != h.n) {
    throw MalformedHistory("graph size does not match process count");
  }
  for (std::size_t i = 0; i < h.ops.size(); ++i) {
    const auto& op = h.ops[i];
    if (op.id != i) throw MalformedHistory("operation ids must be dense and in order");
    if (op.pid.index >= h.n) {
      throw MalformedHistory("operation " + std::to_string(i) + " names process out of range");
    }
    if (op.responded < op.invoked) {
      throw MalformedHistory("operation " + std::to_string(i) + " responds before its invocation");
    }
    if (op.is_write() && !op.value) {
      throw MalformedHistory("write " + std::to_string(i) + " has no value");
    }
    if (op.reg.empty()) throw MalformedHistory("operation " + std::to_string(i) + " has no register");
  }
  for (const auto& seq : process_order(h)) {
    for (std::size_t k = 1; k < seq.size(); ++k) {
      const auto& prev = h.ops[seq[k - 1]];
      const auto& cur = h.ops[seq[k]];
      if (cur.invoked < prev.responded || cur.invoked == prev.invoked) {
        throw MalformedHistory("operations " + std::to_string(prev.id) + " and " + std::to_string(cur.id) +
                               " of one process overlap");
      }
    }
  }
  for (const auto& ev : h.events) {
    if (ev.at.index >= h.n || ev.msg.pid.index >= h.n) {
      throw MalformedHistory("event names process out of range");
    }
  }
}

std::string op_label(const History& h, OpId id) {
  const auto& op = h.ops.at(id);
  std::ostringstream os;
  os << (op.is_write() ? 'w' : 'r') << '_';
  if (op.pid.index < h.names.size()) {
    os << h.names[op.pid.index];
  } else {
    os << 'p' << op.pid.index;
  }
  os << '(' << op.reg << ',';
  if (op.value) {
    os << *op.value;
  } else {
    os << "_|_";
  }
  os << ")#" << id;
  return os.str();
}

HistoryBuilder& HistoryBuilder::write(std::uint32_t pid, std::string reg, Value v) {
  Operation op;
  op.id = h_.ops.size();
  op.pid = ProcessId{pid};
  op.kind = OpKind::Write;
  op.reg = std::move(reg);
  op.value = v;
  op.invoked = tick_++;
  op.responded = tick_++;
  h_.ops.push_back(std::move(op));
  return *this;
}

HistoryBuilder& HistoryBuilder::read(std::uint32_t pid, std::string reg, MaybeValue v) {
  Operation op;
  op.id = h_.ops.size();
  op.pid = ProcessId{pid};
  op.kind = OpKind::Read;
  op.reg = std::move(reg);
  op.value = v;
  op.invoked = tick_++;
  op.responded = tick_++;
  h_.ops.push_back(std::move(op));
  return *this;
}

HistoryBuilder& HistoryBuilder::graph(ProximityGraph g) {
  h_.graph = std::move(g);
  return *this;
}

}  // namespace fisheye
