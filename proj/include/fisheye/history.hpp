#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fisheye/core.hpp"
#include "fisheye/fisheye_store.hpp"

namespace fisheye {

using OpId = std::size_t;

enum class OpKind { Read, Write };

/// One register operation. For a write `value` is the written value; for a
/// read it is the returned value (nullopt = initial value).
struct Operation {
  OpId id{0};
  ProcessId pid{};
  OpKind kind{OpKind::Read};
  std::string reg;
  MaybeValue value;
  std::uint64_t invoked{0};
  std::uint64_t responded{0};
  std::optional<TotalStamp> msg;    // the WRITE message, when recorded by a run
  std::optional<std::size_t> step;  // program step that issued the op

  bool is_write() const noexcept { return kind == OpKind::Write; }
  bool is_read() const noexcept { return kind == OpKind::Read; }
  bool operator==(const Operation&) const = default;
};

enum class EventKind { Broadcast, Receive, Deliver };

struct BroadcastEvent {
  std::uint64_t tick{0};
  std::uint64_t time{0};
  EventKind kind{EventKind::Broadcast};
  ProcessId at{};
  TotalStamp msg{};

  bool operator==(const BroadcastEvent&) const = default;
};

/// Recorded execution: register operations plus broadcast-level events.
/// Ticks are one global counter shared by op invocations/responses and
/// events, so per-process interleavings can be reconstructed.
struct History {
  std::size_t n{1};
  std::optional<ProximityGraph> graph;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> names;
  std::vector<Operation> ops;
  std::vector<BroadcastEvent> events;

  bool operator==(const History&) const = default;
};

/// Operation ids of each process in process order.
std::vector<std::vector<OpId>> process_order(const History& h);

/// Throws MalformedHistory if ids are not dense, pids out of range, a
/// response precedes its invocation, or a process's ops overlap.
void validate_history(const History& h);

std::string op_label(const History& h, OpId id);

/// Builds hand-written histories: operations get ticks in call order.
class HistoryBuilder {
 public:
  explicit HistoryBuilder(std::size_t n) { h_.n = n; }

  HistoryBuilder& write(std::uint32_t pid, std::string reg, Value v);
  HistoryBuilder& read(std::uint32_t pid, std::string reg, MaybeValue v);
  HistoryBuilder& graph(ProximityGraph g);

  History build() const { return h_; }

 private:
  History h_;
  std::uint64_t tick_ = 0;
};

}  // namespace fisheye
