#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "fisheye/core.hpp"
#include "fisheye/fisheye_store.hpp"
#include "fisheye/history.hpp"

namespace fisheye {

////////////////////////////////////////////////////////////////////////////////
// Process programs

struct WriteStep {
  std::string reg;
  Value value{0};
};

struct ReadStep {
  std::string reg;
  std::string bind;  // name of the observed value, informational only
};

/// Reads `reg` now and again after every local delivery until it holds
/// `expected`. Each poll is a recorded read.
struct RepeatReadUntil {
  std::string reg;
  Value expected{0};
};

/// Zero ticks: a no-op. Otherwise the program sleeps for `ticks` of virtual time.
struct Nop {
  std::uint64_t ticks{0};
};

/// Raw non-blocking toco-broadcast; bypasses the register store.
struct BroadcastStep {
  Payload payload;
};

using Instruction = std::variant<WriteStep, ReadStep, RepeatReadUntil, Nop, BroadcastStep>;

struct ProcessProgram {
  ProcessId pid{};
  std::vector<Instruction> steps;
};

////////////////////////////////////////////////////////////////////////////////

/// Uniform integer transit delays. Each sample is a pure function of
/// (seed, from, to, send index on that channel).
struct DelayModel {
  std::uint64_t seed{0};
  std::uint64_t min_delay{1};
  std::uint64_t max_delay{10};
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::pair<std::uint64_t, std::uint64_t>> per_channel;

  std::pair<std::uint64_t, std::uint64_t> bounds(ProcessId from, ProcessId to) const;
  std::uint64_t sample(ProcessId from, ProcessId to, std::uint64_t send_index) const;

  /// Throws ContractViolation unless 0 < min <= max everywhere.
  void validate() const;
};

struct SimConfig {
  std::size_t n{1};
  ProximityGraph graph{1};
  std::vector<ProcessProgram> programs;
  DelayModel delays;
  std::vector<std::string> names;
};

struct SimOptions {
  // Checks clock monotonicity, strictly increasing outgoing stamps, and the
  // delivery/causal-entry coupling after every handler.
  bool debug_checks = false;
};

enum class ProcessStatus { Idle, Running, BlockedWrite, BlockedRepeat, Sleeping, Done };

std::string_view to_string(ProcessStatus s);

struct ArrivalRecord {
  std::uint64_t time{0};
  std::uint64_t seq{0};
  ProcessId from{};
  ProcessId to{};
  std::uint64_t send_index{0};  // position in the channel's send order

  bool operator==(const ArrivalRecord&) const = default;
};

/// Deterministic discrete-event simulator: reliable FIFO channels between
/// every pair of processes, one Replica per process, scripted programs.
class Simulator {
 public:
  explicit Simulator(SimConfig config, SimOptions options = {});

  /// Processes the (time, seq)-minimal event. Returns false if the queue is empty.
  bool step();

  /// Runs until the queue drains. Throws LivenessFailure if any program is
  /// still blocked at that point.
  const History& run_until_quiescence();

  std::uint64_t now() const noexcept { return now_; }
  std::size_t queued() const noexcept { return queue_.size(); }
  const History& history() const noexcept { return history_; }
  const Replica& replica(ProcessId p) const { return procs_.at(p.index).replica; }
  ProcessStatus status(ProcessId p) const { return procs_.at(p.index).status; }
  const std::vector<ArrivalRecord>& arrivals() const noexcept { return arrivals_; }

  /// Value seen by the Read (or the final poll of a RepeatReadUntil) at
  /// (pid, step); nullopt if that step never ran.
  std::optional<MaybeValue> observed(ProcessId p, std::size_t step) const;

  /// Test hook: queue one protocol message on the from->to channel.
  void schedule_send(ProcessId from, ProcessId to, ProtocolMessage msg);

 private:
  struct Arrival {
    ProcessId from;
    ProcessId to;
    ProtocolMessage msg;
    std::uint64_t send_index;
  };
  struct ProgramWake {
    ProcessId pid;
  };
  struct Event {
    std::uint64_t time;
    std::uint64_t seq;
    std::variant<Arrival, ProgramWake> kind;
  };
  struct EventAfter {
    bool operator()(const Event& a, const Event& b) const {
      return a.time != b.time ? a.time > b.time : a.seq > b.seq;
    }
  };
  struct Channel {
    std::uint64_t last_arrival = 0;
    std::uint64_t sends = 0;
  };
  struct Proc {
    Replica replica;
    std::vector<Instruction> program;
    std::size_t pc = 0;
    ProcessStatus status = ProcessStatus::Idle;
    std::optional<OpId> open_write;
    // debug-check snapshots
    VectorClock last_causal;
    TotalView last_total;
    std::uint64_t last_outgoing_stamp = 0;
  };

  void push(std::uint64_t time, std::variant<Arrival, ProgramWake> kind);
  void send_all(ProcessId from, std::vector<Outgoing> out);
  void dispatch(const Arrival& a);
  void wake(ProcessId pid);
  void pump(ProcessId pid);
  void run_program(ProcessId pid);
  bool poll_repeat(ProcessId pid);
  OpId record_read(ProcessId pid, const std::string& reg, MaybeValue v);
  void record_event(EventKind kind, ProcessId at, TotalStamp msg);
  void check_invariants(ProcessId pid);

  SimConfig config_;
  SimOptions options_;
  std::vector<Proc> procs_;
  std::vector<Channel> channels_;  // from * n + to
  std::priority_queue<Event, std::vector<Event>, EventAfter> queue_;
  std::uint64_t now_ = 0;
  std::uint64_t seq_ = 0;
  std::uint64_t tick_ = 0;
  History history_;
  std::vector<ArrivalRecord> arrivals_;
  std::map<std::pair<std::uint32_t, std::size_t>, MaybeValue> observed_;

  // every TOCOBC ever sent, for the delivery/causal-entry coupling check
  struct SentMessage {
    TotalStamp stamp;
    std::uint64_t own_entry;
  };
  std::vector<SentMessage> sent_;
};

}  // namespace fisheye
