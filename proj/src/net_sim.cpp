#include "fisheye/net_sim.hpp"

#include <algorithm>
#include <array>
#include <random>
#include <set>
#include <sstream>

#include "fisheye/errors.hpp"

namespace fisheye {

std::string_view to_string(ProcessStatus s) {
  switch (s) {
    case ProcessStatus::Idle: return "idle";
    case ProcessStatus::Running: return "running";
    case ProcessStatus::BlockedWrite: return "blocked-write";
    case ProcessStatus::BlockedRepeat: return "blocked-repeat";
    case ProcessStatus::Sleeping: return "sleeping";
    case ProcessStatus::Done: return "done";
  }
  return "?";
}

std::pair<std::uint64_t, std::uint64_t> DelayModel::bounds(ProcessId from, ProcessId to) const {
  auto it = per_channel.find({from.index, to.index});
  if (it != per_channel.end()) return it->second;
  return {min_delay, max_delay};
}

std::uint64_t DelayModel::sample(ProcessId from, ProcessId to, std::uint64_t send_index) const {
  const auto [lo, hi] = bounds(from, to);
  // seed_seq's mixing is fully specified by the standard, so samples are
  // identical across toolchains.
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), from.index,
                    to.index, static_cast<std::uint32_t>(send_index),
                    static_cast<std::uint32_t>(send_index >> 32)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  const std::uint64_t r = (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
  return lo + r % (hi - lo + 1);
}

void DelayModel::validate() const {
  auto check = [](std::uint64_t lo, std::uint64_t hi) {
    if (lo == 0 || hi < lo) throw ContractViolation("delay bounds must satisfy 0 < min <= max");
  };
  check(min_delay, max_delay);
  for (const auto& [ch, b] : per_channel) {
    if (ch.first == ch.second) throw ContractViolation("channel delay override on a self channel");
    check(b.first, b.second);
  }
}

////////////////////////////////////////////////////////////////////////////////

Simulator::Simulator(SimConfig config, SimOptions options)
    : config_(std::move(config)), options_(options) {
  const std::size_t n = config_.n;
  if (n == 0) throw ContractViolation("simulator needs at least one process");
  if (config_.graph.size() != n) throw ContractViolation("graph size does not match process count");
  config_.delays.validate();
  for (const auto& [ch, b] : config_.delays.per_channel) {
    if (ch.first >= n || ch.second >= n) throw ContractViolation("channel delay override names unknown process");
  }

  procs_.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    Proc p{Replica(ProcessId{i}, config_.graph), {}, 0, ProcessStatus::Done, {}, VectorClock(n), TotalView(n), 0};
    procs_.push_back(std::move(p));
  }
  for (auto& prog : config_.programs) {
    if (prog.pid.index >= n) throw ContractViolation("program for unknown process");
    auto& p = procs_[prog.pid.index];
    if (p.status != ProcessStatus::Done) throw ContractViolation("two programs for one process");
    p.program = std::move(prog.steps);
    p.status = p.program.empty() ? ProcessStatus::Done : ProcessStatus::Idle;
  }
  channels_.resize(n * n);

  history_.n = n;
  history_.graph = config_.graph;
  history_.seed = config_.delays.seed;
  history_.names = config_.names;

  for (std::uint32_t i = 0; i < n; ++i) {
    if (procs_[i].status == ProcessStatus::Idle) push(0, ProgramWake{ProcessId{i}});
  }
}

void Simulator::push(std::uint64_t time, std::variant<Arrival, ProgramWake> kind) {
  queue_.push(Event{time, seq_++, std::move(kind)});
}

void Simulator::schedule_send(ProcessId from, ProcessId to, ProtocolMessage msg) {
  if (from == to) throw ContractViolation("send to self");
  if (from.index >= config_.n || to.index >= config_.n) throw ContractViolation("send names unknown process");
  auto& ch = channels_[from.index * config_.n + to.index];
  const std::uint64_t index = ch.sends++;
  // FIFO: never before the previous arrival on this channel; equal times are
  // ordered by seq.
  const std::uint64_t at = std::max(now_ + config_.delays.sample(from, to, index), ch.last_arrival);
  ch.last_arrival = at;
  push(at, Arrival{from, to, std::move(msg), index});
}

void Simulator::send_all(ProcessId from, std::vector<Outgoing> out) {
  if (out.empty()) return;
  if (options_.debug_checks) {
    auto stamp_of = [](const ProtocolMessage& m) {
      if (auto* t = std::get_if<Tocobc>(&m)) return t->s_tot;
      return std::get<CatchUp>(m).last_date;
    };
    auto& p = procs_[from.index];
    const std::uint64_t s = stamp_of(out.front().msg);
    for (const auto& o : out) {
      if (stamp_of(o.msg) != s) throw InvariantViolation("one emission carries different stamps");
    }
    if (s <= p.last_outgoing_stamp) {
      std::ostringstream os;
      os << from << " emitted stamp " << s << " after " << p.last_outgoing_stamp;
      throw InvariantViolation(os.str());
    }
    p.last_outgoing_stamp = s;
  }
  for (auto& o : out) schedule_send(from, o.to, std::move(o.msg));
}

void Simulator::record_event(EventKind kind, ProcessId at, TotalStamp msg) {
  history_.events.push_back(BroadcastEvent{tick_++, now_, kind, at, msg});
}

bool Simulator::step() {
  if (queue_.empty()) return false;
  Event ev = queue_.top();
  queue_.pop();
  now_ = ev.time;
  if (auto* a = std::get_if<Arrival>(&ev.kind)) {
    arrivals_.push_back(ArrivalRecord{ev.time, ev.seq, a->from, a->to, a->send_index});
    dispatch(*a);
  } else {
    wake(std::get<ProgramWake>(ev.kind).pid);
  }
  return true;
}

void Simulator::dispatch(const Arrival& a) {
  auto& p = procs_[a.to.index];
  if (const auto* t = std::get_if<Tocobc>(&a.msg)) record_event(EventKind::Receive, a.to, t->stamp());
  send_all(a.to, p.replica.on_receive(a.msg));
  check_invariants(a.to);
  pump(a.to);
}

void Simulator::wake(ProcessId pid) {
  auto& p = procs_[pid.index];
  if (p.status == ProcessStatus::Idle || p.status == ProcessStatus::Sleeping) p.status = ProcessStatus::Running;
  pump(pid);
}

void Simulator::pump(ProcessId pid) {
  auto& p = procs_[pid.index];
  for (;;) {
    run_program(pid);
    auto d = p.replica.deliver_next();
    if (!d) break;
    record_event(EventKind::Deliver, pid, d->stamp);
    if (d->stamp.pid == pid && p.open_write && !p.replica.write_in_flight()) {
      history_.ops[*p.open_write].responded = tick_++;
      p.open_write.reset();
      if (p.status == ProcessStatus::BlockedWrite) p.status = ProcessStatus::Running;
    }
    check_invariants(pid);
    if (p.status == ProcessStatus::BlockedRepeat && poll_repeat(pid)) p.status = ProcessStatus::Running;
  }
}

OpId Simulator::record_read(ProcessId pid, const std::string& reg, MaybeValue v) {
  Operation op;
  op.id = history_.ops.size();
  op.pid = pid;
  op.kind = OpKind::Read;
  op.reg = reg;
  op.value = v;
  op.invoked = tick_;
  op.responded = tick_++;
  op.step = procs_[pid.index].pc;
  history_.ops.push_back(std::move(op));
  observed_[{pid.index, procs_[pid.index].pc}] = v;
  return history_.ops.back().id;
}

bool Simulator::poll_repeat(ProcessId pid) {
  auto& p = procs_[pid.index];
  const auto& rr = std::get<RepeatReadUntil>(p.program[p.pc]);
  const MaybeValue v = p.replica.read(rr.reg);
  record_read(pid, rr.reg, v);
  if (v == rr.expected) {
    ++p.pc;
    return true;
  }
  return false;
}

void Simulator::run_program(ProcessId pid) {
  auto& p = procs_[pid.index];
  while (p.status == ProcessStatus::Running) {
    if (p.pc >= p.program.size()) {
      p.status = ProcessStatus::Done;
      break;
    }
    const Instruction& ins = p.program[p.pc];
    if (const auto* w = std::get_if<WriteStep>(&ins)) {
      Operation op;
      op.id = history_.ops.size();
      op.pid = pid;
      op.kind = OpKind::Write;
      op.reg = w->reg;
      op.value = w->value;
      op.invoked = tick_++;
      op.responded = op.invoked;
      op.step = p.pc;
      auto out = p.replica.write(w->reg, w->value);
      const TotalStamp stamp{p.replica.broadcast().total()[pid], pid};
      op.msg = stamp;
      p.open_write = op.id;
      history_.ops.push_back(std::move(op));
      sent_.push_back({stamp, p.replica.broadcast().causal()[pid] - 1});
      record_event(EventKind::Broadcast, pid, stamp);
      send_all(pid, std::move(out));
      check_invariants(pid);
      ++p.pc;
      p.status = ProcessStatus::BlockedWrite;
    } else if (const auto* r = std::get_if<ReadStep>(&ins)) {
      record_read(pid, r->reg, p.replica.read(r->reg));
      ++p.pc;
    } else if (std::holds_alternative<RepeatReadUntil>(ins)) {
      if (!poll_repeat(pid)) p.status = ProcessStatus::BlockedRepeat;
    } else if (const auto* nop = std::get_if<Nop>(&ins)) {
      ++p.pc;
      if (nop->ticks > 0) {
        p.status = ProcessStatus::Sleeping;
        push(now_ + nop->ticks, ProgramWake{pid});
      }
    } else {
      const auto& b = std::get<BroadcastStep>(ins);
      if (decode_write(b.payload)) throw ContractViolation("raw broadcast payload looks like a write");
      auto out = p.replica.broadcast().broadcast(b.payload);
      const TotalStamp stamp{p.replica.broadcast().total()[pid], pid};
      sent_.push_back({stamp, p.replica.broadcast().causal()[pid] - 1});
      record_event(EventKind::Broadcast, pid, stamp);
      send_all(pid, std::move(out));
      check_invariants(pid);
      ++p.pc;
    }
  }
}

void Simulator::check_invariants(ProcessId pid) {
  if (!options_.debug_checks) return;
  auto& p = procs_[pid.index];
  const auto& bs = p.replica.broadcast();
  const auto causal = bs.causal();
  const auto total = bs.total();
  for (std::uint32_t k = 0; k < config_.n; ++k) {
    const ProcessId q{k};
    if (causal[q] < p.last_causal[q] || total[q] < p.last_total[q]) {
      std::ostringstream os;
      os << "clock regressed at " << pid << " entry " << q;
      throw InvariantViolation(os.str());
    }
  }
  p.last_causal = causal;
  p.last_total = total;

  std::set<std::pair<std::uint64_t, std::uint32_t>> delivered;
  for (const auto& d : bs.delivered_log()) delivered.insert({d.stamp.time, d.stamp.pid.index});
  for (const auto& m : sent_) {
    if (m.stamp.pid == pid) continue;
    const bool is_delivered = delivered.contains({m.stamp.time, m.stamp.pid.index});
    if (is_delivered != (m.own_entry < causal[m.stamp.pid])) {
      std::ostringstream os;
      os << "delivery of " << m.stamp << " at " << pid << " disagrees with causal entry " << causal[m.stamp.pid];
      throw InvariantViolation(os.str());
    }
  }
}

const History& Simulator::run_until_quiescence() {
  while (step()) {
  }
  std::ostringstream stuck;
  for (std::uint32_t i = 0; i < config_.n; ++i) {
    const auto& p = procs_[i];
    if (p.status == ProcessStatus::Done) continue;
    stuck << ' ' << ProcessId{i} << ' ' << to_string(p.status) << " at step " << p.pc;
    if (p.status == ProcessStatus::BlockedRepeat) {
      const auto& rr = std::get<RepeatReadUntil>(p.program[p.pc]);
      const auto v = p.replica.read(rr.reg);
      stuck << " (" << rr.reg << " is " << (v ? std::to_string(*v) : std::string("_|_")) << ", waiting for "
            << rr.expected << ')';
    }
    stuck << " pending=" << p.replica.broadcast().pending().size() << ';';
  }
  if (!stuck.str().empty()) throw LivenessFailure("no more events but programs are stuck:" + stuck.str());
  return history_;
}

std::optional<MaybeValue> Simulator::observed(ProcessId p, std::size_t step) const {
  auto it = observed_.find({p.index, step});
  if (it == observed_.end()) return std::nullopt;
  return it->second;
}

}  // namespace fisheye
