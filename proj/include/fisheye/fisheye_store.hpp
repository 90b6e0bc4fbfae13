#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fisheye/core.hpp"
#include "fisheye/toco_broadcast.hpp"

namespace fisheye {

using Value = std::int64_t;

/// Register contents; nullopt is the initial "never written" value.
using MaybeValue = std::optional<Value>;

struct WriteMessage {
  std::string reg;
  Value value{0};
  ProcessId writer{};

  bool operator==(const WriteMessage&) const = default;
};

Payload encode_write(const WriteMessage& msg);

/// nullopt when the payload is not a write (the broadcast layer also
/// carries raw application payloads).
std::optional<WriteMessage> decode_write(const Payload& payload);

/// Local replica of every register with fast reads and blocking writes.
class RegisterStore {
 public:
  explicit RegisterStore(ProcessId owner) : owner_(owner) {}

  /// Arms the in-flight flag and returns the message to toco-broadcast.
  /// Throws ContractViolation if a write is already in flight.
  WriteMessage begin_write(std::string reg, Value value);

  MaybeValue read(const std::string& reg) const;

  /// Applies a delivered write; releases our own in-flight write.
  /// Throws ProtocolBug on an own-write delivery with nothing in flight.
  void on_deliver_write(const WriteMessage& msg);

  bool write_in_flight() const noexcept { return write_in_flight_; }
  ProcessId owner() const noexcept { return owner_; }
  const std::map<std::string, Value>& values() const noexcept { return values_; }

 private:
  ProcessId owner_;
  std::map<std::string, Value> values_;
  bool write_in_flight_ = false;
};

/// A process of the replicated store: the broadcast engine plus the
/// register replica it feeds.
class Replica {
 public:
  Replica(ProcessId self, ProximityGraph graph) : bcast_(self, std::move(graph)), store_(self) {}

  /// Starts a write. The write completes once write_in_flight() turns false,
  /// which happens inside deliver_next() when our own message comes back.
  std::vector<Outgoing> write(std::string reg, Value value);

  MaybeValue read(const std::string& reg) const { return store_.read(reg); }

  std::vector<Outgoing> on_receive(ProtocolMessage msg) { return bcast_.on_receive(std::move(msg)); }

  /// Delivers one message and applies it if it is a write.
  std::optional<Delivery> deliver_next();

  bool write_in_flight() const noexcept { return store_.write_in_flight(); }

  BroadcastState& broadcast() noexcept { return bcast_; }
  const BroadcastState& broadcast() const noexcept { return bcast_; }
  const RegisterStore& store() const noexcept { return store_; }

 private:
  BroadcastState bcast_;
  RegisterStore store_;
};

}  // namespace fisheye
