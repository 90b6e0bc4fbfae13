#include "fisheye/fisheye_store.hpp"

#include <charconv>

#include "fisheye/errors.hpp"

namespace fisheye {

namespace {

constexpr std::string_view kWriteTag = "write ";

bool valid_register_name(std::string_view name) {
  if (name.empty()) return false;
  for (char c : name) {
    if (c == ' ' || c == '\n' || c == '\t') return false;
  }
  return true;
}

template <typename Int>
std::optional<Int> parse_int(std::string_view s) {
  Int v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

Payload encode_write(const WriteMessage& msg) {
  return std::string(kWriteTag) + msg.reg + ' ' + std::to_string(msg.value) + ' ' +
         std::to_string(msg.writer.index);
}

std::optional<WriteMessage> decode_write(const Payload& payload) {
  std::string_view s = payload;
  if (!s.starts_with(kWriteTag)) return std::nullopt;
  s.remove_prefix(kWriteTag.size());
  auto sp1 = s.find(' ');
  if (sp1 == std::string_view::npos) return std::nullopt;
  auto sp2 = s.find(' ', sp1 + 1);
  if (sp2 == std::string_view::npos) return std::nullopt;
  auto value = parse_int<Value>(s.substr(sp1 + 1, sp2 - sp1 - 1));
  auto writer = parse_int<std::uint32_t>(s.substr(sp2 + 1));
  if (!value || !writer) return std::nullopt;
  return WriteMessage{std::string(s.substr(0, sp1)), *value, ProcessId{*writer}};
}

WriteMessage RegisterStore::begin_write(std::string reg, Value value) {
  if (write_in_flight_) {
    throw ContractViolation("write issued while a previous write is still in flight");
  }
  if (!valid_register_name(reg)) {
    throw ContractViolation("invalid register name '" + reg + "'");
  }
  write_in_flight_ = true;
  return WriteMessage{std::move(reg), value, owner_};
}

MaybeValue RegisterStore::read(const std::string& reg) const {
  auto it = values_.find(reg);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

void RegisterStore::on_deliver_write(const WriteMessage& msg) {
  values_[msg.reg] = msg.value;
  if (msg.writer == owner_) {
    if (!write_in_flight_) {
      throw ProtocolBug("own write delivered with no write in flight");
    }
    write_in_flight_ = false;
  }
}

std::vector<Outgoing> Replica::write(std::string reg, Value value) {
  // The flag is armed before the broadcast leaves.
  WriteMessage msg = store_.begin_write(std::move(reg), value);
  return bcast_.broadcast(encode_write(msg));
}

std::optional<Delivery> Replica::deliver_next() {
  auto d = bcast_.deliver_next();
  if (d) {
    if (auto w = decode_write(d->payload)) store_.on_deliver_write(*w);
  }
  return d;
}

}  // namespace fisheye
