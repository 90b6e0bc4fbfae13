#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fisheye {

// Caller broke a documented precondition.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// The channel layer handed the protocol something it can never legally see
// (a duplicate timestamp, a message from itself).
class IntegrityViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Internal protocol state is inconsistent; indicates a bug, not bad input.
class ProtocolBug : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A debug-mode clock/delivery invariant failed during simulation.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// The simulator drained its event queue with programs still blocked.
class LivenessFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MalformedHistory : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// The consistency checker's orientation search ran out of budget.
class SearchBudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The brute-force oracle refuses histories above its size cap.
class OracleSizeExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fisheye
