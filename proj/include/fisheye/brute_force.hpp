#pragma once

#include <cstddef>

#include "fisheye/checker.hpp"

namespace fisheye {

inline constexpr std::size_t kOracleMaxOps = 10;

/// Decides fisheye consistency by enumerating every legal per-process
/// sequence and every orientation of neighbor pairs those sequences induce.
/// Shares no order machinery with check_fisheye. Read-from is matched by
/// value, so written values must be distinct per register.
/// Throws OracleSizeExceeded above kOracleMaxOps operations.
Verdict brute_force_check(const History& h, const ProximityGraph& g);

}  // namespace fisheye
