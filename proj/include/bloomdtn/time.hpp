#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>

namespace bloomdtn {

/// Simulation clock. Integer microseconds keep event ordering exact.
using SimTime = std::chrono::microseconds;

inline SimTime from_seconds(double s) { return SimTime{std::llround(s * 1e6)}; }

constexpr double to_seconds(SimTime t) noexcept { return static_cast<double>(t.count()) * 1e-6; }

}  // namespace bloomdtn
