#pragma once

#include <cstdint>

namespace geokge {

/// Selects the serial reference or the OpenMP kernel. Both produce bit-identical results.
enum class Exec : std::uint8_t { Serial, Parallel };

/// Number of OpenMP threads available (1 when built without OpenMP).
int max_threads() noexcept;

}  // namespace geokge
