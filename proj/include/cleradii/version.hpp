#pragma once

namespace cleradii {

inline constexpr const char* kVersion = "0.1.0";

// Identifies the generator family and the stream-splitting scheme. Bumped
// whenever a change would alter the bit stream for a given (seed, index).
inline constexpr const char* kRngVersion = "philox4x32-10/s1";

}  // namespace cleradii
