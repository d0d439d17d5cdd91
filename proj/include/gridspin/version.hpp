#pragma once

namespace gridspin {

inline constexpr const char* kToolName = "gridspin";
inline constexpr const char* kVersion = "0.1.0";

} // namespace gridspin
