#pragma once

namespace edgeflow {

inline constexpr const char* kVersion = "0.1.0";

} // namespace edgeflow
