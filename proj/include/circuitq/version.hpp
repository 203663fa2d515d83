#pragma once

namespace circuitq {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace circuitq
