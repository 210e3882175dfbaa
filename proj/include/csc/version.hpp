#pragma once

namespace csc {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace csc
