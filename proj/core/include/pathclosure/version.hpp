#pragma once

namespace pathclosure {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace pathclosure
