#pragma once

namespace lemni {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace lemni
