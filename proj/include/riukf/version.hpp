#pragma once

namespace riukf {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace riukf
