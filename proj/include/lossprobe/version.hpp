#pragma once

namespace lossprobe {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace lossprobe
