#pragma once

namespace pathsens {

inline constexpr const char* version = "0.1.0";

} // namespace pathsens
