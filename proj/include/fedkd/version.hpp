#pragma once

namespace fedkd {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace fedkd
