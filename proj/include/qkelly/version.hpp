#pragma once

namespace qkelly {

inline constexpr const char* version = "0.1.0";

}  // namespace qkelly
