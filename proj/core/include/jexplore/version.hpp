#pragma once

namespace jexplore {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace jexplore
