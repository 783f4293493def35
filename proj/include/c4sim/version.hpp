#pragma once

#include <string_view>

namespace c4sim {

inline constexpr std::string_view kVersion = "1.0.0";

}  // namespace c4sim
