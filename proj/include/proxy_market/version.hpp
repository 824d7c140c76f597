#pragma once

#include <string_view>

namespace proxy_market {

inline constexpr std::string_view kVersion = "0.1.0";

}  // namespace proxy_market
