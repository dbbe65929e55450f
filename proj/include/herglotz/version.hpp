#pragma once

namespace herglotz {

inline constexpr const char* version = "0.1.0";

} // namespace herglotz
