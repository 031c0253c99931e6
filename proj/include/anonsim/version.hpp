#pragma once

namespace anonsim {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace anonsim
