#pragma once

namespace slngbm {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace slngbm
