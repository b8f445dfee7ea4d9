#pragma once

namespace ame {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace ame
