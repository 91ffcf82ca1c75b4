#pragma once

namespace molelab {

inline constexpr const char* kVersion = "0.1.0";

} // namespace molelab
