#pragma once

namespace powerlaw {

inline constexpr const char* kVersion = "1.0.0";

} // namespace powerlaw
