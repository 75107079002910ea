#pragma once

namespace bsq5 {

inline constexpr const char* kVersion = "bsq5 0.1.0";

}  // namespace bsq5
