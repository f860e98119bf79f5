#pragma once

namespace docsplit {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace docsplit
