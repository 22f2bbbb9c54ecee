#pragma once

namespace csnewton {
inline constexpr const char* kVersion = "0.1.0";
}
