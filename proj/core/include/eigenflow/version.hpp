#pragma once

namespace eigenflow {
inline constexpr const char* kVersion = "0.1.0";
}
