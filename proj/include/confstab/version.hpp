#pragma once

namespace confstab {
inline constexpr const char* kVersion = "0.1.0";
}
