#pragma once

namespace wecfarm {
inline constexpr const char* kVersion = "0.1.0";
}
