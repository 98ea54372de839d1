#pragma once

namespace ssflow {
inline constexpr const char* version = "0.1.0";
}
