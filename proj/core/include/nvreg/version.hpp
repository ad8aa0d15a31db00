#pragma once

namespace nvreg {

inline constexpr const char* version_string = "0.1.0";

}  // namespace nvreg
