#pragma once

namespace odc {

inline constexpr const char* version_string = "0.1.0";

}  // namespace odc
