#pragma once

namespace nlslab {

inline constexpr const char* kToolName = "nlslab";
inline constexpr const char* kToolVersion = "0.1.0";

inline const char* version_string() { return "nlslab 0.1.0"; }

}  // namespace nlslab
