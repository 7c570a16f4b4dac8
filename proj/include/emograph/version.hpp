#pragma once

namespace emograph {

inline constexpr const char* kToolName = "emograph";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace emograph
