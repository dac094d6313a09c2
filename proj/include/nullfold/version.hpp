#pragma once

namespace nullfold {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace nullfold
