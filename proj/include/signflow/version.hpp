#pragma once

namespace signflow {

inline constexpr const char* kVersion = "1.0.0";

} // namespace signflow
