#pragma once

namespace homcsel {

inline constexpr const char* kVersion = "0.1.0";

}
