// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

namespace nefqvf {

inline constexpr const char* version = "0.1.0";

}  // namespace nefqvf
