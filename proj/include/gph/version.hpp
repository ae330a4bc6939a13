#pragma once

#include <string>
#include <utility>
#include <vector>

namespace gph {

inline constexpr const char* kVersion = "1.0.0";

/// (name, version) of this library and the numerical backends it links.
std::vector<std::pair<std::string, std::string>> library_versions();

}  // namespace gph
