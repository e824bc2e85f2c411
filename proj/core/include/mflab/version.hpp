#pragma once

#include <string_view>

namespace mflab {

// Semantic version plus `git describe` of the source tree at configure time.
std::string_view version_string();

} // namespace mflab
