#pragma once

#include "acudesk/plane.hpp"

#include <string>
#include <utility>

namespace acudesk::cli {

/// Exit codes: 0 success, 1 processing error, 2 usage error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

int run(int argc, const char* const* argv);

/// "kind:px,py,pz:nx,ny,nz[:res]" with kind cutout|view. Throws
/// std::invalid_argument on malformed input.
SlicingPlane parse_plane_spec(const std::string& spec, const std::string& id);

/// "WxH" → (W, H). Throws std::invalid_argument.
std::pair<int, int> parse_size(const std::string& text);

} // namespace acudesk::cli
