#pragma once

#include <string>

#include "mdm/energy.hpp"
#include "mdm/network.hpp"

namespace mdm {

// Renders the network with the sample set: one line per edge, one dot per
// sample point, and one circle of radius m.r around each corresponding point
// of every energetic network vertex. The viewBox covers the sample bounding
// box inflated by m.r. Output bytes are deterministic (fixed %.6f formatting,
// no timestamps).
std::string render_svg(const Network& net, const CompactSample& m);

// render_svg + write to path; throws std::runtime_error on I/O failure.
void emit_svg(const Network& net, const CompactSample& m, const std::string& path);

}  // namespace mdm
