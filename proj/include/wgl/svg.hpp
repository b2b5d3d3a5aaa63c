#pragma once

#include <string>

#include "wgl/construction.hpp"

namespace wgl::svg {

/// Renders an evaluated figure as a standalone SVG document. The viewport is
/// the bounding box of all points and circles plus a 10% margin; lines are
/// clipped to it. Points are drawn as paths so that `<circle>` elements
/// correspond one-to-one with figure circles.
std::string render(const Construction& c, const Figure& figure);

}  // namespace wgl::svg
