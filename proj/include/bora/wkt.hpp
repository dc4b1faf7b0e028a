#pragma once

#include <string>

#include "bora/geometry.hpp"

namespace bora {

// One geometry per line: POLYGON, MULTIPOLYGON, or LINESTRING. Blank lines
// and lines starting with '#' are skipped. Rejected geometries raise
// ParseError or InvalidRing with the offending line number.
BarrierSet load_barriers_wkt(const std::string& path);

BarrierSet parse_barriers_wkt(const std::string& text);

}  // namespace bora
