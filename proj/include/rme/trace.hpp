#pragma once

#include <string>

#include "rme/history.hpp"
#include "rme/world.hpp"

namespace rme {

inline constexpr const char* kTraceMagic = "rmetrace 1";

// Line-oriented event log: a version line, one config line (JSON), then one
// event per line with a stable field order. Site and lock ids print as names
// so traces replay byte-identically across runs of the same build.
std::string dump_events(const History& h, const World& w);
History parse_events(const std::string& body, const World& w);  // faults on bad input

}  // namespace rme
