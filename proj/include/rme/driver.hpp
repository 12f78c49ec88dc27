#pragma once

#include <memory>

#include "rme/engine.hpp"
#include "rme/machine.hpp"

namespace rme {

// Five-segment process loop: NCS, Recover, Enter, CS, Exit; restart after a
// crash re-enters at NCS. The CS is an abstract idempotent hold of cs_len
// local steps. Parks (zero-op completion) when the request stream runs dry.
std::unique_ptr<Frame> make_driver(const DriverSpec& spec, int pid, int site_ncs, int site_cs);

}  // namespace rme
