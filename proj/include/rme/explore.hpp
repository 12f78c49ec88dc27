#pragma once

#include <functional>
#include <string>
#include <vector>

#include "rme/engine.hpp"

namespace rme {

// Exhaustive bounded exploration of the scheduler's choices plus crash
// placement at instruction gaps, with state dedup. Requires an engine with an
// empty failure plan and a non-random schedule (the explorer is the
// scheduler). History recording should be off.
struct ExploreConfig {
    int max_steps = 60;
    int max_crashes = 0;
    // May pid crash at its current gap? (e.g. filter out sensitive sites)
    std::function<bool(const Engine&, int)> crash_ok;
    // Invariant; empty string when satisfied, else a violation description.
    std::function<std::string(const Engine&)> check;
};

struct ExploreResult {
    bool ok = true;
    uint64_t states = 0;
    uint64_t transitions = 0;
    std::string violation;
    std::vector<std::string> trail;  // moves from the initial state, "s<pid>"/"c<pid>"
};

ExploreResult explore(const Engine& initial, const ExploreConfig& cfg);

}  // namespace rme
