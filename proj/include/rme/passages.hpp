#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rme/engine.hpp"
#include "rme/history.hpp"
#include "rme/world.hpp"

namespace rme {

// One request's life on one lock: generated at the first Recover/Enter of the
// super-passage, satisfied by the completed failure-free Exit.
struct Request {
    int pid = -1;
    int lock = -1;
    uint64_t gen_ev = 0;
    uint64_t sat_ev = 0;
    bool satisfied = false;
};

std::vector<Request> requests_of(const History& h, int lock);

// Consequence interval of each failure with respect to one lock: from the
// crash onset until every request on the lock generated before it is
// satisfied, or the end of the history.
struct CInterval {
    uint64_t crash_ev = 0;
    int crash_pid = -1;
    int batch = -1;
    uint64_t start = 0;
    uint64_t end = 0;
};

std::vector<CInterval> consequence_intervals(const History& h, int lock);

// CS occupancy walk: calls visit(event_index, occupant_pids) after every
// event that changes the occupancy of `lock`.
void walk_cs_occupancy(const History& h, int lock,
                       const std::function<void(uint64_t, const std::vector<int>&)>& visit);

std::string passages_csv(const std::vector<PassageRecord>& rows, const World& w);
std::string intervals_csv(const History& h, const World& w);

}  // namespace rme
