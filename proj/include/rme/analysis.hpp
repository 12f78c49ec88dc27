#pragma once

#include <map>
#include <string>
#include <vector>

#include "rme/history.hpp"
#include "rme/passages.hpp"
#include "rme/world.hpp"

namespace rme {

struct Verdict {
    std::string name;
    enum R { Pass, Fail, Inconclusive } result = Pass;
    std::string witness;  // earliest violating point, empty on pass
    bool failed() const { return result == Fail; }
};

// ME: at most one process in the lock's CS at any point.
Verdict check_strong_me(const History& h, const World& w, int lock);

// Weak ME + responsiveness for a queue-lock instance: every point with k+1 >= 2
// simultaneous CS occupants overlaps the consequence intervals of at least k
// distinct failures that are unsafe with respect to this lock.
Verdict check_weak_me_responsive(const History& h, const World& w, int lock);

// Caller contract of a dual-port lock: never two distinct processes engaged
// on the same side at once.
Verdict check_side_contract(const History& h, const World& w, int arb_lock);

// Escalation and batch laws for the leveled lock. filter_locks is ordered by
// level. For each super-passage of the target reaching level z overlapping
// F consequence intervals (any failure, any of the given locks), requires
// z(z-1)/2 <= F; with u > 0 overlapping batch failures and z > u, requires
// (z-u)^2 overlapping non-batch failures.
struct LevelStats {
    int max_level = 1;       // over all super-passages
    int max_overlap_f = 0;   // failures overlapping the worst super-passage
};
Verdict check_level_bound(const History& h, const World& w, const std::vector<int>& filter_locks,
                          int target, int tau, LevelStats* stats = nullptr);

// SF within a finite budget: every generated request satisfied -> Pass, else
// Inconclusive. Finite histories never refute liveness.
Verdict check_liveness(const History& h, int target);

// Instruction counts per completed segment activation, keyed by lock kind.
// Counts attribute to every open segment of the process, so composite
// segments include their components' steps.
std::map<std::pair<LockKind, Seg>, int> segment_step_maxima(const History& h, const World& w);

// Steps a process takes from a crash-in-CS to its next CS entry on `lock`
// (per attempt; an intervening crash starts a new attempt). Returns the max.
int bcsr_max_steps(const History& h, int lock);

// Max level engaged per super-passage of the target, from filter segment
// markers; returns overall max.
int max_level_reached(const History& h, const std::vector<int>& filter_locks, int target);

struct CurveRow {
    std::string scenario;
    uint64_t seed = 0;
    int n = 0;
    int levels = 0;
    int f_injected = 0;
    int f_batch = 0;
    int max_level = 1;
    uint64_t max_rmr_cc = 0;
    uint64_t max_rmr_dsm = 0;
};
std::string curve_csv(const std::vector<CurveRow>& rows);

}  // namespace rme
