#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rme/analysis.hpp"
#include "rme/engine.hpp"
#include "rme/framework.hpp"
#include "rme/wrlock.hpp"

namespace rme {

// A full run configuration. Together with the code version it determines a
// run bit-for-bit.
struct ScenarioConfig {
    int n = 2;
    std::string lock = "ba";              // "ba" (leveled) | "wr" (queue lock directly)
    std::string base = "tournament";      // base lock kind for "ba"
    int levels_override = -1;             // -1: default T(n) levels
    std::string schedule = "round-robin";  // "round-robin" | "random"
    uint64_t seed = 1;
    int fairness = 4;
    std::vector<int> sched_prefix;  // scripted pid prefix before the schedule
    uint64_t budget = 20000;
    int cs_len = 1;
    int ncs_len = 1;
    int requests = -1;  // per process; -1 unbounded
    int tau = 1 << 30;  // batch threshold
    struct Crash {
        int pid = 0;
        std::string site;  // empty: global-step trigger
        int occurrence = 1;
        uint64_t step = 0;
        int batch = -1;
    };
    std::vector<Crash> crashes;
    std::string name = "run";

    std::string to_json() const;
    static ScenarioConfig from_json(const std::string& text);  // faults on bad config
};

// Owns the world and lock instances for one configuration.
struct Scenario {
    std::unique_ptr<World> world;
    std::unique_ptr<AdaptiveLock> ba;
    std::unique_ptr<QueueLock> wr;
    const RecoverableLock* target = nullptr;
    int target_id = -1;
    std::vector<int> filter_ids;  // by level; for "wr" the lock itself
    std::vector<int> arb_ids;
    std::vector<int> splitter_ids;
    int levels = 1;

    static Scenario build(const ScenarioConfig& cfg);
    Engine make_engine(const ScenarioConfig& cfg) const;
    FailurePlan make_plan(const ScenarioConfig& cfg) const;  // validates site names
};

struct SubqueueStats {
    uint64_t probes = 0;       // points with >= 2 CS occupants examined
    int max_occupancy = 0;
    int max_chains = 0;
    bool ok = true;            // occupants always in pairwise distinct chains
    std::string witness;
};

struct RunResult {
    ScenarioConfig cfg;
    Engine::Stop stop = Engine::Stop::Budget;
    History history;
    std::vector<PassageRecord> passages;
    std::vector<Verdict> verdicts;
    SubqueueStats subqueues;
    uint64_t oracle_violations = 0;
    int max_level = 1;
    uint64_t max_passage_cc = 0;
    uint64_t max_passage_dsm = 0;
    int levels = 1;

    bool safety_failed() const;
    bool inconclusive() const;
};

RunResult run_scenario(const ScenarioConfig& cfg);

// Trace = magic line + config line + events; replay re-runs the embedded
// config and byte-compares.
std::string make_trace(const ScenarioConfig& cfg, const History& h, const World& w);
struct TraceFile {
    ScenarioConfig cfg;
    std::string events;
};
TraceFile parse_trace(const std::string& text);

// Sweep: one run per (F, seed); crashes generated deterministically from the
// seed, mixed between sensitive-gap triggers and arbitrary step triggers.
struct SweepOutcome {
    std::vector<CurveRow> rows;
    bool safety_ok = true;
    std::string witness;
    std::map<std::pair<LockKind, Seg>, int> segment_maxima;
    int bcsr_max = 0;
};
SweepOutcome sweep(const ScenarioConfig& tmpl, const std::vector<int>& f_values,
                   const std::vector<uint64_t>& seeds);

std::string verdicts_json(const RunResult& r);

}  // namespace rme
