#pragma once

#include <functional>
#include <memory>
#include <random>
#include <unordered_map>
#include <vector>

#include "rme/machine.hpp"
#include "rme/memory.hpp"
#include "rme/world.hpp"

namespace rme {

struct DriverSpec {
    const RecoverableLock* lock = nullptr;
    int ncs_len = 1;         // local steps per NCS visit
    int cs_len = 1;          // local steps per CS hold
    int max_requests = -1;   // -1: unbounded
};

struct CrashPoint {
    int pid = 0;
    bool at_step = false;  // false: (site, occurrence); true: global step index
    int site = -1;
    int occurrence = 1;
    uint64_t step = 0;
    int batch = -1;  // >=0 groups points into one simultaneous batch
};

struct FailurePlan {
    std::vector<CrashPoint> points;
    int tau = 1 << 30;  // batch threshold: groups larger than tau are batch failures
};

struct Schedule {
    enum Kind { RoundRobin, Random, List } kind = RoundRobin;
    uint64_t seed = 1;
    int fairness = 4;        // Random: every runnable pid within fairness*n steps
    std::vector<int> list;   // List: explicit prefix, then round-robin
};

struct PassageRecord {
    int pid = 0;
    int lock = 0;
    uint64_t start_ev = 0;
    uint64_t end_ev = 0;
    bool failure_free = false;
    uint64_t rmr_cc = 0;
    uint64_t rmr_dsm = 0;
};

struct OracleViolation {
    uint64_t ev;
    int pid;
    int slot;
    int64_t seen_gen;
    int64_t cur_gen;
};

// Deterministic single-threaded interleaving engine. One step executes one
// instruction of one process; crashes happen between steps. Identical inputs
// give identical histories.
class Engine {
public:
    Engine(const World* w, std::vector<DriverSpec> drivers, int target_lock);
    Engine(const Engine& other);
    Engine& operator=(const Engine&) = delete;

    void set_schedule(Schedule s);
    void set_plan(FailurePlan p);
    void record_history(bool on) { record_ = on; }
    void set_probe(std::function<void(Engine&)> f) { probe_ = std::move(f); }

    enum class Stop { Budget, AllParked };
    Stop run(uint64_t budget);

    // Single-step interface (the explorer is its own scheduler).
    bool runnable(int pid) const { return !procs_[pid].parked; }
    int num_procs() const { return static_cast<int>(procs_.size()); }
    void step(int pid);
    void crash(int pid, int batch = -1);
    int last_gap_site(int pid) const { return procs_[pid].last_site; }

    void state_hash(StateHash& h) const;

    const World& world() const { return *world_; }
    const History& history() const { return hist_; }
    SharedMemory& mem() { return mem_; }
    const SharedMemory& mem() const { return mem_; }
    uint64_t steps() const { return steps_; }

    int cs_count(int lock) const { return book_.cs_count[lock]; }
    bool in_cs(int pid, int lock) const { return book_.in_cs[idx(pid, lock)]; }
    bool outstanding(int pid, int lock) const { return book_.outstanding[idx(pid, lock)]; }
    int satisfied(int pid) const { return book_.satisfied[pid]; }
    bool all_requests_satisfied() const;

    const std::vector<PassageRecord>& passages() const { return passage_log_; }
    const std::vector<OracleViolation>& oracle_violations() const { return oracle_; }

private:
    friend class Ctx;

    struct Proc {
        std::unique_ptr<Frame> driver;
        bool parked = false;
        int last_site = -1;        // gap site: last executed instruction since restart
        uint64_t wait = 0;         // steps since last scheduled (fairness)
    };

    // Request/segment bookkeeping, engine-side and observational.
    struct Book {
        std::vector<uint8_t> outstanding;     // (pid, lock)
        std::vector<uint8_t> passage_active;  // (pid, lock)
        std::vector<uint8_t> in_cs;           // (pid, lock)
        std::vector<int> cs_count;            // lock
        std::vector<int> generated;           // pid: requests generated on target
        std::vector<int> satisfied;           // pid: requests satisfied on target
        // target-passage rmr sampling
        std::vector<uint64_t> p_start_ev, p_cc0, p_dsm0;
    };

    size_t idx(int pid, int lock) const { return static_cast<size_t>(pid) * nlocks_ + lock; }

    void emit_instr(int pid, InstrOp op, CellId c, int site, int aux);
    void on_seg(int pid, int lock, Seg s, bool enter, int aux);
    void oracle_check(int pid, const Word& w);
    void fire_site_triggers(int pid, int site);
    void fire_step_triggers();
    void fire_point(size_t point_index);
    int choose();

    const World* world_;
    SharedMemory mem_;
    std::vector<DriverSpec> specs_;
    int target_;
    int nlocks_;

    std::vector<Proc> procs_;
    Book book_;
    History hist_;
    bool record_ = true;
    uint64_t steps_ = 0;

    Schedule sched_;
    size_t list_pos_ = 0;
    int rr_cursor_ = 0;
    std::mt19937_64 rng_;

    FailurePlan plan_;
    std::vector<uint8_t> fired_;
    std::unordered_map<int64_t, int> site_hits_;  // (pid<<32|site) -> count

    std::vector<PassageRecord> passage_log_;
    std::vector<OracleViolation> oracle_;
    std::function<void(Engine&)> probe_;
};

}  // namespace rme
