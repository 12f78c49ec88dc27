#pragma once

#include <memory>
#include <string>
#include <vector>

#include "rme/machine.hpp"
#include "rme/memrec.hpp"
#include "rme/world.hpp"

namespace rme {

// Weakly recoverable FCFS queue lock. Requests are queue nodes appended with
// FAS on tail; exit is wait-free via a CAS handshake on the node's next field
// (a self-reference is the "lock free" special value). The FAS-then-persist
// pair is two distinct instructions; the gap after FAS_TAIL is the lock's
// only sensitive site. A process that may have crashed in that gap
// relinquishes its node, hands the grant to any linked successor, and retries
// with a fresh node, possibly leaving a disconnected sub-queue behind.
class QueueLock final : public RecoverableLock {
public:
    QueueLock(World& w, const std::string& name, const std::string& prefix);

    int lock_id() const override { return lock_id_; }
    std::unique_ptr<Frame> recover(int pid) const override;
    std::unique_ptr<Frame> enter(int pid) const override;
    std::unique_ptr<Frame> exit(int pid) const override;

    struct Sites {
        int rd_state, rd_mine, rd_pred, rd_next;
        int w_mine_null, w_mine, w_pred, w_state_init, w_state_trying, w_state_incs,
            w_state_leaving, w_state_free;
        int recover_next_cas, recover_signal;
        int init_next, init_locked;
        int fas_tail, persist_pred, link_cas, rd_pred_next, await_locked;
        int exit_tail_cas, exit_next_cas, signal_write;
    };
    const Sites& sites() const { return sites_; }
    const NodePool& pool() const { return pool_; }

    CellId tail() const { return tail_; }
    CellId state(int i) const { return state_[i]; }
    CellId mine(int i) const { return mine_[i]; }
    CellId pred(int i) const { return pred_[i]; }

    // Reconstructs the maximal node chains implied by next links and persisted
    // pred values. Faults on a stale (reissued) reference.
    struct Chains {
        int chains = 0;            // disjoint chains among live nodes
        int occupant_chains = 0;   // distinct chains holding a CS occupant's node
    };
    Chains derive_subqueues(const SharedMemory& m, const std::vector<int>& cs_pids) const;

private:
    friend class WrRecoverFrame;
    friend class WrEnterFrame;
    friend class WrExitFrame;

    const World* world_;
    int lock_id_;
    CellId tail_;
    std::vector<CellId> state_, mine_, pred_;
    NodePool pool_;
    Sites sites_{};
};

}  // namespace rme
