#pragma once

#include <memory>
#include <string>
#include <vector>

#include "rme/machine.hpp"
#include "rme/world.hpp"

namespace rme {

// Per-process node pools for one queue-lock instance: two pools of 2n slots
// each, so allocation k lands on pool position ((k-1) mod 4n)+1 and a physical
// slot repeats exactly every 4n logical allocations. inCounter/outCounter
// carry the allocated/retired tallies; snap[i][j] holds i's last snapshot of
// j's inCounter for the incremental catch-up wait.
class NodePool {
public:
    NodePool() = default;
    NodePool(World& w, const std::string& prefix);

    int n() const { return n_; }
    CellId in_counter(int pid) const { return in_[pid]; }
    CellId out_counter(int pid) const { return out_[pid]; }
    CellId snap_cell(int pid, int j) const { return snap_[static_cast<size_t>(pid) * n_ + j]; }

    int slot_for(int pid, int64_t k) const {
        return slot_base_[pid] + static_cast<int>((k - 1) % (4 * n_));
    }
    int64_t gen_for(int64_t k) const { return (k - 1) / (4 * n_) + 1; }
    CellId next_cell(int slot) const { return nodes_->info(slot).next; }
    CellId locked_cell(int slot) const { return nodes_->info(slot).locked; }
    Word node_ref(int pid, int64_t k) const { return Word::ref(slot_for(pid, k), gen_for(k)); }

    // Live pool occupancy (issued minus retired), for the space-bound report.
    int64_t live_nodes(const SharedMemory& m, int pid) const;
    int slots_per_process() const { return 4 * n_; }

    struct Sites {
        int rd_in, rd_out, rd_snap, await_out, rd_peer_in, w_snap, commit;
        int retire_rd_in, retire_rd_out, retire_w;
    };
    const Sites& sites() const { return sites_; }

    // new_node(pid): idempotent while an allocation is outstanding; otherwise
    // waits for the scanned counterpart to catch up, refreshes its snapshot,
    // then commits. Completed frame exposes the issued node ref.
    std::unique_ptr<Frame> new_node(int pid) const;
    // retire_node(pid): faults if no allocation is outstanding.
    std::unique_ptr<Frame> retire_node(int pid) const;

private:
    friend class NewNodeFrame;
    friend class RetireFrame;
    int n_ = 0;
    std::vector<CellId> in_, out_;
    std::vector<CellId> snap_;
    std::vector<int> slot_base_;
    const NodeTable* nodes_ = nullptr;
    Sites sites_{};
};

// Result access for a completed new_node frame.
const Word& new_node_result(const Frame& completed);

}  // namespace rme
