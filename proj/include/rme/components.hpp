#pragma once

#include <memory>
#include <string>
#include <vector>

#include "rme/machine.hpp"
#include "rme/world.hpp"

namespace rme {

// Biased try lock over one shared integer cell: CAS(x, 0 -> pid) then re-read.
// The re-read, not the CAS outcome, decides the path, so a crash-retry is
// idempotent and the splitter has no sensitive instruction. At most one
// process occupies the fast path at a time.
class Splitter {
public:
    Splitter() = default;
    Splitter(World& w, const std::string& name, const std::string& prefix);

    int lock_id() const { return lock_id_; }
    CellId x() const { return x_; }

    // Completed frame exposes took_fast(). Emits the fast-path occupancy
    // markers (CS of this lock id).
    std::unique_ptr<Frame> navigate(int pid) const;
    std::unique_ptr<Frame> release(int pid) const;

    struct Sites { int cas, rd, release; };
    const Sites& sites() const { return sites_; }

private:
    int lock_id_ = -1;
    CellId x_;
    Sites sites_{};
};

bool splitter_took_fast(const Frame& completed_navigate);

enum class Side : int { Left = 0, Right = 1 };
inline Side other(Side s) { return s == Side::Left ? Side::Right : Side::Left; }
inline int side_tag(Side s) { return s == Side::Left ? TAG_LEFT : TAG_RIGHT; }

// Dual-port strongly recoverable two-party lock. Per side: a flag, an
// occupant cell Packed(state,pid) persisted in single instructions, and an
// announce cell publishing the waiter's own spin cell so all waiting is local
// in the DSM model. Callers guarantee at most one process per side at a time.
// Every instruction is idempotent under crash-rerun; no sensitive sites.
class Arbiter {
public:
    Arbiter() = default;
    Arbiter(World& w, const std::string& name, const std::string& prefix);

    int lock_id() const { return lock_id_; }

    std::unique_ptr<Frame> recover(int pid, Side s) const;  // completes a Leaving exit
    std::unique_ptr<Frame> enter(int pid, Side s) const;
    std::unique_ptr<Frame> exit(int pid, Side s) const;

    CellId occupant(Side s) const { return occupant_[static_cast<int>(s)]; }
    CellId flag(Side s) const { return flag_[static_cast<int>(s)]; }
    CellId turn() const { return turn_; }
    CellId announce(Side s) const { return announce_[static_cast<int>(s)]; }
    CellId spin(int pid) const { return spin_[pid]; }

    struct Sites {
        int occ_rd, occ_try, occ_incs, occ_leave, occ_free;
        int spin_reset, announce_w, flag_up, turn_w;
        int nudge_rd, nudge_w;
        int chk_flag, chk_turn, spin_rd, spin_clr;
        int exit_flag_down, exit_ann_rd, exit_signal;
    };
    const Sites& sites() const { return sites_; }

private:
    friend class ArbEnterFrame;
    friend class ArbExitFrame;
    friend class ArbRecoverFrame;
    int lock_id_ = -1;
    CellId flag_[2], occupant_[2], announce_[2];
    CellId turn_;
    std::vector<CellId> spin_;
    Sites sites_{};
};

// Strongly recoverable tournament tree over the arbiters: leaf-to-root climb,
// root-to-leaf release, recovery resumes from the persisted occupant cells.
// Serves as the non-adaptive base lock; all segments are O(log n).
class TreeLock final : public RecoverableLock {
public:
    TreeLock(World& w, const std::string& name, const std::string& prefix);

    int lock_id() const override { return lock_id_; }
    std::unique_ptr<Frame> recover(int pid) const override;
    std::unique_ptr<Frame> enter(int pid) const override;
    std::unique_ptr<Frame> exit(int pid) const override;

    int num_nodes() const { return static_cast<int>(arbs_.size()); }
    const Arbiter& node(int i) const { return *arbs_[i]; }  // heap order, root = 0

    // Path of heap indices from leaf parent to root, with the side taken.
    struct Hop { int node; Side side; };
    const std::vector<Hop>& path(int pid) const { return paths_[pid]; }

private:
    int lock_id_ = -1;
    int site_nop_ = -1;
    std::vector<std::unique_ptr<Arbiter>> arbs_;
    std::vector<std::vector<Hop>> paths_;
};

}  // namespace rme
