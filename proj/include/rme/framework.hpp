#pragma once

#include <memory>
#include <string>
#include <vector>

#include "rme/components.hpp"
#include "rme/machine.hpp"
#include "rme/wrlock.hpp"

namespace rme {

// The leveled target lock. Each level: a weakly recoverable queue lock as
// filter, a splitter deciding fast/slow, a dual-port arbiter merging the two
// paths, and a core that is the next level or the tournament base. A slow
// verdict is persisted per (level, process) and reset only after a clean core
// exit, so crash recovery retreads the same path. Recovery re-acquires from
// level one, skipping components whose persisted state shows they are still
// held and redoing everything past the last completed hold.
class AdaptiveLock final : public RecoverableLock {
public:
    AdaptiveLock(World& w, int levels);

    int lock_id() const override { return lock_id_; }
    std::unique_ptr<Frame> recover(int pid) const override;
    std::unique_ptr<Frame> enter(int pid) const override;
    std::unique_ptr<Frame> exit(int pid) const override;

    int levels() const { return static_cast<int>(levels_.size()); }
    const QueueLock& filter(int l) const { return *levels_[l].filter; }
    const Splitter& splitter(int l) const { return levels_[l].splitter; }
    const Arbiter& arbiter(int l) const { return *levels_[l].arb; }
    const TreeLock& base() const { return *base_; }
    CellId path_slow(int l, int pid) const { return levels_[l].path[pid]; }

    struct LvlSites {
        int chk_state, path_rd, path_w, path_reset, chk_x;
    };
    const LvlSites& lvl_sites(int l) const { return levels_[l].sites; }

private:
    friend class BaRecoverFrame;
    friend class BaEnterFrame;
    friend class BaExitFrame;

    struct Level {
        std::unique_ptr<QueueLock> filter;
        Splitter splitter;
        std::unique_ptr<Arbiter> arb;
        std::vector<CellId> path;  // per process: Bool, true = slow (persisted)
        LvlSites sites{};
    };

    int lock_id_ = -1;
    std::vector<Level> levels_;
    std::unique_ptr<TreeLock> base_;
};

// Default level count for the tournament base: its worst-case segment cost is
// O(log n), so the recursion depth follows suit.
int default_levels(int n);

}  // namespace rme
