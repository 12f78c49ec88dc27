#include "rme/framework.hpp"

namespace rme {

int default_levels(int n) {
    int l = 0, p = 1;
    while (p < n) {
        p <<= 1;
        l++;
    }
    return l < 1 ? 1 : l;
}

AdaptiveLock::AdaptiveLock(World& w, int levels) {
    RME_CHECK(levels >= 1, "level count must be >= 1");
    lock_id_ = w.locks.add("target", LockKind::Target);
    levels_.resize(levels);
    for (int l = 0; l < levels; l++) {
        std::string ln = "L" + std::to_string(l + 1);
        Level& lv = levels_[l];
        lv.filter = std::make_unique<QueueLock>(w, ln + ".filter", ln + ".");
        lv.splitter = Splitter(w, ln + ".splitter", ln + ".");
        lv.arb = std::make_unique<Arbiter>(w, ln + ".arb", ln + ".ARB.");
        lv.path.resize(w.n);
        for (int i = 0; i < w.n; i++)
            lv.path[i] = w.alloc(i, Word::boolean(false), ln + ".path" + std::to_string(i));
        lv.sites.chk_state = w.sites.intern(ln + ".CHK_STATE");
        lv.sites.path_rd = w.sites.intern(ln + ".PATH_RD");
        lv.sites.path_w = w.sites.intern(ln + ".PATH_W");
        lv.sites.path_reset = w.sites.intern(ln + ".PATH_RESET");
        lv.sites.chk_x = w.sites.intern(ln + ".CHK_X");
    }
    base_ = std::make_unique<TreeLock>(w, "base", "BASE.");
}

namespace {

// Bounded repairs for every level the process is persisted into: filter
// recover (relinquish / finish exit / prep), then the level's arbiter if the
// persisted path shows a side, then deeper while the slow path continues.
class BaRecoverFrame final : public Frame {
public:
    BaRecoverFrame(const AdaptiveLock* lk, int pid) : lk_(lk), pid_(pid) {}

    bool step(Ctx& cx) override {
        for (;;) {
            switch (phase_) {
                case Ph::Start:
                    cx.seg_enter(lk_->lock_id(), Seg::Recover);
                    child_ = lk_->filter(0).recover(pid_);
                    phase_ = Ph::Filter;
                    break;
                case Ph::Chk: {
                    Word s = cx.read(lk_->filter(lvl_).state(pid_), lk_->lvl_sites(lvl_).chk_state);
                    if (s == Word::tag(TAG_FREE)) return done(cx);
                    child_ = lk_->filter(lvl_).recover(pid_);
                    phase_ = Ph::Filter;
                    return false;
                }
                case Ph::Filter:
                    if (child_->step(cx)) phase_ = Ph::Path;
                    return false;
                case Ph::Path: {
                    Word sl = cx.read(lk_->path_slow(lvl_, pid_), lk_->lvl_sites(lvl_).path_rd);
                    slow_ = sl.as_bool();
                    if (slow_) {
                        child_ = lk_->arbiter(lvl_).recover(pid_, Side::Right);
                        phase_ = Ph::Arb;
                    } else {
                        phase_ = Ph::X;
                    }
                    return false;
                }
                case Ph::X: {
                    Word xv = cx.read(lk_->splitter(lvl_).x(), lk_->lvl_sites(lvl_).chk_x);
                    if (xv == Word::pid(pid_)) {
                        child_ = lk_->arbiter(lvl_).recover(pid_, Side::Left);
                        phase_ = Ph::Arb;
                        return false;
                    }
                    return done(cx);  // not past the splitter and not slow: stop
                }
                case Ph::Arb:
                    if (child_->step(cx)) {
                        if (!slow_) return done(cx);
                        if (lvl_ < lk_->levels() - 1) {
                            lvl_++;
                            phase_ = Ph::Chk;
                        } else {
                            child_ = lk_->base().recover(pid_);
                            phase_ = Ph::Base;
                        }
                    }
                    return false;
                case Ph::Base:
                    if (child_->step(cx)) return done(cx);
                    return false;
            }
        }
    }

    std::unique_ptr<Frame> clone() const override {
        auto f = std::make_unique<BaRecoverFrame>(lk_, pid_);
        f->phase_ = phase_;
        f->lvl_ = lvl_;
        f->slow_ = slow_;
        if (child_) f->child_ = child_->clone();
        return f;
    }

    void mix(StateHash& h) const override {
        h.mix(0xba7ec0ull);
        h.mix(static_cast<uint64_t>(phase_));
        h.mix(lvl_);
        h.mix(slow_);
        if (child_) child_->mix(h); else h.mix(0x1ull);
    }

private:
    enum class Ph { Start, Chk, Filter, Path, X, Arb, Base };
    bool done(Ctx& cx) {
        cx.seg_exit(lk_->lock_id(), Seg::Recover);
        return true;
    }
    const AdaptiveLock* lk_;
    int pid_;
    Ph phase_ = Ph::Start;
    int lvl_ = 0;
    bool slow_ = false;
    std::unique_ptr<Frame> child_;
};

// Resume-aware acquisition: climb levels (filter, splitter or persisted slow
// path, core), then descend signing in at each level's arbiter. Held
// components are recognized from their persisted cells and skipped.
class BaEnterFrame final : public Frame {
public:
    BaEnterFrame(const AdaptiveLock* lk, int pid) : lk_(lk), pid_(pid) {}

    bool step(Ctx& cx) override {
        for (;;) {
            switch (phase_) {
                case Ph::Start:
                    cx.seg_enter(lk_->lock_id(), Seg::Enter);
                    phase_ = Ph::Chk;
                    break;
                case Ph::Chk: {
                    Word s = cx.read(lk_->filter(lvl_).state(pid_), lk_->lvl_sites(lvl_).chk_state);
                    if (s == Word::tag(TAG_INCS)) {
                        phase_ = Ph::Path;  // filter still held from before the crash
                    } else {
                        child_ = lk_->filter(lvl_).recover(pid_);
                        phase_ = Ph::FRec;
                    }
                    return false;
                }
                case Ph::FRec:
                    if (child_->step(cx)) {
                        child_ = lk_->filter(lvl_).enter(pid_);
                        phase_ = Ph::FEnt;
                    }
                    return false;
                case Ph::FEnt:
                    if (child_->step(cx)) phase_ = Ph::Path;
                    return false;
                case Ph::Path: {
                    Word sl = cx.read(lk_->path_slow(lvl_, pid_), lk_->lvl_sites(lvl_).path_rd);
                    if (sl.as_bool()) {
                        go_deeper();
                    } else {
                        child_ = lk_->splitter(lvl_).navigate(pid_);
                        phase_ = Ph::Nav;
                    }
                    return false;
                }
                case Ph::Nav:
                    if (child_->step(cx)) {
                        bool fast = splitter_took_fast(*child_);
                        if (fast) {
                            cur_ = lvl_;
                            child_ = lk_->arbiter(cur_).enter(pid_, Side::Left);
                            phase_ = Ph::Desc;
                        } else {
                            phase_ = Ph::PathW;  // diverted: persist the slow verdict
                        }
                    }
                    return false;
                case Ph::PathW:
                    cx.write(lk_->path_slow(lvl_, pid_), Word::boolean(true),
                             lk_->lvl_sites(lvl_).path_w);
                    go_deeper();
                    return false;
                case Ph::BaseRec:
                    if (child_->step(cx)) {
                        child_ = lk_->base().enter(pid_);
                        phase_ = Ph::BaseEnt;
                    }
                    return false;
                case Ph::BaseEnt:
                    if (child_->step(cx)) {
                        cur_ = lk_->levels() - 1;
                        child_ = lk_->arbiter(cur_).enter(pid_, Side::Right);
                        phase_ = Ph::Desc;
                    }
                    return false;
                case Ph::Desc:
                    if (child_->step(cx)) {
                        if (cur_ == 0) {
                            cx.seg_exit(lk_->lock_id(), Seg::Enter);
                            cx.seg_enter(lk_->lock_id(), Seg::CS);
                            return true;
                        }
                        cur_--;
                        child_ = lk_->arbiter(cur_).enter(pid_, Side::Right);
                    }
                    return false;
            }
        }
    }

    std::unique_ptr<Frame> clone() const override {
        auto f = std::make_unique<BaEnterFrame>(lk_, pid_);
        f->phase_ = phase_;
        f->lvl_ = lvl_;
        f->cur_ = cur_;
        if (child_) f->child_ = child_->clone();
        return f;
    }

    void mix(StateHash& h) const override {
        h.mix(0xbae47ull);
        h.mix(static_cast<uint64_t>(phase_));
        h.mix(lvl_);
        h.mix(cur_);
        if (child_) child_->mix(h); else h.mix(0x1ull);
    }

private:
    enum class Ph { Start, Chk, FRec, FEnt, Path, Nav, PathW, BaseRec, BaseEnt, Desc };
    void go_deeper() {
        if (lvl_ < lk_->levels() - 1) {
            lvl_++;
            phase_ = Ph::Chk;
        } else {
            child_ = lk_->base().recover(pid_);
            phase_ = Ph::BaseRec;
        }
    }
    const AdaptiveLock* lk_;
    int pid_;
    Ph phase_ = Ph::Start;
    int lvl_ = 0;
    int cur_ = 0;
    std::unique_ptr<Frame> child_;
};

// Release in reverse acquisition order: per level the arbiter first; at the
// top the base or the splitter; filters last on the way back down. The slow
// verdict resets right after the core exit completes.
class BaExitFrame final : public Frame {
public:
    BaExitFrame(const AdaptiveLock* lk, int pid) : lk_(lk), pid_(pid) {}

    bool step(Ctx& cx) override {
        for (;;) {
            switch (phase_) {
                case Ph::Start:
                    cx.seg_exit(lk_->lock_id(), Seg::CS);
                    cx.seg_enter(lk_->lock_id(), Seg::Exit);
                    phase_ = Ph::Path;
                    break;
                case Ph::Path: {
                    Word sl = cx.read(lk_->path_slow(lvl_, pid_), lk_->lvl_sites(lvl_).path_rd);
                    slow_ = sl.as_bool();
                    child_ = lk_->arbiter(lvl_).exit(pid_, slow_ ? Side::Right : Side::Left);
                    phase_ = Ph::Arb;
                    return false;
                }
                case Ph::Arb:
                    if (child_->step(cx)) {
                        if (slow_) {
                            if (lvl_ < lk_->levels() - 1) {
                                lvl_++;
                                phase_ = Ph::Path;
                            } else {
                                child_ = lk_->base().exit(pid_);
                                phase_ = Ph::Base;
                            }
                        } else {
                            child_ = lk_->splitter(lvl_).release(pid_);
                            phase_ = Ph::Split;
                        }
                    }
                    return false;
                case Ph::Base:
                    if (child_->step(cx)) phase_ = Ph::Reset;
                    return false;
                case Ph::Split:
                    if (child_->step(cx)) {
                        child_ = lk_->filter(lvl_).exit(pid_);
                        phase_ = Ph::Filter;
                    }
                    return false;
                case Ph::Reset:
                    cx.write(lk_->path_slow(lvl_, pid_), Word::boolean(false),
                             lk_->lvl_sites(lvl_).path_reset);
                    child_ = lk_->filter(lvl_).exit(pid_);
                    phase_ = Ph::Filter;
                    return false;
                case Ph::Filter:
                    if (child_->step(cx)) {
                        if (lvl_ == 0) {
                            cx.seg_exit(lk_->lock_id(), Seg::Exit);
                            return true;
                        }
                        lvl_--;
                        phase_ = Ph::Reset;  // every level below the top is slow
                    }
                    return false;
            }
        }
    }

    std::unique_ptr<Frame> clone() const override {
        auto f = std::make_unique<BaExitFrame>(lk_, pid_);
        f->phase_ = phase_;
        f->lvl_ = lvl_;
        f->slow_ = slow_;
        if (child_) f->child_ = child_->clone();
        return f;
    }

    void mix(StateHash& h) const override {
        h.mix(0xbae817ull);
        h.mix(static_cast<uint64_t>(phase_));
        h.mix(lvl_);
        h.mix(slow_);
        if (child_) child_->mix(h); else h.mix(0x1ull);
    }

private:
    enum class Ph { Start, Path, Arb, Base, Split, Reset, Filter };
    const AdaptiveLock* lk_;
    int pid_;
    Ph phase_ = Ph::Start;
    int lvl_ = 0;
    bool slow_ = false;
    std::unique_ptr<Frame> child_;
};

}  // namespace

std::unique_ptr<Frame> AdaptiveLock::recover(int pid) const {
    return std::make_unique<BaRecoverFrame>(this, pid);
}
std::unique_ptr<Frame> AdaptiveLock::enter(int pid) const {
    return std::make_unique<BaEnterFrame>(this, pid);
}
std::unique_ptr<Frame> AdaptiveLock::exit(int pid) const {
    return std::make_unique<BaExitFrame>(this, pid);
}

}  // namespace rme
