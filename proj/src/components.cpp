#include "rme/components.hpp"

namespace rme {

// ---------------------------------------------------------------- Splitter

Splitter::Splitter(World& w, const std::string& name, const std::string& prefix) {
    lock_id_ = w.locks.add(name, LockKind::Splitter);
    x_ = w.alloc(kGlobalHome, Word::integer(0), prefix + "x");
    sites_.cas = w.sites.intern(prefix + "SPLIT_CAS");
    sites_.rd = w.sites.intern(prefix + "SPLIT_RD");
    sites_.release = w.sites.intern(prefix + "SPLIT_RELEASE");
}

namespace {

class SplitNavFrame final : public Frame {
public:
    SplitNavFrame(const Splitter* sp, int pid) : sp_(sp), pid_(pid) {}

    bool step(Ctx& cx) override {
        switch (pc_) {
            case 0:
                cx.cas(sp_->x(), Word::integer(0), Word::pid(pid_), sp_->sites().cas);
                pc_ = 1;
                return false;
            case 1: {
                // the re-read decides, so a crash-rerun of the CAS is harmless
                Word v = cx.read(sp_->x(), sp_->sites().rd);
                fast_ = (v == Word::pid(pid_));
                if (fast_) cx.seg_enter(sp_->lock_id(), Seg::CS);
                return true;
            }
        }
        sim_fault("splitter nav pc");
    }

    std::unique_ptr<Frame> clone() const override {
        auto f = std::make_unique<SplitNavFrame>(sp_, pid_);
        f->pc_ = pc_;
        f->fast_ = fast_;
        return f;
    }

    void mix(StateHash& h) const override {
        h.mix(0x59ull);
        h.mix(pc_);
        h.mix(fast_);
    }

    bool fast() const { return fast_; }

private:
    const Splitter* sp_;
    int pid_;
    int pc_ = 0;
    bool fast_ = false;
};

class SplitReleaseFrame final : public Frame {
public:
    SplitReleaseFrame(const Splitter* sp, int pid) : sp_(sp), pid_(pid) {}

    bool step(Ctx& cx) override {
        cx.seg_exit(sp_->lock_id(), Seg::CS);
        cx.cas(sp_->x(), Word::pid(pid_), Word::integer(0), sp_->sites().release);
        return true;
    }

    std::unique_ptr<Frame> clone() const override {
        return std::make_unique<SplitReleaseFrame>(sp_, pid_);
    }

    void mix(StateHash& h) const override { h.mix(0x5eull); }

private:
    const Splitter* sp_;
    int pid_;
};

}  // namespace

std::unique_ptr<Frame> Splitter::navigate(int pid) const {
    return std::make_unique<SplitNavFrame>(this, pid);
}
std::unique_ptr<Frame> Splitter::release(int pid) const {
    return std::make_unique<SplitReleaseFrame>(this, pid);
}
bool splitter_took_fast(const Frame& f) { return static_cast<const SplitNavFrame&>(f).fast(); }

// ---------------------------------------------------------------- Arbiter

Arbiter::Arbiter(World& w, const std::string& name, const std::string& prefix) {
    lock_id_ = w.locks.add(name, LockKind::Arbiter);
    for (int s = 0; s < 2; s++) {
        const char* sn = s == 0 ? "L" : "R";
        flag_[s] = w.alloc(kGlobalHome, Word::boolean(false), prefix + "flag" + sn);
        occupant_[s] = w.alloc(kGlobalHome, Word::packed(TAG_FREE, -1), prefix + "occ" + sn);
        announce_[s] = w.alloc(kGlobalHome, Word::null(), prefix + "ann" + sn);
    }
    turn_ = w.alloc(kGlobalHome, Word::tag(TAG_LEFT), prefix + "turn");
    spin_.resize(w.n);
    for (int i = 0; i < w.n; i++)
        spin_[i] = w.alloc(i, Word::boolean(false), prefix + "spin" + std::to_string(i));
    sites_.occ_rd = w.sites.intern(prefix + "OCC_RD");
    sites_.occ_try = w.sites.intern(prefix + "OCC_TRY");
    sites_.occ_incs = w.sites.intern(prefix + "OCC_INCS");
    sites_.occ_leave = w.sites.intern(prefix + "OCC_LEAVE");
    sites_.occ_free = w.sites.intern(prefix + "OCC_FREE");
    sites_.spin_reset = w.sites.intern(prefix + "SPIN_RESET");
    sites_.announce_w = w.sites.intern(prefix + "ANNOUNCE_W");
    sites_.flag_up = w.sites.intern(prefix + "FLAG_UP");
    sites_.turn_w = w.sites.intern(prefix + "TURN_W");
    sites_.nudge_rd = w.sites.intern(prefix + "NUDGE_RD");
    sites_.nudge_w = w.sites.intern(prefix + "NUDGE_W");
    sites_.chk_flag = w.sites.intern(prefix + "CHK_FLAG");
    sites_.chk_turn = w.sites.intern(prefix + "CHK_TURN");
    sites_.spin_rd = w.sites.intern(prefix + "SPIN_RD");
    sites_.spin_clr = w.sites.intern(prefix + "SPIN_CLR");
    sites_.exit_flag_down = w.sites.intern(prefix + "EXIT_FLAG_DOWN");
    sites_.exit_ann_rd = w.sites.intern(prefix + "EXIT_ANN_RD");
    sites_.exit_signal = w.sites.intern(prefix + "EXIT_SIGNAL");
}

namespace {

// Shared tail of exit: flag down, wake any published waiter on the other
// side, mark the side free. Used by exit and by the Leaving repair.
struct ExitSteps {
    int pc = 0;
    Word ann;

    // returns true when finished; issues exactly one instruction per call
    bool step(Ctx& cx, const Arbiter* a, int /*pid*/, Side s) {
        const auto& st = a->sites();
        switch (pc) {
            case 0:
                cx.write(a->flag(s), Word::boolean(false), st.exit_flag_down);
                pc = 1;
                return false;
            case 1:
                ann = cx.read(a->announce(other(s)), st.exit_ann_rd);
                pc = (ann.kind == WKind::CellRef) ? 2 : 3;
                return false;
            case 2:
                cx.write(CellId{static_cast<int32_t>(ann.a)}, Word::boolean(true), st.exit_signal);
                pc = 3;
                return false;
            case 3:
                cx.write(a->occupant(s), Word::packed(TAG_FREE, -1), st.occ_free);
                return true;
        }
        sim_fault("arb exit steps pc");
    }
    void mix(StateHash& h) const {
        h.mix(pc);
        h.mix_word(ann);
    }
};

class ArbRecoverFrame final : public Frame {
public:
    ArbRecoverFrame(const Arbiter* a, int pid, Side s) : a_(a), pid_(pid), s_(s) {}

    bool step(Ctx& cx) override {
        if (pc_ == 0) {
            cx.seg_enter(a_->lock_id(), Seg::Recover, static_cast<int>(s_));
            Word oc = cx.read(a_->occupant(s_), a_->sites().occ_rd);
            if (oc == Word::packed(TAG_LEAVING, pid_)) {
                pc_ = 1;
                return false;
            }
            cx.seg_exit(a_->lock_id(), Seg::Recover, static_cast<int>(s_));
            return true;
        }
        if (exit_.step(cx, a_, pid_, s_)) {
            cx.seg_exit(a_->lock_id(), Seg::Recover, static_cast<int>(s_));
            return true;
        }
        return false;
    }

    std::unique_ptr<Frame> clone() const override {
        auto f = std::make_unique<ArbRecoverFrame>(a_, pid_, s_);
        f->pc_ = pc_;
        f->exit_ = exit_;
        return f;
    }

    void mix(StateHash& h) const override {
        h.mix(0xa7ecull);
        h.mix(pc_);
        h.mix(static_cast<uint64_t>(s_));
        exit_.mix(h);
    }

private:
    const Arbiter* a_;
    int pid_;
    Side s_;
    int pc_ = 0;
    ExitSteps exit_;
};

class ArbEnterFrame final : public Frame {
public:
    ArbEnterFrame(const Arbiter* a, int pid, Side s) : a_(a), pid_(pid), s_(s) {}

    bool step(Ctx& cx) override {
        const auto& st = a_->sites();
        switch (pc_) {
            case 0: {
                cx.seg_enter(a_->lock_id(), Seg::Enter, static_cast<int>(s_));
                Word oc = cx.read(a_->occupant(s_), st.occ_rd);
                if (oc == Word::packed(TAG_INCS, pid_)) {  // crashed holding: BCSR
                    return acquired_mark(cx, false);
                }
                pc_ = (oc == Word::packed(TAG_LEAVING, pid_)) ? 20 : 1;
                return false;
            }
            case 1:
                cx.write(a_->spin(pid_), Word::boolean(false), st.spin_reset);
                pc_ = 2;
                return false;
            case 2:
                cx.write(a_->announce(s_), Word::cell_ref(a_->spin(pid_).v), st.announce_w);
                pc_ = 3;
                return false;
            case 3:
                cx.write(a_->occupant(s_), Word::packed(TAG_TRYING, pid_), st.occ_try);
                pc_ = 4;
                return false;
            case 4:
                cx.write(a_->flag(s_), Word::boolean(true), st.flag_up);
                pc_ = 5;
                return false;
            case 5:
                cx.write(a_->turn(), Word::tag(side_tag(s_)), st.turn_w);
                pc_ = 6;
                return false;
            case 6: {
                // priority moved to the other side; wake it for a re-check
                Word aw = cx.read(a_->announce(other(s_)), st.nudge_rd);
                if (aw.kind == WKind::CellRef) {
                    nudge_ = aw;
                    pc_ = 7;
                } else {
                    pc_ = 8;
                }
                return false;
            }
            case 7:
                cx.write(CellId{static_cast<int32_t>(nudge_.a)}, Word::boolean(true), st.nudge_w);
                pc_ = 8;
                return false;
            case 8: {
                Word f = cx.read(a_->flag(other(s_)), st.chk_flag);
                if (!f.as_bool()) return acquired(cx);
                pc_ = 9;
                return false;
            }
            case 9: {
                Word t = cx.read(a_->turn(), st.chk_turn);
                if (t == Word::tag(side_tag(other(s_)))) return acquired(cx);
                pc_ = 10;
                return false;
            }
            case 10: {  // local spin on own cell until a signal arrives
                Word sp = cx.read(a_->spin(pid_), st.spin_rd);
                if (!sp.as_bool()) return false;
                pc_ = 11;
                return false;
            }
            case 11:
                cx.write(a_->spin(pid_), Word::boolean(false), st.spin_clr);
                pc_ = 8;
                return false;
            case 12:
                cx.write(a_->occupant(s_), Word::packed(TAG_INCS, pid_), st.occ_incs);
                cx.seg_exit(a_->lock_id(), Seg::Enter, static_cast<int>(s_));
                cx.seg_enter(a_->lock_id(), Seg::CS, static_cast<int>(s_));
                return true;
            case 20:  // stray Leaving (missed repair): finish the exit, then enter
                if (exit_.step(cx, a_, pid_, s_)) pc_ = 1;
                return false;
        }
        sim_fault("arb enter pc");
    }

    std::unique_ptr<Frame> clone() const override {
        auto f = std::make_unique<ArbEnterFrame>(a_, pid_, s_);
        f->pc_ = pc_;
        f->nudge_ = nudge_;
        f->exit_ = exit_;
        return f;
    }

    void mix(StateHash& h) const override {
        h.mix(0xa7e4ull);
        h.mix(pc_);
        h.mix(static_cast<uint64_t>(s_));
        h.mix_word(nudge_);
        exit_.mix(h);
    }

private:
    bool acquired(Ctx&) {
        pc_ = 12;  // persist InCS on the next step
        return false;
    }
    bool acquired_mark(Ctx& cx, bool) {
        cx.seg_exit(a_->lock_id(), Seg::Enter, static_cast<int>(s_));
        cx.seg_enter(a_->lock_id(), Seg::CS, static_cast<int>(s_));
        return true;
    }

    const Arbiter* a_;
    int pid_;
    Side s_;
    int pc_ = 0;
    Word nudge_;
    ExitSteps exit_;
};

class ArbExitFrame final : public Frame {
public:
    ArbExitFrame(const Arbiter* a, int pid, Side s) : a_(a), pid_(pid), s_(s) {}

    bool step(Ctx& cx) override {
        if (pc_ == 0) {
            cx.seg_exit(a_->lock_id(), Seg::CS, static_cast<int>(s_));
            cx.seg_enter(a_->lock_id(), Seg::Exit, static_cast<int>(s_));
            cx.write(a_->occupant(s_), Word::packed(TAG_LEAVING, pid_), a_->sites().occ_leave);
            pc_ = 1;
            return false;
        }
        if (exit_.step(cx, a_, pid_, s_)) {
            cx.seg_exit(a_->lock_id(), Seg::Exit, static_cast<int>(s_));
            return true;
        }
        return false;
    }

    std::unique_ptr<Frame> clone() const override {
        auto f = std::make_unique<ArbExitFrame>(a_, pid_, s_);
        f->pc_ = pc_;
        f->exit_ = exit_;
        return f;
    }

    void mix(StateHash& h) const override {
        h.mix(0xa7e8ull);
        h.mix(pc_);
        h.mix(static_cast<uint64_t>(s_));
        exit_.mix(h);
    }

private:
    const Arbiter* a_;
    int pid_;
    Side s_;
    int pc_ = 0;
    ExitSteps exit_;
};

}  // namespace

std::unique_ptr<Frame> Arbiter::recover(int pid, Side s) const {
    return std::make_unique<ArbRecoverFrame>(this, pid, s);
}
std::unique_ptr<Frame> Arbiter::enter(int pid, Side s) const {
    return std::make_unique<ArbEnterFrame>(this, pid, s);
}
std::unique_ptr<Frame> Arbiter::exit(int pid, Side s) const {
    return std::make_unique<ArbExitFrame>(this, pid, s);
}

// ---------------------------------------------------------------- TreeLock

namespace {
int next_pow2(int n) {
    int p = 1;
    while (p < n) p <<= 1;
    return p;
}
}  // namespace

TreeLock::TreeLock(World& w, const std::string& name, const std::string& prefix) {
    lock_id_ = w.locks.add(name, LockKind::Tournament);
    site_nop_ = w.sites.intern(prefix + "NOP");
    int nn = next_pow2(w.n);
    int nodes = nn - 1;
    arbs_.reserve(nodes);
    for (int h = 1; h <= nodes; h++)
        arbs_.push_back(std::make_unique<Arbiter>(w, name + ".n" + std::to_string(h),
                                                  prefix + "N" + std::to_string(h) + "."));
    paths_.resize(w.n);
    for (int p = 0; p < w.n; p++) {
        int u = nn + p;
        while (u > 1) {
            int v = u / 2;
            paths_[p].push_back({v - 1, (u % 2 == 0) ? Side::Left : Side::Right});
            u = v;
        }
    }
}

namespace {

// Generic runner over the tree path; phase logic differs per segment.
class TreeRecoverFrame final : public Frame {
public:
    TreeRecoverFrame(const TreeLock* t, int pid, int nop_site)
        : t_(t), pid_(pid), nop_(nop_site) {}

    bool step(Ctx& cx) override {
        const auto& path = t_->path(pid_);
        if (pc_ == 0) {
            cx.seg_enter(t_->lock_id(), Seg::Recover);
            pc_ = 1;
            if (path.empty()) {
                cx.local(nop_);
                cx.seg_exit(t_->lock_id(), Seg::Recover);
                return true;
            }
            child_ = t_->node(path[0].node).recover(pid_, path[0].side);
        }
        if (child_->step(cx)) {
            hop_++;
            if (hop_ == static_cast<int>(path.size())) {
                cx.seg_exit(t_->lock_id(), Seg::Recover);
                return true;
            }
            child_ = t_->node(path[hop_].node).recover(pid_, path[hop_].side);
        }
        return false;
    }

    std::unique_ptr<Frame> clone() const override {
        auto f = std::make_unique<TreeRecoverFrame>(t_, pid_, nop_);
        f->pc_ = pc_;
        f->hop_ = hop_;
        if (child_) f->child_ = child_->clone();
        return f;
    }

    void mix(StateHash& h) const override {
        h.mix(0x7ec0ull);
        h.mix(pc_);
        h.mix(hop_);
        if (child_) child_->mix(h); else h.mix(0x1ull);
    }

private:
    const TreeLock* t_;
    int pid_;
    int nop_;
    int pc_ = 0;
    int hop_ = 0;
    std::unique_ptr<Frame> child_;
};

class TreeEnterFrame final : public Frame {
public:
    TreeEnterFrame(const TreeLock* t, int pid, int nop_site)
        : t_(t), pid_(pid), nop_(nop_site) {}

    bool step(Ctx& cx) override {
        const auto& path = t_->path(pid_);
        if (pc_ == 0) {
            cx.seg_enter(t_->lock_id(), Seg::Enter);
            pc_ = 1;
            if (path.empty()) {
                cx.local(nop_);
                finish(cx);
                return true;
            }
            child_ = t_->node(path[0].node).enter(pid_, path[0].side);
        }
        if (child_->step(cx)) {
            hop_++;
            if (hop_ == static_cast<int>(path.size())) {
                finish(cx);
                return true;
            }
            child_ = t_->node(path[hop_].node).enter(pid_, path[hop_].side);
        }
        return false;
    }

    std::unique_ptr<Frame> clone() const override {
        auto f = std::make_unique<TreeEnterFrame>(t_, pid_, nop_);
        f->pc_ = pc_;
        f->hop_ = hop_;
        if (child_) f->child_ = child_->clone();
        return f;
    }

    void mix(StateHash& h) const override {
        h.mix(0x7ee4ull);
        h.mix(pc_);
        h.mix(hop_);
        if (child_) child_->mix(h); else h.mix(0x1ull);
    }

private:
    void finish(Ctx& cx) {
        cx.seg_exit(t_->lock_id(), Seg::Enter);
        cx.seg_enter(t_->lock_id(), Seg::CS);
    }
    const TreeLock* t_;
    int pid_;
    int nop_;
    int pc_ = 0;
    int hop_ = 0;
    std::unique_ptr<Frame> child_;
};

class TreeExitFrame final : public Frame {
public:
    TreeExitFrame(const TreeLock* t, int pid, int nop_site) : t_(t), pid_(pid), nop_(nop_site) {}

    bool step(Ctx& cx) override {
        const auto& path = t_->path(pid_);
        if (pc_ == 0) {
            cx.seg_exit(t_->lock_id(), Seg::CS);
            cx.seg_enter(t_->lock_id(), Seg::Exit);
            pc_ = 1;
            if (path.empty()) {
                cx.local(nop_);
                cx.seg_exit(t_->lock_id(), Seg::Exit);
                return true;
            }
            hop_ = static_cast<int>(path.size()) - 1;  // root first
            child_ = t_->node(path[hop_].node).exit(pid_, path[hop_].side);
        }
        if (child_->step(cx)) {
            hop_--;
            if (hop_ < 0) {
                cx.seg_exit(t_->lock_id(), Seg::Exit);
                return true;
            }
            child_ = t_->node(path[hop_].node).exit(pid_, path[hop_].side);
        }
        return false;
    }

    std::unique_ptr<Frame> clone() const override {
        auto f = std::make_unique<TreeExitFrame>(t_, pid_, nop_);
        f->pc_ = pc_;
        f->hop_ = hop_;
        if (child_) f->child_ = child_->clone();
        return f;
    }

    void mix(StateHash& h) const override {
        h.mix(0x7ee8ull);
        h.mix(pc_);
        h.mix(hop_);
        if (child_) child_->mix(h); else h.mix(0x1ull);
    }

private:
    const TreeLock* t_;
    int pid_;
    int nop_;
    int pc_ = 0;
    int hop_ = 0;
    std::unique_ptr<Frame> child_;
};

}  // namespace

std::unique_ptr<Frame> TreeLock::recover(int pid) const {
    return std::make_unique<TreeRecoverFrame>(this, pid, site_nop_);
}
std::unique_ptr<Frame> TreeLock::enter(int pid) const {
    return std::make_unique<TreeEnterFrame>(this, pid, site_nop_);
}
std::unique_ptr<Frame> TreeLock::exit(int pid) const {
    return std::make_unique<TreeExitFrame>(this, pid, site_nop_);
}

}  // namespace rme
