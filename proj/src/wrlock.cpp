#include "rme/wrlock.hpp"

#include <functional>
#include <unordered_map>
#include <unordered_set>

namespace rme {

QueueLock::QueueLock(World& w, const std::string& name, const std::string& prefix)
    : world_(&w), pool_(w, prefix) {
    lock_id_ = w.locks.add(name, LockKind::WrQueue);
    tail_ = w.alloc(kGlobalHome, Word::null(), prefix + "tail");
    state_.resize(w.n);
    mine_.resize(w.n);
    pred_.resize(w.n);
    for (int i = 0; i < w.n; i++) {
        state_[i] = w.alloc(i, Word::tag(TAG_FREE), prefix + "state" + std::to_string(i));
        mine_[i] = w.alloc(i, Word::null(), prefix + "mine" + std::to_string(i));
        pred_[i] = w.alloc(i, Word::null(), prefix + "pred" + std::to_string(i));
    }
    auto s = [&](const char* x) { return w.sites.intern(prefix + x); };
    sites_.rd_state = s("RD_STATE");
    sites_.rd_mine = s("RD_MINE");
    sites_.rd_pred = s("RD_PRED");
    sites_.rd_next = s("RD_NEXT");
    sites_.w_mine_null = s("W_MINE_NULL");
    sites_.w_mine = s("W_MINE");
    sites_.w_pred = s("W_PRED");
    sites_.w_state_init = s("W_STATE_INIT");
    sites_.w_state_trying = s("W_STATE_TRYING");
    sites_.w_state_incs = s("W_STATE_INCS");
    sites_.w_state_leaving = s("W_STATE_LEAVING");
    sites_.w_state_free = s("W_STATE_FREE");
    sites_.recover_next_cas = s("RECOVER_NEXT_CAS");
    sites_.recover_signal = s("RECOVER_SIGNAL");
    sites_.init_next = s("INIT_NEXT");
    sites_.init_locked = s("INIT_LOCKED");
    sites_.fas_tail = s("FAS_TAIL");
    sites_.persist_pred = s("PERSIST_PRED");
    sites_.link_cas = s("LINK_CAS");
    sites_.rd_pred_next = s("RD_PRED_NEXT");
    sites_.await_locked = s("AWAIT_LOCKED");
    sites_.exit_tail_cas = s("EXIT_TAIL_CAS");
    sites_.exit_next_cas = s("EXIT_NEXT_CAS");
    sites_.signal_write = s("SIGNAL_WRITE");
    w.locks.declare_sensitive(lock_id_, sites_.fas_tail);
}

namespace {

// Recover: three guarded blocks in order. Trying with pred==mine means the
// FAS outcome may be unpersisted: relinquish the node (close next, hand the
// grant to any linked successor, retire) and fall back to Initializing.
// Leaving re-runs the exit tail, guarded by in>out so nothing is touched
// after the retire already happened. Free preps a fresh request.
class WrRecoverFrame final : public Frame {
public:
    WrRecoverFrame(const QueueLock* lk, int pid) : lk_(lk), pid_(pid) {}

    bool step(Ctx& cx) override {
        const auto& st = lk_->sites();
        switch (pc_) {
            case 0: {
                cx.seg_enter(lk_->lock_id(), Seg::Recover);
                Word s = cx.read(lk_->state(pid_), st.rd_state);
                switch (s.tag_of()) {
                    case TAG_TRYING: pc_ = 10; return false;
                    case TAG_LEAVING: pc_ = 20; return false;
                    case TAG_FREE: pc_ = 30; return false;
                    default:  // Initializing, InCS: nothing to repair here
                        cx.seg_exit(lk_->lock_id(), Seg::Recover);
                        return true;
                }
            }
            // --- Trying ---
            case 10:
                m_ = cx.read(lk_->mine(pid_), st.rd_mine);
                pc_ = 11;
                return false;
            case 11: {
                Word p = cx.read(lk_->pred(pid_), st.rd_pred);
                if (p != m_) {  // FAS outcome persisted: resume waiting in Enter
                    cx.seg_exit(lk_->lock_id(), Seg::Recover);
                    return true;
                }
                pc_ = 12;
                return false;
            }
            case 12:
                cx.cas(lk_->pool().next_cell(m_.ref_slot()), Word::null(), m_, st.recover_next_cas);
                pc_ = 13;
                return false;
            case 13:
                nx_ = cx.read(lk_->pool().next_cell(m_.ref_slot()), st.rd_next);
                pc_ = (nx_ != m_) ? 14 : 15;
                return false;
            case 14:  // a successor linked in: the grant moves to it
                cx.write(lk_->pool().locked_cell(nx_.ref_slot()), Word::boolean(false),
                         st.recover_signal);
                pc_ = 15;
                return false;
            case 15:
                in_ = cx.read(lk_->pool().in_counter(pid_), lk_->pool().sites().retire_rd_in).a;
                pc_ = 16;
                return false;
            case 16:
                out_ = cx.read(lk_->pool().out_counter(pid_), lk_->pool().sites().retire_rd_out).a;
                pc_ = (in_ > out_) ? 17 : 18;
                return false;
            case 17:
                cx.write(lk_->pool().out_counter(pid_), Word::integer(out_ + 1),
                         lk_->pool().sites().retire_w);
                pc_ = 18;
                return false;
            case 18:
                cx.write(lk_->state(pid_), Word::tag(TAG_INITIALIZING), st.w_state_init);
                cx.seg_exit(lk_->lock_id(), Seg::Recover);
                return true;
            // --- Leaving ---
            case 20:
                in_ = cx.read(lk_->pool().in_counter(pid_), lk_->pool().sites().retire_rd_in).a;
                pc_ = 21;
                return false;
            case 21:
                out_ = cx.read(lk_->pool().out_counter(pid_), lk_->pool().sites().retire_rd_out).a;
                pc_ = (in_ > out_) ? 22 : 28;
                return false;
            case 22:
                m_ = cx.read(lk_->mine(pid_), st.rd_mine);
                pc_ = 23;
                return false;
            case 23:
                cx.cas(lk_->tail(), m_, Word::null(), st.exit_tail_cas);
                pc_ = 24;
                return false;
            case 24:
                cx.cas(lk_->pool().next_cell(m_.ref_slot()), Word::null(), m_, st.exit_next_cas);
                pc_ = 25;
                return false;
            case 25:
                nx_ = cx.read(lk_->pool().next_cell(m_.ref_slot()), st.rd_next);
                pc_ = (nx_ != m_) ? 26 : 27;
                return false;
            case 26:
                cx.write(lk_->pool().locked_cell(nx_.ref_slot()), Word::boolean(false),
                         st.signal_write);
                pc_ = 27;
                return false;
            case 27:
                cx.write(lk_->pool().out_counter(pid_), Word::integer(out_ + 1),
                         lk_->pool().sites().retire_w);
                pc_ = 28;
                return false;
            case 28:
                cx.write(lk_->state(pid_), Word::tag(TAG_FREE), st.w_state_free);
                pc_ = 30;
                return false;
            // --- Free ---
            case 30:
                cx.write(lk_->mine(pid_), Word::null(), st.w_mine_null);
                pc_ = 31;
                return false;
            case 31:
                cx.write(lk_->state(pid_), Word::tag(TAG_INITIALIZING), st.w_state_init);
                cx.seg_exit(lk_->lock_id(), Seg::Recover);
                return true;
        }
        sim_fault("wr recover pc");
    }

    std::unique_ptr<Frame> clone() const override {
        auto f = std::make_unique<WrRecoverFrame>(lk_, pid_);
        f->pc_ = pc_;
        f->m_ = m_;
        f->nx_ = nx_;
        f->in_ = in_;
        f->out_ = out_;
        return f;
    }

    void mix(StateHash& h) const override {
        h.mix(0x5ecull);
        h.mix(pc_);
        h.mix_word(m_);
        h.mix_word(nx_);
        h.mix(static_cast<uint64_t>(in_));
        h.mix(static_cast<uint64_t>(out_));
    }

private:
    const QueueLock* lk_;
    int pid_;
    int pc_ = 0;
    Word m_, nx_;
    int64_t in_ = 0, out_ = 0;
};

class WrEnterFrame final : public Frame {
public:
    WrEnterFrame(const QueueLock* lk, int pid) : lk_(lk), pid_(pid) {}

    bool step(Ctx& cx) override {
        const auto& st = lk_->sites();
        if (alloc_) {  // memrec allocation in progress
            if (alloc_->step(cx)) {
                node_ = new_node_result(*alloc_);
                alloc_.reset();
                pc_ = 2;
            }
            return false;
        }
        switch (pc_) {
            case 0: {
                cx.seg_enter(lk_->lock_id(), Seg::Enter);
                Word s = cx.read(lk_->state(pid_), st.rd_state);
                switch (s.tag_of()) {
                    case TAG_INITIALIZING:
                        alloc_ = lk_->pool().new_node(pid_);
                        return false;
                    case TAG_TRYING: pc_ = 10; return false;
                    case TAG_INCS:  // crashed in CS: proceed directly (BCSR)
                        cx.seg_exit(lk_->lock_id(), Seg::Enter);
                        cx.seg_enter(lk_->lock_id(), Seg::CS);
                        return true;
                    default: sim_fault("wr enter: inconsistent state " + s.str());
                }
            }
            case 2:
                cx.write(lk_->mine(pid_), node_, st.w_mine);
                pc_ = 3;
                return false;
            case 3:
                cx.write(lk_->pool().next_cell(node_.ref_slot()), Word::null(), st.init_next);
                pc_ = 4;
                return false;
            case 4:
                cx.write(lk_->pool().locked_cell(node_.ref_slot()), Word::boolean(true),
                         st.init_locked);
                pc_ = 5;
                return false;
            case 5:
                cx.write(lk_->pred(pid_), node_, st.w_pred);  // pred==mine sentinel
                pc_ = 6;
                return false;
            case 6:
                cx.write(lk_->state(pid_), Word::tag(TAG_TRYING), st.w_state_trying);
                pc_ = 10;
                return false;
            case 10:
                m_ = cx.read(lk_->mine(pid_), st.rd_mine);
                pc_ = 11;
                return false;
            case 11:
                p_ = cx.read(lk_->pred(pid_), st.rd_pred);
                pc_ = (p_ == m_) ? 12 : 14;
                return false;
            case 12:  // append; the gap after this instruction is the sensitive site
                p_ = cx.fas(lk_->tail(), m_, st.fas_tail);
                pc_ = 13;
                return false;
            case 13:
                cx.write(lk_->pred(pid_), p_, st.persist_pred);
                pc_ = 14;
                return false;
            case 14:
                if (p_.is_null()) { pc_ = 30; break; }  // queue was empty: lock acquired
                pc_ = 15;
                break;
            case 15:
                cx.cas(lk_->pool().next_cell(p_.ref_slot()), Word::null(), m_, st.link_cas);
                pc_ = 16;
                return false;
            case 16: {
                Word nx = cx.read(lk_->pool().next_cell(p_.ref_slot()), st.rd_pred_next);
                if (nx == p_) { pc_ = 30; return false; }  // special value: lock is free
                RME_CHECK(nx == m_, "next field holds a third value");
                pc_ = 17;
                return false;
            }
            case 17: {  // local spin on own node
                Word lk = cx.read(lk_->pool().locked_cell(m_.ref_slot()), st.await_locked);
                if (lk.as_bool()) return false;
                pc_ = 30;
                return false;
            }
            case 30:
                cx.write(lk_->state(pid_), Word::tag(TAG_INCS), st.w_state_incs);
                cx.seg_exit(lk_->lock_id(), Seg::Enter);
                cx.seg_enter(lk_->lock_id(), Seg::CS);
                return true;
        }
        return step(cx);  // pure routing cases fall through to the next instruction
    }

    std::unique_ptr<Frame> clone() const override {
        auto f = std::make_unique<WrEnterFrame>(lk_, pid_);
        f->pc_ = pc_;
        f->node_ = node_;
        f->m_ = m_;
        f->p_ = p_;
        if (alloc_) f->alloc_ = alloc_->clone();
        return f;
    }

    void mix(StateHash& h) const override {
        h.mix(0xe47ull);
        h.mix(pc_);
        h.mix_word(node_);
        h.mix_word(m_);
        h.mix_word(p_);
        if (alloc_) alloc_->mix(h); else h.mix(0x11ull);
    }

private:
    const QueueLock* lk_;
    int pid_;
    int pc_ = 0;
    Word node_, m_, p_;
    std::unique_ptr<Frame> alloc_;
};

// Exit is loop-free: reset tail if we are last, blindly close our next field,
// signal a linked successor, retire the node, go Free.
class WrExitFrame final : public Frame {
public:
    WrExitFrame(const QueueLock* lk, int pid) : lk_(lk), pid_(pid) {}

    bool step(Ctx& cx) override {
        const auto& st = lk_->sites();
        switch (pc_) {
            case 0:
                cx.seg_exit(lk_->lock_id(), Seg::CS);
                cx.seg_enter(lk_->lock_id(), Seg::Exit);
                cx.write(lk_->state(pid_), Word::tag(TAG_LEAVING), st.w_state_leaving);
                pc_ = 1;
                return false;
            case 1:
                m_ = cx.read(lk_->mine(pid_), st.rd_mine);
                pc_ = 2;
                return false;
            case 2:
                cx.cas(lk_->tail(), m_, Word::null(), st.exit_tail_cas);
                pc_ = 3;
                return false;
            case 3:
                cx.cas(lk_->pool().next_cell(m_.ref_slot()), Word::null(), m_, st.exit_next_cas);
                pc_ = 4;
                return false;
            case 4:
                nx_ = cx.read(lk_->pool().next_cell(m_.ref_slot()), st.rd_next);
                pc_ = (nx_ != m_) ? 5 : 6;
                return false;
            case 5:
                cx.write(lk_->pool().locked_cell(nx_.ref_slot()), Word::boolean(false),
                         st.signal_write);
                pc_ = 6;
                return false;
            case 6:
                in_ = cx.read(lk_->pool().in_counter(pid_), lk_->pool().sites().retire_rd_in).a;
                pc_ = 7;
                return false;
            case 7:
                out_ = cx.read(lk_->pool().out_counter(pid_), lk_->pool().sites().retire_rd_out).a;
                RME_CHECK(in_ > out_, "exit without an outstanding node");
                pc_ = 8;
                return false;
            case 8:
                cx.write(lk_->pool().out_counter(pid_), Word::integer(out_ + 1),
                         lk_->pool().sites().retire_w);
                pc_ = 9;
                return false;
            case 9:
                cx.write(lk_->state(pid_), Word::tag(TAG_FREE), st.w_state_free);
                cx.seg_exit(lk_->lock_id(), Seg::Exit);
                return true;
        }
        sim_fault("wr exit pc");
    }

    std::unique_ptr<Frame> clone() const override {
        auto f = std::make_unique<WrExitFrame>(lk_, pid_);
        f->pc_ = pc_;
        f->m_ = m_;
        f->nx_ = nx_;
        f->in_ = in_;
        f->out_ = out_;
        return f;
    }

    void mix(StateHash& h) const override {
        h.mix(0xe817ull);
        h.mix(pc_);
        h.mix_word(m_);
        h.mix_word(nx_);
        h.mix(static_cast<uint64_t>(in_));
        h.mix(static_cast<uint64_t>(out_));
    }

private:
    const QueueLock* lk_;
    int pid_;
    int pc_ = 0;
    Word m_, nx_;
    int64_t in_ = 0, out_ = 0;
};

}  // namespace

std::unique_ptr<Frame> QueueLock::recover(int pid) const {
    return std::make_unique<WrRecoverFrame>(this, pid);
}
std::unique_ptr<Frame> QueueLock::enter(int pid) const {
    return std::make_unique<WrEnterFrame>(this, pid);
}
std::unique_ptr<Frame> QueueLock::exit(int pid) const {
    return std::make_unique<WrExitFrame>(this, pid);
}

QueueLock::Chains QueueLock::derive_subqueues(const SharedMemory& m,
                                              const std::vector<int>& cs_pids) const {
    const NodeTable& nt = world_->nodes;
    auto check_ref = [&](const Word& w) {
        if (!w.is_ref()) return;
        int64_t allocs = m.peek(nt.info(w.ref_slot()).owner_in_counter).a;
        RME_CHECK(w.b >= nt.generation(w.ref_slot(), allocs), "dangling node reference");
    };

    // Collect live nodes: current nodes of active processes, the tail node,
    // and everything reachable over next links and persisted pred values.
    std::unordered_map<int, int> comp;  // slot -> component root (union-find)
    std::vector<std::pair<int, int>> edges;
    auto touch = [&](int slot) {
        if (!comp.count(slot)) comp[slot] = slot;
    };
    std::function<int(int)> find = [&](int s) {
        while (comp[s] != s) s = comp[s] = comp[comp[s]];
        return s;
    };
    auto unite = [&](int a, int b) { comp[find(a)] = find(b); };

    std::vector<Word> mine_of(world_->n);
    for (int i = 0; i < world_->n; i++) {
        int tag = m.peek(state_[i]).tag_of();
        if (tag != TAG_TRYING && tag != TAG_INCS && tag != TAG_LEAVING) continue;
        Word mw = m.peek(mine_[i]);
        check_ref(mw);
        mine_of[i] = mw;
        if (mw.is_ref()) touch(mw.ref_slot());
        Word pw = m.peek(pred_[i]);
        check_ref(pw);
        if (mw.is_ref() && pw.is_ref() && pw.ref_slot() != mw.ref_slot()) {
            touch(pw.ref_slot());
            edges.push_back({pw.ref_slot(), mw.ref_slot()});
        }
    }
    Word tw = m.peek(tail_);
    check_ref(tw);
    if (tw.is_ref()) touch(tw.ref_slot());

    // next links among touched nodes (closure: follow from every touched node)
    std::vector<int> worklist;
    for (auto& [s, _] : comp) worklist.push_back(s);
    std::unordered_set<int> seen(worklist.begin(), worklist.end());
    while (!worklist.empty()) {
        int s = worklist.back();
        worklist.pop_back();
        Word nx = m.peek(nt.info(s).next);
        check_ref(nx);
        if (nx.is_ref() && nx.ref_slot() != s) {
            touch(nx.ref_slot());
            edges.push_back({s, nx.ref_slot()});
            if (seen.insert(nx.ref_slot()).second) worklist.push_back(nx.ref_slot());
        }
    }
    for (auto& [a, b] : edges) unite(a, b);

    std::unordered_set<int> roots;
    for (auto& [s, _] : comp) roots.insert(find(s));
    std::unordered_set<int> occ_roots;
    for (int p : cs_pids)
        if (mine_of[p].is_ref()) occ_roots.insert(find(mine_of[p].ref_slot()));
    Chains out;
    out.chains = static_cast<int>(roots.size());
    out.occupant_chains = static_cast<int>(occ_roots.size());
    return out;
}

}  // namespace rme
