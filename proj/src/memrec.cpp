#include "rme/memrec.hpp"

namespace rme {

NodePool::NodePool(World& w, const std::string& prefix) : n_(w.n), nodes_(&w.nodes) {
    in_.resize(n_);
    out_.resize(n_);
    snap_.resize(static_cast<size_t>(n_) * n_);
    slot_base_.resize(n_);
    for (int i = 0; i < n_; i++) {
        in_[i] = w.alloc(i, Word::integer(0), prefix + "in" + std::to_string(i));
        out_[i] = w.alloc(i, Word::integer(0), prefix + "out" + std::to_string(i));
        for (int j = 0; j < n_; j++)
            snap_[static_cast<size_t>(i) * n_ + j] =
                w.alloc(i, Word::integer(0), prefix + "snap" + std::to_string(i) + "_" + std::to_string(j));
    }
    for (int i = 0; i < n_; i++) {
        slot_base_[i] = static_cast<int>(w.nodes.size());
        for (int pos = 1; pos <= 4 * n_; pos++) {
            NodeInfo ni;
            ni.owner = i;
            ni.pool_pos = pos;
            std::string nl = prefix + "nd" + std::to_string(i) + "_" + std::to_string(pos);
            ni.next = w.alloc(i, Word::null(), nl + ".next");
            ni.locked = w.alloc(i, Word::boolean(false), nl + ".locked");
            ni.owner_in_counter = in_[i];
            ni.pool_n = n_;
            w.nodes.add(ni);
        }
    }
    sites_.rd_in = w.sites.intern(prefix + "MR_RD_IN");
    sites_.rd_out = w.sites.intern(prefix + "MR_RD_OUT");
    sites_.rd_snap = w.sites.intern(prefix + "MR_RD_SNAP");
    sites_.await_out = w.sites.intern(prefix + "MR_AWAIT_OUT");
    sites_.rd_peer_in = w.sites.intern(prefix + "MR_RD_PEER_IN");
    sites_.w_snap = w.sites.intern(prefix + "MR_W_SNAP");
    sites_.commit = w.sites.intern(prefix + "MR_COMMIT");
    sites_.retire_rd_in = w.sites.intern(prefix + "MR_RET_RD_IN");
    sites_.retire_rd_out = w.sites.intern(prefix + "MR_RET_RD_OUT");
    sites_.retire_w = w.sites.intern(prefix + "MR_RET_W");
}

int64_t NodePool::live_nodes(const SharedMemory& m, int pid) const {
    return m.peek(in_[pid]).a - m.peek(out_[pid]).a;
}

namespace {

class NewNodeFrame final : public Frame {
public:
    NewNodeFrame(const NodePool* pool, int pid) : pool_(pool), pid_(pid) {}

    bool step(Ctx& cx) override {
        const auto& st = pool_->sites();
        switch (pc_) {
            case 0:
                in_ = cx.read(pool_->in_counter(pid_), st.rd_in).a;
                pc_ = 1;
                return false;
            case 1: {
                int64_t out = cx.read(pool_->out_counter(pid_), st.rd_out).a;
                if (in_ > out) {  // crash-idempotent: same node until retired
                    result_ = pool_->node_ref(pid_, in_);
                    return true;
                }
                k_ = in_ + 1;
                j_ = static_cast<int>(k_ % pool_->n());
                pc_ = 2;
                return false;
            }
            case 2:
                snap_ = cx.read(pool_->snap_cell(pid_, j_), st.rd_snap).a;
                pc_ = 3;
                return false;
            case 3: {  // wait for the counterpart's retires to catch up
                int64_t outj = cx.read(pool_->out_counter(j_), st.await_out).a;
                if (outj < snap_) return false;
                pc_ = 4;
                return false;
            }
            case 4:
                peer_in_ = cx.read(pool_->in_counter(j_), st.rd_peer_in).a;
                pc_ = 5;
                return false;
            case 5:
                cx.write(pool_->snap_cell(pid_, j_), Word::integer(peer_in_), st.w_snap);
                pc_ = 6;
                return false;
            case 6:
                cx.write(pool_->in_counter(pid_), Word::integer(k_), st.commit);
                result_ = pool_->node_ref(pid_, k_);
                return true;
        }
        sim_fault("new_node pc");
    }

    std::unique_ptr<Frame> clone() const override {
        auto f = std::make_unique<NewNodeFrame>(pool_, pid_);
        f->pc_ = pc_;
        f->in_ = in_;
        f->k_ = k_;
        f->j_ = j_;
        f->snap_ = snap_;
        f->peer_in_ = peer_in_;
        f->result_ = result_;
        return f;
    }

    void mix(StateHash& h) const override {
        h.mix(0x4e4eull);
        h.mix(pc_);
        h.mix(static_cast<uint64_t>(in_));
        h.mix(static_cast<uint64_t>(k_));
        h.mix(static_cast<uint64_t>(j_));
        h.mix(static_cast<uint64_t>(snap_));
        h.mix(static_cast<uint64_t>(peer_in_));
    }

    const Word& result() const { return result_; }

private:
    const NodePool* pool_;
    int pid_;
    int pc_ = 0;
    int64_t in_ = 0, k_ = 0, snap_ = 0, peer_in_ = 0;
    int j_ = 0;
    Word result_;
};

class RetireFrame final : public Frame {
public:
    RetireFrame(const NodePool* pool, int pid) : pool_(pool), pid_(pid) {}

    bool step(Ctx& cx) override {
        const auto& st = pool_->sites();
        switch (pc_) {
            case 0:
                in_ = cx.read(pool_->in_counter(pid_), st.retire_rd_in).a;
                pc_ = 1;
                return false;
            case 1:
                out_ = cx.read(pool_->out_counter(pid_), st.retire_rd_out).a;
                RME_CHECK(in_ > out_, "retire without an outstanding allocation");
                pc_ = 2;
                return false;
            case 2:
                cx.write(pool_->out_counter(pid_), Word::integer(out_ + 1), st.retire_w);
                return true;
        }
        sim_fault("retire pc");
    }

    std::unique_ptr<Frame> clone() const override {
        auto f = std::make_unique<RetireFrame>(pool_, pid_);
        f->pc_ = pc_;
        f->in_ = in_;
        f->out_ = out_;
        return f;
    }

    void mix(StateHash& h) const override {
        h.mix(0x4344ull);
        h.mix(pc_);
        h.mix(static_cast<uint64_t>(in_));
        h.mix(static_cast<uint64_t>(out_));
    }

private:
    const NodePool* pool_;
    int pid_;
    int pc_ = 0;
    int64_t in_ = 0, out_ = 0;
};

}  // namespace

std::unique_ptr<Frame> NodePool::new_node(int pid) const {
    return std::make_unique<NewNodeFrame>(this, pid);
}

std::unique_ptr<Frame> NodePool::retire_node(int pid) const {
    return std::make_unique<RetireFrame>(this, pid);
}

const Word& new_node_result(const Frame& completed) {
    return static_cast<const NewNodeFrame&>(completed).result();
}

}  // namespace rme
