#include "rme/driver.hpp"

namespace rme {

namespace {

class DriverFrame final : public Frame {
public:
    DriverFrame(const DriverSpec& spec, int pid, int site_ncs, int site_cs)
        : spec_(spec), pid_(pid), site_ncs_(site_ncs), site_cs_(site_cs) {}

    bool step(Ctx& cx) override {
        for (;;) {
            switch (pc_) {
                case Pc::Start:
                    if (!cx.want_request()) return true;  // park, zero ops
                    cx.seg_enter(spec_.lock->lock_id(), Seg::NCS);
                    left_ = spec_.ncs_len;
                    pc_ = Pc::Ncs;
                    break;
                case Pc::Ncs:
                    cx.local(site_ncs_);
                    if (--left_ == 0) {
                        cx.seg_exit(spec_.lock->lock_id(), Seg::NCS);
                        child_ = spec_.lock->recover(pid_);
                        pc_ = Pc::Recover;
                    }
                    return false;
                case Pc::Recover:
                    if (child_->step(cx)) {
                        child_ = spec_.lock->enter(pid_);
                        pc_ = Pc::Enter;
                    }
                    return false;
                case Pc::Enter:
                    if (child_->step(cx)) {
                        child_.reset();
                        left_ = spec_.cs_len;
                        pc_ = Pc::Cs;
                    }
                    return false;
                case Pc::Cs:
                    cx.local(site_cs_);
                    if (--left_ == 0) {
                        child_ = spec_.lock->exit(pid_);
                        pc_ = Pc::Exit;
                    }
                    return false;
                case Pc::Exit:
                    if (child_->step(cx)) {
                        child_.reset();
                        pc_ = Pc::Start;
                    }
                    return false;
            }
        }
    }

    std::unique_ptr<Frame> clone() const override {
        auto d = std::make_unique<DriverFrame>(spec_, pid_, site_ncs_, site_cs_);
        d->pc_ = pc_;
        d->left_ = left_;
        if (child_) d->child_ = child_->clone();
        return d;
    }

    void mix(StateHash& h) const override {
        h.mix(static_cast<uint64_t>(pc_));
        h.mix(static_cast<uint64_t>(left_));
        if (child_) child_->mix(h); else h.mix(0xd00dull);
    }

private:
    enum class Pc { Start, Ncs, Recover, Enter, Cs, Exit };
    DriverSpec spec_;
    int pid_;
    int site_ncs_, site_cs_;
    Pc pc_ = Pc::Start;
    int left_ = 0;
    std::unique_ptr<Frame> child_;
};

}  // namespace

std::unique_ptr<Frame> make_driver(const DriverSpec& spec, int pid, int site_ncs, int site_cs) {
    RME_CHECK(spec.lock != nullptr, "driver needs a lock");
    RME_CHECK(spec.ncs_len >= 1 && spec.cs_len >= 1, "ncs_len and cs_len must be >= 1");
    return std::make_unique<DriverFrame>(spec, pid, site_ncs, site_cs);
}

}  // namespace rme
