#include "rme/engine.hpp"

#include "rme/driver.hpp"

namespace rme {

int Ctx::n() const { return eng_.world().n; }

Word Ctx::read(CellId c, int site) {
    ops++;
    Word v = eng_.mem_.read(pid_, c);
    eng_.emit_instr(pid_, InstrOp::Read, c, site, -1);
    eng_.oracle_check(pid_, v);
    return v;
}

void Ctx::write(CellId c, Word v, int site) {
    ops++;
    eng_.oracle_check(pid_, v);
    eng_.mem_.write(pid_, c, v);
    eng_.emit_instr(pid_, InstrOp::Write, c, site, -1);
}

bool Ctx::cas(CellId c, const Word& expect, const Word& desired, int site) {
    ops++;
    eng_.oracle_check(pid_, expect);
    eng_.oracle_check(pid_, desired);
    bool ok = eng_.mem_.cas(pid_, c, expect, desired);
    eng_.emit_instr(pid_, InstrOp::Cas, c, site, ok ? 1 : 0);
    return ok;
}

Word Ctx::fas(CellId c, Word desired, int site) {
    ops++;
    eng_.oracle_check(pid_, desired);
    Word old = eng_.mem_.fas(pid_, c, desired);
    eng_.emit_instr(pid_, InstrOp::Fas, c, site, -1);
    eng_.oracle_check(pid_, old);
    return old;
}

void Ctx::local(int site) {
    ops++;
    eng_.emit_instr(pid_, InstrOp::Local, CellId{-1}, site, -1);
}

void Ctx::seg_enter(int lock, Seg s, int aux) { eng_.on_seg(pid_, lock, s, true, aux); }
void Ctx::seg_exit(int lock, Seg s, int aux) { eng_.on_seg(pid_, lock, s, false, aux); }

bool Ctx::want_request() const {
    const DriverSpec& sp = eng_.specs_[pid_];
    if (eng_.book_.outstanding[eng_.idx(pid_, sp.lock->lock_id())]) return true;
    return sp.max_requests < 0 || eng_.book_.generated[pid_] < sp.max_requests;
}

Engine::Engine(const World* w, std::vector<DriverSpec> drivers, int target_lock)
    : world_(w), mem_(&w->layout), specs_(std::move(drivers)), target_(target_lock) {
    nlocks_ = static_cast<int>(w->locks.size());
    RME_CHECK(static_cast<int>(specs_.size()) == w->n, "one driver per process");
    RME_CHECK(w->n >= 1 && w->n <= 64, "n must be in [1,64]");
    int site_ncs = w->sites.find("NCS");
    int site_cs = w->sites.find("CS");
    RME_CHECK(site_ncs >= 0 && site_cs >= 0, "world missing NCS/CS sites");
    procs_.resize(w->n);
    for (int p = 0; p < w->n; p++) procs_[p].driver = make_driver(specs_[p], p, site_ncs, site_cs);
    book_.outstanding.assign(static_cast<size_t>(w->n) * nlocks_, 0);
    book_.passage_active.assign(static_cast<size_t>(w->n) * nlocks_, 0);
    book_.in_cs.assign(static_cast<size_t>(w->n) * nlocks_, 0);
    book_.cs_count.assign(nlocks_, 0);
    book_.generated.assign(w->n, 0);
    book_.satisfied.assign(w->n, 0);
    book_.p_start_ev.assign(w->n, 0);
    book_.p_cc0.assign(w->n, 0);
    book_.p_dsm0.assign(w->n, 0);
    rng_.seed(sched_.seed);
}

Engine::Engine(const Engine& o)
    : world_(o.world_),
      mem_(o.mem_),
      specs_(o.specs_),
      target_(o.target_),
      nlocks_(o.nlocks_),
      book_(o.book_),
      hist_(o.hist_),
      record_(o.record_),
      steps_(o.steps_),
      sched_(o.sched_),
      list_pos_(o.list_pos_),
      rr_cursor_(o.rr_cursor_),
      rng_(o.rng_),
      plan_(o.plan_),
      fired_(o.fired_),
      site_hits_(o.site_hits_),
      passage_log_(o.passage_log_),
      oracle_(o.oracle_),
      probe_(o.probe_) {
    procs_.resize(o.procs_.size());
    for (size_t p = 0; p < procs_.size(); p++) {
        procs_[p].driver = o.procs_[p].driver->clone();
        procs_[p].parked = o.procs_[p].parked;
        procs_[p].last_site = o.procs_[p].last_site;
        procs_[p].wait = o.procs_[p].wait;
    }
}

void Engine::set_schedule(Schedule s) {
    sched_ = std::move(s);
    rng_.seed(sched_.seed);
    list_pos_ = 0;
    rr_cursor_ = 0;
}

void Engine::set_plan(FailurePlan p) {
    plan_ = std::move(p);
    fired_.assign(plan_.points.size(), 0);
    for (const auto& cp : plan_.points) {
        RME_CHECK(cp.pid >= 0 && cp.pid < world_->n, "crash point pid out of range");
        RME_CHECK(cp.at_step || (cp.site >= 0 && static_cast<size_t>(cp.site) < world_->sites.size()),
                  "crash point names an unregistered site");
        RME_CHECK(cp.at_step || cp.occurrence >= 1, "occurrence must be >= 1");
    }
}

void Engine::emit_instr(int pid, InstrOp op, CellId c, int site, int aux) {
    steps_++;
    procs_[pid].last_site = site;
    if (site >= 0) site_hits_[(static_cast<int64_t>(pid) << 32) | static_cast<uint32_t>(site)]++;
    if (record_) {
        Event e;
        e.kind = EvKind::Instr;
        e.op = op;
        e.pid = static_cast<int16_t>(pid);
        e.site = site;
        e.cell = c.v;
        e.aux = aux;
        hist_.push(e);
    }
    hist_.steps = steps_;
}

void Engine::on_seg(int pid, int lock, Seg s, bool enter, int aux) {
    RME_CHECK(lock >= 0 && lock < nlocks_, "segment marker for unknown lock");
    if (record_) {
        Event e;
        e.kind = enter ? EvKind::SegEnter : EvKind::SegExit;
        e.seg = s;
        e.pid = static_cast<int16_t>(pid);
        e.lock = lock;
        e.aux = aux;
        hist_.push(e);
    }
    size_t k = idx(pid, lock);
    if (enter && (s == Seg::Recover || s == Seg::Enter)) {
        if (!book_.passage_active[k]) {
            if (!book_.outstanding[k]) {
                book_.outstanding[k] = 1;
                if (lock == target_) book_.generated[pid]++;
                if (record_) {
                    Event e;
                    e.kind = EvKind::ReqGen;
                    e.pid = static_cast<int16_t>(pid);
                    e.lock = lock;
                    hist_.push(e);
                }
            }
            book_.passage_active[k] = 1;
            if (lock == target_) {
                book_.p_start_ev[pid] = record_ ? hist_.size() - 1 : steps_;
                book_.p_cc0[pid] = mem_.cc_total(pid);
                book_.p_dsm0[pid] = mem_.dsm_total(pid);
            }
        }
    } else if (!enter && s == Seg::Exit) {
        if (book_.passage_active[k]) {
            book_.passage_active[k] = 0;
            book_.outstanding[k] = 0;
            if (record_) {
                Event e;
                e.kind = EvKind::ReqSat;
                e.pid = static_cast<int16_t>(pid);
                e.lock = lock;
                hist_.push(e);
            }
            if (lock == target_) {
                book_.satisfied[pid]++;
                PassageRecord pr;
                pr.pid = pid;
                pr.lock = lock;
                pr.start_ev = book_.p_start_ev[pid];
                pr.end_ev = record_ ? hist_.size() - 1 : steps_;
                pr.failure_free = true;
                pr.rmr_cc = mem_.cc_total(pid) - book_.p_cc0[pid];
                pr.rmr_dsm = mem_.dsm_total(pid) - book_.p_dsm0[pid];
                passage_log_.push_back(pr);
            }
        }
    } else if (s == Seg::CS) {
        if (enter) {
            RME_CHECK(!book_.in_cs[k], "double CS entry without exit");
            book_.in_cs[k] = 1;
            book_.cs_count[lock]++;
        } else if (book_.in_cs[k]) {
            book_.in_cs[k] = 0;
            book_.cs_count[lock]--;
        }
    }
}

void Engine::oracle_check(int pid, const Word& w) {
    if (w.kind != WKind::Ref) return;
    int slot = w.ref_slot();
    const NodeInfo& ni = world_->nodes.info(slot);
    int64_t allocs = mem_.peek(ni.owner_in_counter).a;
    int64_t cur = world_->nodes.generation(slot, allocs);
    if (w.b < cur) oracle_.push_back({steps_, pid, slot, w.b, cur});
}

void Engine::fire_point(size_t i) {
    const CrashPoint& cp = plan_.points[i];
    if (cp.batch >= 0) {
        for (size_t j = 0; j < plan_.points.size(); j++) {
            if (!fired_[j] && plan_.points[j].batch == cp.batch) {
                fired_[j] = 1;
                crash(plan_.points[j].pid, cp.batch);
            }
        }
    } else {
        fired_[i] = 1;
        crash(cp.pid, -1);
    }
}

void Engine::fire_site_triggers(int pid, int site) {
    if (site < 0) return;
    int hits = site_hits_[(static_cast<int64_t>(pid) << 32) | static_cast<uint32_t>(site)];
    for (size_t i = 0; i < plan_.points.size(); i++) {
        const CrashPoint& cp = plan_.points[i];
        if (!fired_[i] && !cp.at_step && cp.pid == pid && cp.site == site && cp.occurrence == hits)
            fire_point(i);
    }
}

void Engine::fire_step_triggers() {
    for (size_t i = 0; i < plan_.points.size(); i++) {
        const CrashPoint& cp = plan_.points[i];
        if (!fired_[i] && cp.at_step && cp.step <= steps_) fire_point(i);
    }
}

void Engine::crash(int pid, int batch) {
    Proc& P = procs_[pid];
    if (record_) {
        Event e;
        e.kind = EvKind::Crash;
        e.pid = static_cast<int16_t>(pid);
        e.site = P.last_site;
        e.aux = batch;
        hist_.push(e);
    }
    for (int l = 0; l < nlocks_; l++) {
        size_t k = idx(pid, l);
        if (book_.in_cs[k]) {
            book_.in_cs[k] = 0;
            book_.cs_count[l]--;
        }
        if (book_.passage_active[k]) {
            book_.passage_active[k] = 0;
            if (l == target_) {
                PassageRecord pr;
                pr.pid = pid;
                pr.lock = l;
                pr.start_ev = book_.p_start_ev[pid];
                pr.end_ev = record_ ? hist_.size() - 1 : steps_;
                pr.failure_free = false;
                pr.rmr_cc = mem_.cc_total(pid) - book_.p_cc0[pid];
                pr.rmr_dsm = mem_.dsm_total(pid) - book_.p_dsm0[pid];
                passage_log_.push_back(pr);
            }
        }
    }
    mem_.crash_reset(pid);
    int site_ncs = world_->sites.find("NCS");
    int site_cs = world_->sites.find("CS");
    P.driver = make_driver(specs_[pid], pid, site_ncs, site_cs);
    P.parked = false;
    P.last_site = -1;
}

void Engine::step(int pid) {
    Proc& P = procs_[pid];
    RME_CHECK(!P.parked, "stepping a parked process");
    Ctx cx(*this, pid);
    bool done = P.driver->step(cx);
    if (done && cx.ops == 0) {
        P.parked = true;
        return;
    }
    RME_CHECK(cx.ops == 1, "frame step must execute exactly one instruction");
    RME_CHECK(!done, "driver frames do not complete");
    P.wait = 0;
    if (!plan_.points.empty()) fire_site_triggers(pid, P.last_site);
    if (probe_) probe_(*this);
}

int Engine::choose() {
    int n = static_cast<int>(procs_.size());
    if (sched_.kind == Schedule::List) {
        while (list_pos_ < sched_.list.size()) {
            int pid = sched_.list[list_pos_++];
            RME_CHECK(pid >= 0 && pid < n, "schedule list pid out of range");
            if (!procs_[pid].parked) return pid;
        }
        // fall through to round robin after the scripted prefix
    }
    if (sched_.kind == Schedule::Random) {
        int best = -1;
        uint64_t bound = static_cast<uint64_t>(sched_.fairness) * n;
        std::vector<int> run;
        run.reserve(n);
        for (int p = 0; p < n; p++) {
            if (procs_[p].parked) continue;
            run.push_back(p);
            if (procs_[p].wait >= bound && (best < 0 || procs_[p].wait > procs_[best].wait)) best = p;
        }
        if (run.empty()) return -1;
        if (best >= 0) return best;
        return run[rng_() % run.size()];
    }
    for (int k = 0; k < n; k++) {
        int pid = (rr_cursor_ + k) % n;
        if (!procs_[pid].parked) {
            rr_cursor_ = (pid + 1) % n;
            return pid;
        }
    }
    return -1;
}

Engine::Stop Engine::run(uint64_t budget) {
    while (steps_ < budget) {
        fire_step_triggers();
        int pid = choose();
        if (pid < 0) return Stop::AllParked;
        for (auto& p : procs_) p.wait++;
        step(pid);
    }
    return Stop::Budget;
}

bool Engine::all_requests_satisfied() const {
    for (int p = 0; p < world_->n; p++)
        for (int l = 0; l < nlocks_; l++)
            if (book_.outstanding[idx(p, l)]) return false;
    return true;
}

void Engine::state_hash(StateHash& h) const {
    for (const Word& w : mem_.values()) h.mix_word(w);
    for (const Proc& p : procs_) {
        h.mix(p.parked ? 0xdeadull : 0xbeefull);
        h.mix(static_cast<uint64_t>(p.last_site + 1));
        p.driver->mix(h);
    }
    for (uint8_t b : book_.outstanding) h.mix(b);
    for (uint8_t b : book_.passage_active) h.mix(b);
    for (int g : book_.generated) h.mix(static_cast<uint64_t>(g));
    for (int s : book_.satisfied) h.mix(static_cast<uint64_t>(s));
    for (uint8_t b : fired_) h.mix(b);
}

}  // namespace rme
