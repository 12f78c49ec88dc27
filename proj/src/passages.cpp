#include "rme/passages.hpp"

#include <algorithm>
#include <sstream>

namespace rme {

std::vector<Request> requests_of(const History& h, int lock) {
    std::vector<Request> out;
    std::vector<int> open(64, -1);  // pid -> index into out
    for (uint64_t i = 0; i < h.size(); i++) {
        const Event& e = h[i];
        if (e.lock != lock) continue;
        if (e.kind == EvKind::ReqGen) {
            Request r;
            r.pid = e.pid;
            r.lock = lock;
            r.gen_ev = i;
            open[e.pid] = static_cast<int>(out.size());
            out.push_back(r);
        } else if (e.kind == EvKind::ReqSat) {
            if (open[e.pid] >= 0) {
                out[open[e.pid]].sat_ev = i;
                out[open[e.pid]].satisfied = true;
                open[e.pid] = -1;
            }
        }
    }
    return out;
}

std::vector<CInterval> consequence_intervals(const History& h, int lock) {
    std::vector<Request> reqs = requests_of(h, lock);
    uint64_t last = h.size() == 0 ? 0 : h.size() - 1;
    std::vector<CInterval> out;
    for (uint64_t i = 0; i < h.size(); i++) {
        const Event& e = h[i];
        if (e.kind != EvKind::Crash) continue;
        CInterval ci;
        ci.crash_ev = i;
        ci.crash_pid = e.pid;
        ci.batch = e.aux;
        ci.start = i;
        ci.end = i;
        for (const Request& r : reqs) {
            if (r.gen_ev >= i) continue;  // generated after the failure
            if (!r.satisfied)
                ci.end = last;  // never satisfied: extends to the last step
            else if (r.sat_ev > ci.end)
                ci.end = r.sat_ev;
        }
        out.push_back(ci);
    }
    return out;
}

void walk_cs_occupancy(const History& h, int lock,
                       const std::function<void(uint64_t, const std::vector<int>&)>& visit) {
    std::vector<int> occ;
    auto drop = [&](int pid) {
        auto it = std::find(occ.begin(), occ.end(), pid);
        if (it != occ.end()) {
            occ.erase(it);
            return true;
        }
        return false;
    };
    for (uint64_t i = 0; i < h.size(); i++) {
        const Event& e = h[i];
        bool changed = false;
        if (e.kind == EvKind::SegEnter && e.seg == Seg::CS && e.lock == lock) {
            occ.push_back(e.pid);
            changed = true;
        } else if (e.kind == EvKind::SegExit && e.seg == Seg::CS && e.lock == lock) {
            changed = drop(e.pid);
        } else if (e.kind == EvKind::Crash) {
            changed = drop(e.pid);
        }
        if (changed) visit(i, occ);
    }
}

std::string passages_csv(const std::vector<PassageRecord>& rows, const World& w) {
    std::ostringstream os;
    os << "pid,lock,start,end,failure_free,rmr_cc,rmr_dsm\n";
    for (const auto& p : rows)
        os << p.pid << "," << w.locks.name(p.lock) << "," << p.start_ev << "," << p.end_ev << ","
           << (p.failure_free ? 1 : 0) << "," << p.rmr_cc << "," << p.rmr_dsm << "\n";
    return os.str();
}

std::string intervals_csv(const History& h, const World& w) {
    std::ostringstream os;
    os << "lock,crash_ev,crash_pid,batch,start,end\n";
    for (size_t l = 0; l < w.locks.size(); l++) {
        for (const CInterval& ci : consequence_intervals(h, static_cast<int>(l)))
            os << w.locks.name(static_cast<int>(l)) << "," << ci.crash_ev << "," << ci.crash_pid
               << "," << ci.batch << "," << ci.start << "," << ci.end << "\n";
    }
    return os.str();
}

}  // namespace rme
