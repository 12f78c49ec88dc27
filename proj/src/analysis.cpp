#include "rme/analysis.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace rme {

Verdict check_strong_me(const History& h, const World& w, int lock) {
    Verdict v;
    v.name = "strong_me." + w.locks.name(lock);
    walk_cs_occupancy(h, lock, [&](uint64_t ev, const std::vector<int>& occ) {
        if (occ.size() > 1 && v.result == Verdict::Pass) {
            v.result = Verdict::Fail;
            std::ostringstream os;
            os << "event " << ev << ": " << occ.size() << " processes in CS (";
            for (int p : occ) os << " p" << p;
            os << " )";
            v.witness = os.str();
        }
    });
    return v;
}

Verdict check_weak_me_responsive(const History& h, const World& w, int lock) {
    Verdict v;
    v.name = "weak_me_responsive." + w.locks.name(lock);
    std::vector<CInterval> all = consequence_intervals(h, lock);
    // keep only failures unsafe with respect to this lock
    std::vector<CInterval> unsafe;
    for (const CInterval& ci : all) {
        const Event& c = h[ci.crash_ev];
        if (c.site >= 0 && w.locks.site_sensitive_for(lock, c.site)) unsafe.push_back(ci);
    }
    walk_cs_occupancy(h, lock, [&](uint64_t ev, const std::vector<int>& occ) {
        if (occ.size() < 2 || v.result != Verdict::Pass) return;
        size_t k = occ.size() - 1;
        size_t covering = 0;
        for (const CInterval& ci : unsafe)
            if (ci.start <= ev && ev <= ci.end) covering++;
        if (covering < k) {
            v.result = Verdict::Fail;
            std::ostringstream os;
            os << "event " << ev << ": " << occ.size() << " in CS but only " << covering
               << " overlapping unsafe-failure consequence intervals";
            v.witness = os.str();
        }
    });
    return v;
}

Verdict check_side_contract(const History& h, const World& w, int arb_lock) {
    Verdict v;
    v.name = "side_contract." + w.locks.name(arb_lock);
    int owner[2] = {-1, -1};
    for (uint64_t i = 0; i < h.size() && v.result == Verdict::Pass; i++) {
        const Event& e = h[i];
        if (e.lock != arb_lock || e.aux < 0 || e.aux > 1) continue;
        int side = e.aux;
        if (e.kind == EvKind::SegEnter && e.seg == Seg::Enter) {
            if (owner[side] >= 0 && owner[side] != e.pid) {
                v.result = Verdict::Fail;
                std::ostringstream os;
                os << "event " << i << ": p" << e.pid << " enters side " << side
                   << " still engaged by p" << owner[side];
                v.witness = os.str();
            }
            owner[side] = e.pid;
        } else if (e.kind == EvKind::SegExit && owner[side] == e.pid &&
                   (e.seg == Seg::Exit || e.seg == Seg::Recover)) {
            owner[side] = -1;
        }
    }
    return v;
}

namespace {

struct FailureInfo {
    uint64_t crash_ev;
    int batch;               // -1 individual
    bool in_big_batch;       // batch group larger than tau
    uint64_t start;
    uint64_t umax;           // union end over watched locks
};

std::vector<FailureInfo> gather_failures(const History& h, const std::vector<int>& locks, int tau) {
    std::map<int, int> batch_size;
    for (uint64_t i = 0; i < h.size(); i++)
        if (h[i].kind == EvKind::Crash && h[i].aux >= 0) batch_size[h[i].aux]++;
    std::map<uint64_t, FailureInfo> by_ev;
    for (int l : locks) {
        for (const CInterval& ci : consequence_intervals(h, l)) {
            auto it = by_ev.find(ci.crash_ev);
            if (it == by_ev.end()) {
                FailureInfo fi;
                fi.crash_ev = ci.crash_ev;
                fi.batch = ci.batch;
                fi.in_big_batch = ci.batch >= 0 && batch_size[ci.batch] > tau;
                fi.start = ci.start;
                fi.umax = ci.end;
                by_ev.emplace(ci.crash_ev, fi);
            } else {
                it->second.umax = std::max(it->second.umax, ci.end);
            }
        }
    }
    std::vector<FailureInfo> out;
    for (auto& [_, fi] : by_ev) out.push_back(fi);
    return out;
}

// per (pid, level): sorted engagement marker indices for the level's filter
std::vector<std::vector<std::vector<uint64_t>>> filter_engagements(
    const History& h, const std::vector<int>& filter_locks, int nprocs) {
    std::vector<int> level_of(64, -1);
    std::vector<std::vector<std::vector<uint64_t>>> eng(
        nprocs, std::vector<std::vector<uint64_t>>(filter_locks.size()));
    for (size_t l = 0; l < filter_locks.size(); l++) level_of[filter_locks[l]] = static_cast<int>(l);
    for (uint64_t i = 0; i < h.size(); i++) {
        const Event& e = h[i];
        if (e.kind == EvKind::SegEnter && (e.seg == Seg::Recover || e.seg == Seg::Enter) &&
            e.lock >= 0 && e.lock < 64 && level_of[e.lock] >= 0)
            eng[e.pid][level_of[e.lock]].push_back(i);
    }
    return eng;
}

int level_in_range(const std::vector<std::vector<std::vector<uint64_t>>>& eng, int pid,
                   uint64_t lo, uint64_t hi) {
    int z = 1;
    for (size_t l = 0; l < eng[pid].size(); l++) {
        const auto& v = eng[pid][l];
        auto it = std::lower_bound(v.begin(), v.end(), lo);
        if (it != v.end() && *it <= hi) z = std::max(z, static_cast<int>(l) + 1);
    }
    return z;
}

}  // namespace

Verdict check_level_bound(const History& h, const World& w, const std::vector<int>& filter_locks,
                          int target, int tau, LevelStats* stats) {
    (void)w;
    Verdict v;
    v.name = "level_bound";
    std::vector<int> watched = filter_locks;
    watched.push_back(target);
    std::vector<FailureInfo> fails = gather_failures(h, watched, tau);
    uint64_t last = h.size() == 0 ? 0 : h.size() - 1;
    auto eng = filter_engagements(h, filter_locks, 64);

    for (const Request& sp : requests_of(h, target)) {
        uint64_t sp_end = sp.satisfied ? sp.sat_ev : last;
        int z = level_in_range(eng, sp.pid, sp.gen_ev, sp_end);
        int f_all = 0, f_ind = 0;
        std::set<int> batches;
        for (const FailureInfo& fi : fails) {
            bool overlap = fi.start <= sp_end && sp.gen_ev <= fi.umax;
            if (!overlap) continue;
            f_all++;
            if (fi.in_big_batch)
                batches.insert(fi.batch);
            else
                f_ind++;
        }
        int u = static_cast<int>(batches.size());
        if (stats) {
            stats->max_level = std::max(stats->max_level, z);
            if (z >= stats->max_level) stats->max_overlap_f = std::max(stats->max_overlap_f, f_all);
        }
        if (v.result == Verdict::Pass && z * (z - 1) / 2 > f_all) {
            v.result = Verdict::Fail;
            std::ostringstream os;
            os << "p" << sp.pid << " super-passage @" << sp.gen_ev << " reached level " << z
               << " with only " << f_all << " overlapping consequence intervals";
            v.witness = os.str();
        }
        if (v.result == Verdict::Pass && u > 0 && z > u && (z - u) * (z - u) > f_ind) {
            v.result = Verdict::Fail;
            std::ostringstream os;
            os << "p" << sp.pid << " super-passage @" << sp.gen_ev << " reached level " << z
               << " with u=" << u << " batch failures but only " << f_ind
               << " overlapping individual failures (needs " << (z - u) * (z - u) << ")";
            v.witness = os.str();
        }
    }
    return v;
}

Verdict check_liveness(const History& h, int target) {
    Verdict v;
    v.name = "liveness";
    for (const Request& r : requests_of(h, target)) {
        if (!r.satisfied) {
            v.result = Verdict::Inconclusive;
            std::ostringstream os;
            os << "request of p" << r.pid << " generated @" << r.gen_ev
               << " unsatisfied within budget";
            v.witness = os.str();
            return v;
        }
    }
    return v;
}

std::map<std::pair<LockKind, Seg>, int> segment_step_maxima(const History& h, const World& w) {
    std::map<std::pair<LockKind, Seg>, int> maxima;
    struct Open {
        int lock;
        Seg seg;
        int count;
    };
    std::vector<std::vector<Open>> open(64);
    for (uint64_t i = 0; i < h.size(); i++) {
        const Event& e = h[i];
        if (e.kind == EvKind::Instr) {
            for (Open& o : open[e.pid]) o.count++;
        } else if (e.kind == EvKind::SegEnter && e.seg != Seg::CS && e.seg != Seg::NCS) {
            open[e.pid].push_back({e.lock, e.seg, 0});
        } else if (e.kind == EvKind::SegExit && e.seg != Seg::CS && e.seg != Seg::NCS) {
            auto& st = open[e.pid];
            if (!st.empty() && st.back().lock == e.lock && st.back().seg == e.seg) {
                auto key = std::make_pair(w.locks.kind(e.lock), e.seg);
                auto it = maxima.find(key);
                if (it == maxima.end())
                    maxima[key] = st.back().count;
                else
                    it->second = std::max(it->second, st.back().count);
                st.pop_back();
            }
        } else if (e.kind == EvKind::Crash) {
            open[e.pid].clear();
        }
    }
    return maxima;
}

int bcsr_max_steps(const History& h, int lock) {
    std::vector<uint8_t> in_cs(64, 0);
    std::vector<int> counting(64, 0);  // 0 idle, 1 counting re-entry steps
    std::vector<int> count(64, 0);
    int best = 0;
    for (uint64_t i = 0; i < h.size(); i++) {
        const Event& e = h[i];
        switch (e.kind) {
            case EvKind::SegEnter:
                if (e.seg == Seg::CS && e.lock == lock) {
                    in_cs[e.pid] = 1;
                    if (counting[e.pid]) {
                        best = std::max(best, count[e.pid]);
                        counting[e.pid] = 0;
                    }
                }
                break;
            case EvKind::SegExit:
                if (e.seg == Seg::CS && e.lock == lock) in_cs[e.pid] = 0;
                break;
            case EvKind::Crash:
                if (in_cs[e.pid]) counting[e.pid] = 1;  // crash inside CS (or re-crash)
                in_cs[e.pid] = 0;
                count[e.pid] = 0;  // each attempt counted separately
                break;
            case EvKind::Instr:
                if (counting[e.pid]) count[e.pid]++;
                break;
            default:
                break;
        }
    }
    return best;
}

int max_level_reached(const History& h, const std::vector<int>& filter_locks, int target) {
    int z = 1;
    auto eng = filter_engagements(h, filter_locks, 64);
    for (const Request& sp : requests_of(h, target)) {
        uint64_t sp_end = sp.satisfied ? sp.sat_ev : (h.size() ? h.size() - 1 : 0);
        z = std::max(z, level_in_range(eng, sp.pid, sp.gen_ev, sp_end));
    }
    return z;
}

std::string curve_csv(const std::vector<CurveRow>& rows) {
    std::ostringstream os;
    os << "scenario,seed,n,L,F,F_batch,max_level,max_rmr_cc,max_rmr_dsm\n";
    for (const auto& r : rows)
        os << r.scenario << "," << r.seed << "," << r.n << "," << r.levels << "," << r.f_injected
           << "," << r.f_batch << "," << r.max_level << "," << r.max_rmr_cc << "," << r.max_rmr_dsm
           << "\n";
    return os.str();
}

}  // namespace rme
