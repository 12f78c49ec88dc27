#include "rme/explore.hpp"

#include <memory>
#include <unordered_map>

namespace rme {

namespace {

struct Key {
    uint64_t a, b;
    bool operator==(const Key& o) const { return a == o.a && b == o.b; }
};
struct KeyHash {
    size_t operator()(const Key& k) const { return k.a ^ (k.b * 0x9e3779b97f4a7c15ull); }
};

Key key_of(const Engine& e, int crashes_used) {
    StateHash h;
    e.state_hash(h);
    h.mix(static_cast<uint64_t>(crashes_used));
    return {h.h1, h.h2};
}

struct Node {
    std::unique_ptr<Engine> eng;
    int crashes = 0;
    int depth = 0;
    int next_move = 0;
};

}  // namespace

ExploreResult explore(const Engine& initial, const ExploreConfig& cfg) {
    ExploreResult res;
    int n = initial.num_procs();
    // visited -> largest remaining step budget already explored from there
    std::unordered_map<Key, int, KeyHash> visited;

    std::vector<Node> stack;
    std::vector<std::string> trail;
    stack.push_back({std::make_unique<Engine>(initial), 0, 0, 0});
    res.states = 1;
    visited[key_of(initial, 0)] = cfg.max_steps;
    if (cfg.check) {
        std::string v = cfg.check(initial);
        if (!v.empty()) {
            res.ok = false;
            res.violation = v;
            return res;
        }
    }

    while (!stack.empty()) {
        Node& cur = stack.back();
        // moves: 0..n-1 step pid, n..2n-1 crash pid
        int m = cur.next_move++;
        if (m >= 2 * n) {
            stack.pop_back();
            if (!trail.empty()) trail.pop_back();
            continue;
        }
        bool is_crash = m >= n;
        int pid = is_crash ? m - n : m;
        if (is_crash) {
            if (cur.crashes >= cfg.max_crashes) continue;
            if (cfg.crash_ok && !cfg.crash_ok(*cur.eng, pid)) continue;
        } else {
            if (cur.depth >= cfg.max_steps) continue;
            if (!cur.eng->runnable(pid)) continue;
        }
        auto child = std::make_unique<Engine>(*cur.eng);
        int ccrashes = cur.crashes;
        int cdepth = cur.depth;
        if (is_crash) {
            child->crash(pid);
            ccrashes++;
        } else {
            child->step(pid);
            cdepth++;
        }
        res.transitions++;
        std::string move = (is_crash ? "c" : "s") + std::to_string(pid);
        if (cfg.check) {
            std::string v = cfg.check(*child);
            if (!v.empty()) {
                res.ok = false;
                res.violation = v;
                res.trail = trail;
                res.trail.push_back(move);
                return res;
            }
        }
        int remaining = cfg.max_steps - cdepth;
        Key k = key_of(*child, ccrashes);
        auto it = visited.find(k);
        if (it != visited.end() && it->second >= remaining) continue;  // seen with >= budget
        visited[k] = remaining;
        res.states++;
        trail.push_back(move);
        stack.push_back({std::move(child), ccrashes, cdepth, 0});
    }
    return res;
}

}  // namespace rme
