#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "rme/memory.hpp"
#include "rme/word.hpp"

namespace rme {

// Interns instruction-site labels. Lock instances register their sites under
// an instance prefix (e.g. "L2.FAS_TAIL"), which is what failure plans name.
class SiteRegistry {
public:
    int intern(const std::string& name);
    int find(const std::string& name) const;  // -1 if absent
    const std::string& name(int id) const { return names_[id]; }
    size_t size() const { return names_.size(); }

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, int> ids_;
};

enum class LockKind : uint8_t { Target, WrQueue, Arbiter, Splitter, Tournament };

// Lock instances get stable ids; checkers address them by name.
class LockRegistry {
public:
    int add(const std::string& name, LockKind kind);
    int find(const std::string& name) const;
    const std::string& name(int id) const { return names_[id]; }
    LockKind kind(int id) const { return kinds_[id]; }
    size_t size() const { return names_.size(); }

    // Sensitive-site declarations, per lock (for unsafe-failure classification
    // and the locality check).
    void declare_sensitive(int lock, int site) { sensitive_.push_back({lock, site}); }
    std::vector<int> sensitive_sites(int lock) const;
    const std::vector<std::pair<int, int>>& all_sensitive() const { return sensitive_; }
    bool site_sensitive_for(int lock, int site) const;

private:
    std::vector<std::string> names_;
    std::vector<LockKind> kinds_;
    std::vector<std::pair<int, int>> sensitive_;  // (lock, site)
};

// Queue nodes live in preallocated per-process pools. A node is two cells
// (next, locked) homed at its owner. Slots are reissued cyclically by the
// reclamation scheme; the current generation of a slot is a pure function of
// the owner's allocation counter, so clones need no extra state.
struct NodeInfo {
    int owner = -1;
    int pool_pos = 0;  // 1..4n within the owner's pool for one lock instance
    CellId next;
    CellId locked;
    CellId owner_in_counter;  // the owner's inCounter for this lock instance
    int pool_n = 0;           // n used for this pool's sizing (4n slots)
};

class NodeTable {
public:
    int add(const NodeInfo& info);
    const NodeInfo& info(int slot) const { return nodes_[slot]; }
    size_t size() const { return nodes_.size(); }

    // Number of times this slot has been issued, given the owner's current
    // allocation count. Allocation k (1-based) uses pool position
    // ((k-1) mod 4n) + 1, so slot p is issued at k = p, p+4n, p+8n, ...
    int64_t generation(int slot, int64_t owner_alloc_count) const;

private:
    std::vector<NodeInfo> nodes_;
};

// Construction-time context: immutable once an Engine starts running.
struct World {
    int n = 0;
    MemLayout layout;
    SiteRegistry sites;
    LockRegistry locks;
    NodeTable nodes;

    explicit World(int n_procs) {
        n = n_procs;
        layout.n = n_procs;
        sites.intern("NCS");
        sites.intern("CS");
    }
    CellId alloc(int home, Word init, std::string label) {
        return layout.alloc(home, init, std::move(label));
    }
};

}  // namespace rme
