#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rme/word.hpp"

namespace rme {

// Immutable cell metadata, shared by an engine and all of its clones.
struct MemLayout {
    struct CellMeta {
        int32_t home = kGlobalHome;  // owning process, or kGlobalHome
        std::string label;
    };
    int n = 0;  // number of processes
    std::vector<CellMeta> cells;
    std::vector<Word> init_values;

    CellId alloc(int home, Word init, std::string label);
    size_t size() const { return cells.size(); }
};

struct RmrCounters {
    std::vector<uint64_t> cc;
    std::vector<uint64_t> dsm;
};

// Mutable memory state: values, CC cache masks, RMR tallies. Cloneable.
// Both cost models are tallied in the same run; accounting is observational
// and never feeds back into behavior.
class SharedMemory {
public:
    SharedMemory() = default;
    explicit SharedMemory(const MemLayout* layout);

    Word read(int pid, CellId c);
    void write(int pid, CellId c, Word v);
    bool cas(int pid, CellId c, const Word& expect, const Word& desired);
    Word fas(int pid, CellId c, Word desired);

    // Crash semantics: shared values untouched, the process's cache cleared.
    void crash_reset(int pid);

    // Accounting-free peek for checkers and trace tooling.
    const Word& peek(CellId c) const;
    bool cached_by(int pid, CellId c) const;

    const RmrCounters& counters() const { return rmrs_; }
    uint64_t cc_total(int pid) const { return rmrs_.cc[pid]; }
    uint64_t dsm_total(int pid) const { return rmrs_.dsm[pid]; }

    const MemLayout& layout() const { return *layout_; }
    size_t size() const { return values_.size(); }

    // For state hashing in the exhaustive explorer: values only. Cache masks
    // and RMR counters never influence control flow.
    const std::vector<Word>& values() const { return values_; }

private:
    void charge(int pid, CellId c, bool is_store);
    void check(CellId c) const;

    const MemLayout* layout_ = nullptr;
    std::vector<Word> values_;
    std::vector<uint64_t> cached_;  // per cell: bitmask of caching processes
    RmrCounters rmrs_;
};

}  // namespace rme
