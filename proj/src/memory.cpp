#include "rme/memory.hpp"

#include <sstream>
#include <stdexcept>

namespace rme {

void sim_fault(const std::string& msg) { throw std::runtime_error("sim fault: " + msg); }

const char* tag_name(int t) {
    switch (t) {
        case TAG_FREE: return "Free";
        case TAG_INITIALIZING: return "Initializing";
        case TAG_TRYING: return "Trying";
        case TAG_INCS: return "InCS";
        case TAG_LEAVING: return "Leaving";
        case TAG_LEFT: return "Left";
        case TAG_RIGHT: return "Right";
        case TAG_NONE: return "None";
    }
    return "?";
}

std::string Word::str() const {
    std::ostringstream os;
    switch (kind) {
        case WKind::Null: os << "null"; break;
        case WKind::Int: os << a; break;
        case WKind::Bool: os << (a ? "true" : "false"); break;
        case WKind::Ref: os << "n" << a << "@" << b; break;
        case WKind::CellRef: os << "c" << a; break;
        case WKind::Pid: os << "p" << a; break;
        case WKind::Tag: os << tag_name(static_cast<int>(a)); break;
        case WKind::Packed: os << "(" << tag_name(static_cast<int>(a)) << ",p" << b << ")"; break;
    }
    return os.str();
}

CellId MemLayout::alloc(int home, Word init, std::string label) {
    RME_CHECK(home == kGlobalHome || (home >= 0 && home < n), "cell home out of range");
    CellId c{static_cast<int32_t>(cells.size())};
    cells.push_back({home, std::move(label)});
    init_values.push_back(init);
    return c;
}

SharedMemory::SharedMemory(const MemLayout* layout)
    : layout_(layout), values_(layout->init_values), cached_(layout->size(), 0) {
    rmrs_.cc.assign(layout->n, 0);
    rmrs_.dsm.assign(layout->n, 0);
}

void SharedMemory::check(CellId c) const {
    RME_CHECK(c.v >= 0 && static_cast<size_t>(c.v) < values_.size(), "unknown cell");
}

// CC: a store always reaches main memory (+1) and invalidates every other
// cache; a load costs +1 only on a miss and then caches the line. Failed CAS
// reaches memory too but changes no value, so it invalidates nothing.
// DSM: +1 for any operation on a cell homed elsewhere.
void SharedMemory::charge(int pid, CellId c, bool is_store) {
    uint64_t me = 1ull << pid;
    uint64_t& mask = cached_[c.v];
    if (is_store) {
        rmrs_.cc[pid]++;
        mask = me;
    } else {
        if (!(mask & me)) {
            rmrs_.cc[pid]++;
            mask |= me;
        }
    }
    if (layout_->cells[c.v].home != pid) rmrs_.dsm[pid]++;
}

Word SharedMemory::read(int pid, CellId c) {
    check(c);
    charge(pid, c, false);
    return values_[c.v];
}

void SharedMemory::write(int pid, CellId c, Word v) {
    check(c);
    charge(pid, c, true);
    values_[c.v] = v;
}

bool SharedMemory::cas(int pid, CellId c, const Word& expect, const Word& desired) {
    check(c);
    uint64_t me = 1ull << pid;
    bool ok = values_[c.v] == expect;
    rmrs_.cc[pid]++;  // one write-cost RMR, success or not
    if (layout_->cells[c.v].home != pid) rmrs_.dsm[pid]++;
    if (ok) {
        cached_[c.v] = me;  // store: invalidate others
        values_[c.v] = desired;
    } else {
        cached_[c.v] |= me;  // no value change: others keep their lines
    }
    return ok;
}

Word SharedMemory::fas(int pid, CellId c, Word desired) {
    check(c);
    charge(pid, c, true);
    Word old = values_[c.v];
    values_[c.v] = desired;
    return old;
}

void SharedMemory::crash_reset(int pid) {
    uint64_t me = 1ull << pid;
    for (auto& m : cached_) m &= ~me;
}

const Word& SharedMemory::peek(CellId c) const {
    check(c);
    return values_[c.v];
}

bool SharedMemory::cached_by(int pid, CellId c) const {
    check(c);
    return (cached_[c.v] >> pid) & 1;
}

}  // namespace rme
