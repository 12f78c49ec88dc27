#include "rme/world.hpp"

#include <algorithm>

#include "rme/history.hpp"

namespace rme {

const char* seg_name(Seg s) {
    switch (s) {
        case Seg::NCS: return "ncs";
        case Seg::Recover: return "recover";
        case Seg::Enter: return "enter";
        case Seg::CS: return "cs";
        case Seg::Exit: return "exit";
    }
    return "?";
}

const char* op_name(InstrOp o) {
    switch (o) {
        case InstrOp::Read: return "rd";
        case InstrOp::Write: return "wr";
        case InstrOp::Cas: return "cas";
        case InstrOp::Fas: return "fas";
        case InstrOp::Local: return "loc";
    }
    return "?";
}

int SiteRegistry::intern(const std::string& name) {
    auto it = ids_.find(name);
    if (it != ids_.end()) return it->second;
    int id = static_cast<int>(names_.size());
    names_.push_back(name);
    ids_.emplace(name, id);
    return id;
}

int SiteRegistry::find(const std::string& name) const {
    auto it = ids_.find(name);
    return it == ids_.end() ? -1 : it->second;
}

int LockRegistry::add(const std::string& name, LockKind kind) {
    int id = static_cast<int>(names_.size());
    names_.push_back(name);
    kinds_.push_back(kind);
    return id;
}

int LockRegistry::find(const std::string& name) const {
    auto it = std::find(names_.begin(), names_.end(), name);
    return it == names_.end() ? -1 : static_cast<int>(it - names_.begin());
}

std::vector<int> LockRegistry::sensitive_sites(int lock) const {
    std::vector<int> out;
    for (auto& [l, s] : sensitive_)
        if (l == lock) out.push_back(s);
    return out;
}

bool LockRegistry::site_sensitive_for(int lock, int site) const {
    for (auto& [l, s] : sensitive_)
        if (l == lock && s == site) return true;
    return false;
}

int NodeTable::add(const NodeInfo& info) {
    int id = static_cast<int>(nodes_.size());
    nodes_.push_back(info);
    return id;
}

int64_t NodeTable::generation(int slot, int64_t owner_alloc_count) const {
    const NodeInfo& ni = nodes_[slot];
    int64_t cycle = 4ll * ni.pool_n;
    if (owner_alloc_count < ni.pool_pos) return 0;
    return (owner_alloc_count - ni.pool_pos) / cycle + 1;
}

}  // namespace rme
