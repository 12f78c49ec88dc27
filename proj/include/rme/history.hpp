#pragma once

#include <cstdint>
#include <vector>

#include "rme/word.hpp"

namespace rme {

enum class EvKind : uint8_t { Instr, Crash, SegEnter, SegExit, ReqGen, ReqSat };

enum class InstrOp : uint8_t { Read, Write, Cas, Fas, Local };

enum class Seg : uint8_t { NCS, Recover, Enter, CS, Exit };

const char* seg_name(Seg s);
const char* op_name(InstrOp o);

// Logical time is the event index. Step index counts only Instr events and is
// what budgets are measured in; markers ride along at the same logical point.
struct Event {
    EvKind kind;
    InstrOp op = InstrOp::Local;  // Instr
    Seg seg = Seg::NCS;           // SegEnter/SegExit
    int16_t pid = -1;
    int32_t site = -1;  // Instr: site executed; Crash: gap site (last instr), -1 none
    int32_t cell = -1;  // Instr
    int32_t lock = -1;  // Seg*/Req*
    int32_t aux = -1;   // Crash: batch id (-1 individual); Instr: cas success; Seg: side
};

struct History {
    std::vector<Event> events;
    uint64_t steps = 0;

    void push(const Event& e) { events.push_back(e); }
    size_t size() const { return events.size(); }
    const Event& operator[](size_t i) const { return events[i]; }
};

}  // namespace rme
