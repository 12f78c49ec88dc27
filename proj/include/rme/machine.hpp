#pragma once

#include <cstdint>
#include <memory>

#include "rme/history.hpp"
#include "rme/word.hpp"

namespace rme {

class Engine;

// Two-lane mixer for state dedup in the exhaustive explorer. 128 bits keeps
// the collision probability negligible at the state counts we reach.
struct StateHash {
    uint64_t h1 = 0x243f6a8885a308d3ull;
    uint64_t h2 = 0x13198a2e03707344ull;
    void mix(uint64_t v) {
        h1 ^= v;
        h1 *= 0x100000001b3ull;
        h1 ^= h1 >> 29;
        h2 += v * 0x9e3779b97f4a7c15ull;
        h2 = (h2 << 27) | (h2 >> 37);
        h2 *= 0xbf58476d1ce4e5b9ull;
    }
    void mix_word(const Word& w) {
        mix(static_cast<uint64_t>(w.kind));
        mix(static_cast<uint64_t>(w.a));
        if (w.kind == WKind::Packed) mix(static_cast<uint64_t>(w.b));
    }
};

// Per-step facade handed to frames. A frame's step() must perform exactly one
// shared-memory instruction or one local computation through it; segment
// markers are free. Private state lives only in frames and dies on crash.
class Ctx {
public:
    Ctx(Engine& e, int pid) : eng_(e), pid_(pid) {}

    int pid() const { return pid_; }
    int n() const;

    Word read(CellId c, int site);
    void write(CellId c, Word v, int site);
    bool cas(CellId c, const Word& expect, const Word& desired, int site);
    Word fas(CellId c, Word desired, int site);
    void local(int site);

    void seg_enter(int lock, Seg s, int aux = -1);
    void seg_exit(int lock, Seg s, int aux = -1);

    // Driver support: true while the process has an unsatisfied request or
    // its request stream is not exhausted. Models application knowledge.
    bool want_request() const;

    int ops = 0;

private:
    friend class Engine;
    Engine& eng_;
    int pid_;
};

// A resumable step program. clone() and mix() exist so the exhaustive
// explorer can snapshot and dedup whole simulator states.
class Frame {
public:
    virtual ~Frame() = default;
    virtual bool step(Ctx& cx) = 0;  // true when the fragment completed
    virtual std::unique_ptr<Frame> clone() const = 0;
    virtual void mix(StateHash& h) const = 0;
};

// A recoverable lock exposes its three segments as frame factories plus its
// identity in the lock registry. Frames reference the lock instance, which is
// immutable while an engine runs.
class RecoverableLock {
public:
    virtual ~RecoverableLock() = default;
    virtual int lock_id() const = 0;
    virtual std::unique_ptr<Frame> recover(int pid) const = 0;
    virtual std::unique_ptr<Frame> enter(int pid) const = 0;
    virtual std::unique_ptr<Frame> exit(int pid) const = 0;
};

}  // namespace rme
