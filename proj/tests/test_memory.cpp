#include <map>
#include <random>

#include "doctest.h"
#include "rme/memory.hpp"
#include "rme/world.hpp"

using namespace rme;

namespace {
struct Fixture {
    World w{4};
    CellId tail, owned1, owned3;
    Fixture() {
        tail = w.alloc(kGlobalHome, Word::null(), "tail");
        owned1 = w.alloc(1, Word::boolean(true), "locked");
        owned3 = w.alloc(3, Word::integer(7), "x3");
    }
};
}  // namespace

TEST_CASE("word equality: variant plus payload; Ref ignores generation; Packed compares both") {
    CHECK(Word::null() == Word::null());
    CHECK(Word::integer(3) != Word::integer(4));
    CHECK(Word::integer(0) != Word::boolean(false));
    CHECK(Word::ref(5, 1) == Word::ref(5, 2));  // hardware sees the same address
    CHECK(Word::ref(5, 1) != Word::ref(6, 1));
    CHECK(Word::packed(TAG_TRYING, 2) != Word::packed(TAG_TRYING, 3));
    CHECK(Word::packed(TAG_INCS, 2) == Word::packed(TAG_INCS, 2));
}

TEST_CASE("alloc: distinct ids, init values, fixed homes") {
    World w{4};
    CellId a = w.alloc(kGlobalHome, Word::null(), "tail");
    CellId b = w.alloc(2, Word::boolean(true), "locked");
    CellId cells[8];
    for (int i = 0; i < 8; i++) cells[i] = w.alloc(0, Word::integer(i), "state");
    CHECK(a.v != b.v);
    for (int i = 0; i < 8; i++)
        for (int j = i + 1; j < 8; j++) CHECK(cells[i].v != cells[j].v);
    SharedMemory m(&w.layout);
    CHECK(m.peek(a) == Word::null());
    CHECK(m.peek(b) == Word::boolean(true));
    CHECK(m.peek(cells[5]) == Word::integer(5));
}

TEST_CASE("cc reads: miss then hit") {
    Fixture f;
    SharedMemory m(&f.w.layout);
    m.read(1, f.tail);
    CHECK(m.cc_total(1) == 1);
    m.read(1, f.tail);
    CHECK(m.cc_total(1) == 1);  // cached now
}

TEST_CASE("dsm reads: home locality") {
    Fixture f;
    SharedMemory m(&f.w.layout);
    m.read(1, f.owned1);
    CHECK(m.dsm_total(1) == 0);  // own node's memory
    m.read(2, f.owned1);
    CHECK(m.dsm_total(2) == 1);  // remote home
    m.read(2, f.tail);
    CHECK(m.dsm_total(2) == 2);  // global home is remote to everyone
}

TEST_CASE("writes invalidate other caches and always cost one cc rmr") {
    Fixture f;
    SharedMemory m(&f.w.layout);
    m.read(2, f.tail);
    CHECK(m.cc_total(2) == 1);
    m.write(1, f.tail, Word::pid(1));
    CHECK(m.cc_total(1) == 1);
    CHECK(m.dsm_total(1) == 1);  // global home
    m.read(2, f.tail);           // invalidated by p1's write
    CHECK(m.cc_total(2) == 2);
    m.write(1, f.owned1, Word::null());
    CHECK(m.dsm_total(1) == 1);  // own-homed write costs no dsm rmr
    CHECK(m.cc_total(1) == 2);   // but still one cc rmr
    CHECK(m.read(1, f.owned1) == Word::null());  // store-load
}

TEST_CASE("cas: matching, mismatched, both orders of a race have one winner") {
    Fixture f;
    SharedMemory m(&f.w.layout);
    CHECK(m.cas(0, f.owned3, Word::integer(7), Word::pid(3)));
    CHECK(m.peek(f.owned3) == Word::pid(3));
    CHECK(!m.cas(0, f.owned3, Word::integer(0), Word::pid(1)));
    CHECK(m.peek(f.owned3) == Word::pid(3));

    // two processes cas the same cell: in either order exactly one succeeds
    for (int first = 0; first < 2; first++) {
        SharedMemory m2(&f.w.layout);
        bool r1 = m2.cas(first, f.tail, Word::null(), Word::pid(first));
        bool r2 = m2.cas(1 - first, f.tail, Word::null(), Word::pid(1 - first));
        CHECK(r1);
        CHECK(!r2);
        CHECK(m2.peek(f.tail) == Word::pid(first));
    }
}

TEST_CASE("failed cas costs one cc rmr and invalidates nobody") {
    Fixture f;
    SharedMemory m(&f.w.layout);
    m.read(2, f.owned3);
    uint64_t cc2 = m.cc_total(2);
    CHECK(!m.cas(1, f.owned3, Word::integer(0), Word::integer(1)));
    CHECK(m.cc_total(1) == 1);
    m.read(2, f.owned3);
    CHECK(m.cc_total(2) == cc2);  // p2's line survived the failed cas
}

TEST_CASE("fas: returns prior value; rmw charged like a write") {
    Fixture f;
    SharedMemory m(&f.w.layout);
    CHECK(m.fas(0, f.tail, Word::ref(10, 1)) == Word::null());
    CHECK(m.fas(1, f.tail, Word::ref(11, 1)) == Word::ref(10, 1));
    uint64_t d3 = m.dsm_total(3);
    m.fas(3, f.owned3, Word::integer(9));
    CHECK(m.dsm_total(3) == d3);  // own-homed rmw: 0 dsm
    m.fas(2, f.owned3, Word::integer(10));
    CHECK(m.dsm_total(2) == 1);
}

TEST_CASE("crash_reset clears only the cache") {
    Fixture f;
    SharedMemory m(&f.w.layout);
    m.write(1, f.tail, Word::pid(1));
    m.read(1, f.tail);
    uint64_t cc = m.cc_total(1);
    m.crash_reset(1);
    CHECK(m.peek(f.tail) == Word::pid(1));  // shared cells untouched
    m.crash_reset(1);                       // idempotent
    CHECK(m.peek(f.tail) == Word::pid(1));
    m.read(1, f.tail);
    CHECK(m.cc_total(1) == cc + 1);  // first re-read misses
}

TEST_CASE("counters snapshot is pure") {
    Fixture f;
    SharedMemory m(&f.w.layout);
    RmrCounters a = m.counters();
    for (uint64_t c : a.cc) CHECK(c == 0);
    m.read(2, f.tail);
    RmrCounters b = m.counters();
    RmrCounters c = m.counters();
    CHECK(b.cc == c.cc);
    CHECK(b.dsm == c.dsm);
    uint64_t bumped = 0;
    for (int p = 0; p < 4; p++) bumped += b.cc[p] - a.cc[p];
    CHECK(bumped == 1);
}

// Linearized semantics: the simulated memory equals a sequential map model
// applied to the same operation sequence.
TEST_CASE("memory behavior matches a naive sequential model") {
    World w{4};
    std::vector<CellId> cells;
    for (int i = 0; i < 10; i++) cells.push_back(w.alloc(i % 4, Word::integer(0), "c"));
    SharedMemory m(&w.layout);
    std::map<int32_t, Word> model;
    for (auto c : cells) model[c.v] = Word::integer(0);
    std::mt19937_64 rng(42);
    for (int step = 0; step < 5000; step++) {
        int pid = static_cast<int>(rng() % 4);
        CellId c = cells[rng() % cells.size()];
        Word val = Word::integer(static_cast<int64_t>(rng() % 5));
        switch (rng() % 4) {
            case 0:
                CHECK(m.read(pid, c) == model[c.v]);
                break;
            case 1:
                m.write(pid, c, val);
                model[c.v] = val;
                break;
            case 2: {
                Word expect = Word::integer(static_cast<int64_t>(rng() % 5));
                bool want = model[c.v] == expect;
                CHECK(m.cas(pid, c, expect, val) == want);
                if (want) model[c.v] = val;
                break;
            }
            case 3:
                CHECK(m.fas(pid, c, val) == model[c.v]);
                model[c.v] = val;
                break;
        }
    }
}
