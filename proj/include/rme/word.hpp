#pragma once

#include <cstdint>
#include <string>

namespace rme {

// One simulated machine word. Everything stored in a shared cell is a Word.
// Ref carries a node slot id plus a generation stamp used only by the
// reclamation oracle; equality ignores the stamp so reissued slots compare
// equal, exactly like raw pointers on real hardware (ABA included).
enum class WKind : uint8_t { Null, Int, Bool, Ref, CellRef, Pid, Tag, Packed };

struct Word {
    WKind kind = WKind::Null;
    int64_t a = 0;  // Int value | Bool | node slot | cell id | pid | tag | packed tag
    int64_t b = 0;  // Ref generation (oracle only) | packed pid

    static Word null() { return {}; }
    static Word integer(int64_t v) { return {WKind::Int, v, 0}; }
    static Word boolean(bool v) { return {WKind::Bool, v ? 1 : 0, 0}; }
    static Word ref(int32_t slot, int64_t gen) { return {WKind::Ref, slot, gen}; }
    static Word cell_ref(int32_t cell) { return {WKind::CellRef, cell, 0}; }
    static Word pid(int p) { return {WKind::Pid, p, 0}; }
    static Word tag(int t) { return {WKind::Tag, t, 0}; }
    static Word packed(int t, int p) { return {WKind::Packed, t, p}; }

    bool is_null() const { return kind == WKind::Null; }
    bool is_ref() const { return kind == WKind::Ref; }
    bool as_bool() const { return kind == WKind::Bool && a != 0; }
    int32_t ref_slot() const { return static_cast<int32_t>(a); }
    int tag_of() const { return static_cast<int>(a); }
    int packed_tag() const { return static_cast<int>(a); }
    int packed_pid() const { return static_cast<int>(b); }

    friend bool operator==(const Word& x, const Word& y) {
        if (x.kind != y.kind) return false;
        if (x.a != y.a) return false;
        return x.kind != WKind::Packed || x.b == y.b;
    }
    friend bool operator!=(const Word& x, const Word& y) { return !(x == y); }

    std::string str() const;
};

// Identity of a shared cell. Home and label are fixed at allocation.
struct CellId {
    int32_t v = -1;
    bool valid() const { return v >= 0; }
    friend bool operator==(CellId x, CellId y) { return x.v == y.v; }
};

constexpr int kGlobalHome = -1;

// Process state tags shared by the lock programs.
enum Tagv : int {
    TAG_FREE = 1,
    TAG_INITIALIZING = 2,
    TAG_TRYING = 3,
    TAG_INCS = 4,
    TAG_LEAVING = 5,
    TAG_LEFT = 6,
    TAG_RIGHT = 7,
    TAG_NONE = 8,
};

const char* tag_name(int t);

// Always-on check; simulator faults are programming errors in tests or
// algorithm code and abort the run with a message.
[[noreturn]] void sim_fault(const std::string& msg);

#define RME_CHECK(cond, msg)            \
    do {                                \
        if (!(cond)) ::rme::sim_fault(msg); \
    } while (0)

}  // namespace rme
