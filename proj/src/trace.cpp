#include "rme/trace.hpp"

#include <sstream>

namespace rme {

namespace {
const char* kind_code(EvKind k) {
    switch (k) {
        case EvKind::Instr: return "i";
        case EvKind::Crash: return "c";
        case EvKind::SegEnter: return "e";
        case EvKind::SegExit: return "x";
        case EvKind::ReqGen: return "g";
        case EvKind::ReqSat: return "s";
    }
    return "?";
}
}  // namespace

std::string dump_events(const History& h, const World& w) {
    std::ostringstream os;
    for (uint64_t i = 0; i < h.size(); i++) {
        const Event& e = h[i];
        os << kind_code(e.kind) << " " << e.pid;
        switch (e.kind) {
            case EvKind::Instr:
                os << " " << op_name(e.op) << " " << e.cell << " "
                   << (e.site >= 0 ? w.sites.name(e.site) : "-") << " " << e.aux;
                break;
            case EvKind::Crash:
                os << " " << (e.site >= 0 ? w.sites.name(e.site) : "-") << " " << e.aux;
                break;
            case EvKind::SegEnter:
            case EvKind::SegExit:
                os << " " << w.locks.name(e.lock) << " " << seg_name(e.seg) << " " << e.aux;
                break;
            case EvKind::ReqGen:
            case EvKind::ReqSat:
                os << " " << w.locks.name(e.lock);
                break;
            default:
                break;
        }
        os << "\n";
    }
    return os.str();
}

namespace {

InstrOp parse_op(const std::string& s) {
    if (s == "rd") return InstrOp::Read;
    if (s == "wr") return InstrOp::Write;
    if (s == "cas") return InstrOp::Cas;
    if (s == "fas") return InstrOp::Fas;
    if (s == "loc") return InstrOp::Local;
    sim_fault("trace: bad op " + s);
}

Seg parse_seg(const std::string& s) {
    if (s == "ncs") return Seg::NCS;
    if (s == "recover") return Seg::Recover;
    if (s == "enter") return Seg::Enter;
    if (s == "cs") return Seg::CS;
    if (s == "exit") return Seg::Exit;
    sim_fault("trace: bad segment " + s);
}

}  // namespace

History parse_events(const std::string& body, const World& w) {
    History h;
    std::istringstream is(body);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string k, tok;
        Event e;
        int pid;
        ls >> k >> pid;
        RME_CHECK(!ls.fail(), "trace: truncated line: " + line);
        e.pid = static_cast<int16_t>(pid);
        if (k == "i") {
            e.kind = EvKind::Instr;
            std::string op, site;
            ls >> op >> e.cell >> site >> e.aux;
            e.op = parse_op(op);
            e.site = site == "-" ? -1 : w.sites.find(site);
            RME_CHECK(site == "-" || e.site >= 0, "trace: unknown site " + site);
            h.steps++;
        } else if (k == "c") {
            e.kind = EvKind::Crash;
            std::string site;
            ls >> site >> e.aux;
            e.site = site == "-" ? -1 : w.sites.find(site);
            RME_CHECK(site == "-" || e.site >= 0, "trace: unknown site " + site);
        } else if (k == "e" || k == "x") {
            e.kind = k == "e" ? EvKind::SegEnter : EvKind::SegExit;
            std::string lock, seg;
            ls >> lock >> seg >> e.aux;
            e.lock = w.locks.find(lock);
            RME_CHECK(e.lock >= 0, "trace: unknown lock " + lock);
            e.seg = parse_seg(seg);
        } else if (k == "g" || k == "s") {
            e.kind = k == "g" ? EvKind::ReqGen : EvKind::ReqSat;
            std::string lock;
            ls >> lock;
            e.lock = w.locks.find(lock);
            RME_CHECK(e.lock >= 0, "trace: unknown lock " + lock);
        } else {
            sim_fault("trace: bad event kind " + k);
        }
        h.push(e);
    }
    return h;
}

}  // namespace rme
