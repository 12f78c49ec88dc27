#include "rme/scenario.hpp"

#include <random>
#include <sstream>

#include "json.hpp"
#include "rme/trace.hpp"

namespace rme {

using nlohmann::json;

std::string ScenarioConfig::to_json() const {
    json j;
    j["n"] = n;
    j["lock"] = lock;
    j["base"] = base;
    j["levels_override"] = levels_override;
    j["schedule"] = schedule;
    j["seed"] = seed;
    j["fairness"] = fairness;
    j["sched_prefix"] = sched_prefix;
    j["budget"] = budget;
    j["cs_len"] = cs_len;
    j["ncs_len"] = ncs_len;
    j["requests"] = requests;
    j["tau"] = tau;
    j["name"] = name;
    j["crashes"] = json::array();
    for (const auto& c : crashes) {
        json cj;
        cj["pid"] = c.pid;
        cj["site"] = c.site;
        cj["occurrence"] = c.occurrence;
        cj["step"] = c.step;
        cj["batch"] = c.batch;
        j["crashes"].push_back(cj);
    }
    return j.dump();
}

ScenarioConfig ScenarioConfig::from_json(const std::string& text) {
    ScenarioConfig c;
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        sim_fault(std::string("config: bad json: ") + e.what());
    }
    auto get = [&](const char* k, auto def) {
        using T = decltype(def);
        return j.contains(k) ? j[k].get<T>() : def;
    };
    c.n = get("n", 2);
    c.lock = get("lock", std::string("ba"));
    c.base = get("base", std::string("tournament"));
    c.levels_override = get("levels_override", -1);
    c.schedule = get("schedule", std::string("round-robin"));
    c.seed = get("seed", static_cast<uint64_t>(1));
    c.fairness = get("fairness", 4);
    c.sched_prefix = get("sched_prefix", std::vector<int>{});
    c.budget = get("budget", static_cast<uint64_t>(20000));
    c.cs_len = get("cs_len", 1);
    c.ncs_len = get("ncs_len", 1);
    c.requests = get("requests", -1);
    c.tau = get("tau", 1 << 30);
    c.name = get("name", std::string("run"));
    if (j.contains("crashes")) {
        for (const auto& cj : j["crashes"]) {
            Crash cr;
            cr.pid = cj.value("pid", 0);
            cr.site = cj.value("site", std::string());
            cr.occurrence = cj.value("occurrence", 1);
            cr.step = cj.value("step", static_cast<uint64_t>(0));
            cr.batch = cj.value("batch", -1);
            c.crashes.push_back(cr);
        }
    }
    RME_CHECK(c.n >= 1 && c.n <= 64, "config: n out of range");
    RME_CHECK(c.lock == "ba" || c.lock == "wr", "config: lock must be 'ba' or 'wr'");
    RME_CHECK(c.base == "tournament", "config: unknown base kind");
    RME_CHECK(c.schedule == "round-robin" || c.schedule == "random",
              "config: unknown schedule");
    RME_CHECK(c.levels_override == -1 || c.levels_override >= 1, "config: levels must be >= 1");
    RME_CHECK(c.cs_len >= 1 && c.ncs_len >= 1, "config: cs_len/ncs_len must be >= 1");
    return c;
}

Scenario Scenario::build(const ScenarioConfig& cfg) {
    Scenario s;
    s.world = std::make_unique<World>(cfg.n);
    if (cfg.lock == "wr") {
        s.wr = std::make_unique<QueueLock>(*s.world, "target", "WR.");
        s.target = s.wr.get();
        s.target_id = s.wr->lock_id();
        s.filter_ids = {s.target_id};
        s.levels = 1;
    } else {
        s.levels = cfg.levels_override >= 1 ? cfg.levels_override : default_levels(cfg.n);
        s.ba = std::make_unique<AdaptiveLock>(*s.world, s.levels);
        s.target = s.ba.get();
        s.target_id = s.ba->lock_id();
        for (int l = 0; l < s.levels; l++) {
            s.filter_ids.push_back(s.ba->filter(l).lock_id());
            s.arb_ids.push_back(s.ba->arbiter(l).lock_id());
            s.splitter_ids.push_back(s.ba->splitter(l).lock_id());
        }
        for (int i = 0; i < s.ba->base().num_nodes(); i++)
            s.arb_ids.push_back(s.ba->base().node(i).lock_id());
    }
    return s;
}

FailurePlan Scenario::make_plan(const ScenarioConfig& cfg) const {
    FailurePlan plan;
    plan.tau = cfg.tau;
    for (const auto& c : cfg.crashes) {
        CrashPoint cp;
        cp.pid = c.pid;
        cp.batch = c.batch;
        if (c.site.empty()) {
            cp.at_step = true;
            cp.step = c.step;
        } else {
            cp.at_step = false;
            cp.site = world->sites.find(c.site);
            RME_CHECK(cp.site >= 0, "config: unknown site label '" + c.site + "'");
            cp.occurrence = c.occurrence;
        }
        plan.points.push_back(cp);
    }
    return plan;
}

Engine Scenario::make_engine(const ScenarioConfig& cfg) const {
    std::vector<DriverSpec> specs(cfg.n);
    for (auto& d : specs) {
        d.lock = target;
        d.ncs_len = cfg.ncs_len;
        d.cs_len = cfg.cs_len;
        d.max_requests = cfg.requests;
    }
    Engine eng(world.get(), specs, target_id);
    Schedule sch;
    if (!cfg.sched_prefix.empty()) {
        RME_CHECK(cfg.schedule == "round-robin", "config: sched_prefix needs round-robin");
        sch.kind = Schedule::List;
        sch.list = cfg.sched_prefix;
    } else if (cfg.schedule == "random") {
        sch.kind = Schedule::Random;
        sch.seed = cfg.seed;
        sch.fairness = cfg.fairness;
    } else {
        sch.kind = Schedule::RoundRobin;
    }
    eng.set_schedule(sch);
    eng.set_plan(make_plan(cfg));
    return eng;
}

bool RunResult::safety_failed() const {
    if (!subqueues.ok || oracle_violations > 0) return true;
    for (const auto& v : verdicts)
        if (v.failed()) return true;
    return false;
}

bool RunResult::inconclusive() const {
    for (const auto& v : verdicts)
        if (v.result == Verdict::Inconclusive) return true;
    return false;
}

RunResult run_scenario(const ScenarioConfig& cfg) {
    Scenario sc = Scenario::build(cfg);
    Engine eng = sc.make_engine(cfg);

    auto stats = std::make_shared<SubqueueStats>();
    std::vector<const QueueLock*> qlocks;
    if (sc.wr) qlocks.push_back(sc.wr.get());
    if (sc.ba)
        for (int l = 0; l < sc.levels; l++) qlocks.push_back(&sc.ba->filter(l));
    eng.set_probe([stats, qlocks](Engine& e) {
        for (const QueueLock* q : qlocks) {
            int c = e.cs_count(q->lock_id());
            if (c < 2) continue;
            std::vector<int> pids;
            for (int p = 0; p < e.world().n; p++)
                if (e.in_cs(p, q->lock_id())) pids.push_back(p);
            QueueLock::Chains ch = q->derive_subqueues(e.mem(), pids);
            stats->probes++;
            stats->max_occupancy = std::max(stats->max_occupancy, c);
            stats->max_chains = std::max(stats->max_chains, ch.chains);
            if (ch.occupant_chains < c && stats->ok) {
                stats->ok = false;
                std::ostringstream os;
                os << "step " << e.steps() << ": " << c << " occupants of "
                   << e.world().locks.name(q->lock_id()) << " span only " << ch.occupant_chains
                   << " disjoint chains";
                stats->witness = os.str();
            }
        }
    });

    RunResult r;
    r.cfg = cfg;
    r.levels = sc.levels;
    r.stop = eng.run(cfg.budget);
    r.history = eng.history();
    r.passages = eng.passages();
    r.subqueues = *stats;
    r.oracle_violations = eng.oracle_violations().size();

    const World& w = *sc.world;
    if (sc.ba) {
        r.verdicts.push_back(check_strong_me(r.history, w, sc.target_id));
        r.verdicts.push_back(check_strong_me(r.history, w, sc.ba->base().lock_id()));
        for (int id : sc.arb_ids) {
            r.verdicts.push_back(check_strong_me(r.history, w, id));
            r.verdicts.push_back(check_side_contract(r.history, w, id));
        }
        for (int id : sc.splitter_ids) r.verdicts.push_back(check_strong_me(r.history, w, id));
        for (int id : sc.filter_ids) r.verdicts.push_back(check_weak_me_responsive(r.history, w, id));
        r.verdicts.push_back(
            check_level_bound(r.history, w, sc.filter_ids, sc.target_id, cfg.tau));
    } else {
        r.verdicts.push_back(check_weak_me_responsive(r.history, w, sc.target_id));
    }
    r.verdicts.push_back(check_liveness(r.history, sc.target_id));
    {
        Verdict v;
        v.name = "memrec_oracle";
        if (r.oracle_violations > 0) {
            v.result = Verdict::Fail;
            v.witness = std::to_string(r.oracle_violations) + " stale node reference sightings";
        }
        r.verdicts.push_back(v);
        Verdict sq;
        sq.name = "subqueue_correspondence";
        if (!r.subqueues.ok) {
            sq.result = Verdict::Fail;
            sq.witness = r.subqueues.witness;
        }
        r.verdicts.push_back(sq);
    }

    r.max_level = max_level_reached(r.history, sc.filter_ids, sc.target_id);
    for (const auto& p : r.passages) {
        r.max_passage_cc = std::max(r.max_passage_cc, p.rmr_cc);
        r.max_passage_dsm = std::max(r.max_passage_dsm, p.rmr_dsm);
    }
    return r;
}

std::string make_trace(const ScenarioConfig& cfg, const History& h, const World& w) {
    std::ostringstream os;
    os << kTraceMagic << "\n" << cfg.to_json() << "\n" << dump_events(h, w);
    return os.str();
}

TraceFile parse_trace(const std::string& text) {
    std::istringstream is(text);
    std::string magic, cfgline;
    RME_CHECK(std::getline(is, magic), "trace: empty file");
    RME_CHECK(magic == kTraceMagic, "trace: version mismatch: '" + magic + "'");
    RME_CHECK(std::getline(is, cfgline), "trace: missing config line");
    TraceFile tf;
    tf.cfg = ScenarioConfig::from_json(cfgline);
    std::ostringstream rest;
    rest << is.rdbuf();
    tf.events = rest.str();
    return tf;
}

SweepOutcome sweep(const ScenarioConfig& tmpl, const std::vector<int>& f_values,
                   const std::vector<uint64_t>& seeds) {
    SweepOutcome out;
    for (int f : f_values) {
        for (uint64_t seed : seeds) {
            ScenarioConfig cfg = tmpl;
            cfg.seed = seed;
            cfg.name = tmpl.name + "-F" + std::to_string(f);
            cfg.crashes.clear();
            std::mt19937_64 rng(seed * 7919 + static_cast<uint64_t>(f) * 104729 + 17);
            for (int k = 0; k < f; k++) {
                ScenarioConfig::Crash c;
                c.pid = static_cast<int>(rng() % cfg.n);
                if (k % 2 == 0) {
                    // target the sensitive gap of a low level
                    int lvl = (cfg.lock == "ba" && rng() % 4 == 0) ? 2 : 1;
                    c.site = cfg.lock == "wr" ? "WR.FAS_TAIL"
                                              : "L" + std::to_string(lvl) + ".FAS_TAIL";
                    c.occurrence = 1 + static_cast<int>(rng() % 3);
                } else {
                    c.step = rng() % (cfg.budget / 2 + 1);
                }
                cfg.crashes.push_back(c);
            }
            RunResult r = run_scenario(cfg);
            CurveRow row;
            row.scenario = cfg.name;
            row.seed = seed;
            row.n = cfg.n;
            row.levels = r.levels;
            row.f_injected = f;
            row.f_batch = 0;
            row.max_level = r.max_level;
            row.max_rmr_cc = r.max_passage_cc;
            row.max_rmr_dsm = r.max_passage_dsm;
            out.rows.push_back(row);
            Scenario an = Scenario::build(cfg);
            for (auto& [k2, v2] : segment_step_maxima(r.history, *an.world)) {
                auto it = out.segment_maxima.find(k2);
                if (it == out.segment_maxima.end())
                    out.segment_maxima[k2] = v2;
                else
                    it->second = std::max(it->second, v2);
            }
            out.bcsr_max = std::max(out.bcsr_max, bcsr_max_steps(r.history, an.target_id));
            if (r.safety_failed()) {
                out.safety_ok = false;
                out.witness = cfg.name + " seed " + std::to_string(seed) + ": ";
                for (const auto& v : r.verdicts)
                    if (v.failed()) {
                        out.witness += v.name + ": " + v.witness;
                        break;
                    }
                if (!r.subqueues.ok) out.witness += r.subqueues.witness;
                return out;
            }
        }
    }
    return out;
}

std::string verdicts_json(const RunResult& r) {
    json j;
    j["scenario"] = r.cfg.name;
    j["stop"] = r.stop == Engine::Stop::Budget ? "budget" : "all-parked";
    j["max_level"] = r.max_level;
    j["levels"] = r.levels;
    j["max_passage_rmr_cc"] = r.max_passage_cc;
    j["max_passage_rmr_dsm"] = r.max_passage_dsm;
    j["oracle_violations"] = r.oracle_violations;
    j["checks"] = json::array();
    for (const auto& v : r.verdicts) {
        json vj;
        vj["name"] = v.name;
        vj["result"] = v.result == Verdict::Pass ? "pass"
                       : v.result == Verdict::Fail ? "fail"
                                                   : "inconclusive";
        if (!v.witness.empty()) vj["witness"] = v.witness;
        j["checks"].push_back(vj);
    }
    return j.dump(2);
}

}  // namespace rme
