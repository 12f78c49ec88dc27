#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "rme/scenario.hpp"
#include "rme/trace.hpp"

namespace {

// exit codes: 0 all pass, 1 safety fail, 2 inconclusive liveness, 3 config error
constexpr int kOk = 0, kSafetyFail = 1, kInconclusive = 2, kConfigError = 3;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) rme::sim_fault("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) rme::sim_fault("cannot write " + path);
    out << text;
}

std::string out_dir(const std::string& flag) {
    if (!flag.empty()) return flag;
    const char* env = std::getenv("RMESIM_OUT");
    return env && *env ? env : ".";
}

int do_run(const rme::ScenarioConfig& cfg, const std::string& dir) {
    rme::RunResult r = rme::run_scenario(cfg);
    rme::Scenario sc = rme::Scenario::build(cfg);
    write_file(dir + "/trace.txt", rme::make_trace(cfg, r.history, *sc.world));
    write_file(dir + "/passages.csv", rme::passages_csv(r.passages, *sc.world));
    write_file(dir + "/intervals.csv", rme::intervals_csv(r.history, *sc.world));
    write_file(dir + "/verdicts.json", rme::verdicts_json(r));
    std::cout << rme::verdicts_json(r) << "\n";
    if (r.safety_failed()) return kSafetyFail;
    if (r.inconclusive()) return kInconclusive;
    return kOk;
}

int do_check(const std::string& path) {
    rme::TraceFile tf = rme::parse_trace(read_file(path));
    rme::Scenario sc = rme::Scenario::build(tf.cfg);
    rme::History h = rme::parse_events(tf.events, *sc.world);
    const rme::World& w = *sc.world;
    std::vector<rme::Verdict> verdicts;
    if (sc.ba) {
        verdicts.push_back(rme::check_strong_me(h, w, sc.target_id));
        verdicts.push_back(rme::check_strong_me(h, w, sc.ba->base().lock_id()));
        for (int id : sc.arb_ids) {
            verdicts.push_back(rme::check_strong_me(h, w, id));
            verdicts.push_back(rme::check_side_contract(h, w, id));
        }
        for (int id : sc.splitter_ids) verdicts.push_back(rme::check_strong_me(h, w, id));
        for (int id : sc.filter_ids) verdicts.push_back(rme::check_weak_me_responsive(h, w, id));
        verdicts.push_back(rme::check_level_bound(h, w, sc.filter_ids, sc.target_id, tf.cfg.tau));
    } else {
        verdicts.push_back(rme::check_weak_me_responsive(h, w, sc.target_id));
    }
    verdicts.push_back(rme::check_liveness(h, sc.target_id));
    int code = kOk;
    for (const auto& v : verdicts) {
        const char* res = v.result == rme::Verdict::Pass ? "pass"
                          : v.result == rme::Verdict::Fail ? "FAIL"
                                                           : "inconclusive";
        std::cout << v.name << ": " << res;
        if (!v.witness.empty()) std::cout << " (" << v.witness << ")";
        std::cout << "\n";
        if (v.failed()) code = kSafetyFail;
        if (code == kOk && v.result == rme::Verdict::Inconclusive) code = kInconclusive;
    }
    return code;
}

int do_replay(const std::string& path) {
    std::string text = read_file(path);
    rme::TraceFile tf = rme::parse_trace(text);
    rme::RunResult r = rme::run_scenario(tf.cfg);
    rme::Scenario sc = rme::Scenario::build(tf.cfg);
    std::string again = rme::make_trace(tf.cfg, r.history, *sc.world);
    if (again != text) {
        std::cout << "replay mismatch: trace is not byte-identical\n";
        return kSafetyFail;
    }
    std::cout << "replay ok: " << r.history.size() << " events, byte-identical\n";
    return kOk;
}

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::istringstream is(s);
    std::string tok;
    while (std::getline(is, tok, ',')) out.push_back(std::stoi(tok));
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rmesim: deterministic recoverable-lock simulator"};
    app.require_subcommand(1);

    std::string config_path, trace_path, dir_flag, f_list = "0,1,4,9";
    int seeds_count = 5;

    auto* run = app.add_subcommand("run", "run one scenario and write reports");
    run->add_option("--config", config_path, "scenario config JSON file")->required();
    run->add_option("--out", dir_flag, "output directory (default $RMESIM_OUT or .)");

    auto* sw = app.add_subcommand("sweep", "failure sweep; writes the adaptivity curve CSV");
    sw->add_option("--config", config_path, "template config JSON file")->required();
    sw->add_option("--failures", f_list, "comma-separated F values");
    sw->add_option("--seeds", seeds_count, "number of seeds (1..N)");
    sw->add_option("--out", dir_flag, "output directory");

    auto* ck = app.add_subcommand("check", "re-run all analyzers on a trace");
    ck->add_option("--trace", trace_path, "trace file")->required();

    auto* rp = app.add_subcommand("replay", "re-execute a trace's config; compare bytes");
    rp->add_option("--trace", trace_path, "trace file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            auto cfg = rme::ScenarioConfig::from_json(read_file(config_path));
            return do_run(cfg, out_dir(dir_flag));
        }
        if (sw->parsed()) {
            auto cfg = rme::ScenarioConfig::from_json(read_file(config_path));
            std::vector<uint64_t> seeds;
            for (int i = 1; i <= seeds_count; i++) seeds.push_back(i);
            rme::SweepOutcome out = rme::sweep(cfg, parse_int_list(f_list), seeds);
            write_file(out_dir(dir_flag) + "/curve.csv", rme::curve_csv(out.rows));
            std::cout << rme::curve_csv(out.rows);
            if (!out.safety_ok) {
                std::cout << "safety check failed: " << out.witness << "\n";
                return kSafetyFail;
            }
            return kOk;
        }
        if (ck->parsed()) return do_check(trace_path);
        if (rp->parsed()) return do_replay(trace_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    }
    return kConfigError;
}
