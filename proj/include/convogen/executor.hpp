#pragma once

#include <atomic>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "convogen/cleaner.hpp"
#include "convogen/convo.hpp"
#include "convogen/text.hpp"

namespace convogen {

enum class Verdict { correct, flaky, wrong };

inline std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::correct: return "correct";
        case Verdict::flaky: return "flaky";
        case Verdict::wrong: return "wrong";
    }
    return "wrong";
}

struct TurnTrace {
    std::string sent;
    std::string expected;
    std::string actual;
    std::string matched_intent;
    std::vector<std::pair<std::string, std::string>> extracted;  // (entity, value)
    bool pass = false;
};

struct RunTrace {
    std::vector<TurnTrace> turns;
    bool pass = false;  // conjunction over turns
};

struct ExecutionRecord {
    std::string name;
    std::vector<RunTrace> runs;
    Verdict verdict = Verdict::wrong;

    size_t pass_count() const {
        size_t n = 0;
        for (const auto& r : runs) n += r.pass ? 1 : 0;
        return n;
    }
    size_t fail_count() const { return runs.size() - pass_count(); }
};

struct RunOptions {
    int repeats = 15;
    uint64_t base_seed = 0;       // mixed with convo name and run index per run
    bool skip_teardown = false;   // reproduces dirty-environment failures
    int jobs = 1;
};

// A turn passes iff the whitespace-normalized expected and actual texts are
// equal; a run passes iff every turn does.
inline bool oracle_match(const std::string& expected, const std::string& actual) {
    return text::normalize_oracle(expected) == text::normalize_oracle(actual);
}

namespace detail {

inline RunTrace execute_once(const Convo& convo, const ConnectorRegistry& registry,
                             const CleaningRoutine& routine, bool skip_teardown) {
    RunTrace trace;
    Cleaner cleaner(registry, routine);
    try {
        Connection& conn = cleaner.set_up();
        auto bots = convo.bot_texts();
        auto mes = convo.me_texts();
        for (size_t t = 0; t < mes.size(); ++t) {
            TurnTrace turn;
            turn.sent = mes[t];
            turn.expected = t < bots.size() ? bots[t] : "";
            try {
                BotReply reply = conn.session->send_message(mes[t]);
                turn.actual = reply.text;
                turn.matched_intent = reply.matched_intent;
                for (const auto& [param, ex] : reply.extracted) turn.extracted.push_back({ex.entity, ex.value});
            } catch (const Error& e) {
                turn.actual = std::string("<error: ") + e.what() + ">";
                turn.matched_intent = "<error>";
            }
            turn.pass = oracle_match(turn.expected, turn.actual);
            trace.turns.push_back(std::move(turn));
        }
    } catch (const ConnectError&) {
        throw;
    } catch (const Error& e) {
        TurnTrace turn;
        turn.actual = std::string("<error: ") + e.what() + ">";
        trace.turns.push_back(std::move(turn));
    }
    if (!skip_teardown) cleaner.tear_down();
    trace.pass = true;
    for (const auto& turn : trace.turns) trace.pass = trace.pass && turn.pass;
    return trace;
}

}  // namespace detail

// Execute each convo `repeats` times with set_up/tear_down around every run.
// Each run derives its own RNG seed from (base seed, convo name, run index),
// so verdicts are independent of suite order; each test gets its own store
// namespace so parallel execution cannot interfere.
inline std::vector<ExecutionRecord> run_suite(const std::vector<Convo>& tests,
                                              const ConnectorRegistry& registry,
                                              const CleaningRoutine& routine, const RunOptions& opts = {}) {
    std::vector<ExecutionRecord> records(tests.size());

    auto run_test = [&](size_t index) {
        const Convo& convo = tests[index];
        ExecutionRecord record;
        record.name = convo.name;
        for (int r = 0; r < opts.repeats; ++r) {
            CleaningRoutine run_routine = routine;
            run_routine.connect_params["namespace"] = routine.param("namespace", "run") + "." + convo.name;
            uint64_t seed = text::fnv1a64_u64(static_cast<uint64_t>(r),
                                              text::fnv1a64(convo.name, text::fnv1a64_u64(opts.base_seed)));
            run_routine.connect_params["seed"] = std::to_string(seed);
            record.runs.push_back(detail::execute_once(convo, registry, run_routine, opts.skip_teardown));
        }
        size_t passes = record.pass_count();
        record.verdict = passes == record.runs.size() ? Verdict::correct
                         : passes == 0               ? Verdict::wrong
                                                     : Verdict::flaky;
        records[index] = std::move(record);
    };

    if (opts.jobs <= 1) {
        for (size_t i = 0; i < tests.size(); ++i) run_test(i);
    } else {
        std::atomic<size_t> next{0};
        std::vector<std::thread> workers;
        for (int w = 0; w < opts.jobs; ++w)
            workers.emplace_back([&] {
                for (size_t i = next.fetch_add(1); i < tests.size(); i = next.fetch_add(1)) run_test(i);
            });
        for (auto& worker : workers) worker.join();
    }
    return records;
}

inline nlohmann::ordered_json report_to_json(const std::vector<ExecutionRecord>& records) {
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    for (const auto& record : records) {
        nlohmann::ordered_json jr;
        jr["name"] = record.name;
        jr["verdict"] = to_string(record.verdict);
        jr["pass_count"] = record.pass_count();
        jr["fail_count"] = record.fail_count();
        jr["runs"] = nlohmann::ordered_json::array();
        for (const auto& run : record.runs) {
            nlohmann::ordered_json jrun;
            jrun["turns"] = nlohmann::ordered_json::array();
            for (const auto& turn : run.turns) {
                nlohmann::ordered_json jt;
                jt["me"] = turn.sent;
                jt["expected"] = turn.expected;
                jt["actual"] = turn.actual;
                jt["intent"] = turn.matched_intent;
                jt["entities"] = nlohmann::ordered_json::array();
                for (const auto& [entity, value] : turn.extracted) jt["entities"].push_back({entity, value});
                jt["pass"] = turn.pass;
                jrun["turns"].push_back(std::move(jt));
            }
            jr["runs"].push_back(std::move(jrun));
        }
        out.push_back(std::move(jr));
    }
    return out;
}

inline std::vector<ExecutionRecord> report_from_json(const nlohmann::ordered_json& doc) {
    std::vector<ExecutionRecord> records;
    for (const auto& jr : doc) {
        ExecutionRecord record;
        record.name = jr.at("name").get<std::string>();
        std::string verdict = jr.at("verdict").get<std::string>();
        record.verdict = verdict == "correct" ? Verdict::correct
                         : verdict == "flaky" ? Verdict::flaky
                                              : Verdict::wrong;
        for (const auto& jrun : jr.at("runs")) {
            RunTrace run;
            run.pass = true;
            for (const auto& jt : jrun.at("turns")) {
                TurnTrace turn;
                turn.sent = jt.at("me").get<std::string>();
                turn.expected = jt.at("expected").get<std::string>();
                turn.actual = jt.at("actual").get<std::string>();
                turn.matched_intent = jt.at("intent").get<std::string>();
                for (const auto& je : jt.at("entities"))
                    turn.extracted.push_back({je.at(0).get<std::string>(), je.at(1).get<std::string>()});
                turn.pass = jt.at("pass").get<bool>();
                run.pass = run.pass && turn.pass;
                run.turns.push_back(std::move(turn));
            }
            record.runs.push_back(std::move(run));
        }
        records.push_back(std::move(record));
    }
    return records;
}

inline void write_report(const std::vector<ExecutionRecord>& records, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << report_to_json(records).dump(2) << "\n";
}

// Verbose textual log in the style the paper's coverage script parsed.
inline std::string verbose_log(const std::vector<ExecutionRecord>& records) {
    std::string out;
    for (const auto& record : records) {
        for (size_t r = 0; r < record.runs.size(); ++r) {
            out += "=== convo " + record.name + " run " + std::to_string(r + 1) + " verdict " +
                   to_string(record.verdict) + "\n";
            const auto& run = record.runs[r];
            for (size_t t = 0; t < run.turns.size(); ++t) {
                const auto& turn = run.turns[t];
                out += "turn " + std::to_string(t + 1) + "\n";
                out += "me: " + turn.sent + "\n";
                out += "expected: " + text::normalize_oracle(turn.expected) + "\n";
                out += "actual: " + text::normalize_oracle(turn.actual) + "\n";
                out += "intent: " + turn.matched_intent + "\n";
                for (const auto& [entity, value] : turn.extracted)
                    out += "entity: " + entity + "=" + value + "\n";
                out += std::string("pass: ") + (turn.pass ? "true" : "false") + "\n";
            }
        }
    }
    return out;
}

}  // namespace convogen
