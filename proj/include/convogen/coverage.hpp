#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "convogen/agent.hpp"
#include "convogen/executor.hpp"

namespace convogen {

struct CoverageReport {
    double intent_pct = 0.0;
    std::optional<double> entity_pct;  // absent when the agent has no custom entities
    std::vector<std::string> covered_intents;
    std::vector<std::string> uncovered_intents;
    std::vector<std::pair<std::string, std::string>> covered_values;
    std::vector<std::pair<std::string, std::string>> uncovered_values;
};

struct CoverageOptions {
    // By default only runs of correct-verdict tests count; include_flaky adds
    // the passing runs of flaky tests.
    bool include_flaky = false;
};

// Intent coverage: distinct non-fallback intents matched, over the agent's
// non-fallback intents. Entity coverage: distinct (custom entity, canonical
// value) pairs extracted, over all declared custom values. Fallback
// activations count toward no intent.
inline CoverageReport compute_coverage(const std::vector<ExecutionRecord>& records,
                                       const AgentDefinition& agent, const CoverageOptions& opts = {}) {
    std::set<std::string> hit_intents;
    std::set<std::pair<std::string, std::string>> hit_values;

    for (const auto& record : records) {
        bool count_all = record.verdict == Verdict::correct;
        bool count_passing = opts.include_flaky && record.verdict == Verdict::flaky;
        if (!count_all && !count_passing) continue;
        for (const auto& run : record.runs) {
            if (!count_all && !run.pass) continue;
            for (const auto& turn : run.turns) {
                if (turn.matched_intent.empty() || turn.matched_intent == "fallback" ||
                    turn.matched_intent == "<error>")
                    continue;
                const Intent* intent = agent.find_intent(turn.matched_intent);
                if (!intent)
                    throw UnknownAgentElement("trace names unknown intent '" + turn.matched_intent + "'");
                if (!intent->is_fallback) hit_intents.insert(intent->name);
                for (const auto& [entity, value] : turn.extracted) {
                    const EntityType* e = agent.find_entity(entity);
                    if (!e) {
                        if (is_system_entity(entity)) continue;  // not part of the denominator
                        throw UnknownAgentElement("trace names unknown entity '" + entity + "'");
                    }
                    bool known = false;
                    for (const auto& v : e->values) known = known || v.canonical == value;
                    if (!known)
                        throw UnknownAgentElement("trace names unknown value '" + value + "' of entity '" +
                                                  entity + "'");
                    hit_values.insert({entity, value});
                }
            }
        }
    }

    CoverageReport report;
    size_t non_fallback = 0;
    for (const auto& intent : agent.intents) {
        if (intent.is_fallback) continue;
        ++non_fallback;
        if (hit_intents.count(intent.name))
            report.covered_intents.push_back(intent.name);
        else
            report.uncovered_intents.push_back(intent.name);
    }
    report.intent_pct = non_fallback == 0 ? 0.0 : (100.0 * report.covered_intents.size()) / non_fallback;

    size_t total_values = 0;
    for (const auto& entity : agent.entities) {
        total_values += entity.values.size();
        for (const auto& value : entity.values) {
            if (hit_values.count({entity.name, value.canonical}))
                report.covered_values.push_back({entity.name, value.canonical});
            else
                report.uncovered_values.push_back({entity.name, value.canonical});
        }
    }
    if (total_values > 0) report.entity_pct = (100.0 * report.covered_values.size()) / total_values;
    return report;
}

inline nlohmann::ordered_json coverage_to_json(const CoverageReport& report) {
    nlohmann::ordered_json out;
    out["intent_pct"] = report.intent_pct;
    if (report.entity_pct)
        out["entity_pct"] = *report.entity_pct;
    else
        out["entity_pct"] = nullptr;
    out["covered_intents"] = report.covered_intents;
    out["uncovered_intents"] = report.uncovered_intents;
    auto pairs = [](const std::vector<std::pair<std::string, std::string>>& values) {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& [entity, value] : values) arr.push_back({entity, value});
        return arr;
    };
    out["covered_values"] = pairs(report.covered_values);
    out["uncovered_values"] = pairs(report.uncovered_values);
    return out;
}

// Rebuild execution records from the verbose textual log, for the log-parsing
// flavor of the coverage pipeline.
inline std::vector<ExecutionRecord> records_from_log(const std::string& log) {
    std::vector<ExecutionRecord> records;
    std::map<std::string, size_t> index;
    ExecutionRecord* current = nullptr;
    RunTrace* run = nullptr;

    for (const auto& line : text::split_lines(log)) {
        if (text::starts_with(line, "=== convo ")) {
            std::string rest = line.substr(10);
            size_t run_pos = rest.rfind(" run ");
            size_t verdict_pos = rest.rfind(" verdict ");
            if (run_pos == std::string::npos || verdict_pos == std::string::npos) continue;
            std::string name = rest.substr(0, run_pos);
            std::string verdict = rest.substr(verdict_pos + 9);
            auto it = index.find(name);
            if (it == index.end()) {
                index[name] = records.size();
                records.push_back({});
                records.back().name = name;
            }
            current = &records[index[name]];
            current->verdict = verdict == "correct" ? Verdict::correct
                               : verdict == "flaky" ? Verdict::flaky
                                                    : Verdict::wrong;
            current->runs.push_back({});
            run = &current->runs.back();
            run->pass = true;
        } else if (run && text::starts_with(line, "turn ")) {
            run->turns.push_back({});
        } else if (run && !run->turns.empty()) {
            TurnTrace& turn = run->turns.back();
            if (text::starts_with(line, "me: ")) {
                turn.sent = line.substr(4);
            } else if (text::starts_with(line, "expected: ")) {
                turn.expected = line.substr(10);
            } else if (text::starts_with(line, "actual: ")) {
                turn.actual = line.substr(8);
            } else if (text::starts_with(line, "intent: ")) {
                turn.matched_intent = line.substr(8);
            } else if (text::starts_with(line, "entity: ")) {
                std::string pair = line.substr(8);
                size_t eq = pair.find('=');
                if (eq != std::string::npos) turn.extracted.push_back({pair.substr(0, eq), pair.substr(eq + 1)});
            } else if (text::starts_with(line, "pass: ")) {
                turn.pass = line.substr(6) == "true";
                run->pass = run->pass && turn.pass;
            }
        }
    }
    return records;
}

}  // namespace convogen
