#pragma once

#include <cstdio>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "convogen/agent.hpp"
#include "convogen/executor.hpp"
#include "convogen/matching.hpp"

namespace convogen {

enum class MutationOperator {
    intent_removal,
    entity_removal,
    intent_parameter_removal,
    intent_priority_change,
    intent_fallback_flag,
    entity_rename,
    entity_value_change,
};

inline std::string to_string(MutationOperator op) {
    switch (op) {
        case MutationOperator::intent_removal: return "intent-removal";
        case MutationOperator::entity_removal: return "entity-removal";
        case MutationOperator::intent_parameter_removal: return "intent-parameter-removal";
        case MutationOperator::intent_priority_change: return "intent-priority-change";
        case MutationOperator::intent_fallback_flag: return "intent-fallback-flag";
        case MutationOperator::entity_rename: return "entity-rename";
        case MutationOperator::entity_value_change: return "entity-value-change";
    }
    return "unknown";
}

// Dialogflow-style priority tiers; the priority-change operator drops the
// intent to the lowest tier.
constexpr int kLowestPriorityTier = 250000;

struct MutantDescriptor {
    std::string id;
    MutationOperator op;
    std::string target;   // element path, e.g. "intents/Welcome"
    std::string payload;  // replacement value where applicable
    bool equivalent = false;
    std::string equivalence_reason;
};

struct Mutant {
    MutantDescriptor descriptor;
    AgentDefinition agent;
};

namespace detail {

inline void drop_parameter_slots(Intent& intent, const std::string& param) {
    for (auto& phrase : intent.training_phrases) {
        std::vector<PhrasePart> kept;
        for (auto& part : phrase.parts)
            if (!(part.kind == PhrasePart::Kind::slot && part.text == param)) kept.push_back(std::move(part));
        phrase.parts = std::move(kept);
        merge_adjacent_literals(phrase);
        if (phrase.parts.empty()) phrase.parts.push_back(PhrasePart::literal(""));
    }
}

inline void drop_parameter_placeholders(Intent& intent, const std::string& param) {
    std::string needle = "$" + param;
    for (auto& set : intent.responses) {
        for (auto& variant : set.variants) {
            size_t pos;
            while ((pos = variant.find(needle)) != std::string::npos) {
                size_t end = pos + needle.size();
                if (end < variant.size() &&
                    (std::isalnum(static_cast<unsigned char>(variant[end])) || variant[end] == '_')) {
                    pos = end;  // longer placeholder name, leave it
                    continue;
                }
                variant.erase(pos, needle.size());
            }
        }
    }
}

// Could two intents compete for the same message? Approximated by rendering
// each training phrase with default values and asking whether the other
// intent's patterns accept the text, provided both context gates can be
// open at once.
inline bool intents_compete(const AgentDefinition& agent, const Intent& a, const Intent& b) {
    std::set<std::string> producible;
    for (const auto& intent : agent.intents)
        for (const auto& ctx : intent.output_contexts) producible.insert(ctx.name);
    auto gate_open = [&](const Intent& intent) {
        for (const auto& ctx : intent.input_contexts)
            if (!producible.count(ctx)) return false;
        return true;
    };
    if (!gate_open(a) || !gate_open(b)) return false;

    auto one_way = [&](const Intent& from, const Intent& to) {
        for (const auto& phrase : from.training_phrases) {
            auto fills = matching::default_fills(agent, from, phrase);
            std::string rendered = render_phrase(phrase, fills);
            for (const auto& other : to.training_phrases)
                if (matching::match_phrase(agent, to, other, rendered)) return true;
        }
        return false;
    };
    return one_way(a, b) || one_way(b, a);
}

inline bool priority_change_equivalent(const AgentDefinition& agent, const Intent& target) {
    for (const auto& other : agent.intents) {
        if (other.is_fallback || other.name == target.name) continue;
        if (intents_compete(agent, target, other)) return false;
    }
    return true;
}

inline std::string fresh_entity_name(const AgentDefinition& agent, const std::string& base) {
    std::string candidate = base + "_renamed";
    int n = 1;
    while (agent.find_entity(candidate)) candidate = base + "_renamed" + std::to_string(++n);
    return candidate;
}

}  // namespace detail

// One mutant per applicable (operator, target), in operator order then
// declaration order. Every mutant serializes to an agent file that loads
// under lenient validation.
inline std::vector<Mutant> generate_mutants(const AgentDefinition& agent) {
    std::vector<Mutant> mutants;
    int counter = 0;
    auto add = [&](MutationOperator op, const std::string& target, const std::string& payload,
                   AgentDefinition mutated, bool equivalent = false, std::string reason = "") {
        Mutant m;
        char idx[8];
        std::snprintf(idx, sizeof(idx), "m%03d", counter++);
        m.descriptor.id = std::string(idx) + "_" + to_string(op);
        m.descriptor.op = op;
        m.descriptor.target = target;
        m.descriptor.payload = payload;
        m.descriptor.equivalent = equivalent;
        m.descriptor.equivalence_reason = std::move(reason);
        m.agent = std::move(mutated);
        mutants.push_back(std::move(m));
    };

    // 1) intent removal
    for (const auto& intent : agent.intents) {
        if (intent.is_fallback) continue;
        AgentDefinition mutated = agent;
        mutated.intents.erase(std::remove_if(mutated.intents.begin(), mutated.intents.end(),
                                             [&](const Intent& i) { return i.name == intent.name; }),
                              mutated.intents.end());
        add(MutationOperator::intent_removal, "intents/" + intent.name, "", std::move(mutated));
    }

    // 2) entity removal; dangling parameters degrade to accept-anything slots
    for (const auto& entity : agent.entities) {
        AgentDefinition mutated = agent;
        mutated.entities.erase(std::remove_if(mutated.entities.begin(), mutated.entities.end(),
                                              [&](const EntityType& e) { return e.name == entity.name; }),
                               mutated.entities.end());
        for (auto& intent : mutated.intents)
            for (auto& param : intent.parameters)
                if (param.entity == entity.name) param.entity = "sys.any";
        add(MutationOperator::entity_removal, "entities/" + entity.name, "", std::move(mutated));
    }

    // 3) intent parameter removal (required parameters: the slot-filling machinery)
    for (const auto& intent : agent.intents) {
        for (const auto& param : intent.parameters) {
            if (!param.required) continue;
            AgentDefinition mutated = agent;
            Intent* target = nullptr;
            for (auto& i : mutated.intents)
                if (i.name == intent.name) target = &i;
            detail::drop_parameter_slots(*target, param.name);
            detail::drop_parameter_placeholders(*target, param.name);
            target->parameters.erase(
                std::remove_if(target->parameters.begin(), target->parameters.end(),
                               [&](const Parameter& p) { return p.name == param.name; }),
                target->parameters.end());
            add(MutationOperator::intent_parameter_removal,
                "intents/" + intent.name + "/parameters/" + param.name, "", std::move(mutated));
        }
    }

    // 4) intent priority change to the lowest tier
    for (const auto& intent : agent.intents) {
        if (intent.is_fallback) continue;
        AgentDefinition mutated = agent;
        for (auto& i : mutated.intents)
            if (i.name == intent.name) i.priority = kLowestPriorityTier;
        bool equivalent = detail::priority_change_equivalent(agent, intent);
        add(MutationOperator::intent_priority_change, "intents/" + intent.name,
            std::to_string(kLowestPriorityTier), std::move(mutated), equivalent,
            equivalent ? "no other intent competes for its training phrases" : "");
    }

    // 5) intent flagging as fallback (phrases and parameters cleared to keep
    //    the fallback shape; the agent then carries two fallbacks)
    for (const auto& intent : agent.intents) {
        if (intent.is_fallback) continue;
        AgentDefinition mutated = agent;
        for (auto& i : mutated.intents) {
            if (i.name != intent.name) continue;
            i.is_fallback = true;
            i.training_phrases.clear();
            i.parameters.clear();
        }
        add(MutationOperator::intent_fallback_flag, "intents/" + intent.name, "", std::move(mutated));
    }

    // 6) entity renaming everywhere except inside prompt texts, which keep
    //    referencing the now-unknown "@" name
    for (const auto& entity : agent.entities) {
        AgentDefinition mutated = agent;
        std::string fresh = detail::fresh_entity_name(agent, entity.name);
        for (auto& e : mutated.entities)
            if (e.name == entity.name) e.name = fresh;
        for (auto& intent : mutated.intents)
            for (auto& param : intent.parameters)
                if (param.entity == entity.name) param.entity = fresh;
        add(MutationOperator::entity_rename, "entities/" + entity.name, fresh, std::move(mutated));
    }

    // 7) entity value change: first canonical value replaced by a fresh token
    for (const auto& entity : agent.entities) {
        AgentDefinition mutated = agent;
        std::string fresh = "mut_" + entity.name + "_value";
        for (auto& e : mutated.entities) {
            if (e.name != entity.name) continue;
            e.values.front().canonical = fresh;
            e.values.front().synonyms.clear();
        }
        add(MutationOperator::entity_value_change, "entities/" + entity.name + "/values/0", fresh,
            std::move(mutated));
    }

    return mutants;
}

// ---------------------------------------------------------------------------
// Equivalence probing: drive original and mutant through the same message
// sequence (every rendered training phrase, then every custom entity value)
// in one deterministic session each and compare the full reply transcript.

inline std::vector<std::string> probe_messages(const AgentDefinition& agent) {
    std::vector<std::string> msgs;
    for (const auto& intent : agent.intents) {
        if (intent.is_fallback) continue;
        for (const auto& phrase : intent.training_phrases) {
            auto fills = matching::default_fills(agent, intent, phrase);
            std::string rendered = render_phrase(phrase, fills);
            if (!rendered.empty()) msgs.push_back(rendered);
        }
    }
    for (const auto& entity : agent.entities)
        for (const auto& value : entity.values) msgs.push_back(value.canonical);
    return msgs;
}

inline std::vector<std::string> probe_transcript(const AgentDefinition& agent, const ActionRegistry& actions,
                                                 const std::vector<std::string>& msgs) {
    PersistenceStore store;
    Session session(agent, actions, store, SessionOptions{0, SimMode::deterministic, "probe"});
    std::vector<std::string> replies;
    for (const auto& msg : msgs) {
        BotReply reply = session.send_message(msg);
        replies.push_back(reply.matched_intent + "|" + reply.text);
    }
    return replies;
}

// True when the mutant is indistinguishable from the original on the brute
// force probe set.
inline bool probe_identical(const AgentDefinition& original, const Mutant& mutant,
                            const ActionRegistry& actions) {
    auto msgs = probe_messages(original);
    return probe_transcript(original, actions, msgs) == probe_transcript(mutant.agent, actions, msgs);
}

// ---------------------------------------------------------------------------

struct MutantOutcome {
    std::string id;
    MutationOperator op;
    bool equivalent = false;       // heuristic pre-filter flag
    bool probe_identical = false;  // brute-force confirmation
    bool killed = false;
    std::vector<std::string> killing_tests;
};

struct MutationReport {
    size_t total = 0;
    size_t equivalent = 0;
    size_t killed = 0;
    std::vector<std::string> survived;             // non-equivalent, not killed
    std::vector<std::string> suspected_equivalent; // probe-identical but not pre-flagged
    double score = 0.0;                            // killed / (total - equivalent)
    std::vector<MutantOutcome> outcomes;
};

struct ScoreOptions {
    int repeats = 1;
    SimMode mode = SimMode::deterministic;
    uint64_t base_seed = 0;
    int jobs = 1;
};

// Run the suite against every mutant. A mutant is killed when at least one
// test that passes on the original fails deterministically on it (every run
// in deterministic mode, any run in seeded-random mode). Tests that are not
// correct on the original abort scoring with BaselineUnstable.
inline MutationReport mutation_score(const AgentDefinition& original, const std::vector<Mutant>& mutants,
                                     const std::vector<Convo>& tests, const ActionRegistry& actions,
                                     PersistenceStore& store, const ScoreOptions& opts = {}) {
    MutationReport report;
    report.total = mutants.size();

    RunOptions run_opts;
    run_opts.repeats = opts.repeats;
    run_opts.base_seed = opts.base_seed;
    run_opts.jobs = opts.jobs;

    {
        SimEnvironment env(original, actions, store, opts.mode, opts.base_seed);
        auto baseline = run_suite(tests, env.registry, env.routine, run_opts);
        for (const auto& record : baseline)
            if (record.verdict != Verdict::correct) throw BaselineUnstable(record.name);
    }

    for (const auto& mutant : mutants) {
        MutantOutcome outcome;
        outcome.id = mutant.descriptor.id;
        outcome.op = mutant.descriptor.op;
        outcome.equivalent = mutant.descriptor.equivalent;
        outcome.probe_identical = probe_identical(original, mutant, actions);

        if (outcome.equivalent) {
            ++report.equivalent;
        } else {
            SimEnvironment env(mutant.agent, actions, store, opts.mode, opts.base_seed);
            CleaningRoutine routine = env.routine;
            routine.connect_params["namespace"] = "score." + mutant.descriptor.id;
            auto records = run_suite(tests, env.registry, routine, run_opts);
            for (const auto& record : records) {
                bool fails = opts.mode == SimMode::deterministic ? record.verdict == Verdict::wrong
                                                                 : record.fail_count() > 0;
                if (fails) {
                    outcome.killed = true;
                    outcome.killing_tests.push_back(record.name);
                }
            }
            if (outcome.killed) {
                ++report.killed;
            } else {
                report.survived.push_back(outcome.id);
                if (outcome.probe_identical) report.suspected_equivalent.push_back(outcome.id);
            }
        }
        report.outcomes.push_back(std::move(outcome));
    }

    size_t denominator = report.total - report.equivalent;
    report.score = denominator == 0 ? 0.0 : static_cast<double>(report.killed) / denominator;
    return report;
}

// ---------------------------------------------------------------------------

inline nlohmann::ordered_json descriptor_to_json(const MutantDescriptor& d, const std::string& file) {
    nlohmann::ordered_json out;
    out["id"] = d.id;
    out["operator"] = to_string(d.op);
    out["target"] = d.target;
    out["payload"] = d.payload;
    out["equivalent"] = d.equivalent;
    out["equivalence_reason"] = d.equivalence_reason;
    out["file"] = file;
    return out;
}

inline void write_mutants(const std::vector<Mutant>& mutants, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    nlohmann::ordered_json index = nlohmann::ordered_json::array();
    for (const auto& mutant : mutants) {
        std::string file = mutant.descriptor.id + ".agent.json";
        save_agent_file(mutant.agent, (dir / file).string());
        index.push_back(descriptor_to_json(mutant.descriptor, file));
    }
    std::ofstream out(dir / "index.json", std::ios::binary);
    out << index.dump(2) << "\n";
}

inline std::vector<Mutant> load_mutants(const std::filesystem::path& dir) {
    std::ifstream in(dir / "index.json", std::ios::binary);
    if (!in) throw ParseError("cannot read mutant index '" + (dir / "index.json").string() + "'");
    nlohmann::ordered_json index = nlohmann::ordered_json::parse(in);
    std::vector<Mutant> mutants;
    for (const auto& jd : index) {
        Mutant m;
        m.descriptor.id = jd.at("id").get<std::string>();
        std::string op = jd.at("operator").get<std::string>();
        for (MutationOperator candidate :
             {MutationOperator::intent_removal, MutationOperator::entity_removal,
              MutationOperator::intent_parameter_removal, MutationOperator::intent_priority_change,
              MutationOperator::intent_fallback_flag, MutationOperator::entity_rename,
              MutationOperator::entity_value_change})
            if (to_string(candidate) == op) m.descriptor.op = candidate;
        m.descriptor.target = jd.at("target").get<std::string>();
        m.descriptor.payload = jd.at("payload").get<std::string>();
        m.descriptor.equivalent = jd.at("equivalent").get<bool>();
        m.descriptor.equivalence_reason = jd.value("equivalence_reason", "");
        m.agent = load_agent((dir / jd.at("file").get<std::string>()).string(), Strictness::lenient);
        mutants.push_back(std::move(m));
    }
    return mutants;
}

inline nlohmann::ordered_json mutation_report_to_json(const MutationReport& report) {
    nlohmann::ordered_json out;
    out["total"] = report.total;
    out["equivalent"] = report.equivalent;
    out["killed"] = report.killed;
    out["survived"] = report.survived;
    out["suspected_equivalent"] = report.suspected_equivalent;
    out["score"] = report.score;
    return out;
}

}  // namespace convogen
