#pragma once

#include <deque>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "convogen/agent.hpp"
#include "convogen/convo.hpp"
#include "convogen/matching.hpp"

namespace convogen {

namespace detail {

// Static first-variant oracle: resolve $param placeholders whose fill is
// already known, leave everything else (notably %action keys) as written.
// Reports whether any placeholder stayed unresolved.
inline std::string static_response(const Intent& intent, const std::map<std::string, std::string>& fills,
                                   bool& unresolved) {
    std::vector<std::string> pieces;
    for (const auto& set : intent.responses) {
        const std::string& tmpl = set.variants.front();
        std::string out;
        size_t i = 0;
        while (i < tmpl.size()) {
            char c = tmpl[i];
            if ((c == '$' || c == '%') && i + 1 < tmpl.size() &&
                (std::isalpha(static_cast<unsigned char>(tmpl[i + 1])) || tmpl[i + 1] == '_')) {
                size_t j = i + 1;
                while (j < tmpl.size() &&
                       (std::isalnum(static_cast<unsigned char>(tmpl[j])) || tmpl[j] == '_'))
                    ++j;
                std::string name = tmpl.substr(i + 1, j - i - 1);
                auto it = c == '$' ? fills.find(name) : fills.end();
                if (it != fills.end()) {
                    out += it->second;
                } else {
                    out += tmpl.substr(i, j - i);
                    unresolved = true;
                }
                i = j;
            } else {
                out += c;
                ++i;
            }
        }
        pieces.push_back(std::move(out));
    }
    return text::join(pieces, " ");
}

// Canonicalize a chosen fill the way extraction would, so static oracles
// show "2024-05-07" where the user typed "Tuesday".
inline std::string canonical_fill(const AgentDefinition& agent, const std::string& entity,
                                  const std::string& raw) {
    auto parsed = matching::parse_entity_value(agent, entity, raw);
    return parsed ? *parsed : raw;
}

struct IntentSteps {
    std::vector<Step> steps;
    bool oracle_unresolved = false;
};

// The statically derived exchange for one intent: first phrase with first
// values, then one prompt/answer pair per required parameter the phrase did
// not cover, closed by the static response.
inline IntentSteps own_steps(const AgentDefinition& agent, const Intent& intent) {
    IntentSteps out;
    const TrainingPhrase& phrase = intent.training_phrases.front();
    auto fills = matching::default_fills(agent, intent, phrase);
    out.steps.push_back(Step::me(render_phrase(phrase, fills)));

    std::map<std::string, std::string> canonical;
    for (const auto& [param_name, raw] : fills) {
        const Parameter* p = intent.find_parameter(param_name);
        canonical[param_name] = p ? canonical_fill(agent, p->entity, raw) : raw;
    }
    for (const auto& param : intent.parameters) {
        if (!param.required || canonical.count(param.name)) continue;
        out.steps.push_back(Step::bot(param.prompts.front()));
        std::string answer = matching::first_value(agent, param.entity);
        out.steps.push_back(Step::me(answer));
        canonical[param.name] = canonical_fill(agent, param.entity, answer);
    }
    out.steps.push_back(Step::bot(static_response(intent, canonical, out.oracle_unresolved)));
    return out;
}

// Breadth-first search for the shortest intent chain whose declared output
// contexts establish `needed`. Walks context lifespans the way the simulator
// ages them: one decrement per completed intent.
inline std::optional<std::vector<const Intent*>> context_chain(const AgentDefinition& agent,
                                                               const std::vector<std::string>& needed) {
    struct Node {
        std::map<std::string, int> active;
        std::vector<const Intent*> chain;
    };
    auto satisfied = [&](const std::map<std::string, int>& active) {
        for (const auto& ctx : needed)
            if (!active.count(ctx)) return false;
        return true;
    };
    std::deque<Node> queue{{{}, {}}};
    std::set<std::string> seen;
    constexpr size_t kMaxDepth = 4;
    while (!queue.empty()) {
        Node node = std::move(queue.front());
        queue.pop_front();
        if (satisfied(node.active)) return node.chain;
        if (node.chain.size() >= kMaxDepth) continue;
        for (const auto& intent : agent.intents) {
            if (intent.is_fallback || intent.output_contexts.empty()) continue;
            bool inputs_ok = true;
            for (const auto& ctx : intent.input_contexts)
                if (!node.active.count(ctx)) inputs_ok = false;
            if (!inputs_ok) continue;
            Node next = node;
            for (auto it = next.active.begin(); it != next.active.end();) {
                if (--it->second <= 0)
                    it = next.active.erase(it);
                else
                    ++it;
            }
            for (const auto& ctx : intent.output_contexts) next.active[ctx.name] = ctx.lifespan;
            next.chain.push_back(&intent);
            std::string key;
            for (const auto* link : next.chain) key += link->name + "|";
            if (seen.insert(key).second) queue.push_back(std::move(next));
        }
    }
    return std::nullopt;
}

}  // namespace detail

// One statically derived convo per non-fallback intent, emulating the
// Botium-style baseline. Intents gated on input contexts get the seed steps
// of the shortest producing chain prepended; when no declared chain exists
// the convo is still emitted, flagged unreachable.
inline std::vector<Convo> generate_seeds(const AgentDefinition& agent) {
    std::vector<Convo> seeds;
    for (const auto& intent : agent.intents) {
        if (intent.is_fallback) continue;
        Convo convo;
        convo.name = intent.name;
        convo.seed = true;
        convo.origin = Origin::seedgen;

        if (!intent.input_contexts.empty()) {
            auto chain = detail::context_chain(agent, intent.input_contexts);
            if (chain) {
                for (const Intent* link : *chain) {
                    auto steps = detail::own_steps(agent, *link);
                    convo.oracle_unresolved |= steps.oracle_unresolved;
                    for (auto& s : steps.steps) convo.steps.push_back(std::move(s));
                }
            } else {
                convo.unreachable = true;
            }
        }

        auto steps = detail::own_steps(agent, intent);
        convo.oracle_unresolved |= steps.oracle_unresolved;
        for (auto& s : steps.steps) convo.steps.push_back(std::move(s));
        seeds.push_back(std::move(convo));
    }
    return seeds;
}

inline void write_seeds(const std::vector<Convo>& seeds, const std::filesystem::path& dir) {
    for (const auto& seed : seeds) save_convo(seed, dir / (seed.name + ".convo.txt"));
}

}  // namespace convogen
