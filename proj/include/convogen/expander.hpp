#pragma once

#include <optional>
#include <string>
#include <vector>

#include "convogen/agent.hpp"
#include "convogen/convo.hpp"
#include "convogen/matching.hpp"
#include "convogen/simulator.hpp"

namespace convogen {

struct ExpandOptions {
    size_t max_combinations = 10;  // cap on entity-value cartesian products
};

namespace detail {

// Entity names referenced as "@<name>" in a bot message, in occurrence order.
// Longest known name wins at each '@'; a bare '@' before no known entity is
// plain text.
inline std::vector<std::string> entity_refs(const AgentDefinition& agent, const std::string& bot_text) {
    std::vector<std::string> known;
    for (const auto& e : agent.entities) known.push_back(e.name);
    for (const auto& n : system_entity_names()) known.push_back(n);
    std::sort(known.begin(), known.end(), [](const auto& a, const auto& b) { return a.size() > b.size(); });

    std::vector<std::string> refs;
    for (size_t i = 0; i < bot_text.size(); ++i) {
        if (bot_text[i] != '@') continue;
        for (const auto& name : known) {
            if (bot_text.compare(i + 1, name.size(), name) != 0) continue;
            size_t end = i + 1 + name.size();
            if (end < bot_text.size() &&
                (std::isalnum(static_cast<unsigned char>(bot_text[end])) || bot_text[end] == '_'))
                continue;
            refs.push_back(name);
            i = end - 1;
            break;
        }
    }
    return refs;
}

inline std::vector<std::string> values_of(const AgentDefinition& agent, const std::string& entity) {
    if (const EntityType* e = agent.find_entity(entity)) {
        std::vector<std::string> out;
        for (const auto& v : e->values) out.push_back(v.canonical);
        return out;
    }
    return system_entity_samples(entity);
}

// Every training phrase of the intent owning `me_text`. Element 0 is the
// seed's own message verbatim (the continuation the seed test takes); the
// remaining phrases follow in declaration order, rendered with the seed's
// slot values where inferable and first declared values otherwise.
inline std::vector<std::string> phrase_alternatives(const AgentDefinition& agent, const std::string& me_text) {
    auto owner = matching::owning_intent(agent, me_text);
    if (!owner) throw UnknownIntent(me_text);
    const std::map<std::string, std::string>& preferred = owner->phrase.raw_fills;

    size_t own_index = 0;
    for (size_t i = 0; i < owner->intent->training_phrases.size(); ++i) {
        if (matching::match_phrase(agent, *owner->intent, owner->intent->training_phrases[i], me_text)) {
            own_index = i;
            break;
        }
    }
    std::vector<std::string> alts{me_text};
    for (size_t i = 0; i < owner->intent->training_phrases.size(); ++i) {
        if (i == own_index) continue;
        const auto& phrase = owner->intent->training_phrases[i];
        auto fills = matching::default_fills(agent, *owner->intent, phrase, preferred);
        alts.push_back(render_phrase(phrase, fills));
    }
    return alts;
}

// Seed user steps that open a new intent, i.e. every #me that does not answer
// an "@" prompt.
inline std::vector<std::string> utterance_steps(const AgentDefinition& agent, const Convo& seed) {
    std::vector<std::string> out;
    const Step* prev_bot = nullptr;
    for (const auto& step : seed.steps) {
        if (step.kind == Step::Kind::bot) {
            prev_bot = &step;
            continue;
        }
        if (!prev_bot || entity_refs(agent, prev_bot->text).empty()) out.push_back(step.text);
    }
    return out;
}

}  // namespace detail

// Alternatives for the next user message, given the bot reply just received
// (or no reply when the conversation has not started).
//   - no reply: all rendered training phrases of the intent opening the seed;
//   - reply mentions "@" entities: their value combinations, row-major in
//     "@"-occurrence order, capped at max_combinations;
//   - plain reply: the rendered phrases of the intent the seed continues
//     with, or empty when the seed script is exhausted.
inline std::vector<std::string> expand(const Convo& seed, const std::optional<BotReply>& bot_msg,
                                       const AgentDefinition& agent, const ExpandOptions& opts = {}) {
    if (!bot_msg) {
        for (const auto& step : seed.steps)
            if (step.kind == Step::Kind::me) return detail::phrase_alternatives(agent, step.text);
        return {};
    }

    auto refs = detail::entity_refs(agent, bot_msg->text);
    if (!refs.empty()) {
        std::vector<std::vector<std::string>> pools;
        for (const auto& entity : refs) pools.push_back(detail::values_of(agent, entity));
        std::vector<std::string> combos;
        std::vector<size_t> idx(pools.size(), 0);
        while (combos.size() < opts.max_combinations) {
            std::vector<std::string> parts;
            for (size_t k = 0; k < pools.size(); ++k) parts.push_back(pools[k][idx[k]]);
            combos.push_back(text::join(parts, " "));
            size_t k = pools.size();
            while (k > 0) {
                --k;
                if (++idx[k] < pools[k].size()) break;
                idx[k] = 0;
                if (k == 0) return combos;  // product exhausted
            }
        }
        return combos;
    }

    // Plain response: continue with the seed's next new-intent utterance.
    auto utterances = detail::utterance_steps(agent, seed);
    size_t done = static_cast<size_t>(bot_msg->completed_intents);
    if (done >= utterances.size()) return {};
    return detail::phrase_alternatives(agent, utterances[done]);
}

}  // namespace convogen
