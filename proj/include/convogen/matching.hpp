#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "convogen/agent.hpp"
#include "convogen/system_entities.hpp"
#include "convogen/text.hpp"

namespace convogen {

// Result of matching one user message against one training phrase.
struct PhraseMatch {
    std::map<std::string, std::string> fills;      // parameter -> canonical value
    std::map<std::string, std::string> raw_fills;  // parameter -> surface form as typed (normalized)
    int literal_length = 0;                        // total characters of matched literal text
};

struct IntentMatch {
    const Intent* intent = nullptr;
    PhraseMatch phrase;
};

namespace matching {

// Parse `raw` as one value of the entity: a canonical value, a synonym, or a
// system-entity pattern. Returns the canonical spelling.
inline std::optional<std::string> parse_entity_value(const AgentDefinition& agent,
                                                     const std::string& entity,
                                                     std::string_view raw) {
    if (const EntityType* e = agent.find_entity(entity)) {
        std::string norm = text::normalize_match(raw);
        for (const auto& v : e->values) {
            if (text::normalize_match(v.canonical) == norm) return v.canonical;
            for (const auto& syn : v.synonyms)
                if (text::normalize_match(syn) == norm) return v.canonical;
        }
        return std::nullopt;
    }
    return parse_system_value(entity, raw);
}

namespace detail {

struct CompiledPart {
    bool is_slot = false;
    std::vector<std::string> literal_tokens;  // normalized; empty for pure-whitespace literals
    std::string param;
    std::string entity;
};

inline std::vector<CompiledPart> compile_phrase(const Intent& intent, const TrainingPhrase& phrase) {
    std::vector<CompiledPart> parts;
    for (const auto& part : phrase.parts) {
        CompiledPart cp;
        if (part.kind == PhrasePart::Kind::literal) {
            cp.literal_tokens = text::tokenize(text::normalize_match(part.text));
        } else {
            cp.is_slot = true;
            cp.param = part.text;
            if (const Parameter* p = intent.find_parameter(part.text)) cp.entity = p->entity;
        }
        parts.push_back(std::move(cp));
    }
    return parts;
}

// Backtracking matcher over the token sequence. Slots try candidate spans in
// a fixed order (declared values first, then synonyms; ascending span length
// for system entities), which keeps extraction deterministic.
inline bool match_parts(const AgentDefinition& agent, const std::vector<CompiledPart>& parts,
                        size_t pi, const std::vector<std::string>& tokens, size_t ti,
                        std::map<std::string, std::string>& fills,
                        std::map<std::string, std::string>& raw_fills) {
    if (pi == parts.size()) return ti == tokens.size();
    const CompiledPart& part = parts[pi];

    if (!part.is_slot) {
        for (const auto& tok : part.literal_tokens) {
            if (ti >= tokens.size() || tokens[ti] != tok) return false;
            ++ti;
        }
        return match_parts(agent, parts, pi + 1, tokens, ti, fills, raw_fills);
    }

    auto bind = [&](const std::string& canonical, size_t span) {
        std::vector<std::string> piece(tokens.begin() + ti, tokens.begin() + ti + span);
        fills[part.param] = canonical;
        raw_fills[part.param] = text::join(piece, " ");
        if (match_parts(agent, parts, pi + 1, tokens, ti + span, fills, raw_fills)) return true;
        fills.erase(part.param);
        raw_fills.erase(part.param);
        return false;
    };

    if (const EntityType* e = agent.find_entity(part.entity)) {
        auto try_spelling = [&](const std::string& spelling, const std::string& canonical) {
            auto vt = text::tokenize(text::normalize_match(spelling));
            if (vt.empty() || ti + vt.size() > tokens.size()) return false;
            for (size_t k = 0; k < vt.size(); ++k)
                if (tokens[ti + k] != vt[k]) return false;
            return bind(canonical, vt.size());
        };
        for (const auto& v : e->values) {
            if (try_spelling(v.canonical, v.canonical)) return true;
            for (const auto& syn : v.synonyms)
                if (try_spelling(syn, v.canonical)) return true;
        }
        return false;
    }

    // System entity: consume 1..4 tokens and let the pattern parser decide.
    size_t max_span = part.entity == "sys.any" ? tokens.size() - ti : std::min<size_t>(4, tokens.size() - ti);
    for (size_t span = 1; span <= max_span; ++span) {
        std::vector<std::string> piece(tokens.begin() + ti, tokens.begin() + ti + span);
        auto canonical = parse_system_value(part.entity, text::join(piece, " "));
        if (!canonical) continue;
        if (bind(*canonical, span)) return true;
    }
    return false;
}

}  // namespace detail

inline std::optional<PhraseMatch> match_phrase(const AgentDefinition& agent, const Intent& intent,
                                               const TrainingPhrase& phrase, std::string_view user_text) {
    auto parts = detail::compile_phrase(intent, phrase);
    auto tokens = text::tokenize(text::normalize_match(user_text));
    if (tokens.empty()) return std::nullopt;
    PhraseMatch m;
    if (!detail::match_parts(agent, parts, 0, tokens, 0, m.fills, m.raw_fills)) return std::nullopt;
    for (const auto& part : parts)
        if (!part.is_slot)
            for (const auto& tok : part.literal_tokens) m.literal_length += static_cast<int>(tok.size());
    return m;
}

// Match against every non-fallback intent whose input contexts are satisfied.
// Selection: longest total literal length, then highest priority, then
// lexicographic name; within an intent, the first phrase in declaration order
// achieving that intent's best literal length.
template <typename ContextFilter>
inline std::optional<IntentMatch> match_message(const AgentDefinition& agent, std::string_view user_text,
                                                ContextFilter&& context_ok) {
    std::optional<IntentMatch> best;
    for (const auto& intent : agent.intents) {
        if (intent.is_fallback) continue;
        if (!context_ok(intent)) continue;
        std::optional<PhraseMatch> intent_best;
        for (const auto& phrase : intent.training_phrases) {
            auto m = match_phrase(agent, intent, phrase, user_text);
            if (m && (!intent_best || m->literal_length > intent_best->literal_length))
                intent_best = std::move(m);
        }
        if (!intent_best) continue;
        bool better = false;
        if (!best) {
            better = true;
        } else if (intent_best->literal_length != best->phrase.literal_length) {
            better = intent_best->literal_length > best->phrase.literal_length;
        } else if (intent.priority != best->intent->priority) {
            better = intent.priority > best->intent->priority;
        } else {
            better = intent.name < best->intent->name;
        }
        if (better) best = IntentMatch{&intent, std::move(*intent_best)};
    }
    return best;
}

// Context-free ownership: which intent does a scripted user message belong
// to? Used when interpreting seed convos, where contexts are not live.
inline std::optional<IntentMatch> owning_intent(const AgentDefinition& agent, std::string_view user_text) {
    return match_message(agent, user_text, [](const Intent&) { return true; });
}

// First declared value of an entity (system entities use their sample value).
inline std::string first_value(const AgentDefinition& agent, const std::string& entity) {
    if (const EntityType* e = agent.find_entity(entity)) return e->values.front().canonical;
    auto samples = system_entity_samples(entity);
    return samples.empty() ? std::string{} : samples.front();
}

// Default fills for a phrase: first declared value per slot, overridden by
// any provided preferred fills (e.g. values inferred from a seed message).
inline std::map<std::string, std::string> default_fills(
    const AgentDefinition& agent, const Intent& intent, const TrainingPhrase& phrase,
    const std::map<std::string, std::string>& preferred = {}) {
    std::map<std::string, std::string> fills;
    for (const auto& part : phrase.parts) {
        if (part.kind != PhrasePart::Kind::slot) continue;
        auto it = preferred.find(part.text);
        if (it != preferred.end()) {
            fills[part.text] = it->second;
            continue;
        }
        const Parameter* p = intent.find_parameter(part.text);
        fills[part.text] = p ? first_value(agent, p->entity) : std::string{};
    }
    return fills;
}

}  // namespace matching
}  // namespace convogen
