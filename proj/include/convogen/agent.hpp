#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "convogen/errors.hpp"
#include "convogen/system_entities.hpp"
#include "convogen/text.hpp"

namespace convogen {

struct EntityValue {
    std::string canonical;
    std::vector<std::string> synonyms;
    bool operator==(const EntityValue&) const = default;
};

struct EntityType {
    std::string name;
    std::vector<EntityValue> values;
    bool operator==(const EntityType&) const = default;
};

// A training phrase is a sequence of literal text and parameter slots.
struct PhrasePart {
    enum class Kind { literal, slot };
    Kind kind = Kind::literal;
    std::string text;  // literal text, or the parameter name for a slot
    bool operator==(const PhrasePart&) const = default;

    static PhrasePart literal(std::string t) { return {Kind::literal, std::move(t)}; }
    static PhrasePart slot(std::string param) { return {Kind::slot, std::move(param)}; }
};

struct TrainingPhrase {
    std::vector<PhrasePart> parts;
    bool operator==(const TrainingPhrase&) const = default;
};

struct Parameter {
    std::string name;
    std::string entity;  // custom entity name or a sys.* entity
    bool required = false;
    std::vector<std::string> prompts;  // non-empty iff required
    bool operator==(const Parameter&) const = default;
};

struct ResponseVariantSet {
    std::vector<std::string> variants;
    bool operator==(const ResponseVariantSet&) const = default;
};

struct ContextSpan {
    std::string name;
    int lifespan = 1;  // turns; >= 1
    bool operator==(const ContextSpan&) const = default;
};

constexpr int kDefaultIntentPriority = 500000;

struct Intent {
    std::string name;
    int priority = kDefaultIntentPriority;
    bool is_fallback = false;
    std::vector<std::string> input_contexts;
    std::vector<ContextSpan> output_contexts;
    std::vector<TrainingPhrase> training_phrases;
    std::vector<Parameter> parameters;
    std::vector<ResponseVariantSet> responses;
    std::string action;  // empty = none
    bool operator==(const Intent&) const = default;

    const Parameter* find_parameter(std::string_view name_) const {
        for (const auto& p : parameters)
            if (p.name == name_) return &p;
        return nullptr;
    }
};

// Immutable after load; safe to share across concurrent readers.
struct AgentDefinition {
    std::string name;
    std::vector<EntityType> entities;
    std::vector<Intent> intents;
    bool operator==(const AgentDefinition&) const = default;

    const EntityType* find_entity(std::string_view name_) const {
        for (const auto& e : entities)
            if (e.name == name_) return &e;
        return nullptr;
    }
    const Intent* find_intent(std::string_view name_) const {
        for (const auto& i : intents)
            if (i.name == name_) return &i;
        return nullptr;
    }
    // With a validated agent this is the unique fallback; degenerate mutants
    // may carry several, in which case highest priority then name wins.
    const Intent* fallback() const {
        const Intent* best = nullptr;
        for (const auto& i : intents) {
            if (!i.is_fallback) continue;
            if (!best || i.priority > best->priority ||
                (i.priority == best->priority && i.name < best->name))
                best = &i;
        }
        return best;
    }
    size_t non_fallback_count() const {
        size_t n = 0;
        for (const auto& i : intents)
            if (!i.is_fallback) ++n;
        return n;
    }
};

enum class Strictness {
    strict,   // every invariant enforced
    lenient,  // degenerate mutants allowed: several fallbacks, stale prompts,
              // dangling placeholders, sys.any parameters
};

namespace detail {

inline void merge_adjacent_literals(TrainingPhrase& phrase) {
    std::vector<PhrasePart> merged;
    for (auto& part : phrase.parts) {
        if (part.kind == PhrasePart::Kind::literal && !merged.empty() &&
            merged.back().kind == PhrasePart::Kind::literal) {
            merged.back().text += part.text;
        } else {
            merged.push_back(std::move(part));
        }
    }
    phrase.parts = std::move(merged);
}

// Scan for $name / %name placeholders; calls fn(sigil, name).
template <typename Fn>
inline void for_each_placeholder(std::string_view tmpl, Fn&& fn) {
    for (size_t i = 0; i < tmpl.size(); ++i) {
        char c = tmpl[i];
        if (c != '$' && c != '%') continue;
        size_t j = i + 1;
        if (j >= tmpl.size()) continue;
        if (!std::isalpha(static_cast<unsigned char>(tmpl[j])) && tmpl[j] != '_') continue;
        while (j < tmpl.size() &&
               (std::isalnum(static_cast<unsigned char>(tmpl[j])) || tmpl[j] == '_'))
            ++j;
        fn(c, std::string(tmpl.substr(i + 1, j - i - 1)));
        i = j - 1;
    }
}

// True when `text` mentions "@<entity>" at a word boundary.
inline bool mentions_entity_ref(std::string_view text_, std::string_view entity) {
    std::string needle = "@" + std::string(entity);
    size_t pos = 0;
    while ((pos = text_.find(needle, pos)) != std::string::npos) {
        size_t end = pos + needle.size();
        if (end >= text_.size() || !(std::isalnum(static_cast<unsigned char>(text_[end])) || text_[end] == '_'))
            return true;
        pos += 1;
    }
    return false;
}

}  // namespace detail

inline bool entity_exists(const AgentDefinition& agent, std::string_view name, Strictness mode) {
    if (agent.find_entity(name)) return true;
    if (name == "sys.any") return mode == Strictness::lenient;
    return is_system_entity(name);
}

// Validate the full model. Throws ValidationError naming the offending element.
inline void validate_agent(const AgentDefinition& agent, Strictness mode = Strictness::strict) {
    auto fail = [](const std::string& msg) { throw ValidationError(msg); };

    if (!text::is_identifier(agent.name)) fail("agent name '" + agent.name + "' is not an identifier");

    std::set<std::string> entity_names;
    for (const auto& e : agent.entities) {
        if (!text::is_identifier(e.name)) fail("entity name '" + e.name + "' is not an identifier");
        if (!entity_names.insert(e.name).second) fail("duplicate entity '" + e.name + "'");
        if (e.values.empty()) fail("entity '" + e.name + "' has no values");
        std::set<std::string> canon;
        for (const auto& v : e.values) {
            if (v.canonical.empty()) fail("entity '" + e.name + "' has an empty value");
            if (!canon.insert(v.canonical).second)
                fail("entity '" + e.name + "' repeats value '" + v.canonical + "'");
        }
    }

    std::set<std::string> intent_names;
    size_t fallbacks = 0;
    for (const auto& intent : agent.intents) {
        if (!text::is_identifier(intent.name)) fail("intent name '" + intent.name + "' is not an identifier");
        if (!intent_names.insert(intent.name).second) fail("duplicate intent '" + intent.name + "'");
        if (intent.is_fallback) {
            ++fallbacks;
            if (mode == Strictness::strict &&
                (!intent.training_phrases.empty() || !intent.parameters.empty()))
                fail("fallback intent '" + intent.name + "' must have no training phrases or parameters");
        }

        std::set<std::string> param_names;
        for (const auto& p : intent.parameters) {
            if (!param_names.insert(p.name).second)
                fail("intent '" + intent.name + "' repeats parameter '" + p.name + "'");
            if (!entity_exists(agent, p.entity, mode))
                fail("parameter '" + p.name + "' of intent '" + intent.name +
                     "' references unknown entity '" + p.entity + "'");
            if (p.required) {
                if (p.prompts.empty())
                    fail("required parameter '" + p.name + "' of intent '" + intent.name + "' has no prompts");
                if (mode == Strictness::strict) {
                    for (const auto& prompt : p.prompts)
                        if (!detail::mentions_entity_ref(prompt, p.entity))
                            fail("prompt for parameter '" + p.name + "' of intent '" + intent.name +
                                 "' does not reference @" + p.entity);
                }
            } else if (!p.prompts.empty()) {
                fail("optional parameter '" + p.name + "' of intent '" + intent.name + "' must not carry prompts");
            }
        }

        for (size_t pi = 0; pi < intent.training_phrases.size(); ++pi) {
            const auto& phrase = intent.training_phrases[pi];
            if (phrase.parts.empty())
                fail("intent '" + intent.name + "' training phrase " + std::to_string(pi) + " is empty");
            bool has_content = false;
            for (const auto& part : phrase.parts) {
                if (part.kind == PhrasePart::Kind::slot) {
                    has_content = true;
                    if (!intent.find_parameter(part.text))
                        fail("intent '" + intent.name + "' training phrase references unknown parameter '" +
                             part.text + "'");
                } else if (!text::collapse_ws(part.text).empty()) {
                    has_content = true;
                }
            }
            if (!has_content && mode == Strictness::strict)
                fail("intent '" + intent.name + "' training phrase " + std::to_string(pi) +
                     " renders to empty text");
        }

        for (const auto& ctx : intent.input_contexts)
            if (!text::is_identifier(ctx))
                fail("intent '" + intent.name + "' input context '" + ctx + "' is not an identifier");
        for (const auto& ctx : intent.output_contexts) {
            if (!text::is_identifier(ctx.name))
                fail("intent '" + intent.name + "' output context '" + ctx.name + "' is not an identifier");
            if (ctx.lifespan < 1)
                fail("output context '" + ctx.name + "' of intent '" + intent.name + "' has lifespan < 1");
        }

        if (intent.responses.empty()) fail("intent '" + intent.name + "' has no responses");
        for (const auto& set : intent.responses) {
            if (set.variants.empty()) fail("intent '" + intent.name + "' has an empty response variant set");
            if (mode == Strictness::strict) {
                for (const auto& variant : set.variants) {
                    detail::for_each_placeholder(variant, [&](char sigil, const std::string& name) {
                        if (sigil == '$' && !intent.find_parameter(name))
                            fail("response of intent '" + intent.name + "' interpolates unknown parameter '$" +
                                 name + "'");
                        if (sigil == '%' && intent.action.empty())
                            fail("response of intent '" + intent.name + "' uses '%" + name +
                                 "' but the intent has no action");
                    });
                }
            }
        }
    }

    if (fallbacks == 0) fail("agent '" + agent.name + "' has no fallback intent");
    if (mode == Strictness::strict && fallbacks > 1)
        fail("agent '" + agent.name + "' has more than one fallback intent");
}

// ---------------------------------------------------------------------------
// JSON serialization. The on-disk format is a single UTF-8 JSON document;
// unknown keys are rejected.

namespace detail {

using json = nlohmann::ordered_json;

inline void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                                const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw ParseError(where + ": unknown key '" + it.key() + "'");
}

template <typename T>
inline T get_field(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key)) throw ParseError(where + ": missing key '" + key + "'");
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ParseError(where + ": key '" + key + "' has the wrong type");
    }
}

template <typename T>
inline T get_or(const json& obj, const std::string& key, T def, const std::string& where) {
    if (!obj.contains(key)) return def;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ParseError(where + ": key '" + key + "' has the wrong type");
    }
}

inline TrainingPhrase parse_phrase(const json& j, const std::string& where) {
    TrainingPhrase phrase;
    if (j.is_string()) {
        // Plain strings are accepted as fully rendered single-literal phrases.
        phrase.parts.push_back(PhrasePart::literal(j.get<std::string>()));
        return phrase;
    }
    if (!j.is_array()) throw ParseError(where + ": training phrase must be a string or an array of parts");
    for (size_t i = 0; i < j.size(); ++i) {
        const auto& part = j[i];
        std::string pwhere = where + ".parts[" + std::to_string(i) + "]";
        if (!part.is_object()) throw ParseError(pwhere + ": part must be an object");
        reject_unknown_keys(part, {"text", "slot"}, pwhere);
        if (part.contains("text") == part.contains("slot"))
            throw ParseError(pwhere + ": part must have exactly one of 'text' or 'slot'");
        if (part.contains("text"))
            phrase.parts.push_back(PhrasePart::literal(get_field<std::string>(part, "text", pwhere)));
        else
            phrase.parts.push_back(PhrasePart::slot(get_field<std::string>(part, "slot", pwhere)));
    }
    merge_adjacent_literals(phrase);
    return phrase;
}

}  // namespace detail

inline AgentDefinition agent_from_json(const nlohmann::ordered_json& doc) {
    using detail::get_field;
    using detail::get_or;
    using detail::reject_unknown_keys;

    if (!doc.is_object()) throw ParseError("agent: top level must be an object");
    reject_unknown_keys(doc, {"name", "entities", "intents"}, "agent");

    AgentDefinition agent;
    agent.name = get_field<std::string>(doc, "name", "agent");

    if (doc.contains("entities")) {
        const auto& ents = doc.at("entities");
        if (!ents.is_array()) throw ParseError("agent.entities: must be an array");
        for (size_t i = 0; i < ents.size(); ++i) {
            std::string where = "entities[" + std::to_string(i) + "]";
            const auto& je = ents[i];
            reject_unknown_keys(je, {"name", "values"}, where);
            EntityType entity;
            entity.name = get_field<std::string>(je, "name", where);
            const auto& values = je.contains("values") ? je.at("values") : nlohmann::ordered_json::array();
            for (size_t v = 0; v < values.size(); ++v) {
                std::string vwhere = where + ".values[" + std::to_string(v) + "]";
                reject_unknown_keys(values[v], {"value", "synonyms"}, vwhere);
                EntityValue val;
                val.canonical = get_field<std::string>(values[v], "value", vwhere);
                val.synonyms = get_or<std::vector<std::string>>(values[v], "synonyms", {}, vwhere);
                entity.values.push_back(std::move(val));
            }
            agent.entities.push_back(std::move(entity));
        }
    }

    const auto& intents = doc.contains("intents") ? doc.at("intents") : nlohmann::ordered_json::array();
    if (!intents.is_array()) throw ParseError("agent.intents: must be an array");
    for (size_t i = 0; i < intents.size(); ++i) {
        std::string where = "intents[" + std::to_string(i) + "]";
        const auto& ji = intents[i];
        reject_unknown_keys(ji,
                            {"name", "priority", "is_fallback", "input_contexts", "output_contexts",
                             "training_phrases", "parameters", "responses", "action"},
                            where);
        Intent intent;
        intent.name = get_field<std::string>(ji, "name", where);
        intent.priority = get_or<int>(ji, "priority", kDefaultIntentPriority, where);
        intent.is_fallback = get_or<bool>(ji, "is_fallback", false, where);
        intent.input_contexts = get_or<std::vector<std::string>>(ji, "input_contexts", {}, where);
        if (ji.contains("output_contexts")) {
            for (size_t c = 0; c < ji.at("output_contexts").size(); ++c) {
                std::string cwhere = where + ".output_contexts[" + std::to_string(c) + "]";
                const auto& jc = ji.at("output_contexts")[c];
                reject_unknown_keys(jc, {"name", "lifespan"}, cwhere);
                intent.output_contexts.push_back(
                    {get_field<std::string>(jc, "name", cwhere), get_or<int>(jc, "lifespan", 1, cwhere)});
            }
        }
        if (ji.contains("training_phrases")) {
            const auto& phrases = ji.at("training_phrases");
            if (!phrases.is_array()) throw ParseError(where + ".training_phrases: must be an array");
            for (size_t p = 0; p < phrases.size(); ++p)
                intent.training_phrases.push_back(
                    detail::parse_phrase(phrases[p], where + ".training_phrases[" + std::to_string(p) + "]"));
        }
        if (ji.contains("parameters")) {
            for (size_t p = 0; p < ji.at("parameters").size(); ++p) {
                std::string pwhere = where + ".parameters[" + std::to_string(p) + "]";
                const auto& jp = ji.at("parameters")[p];
                reject_unknown_keys(jp, {"name", "entity", "required", "prompts"}, pwhere);
                Parameter param;
                param.name = get_field<std::string>(jp, "name", pwhere);
                param.entity = get_field<std::string>(jp, "entity", pwhere);
                param.required = get_or<bool>(jp, "required", false, pwhere);
                param.prompts = get_or<std::vector<std::string>>(jp, "prompts", {}, pwhere);
                intent.parameters.push_back(std::move(param));
            }
        }
        if (ji.contains("responses")) {
            const auto& sets = ji.at("responses");
            if (!sets.is_array()) throw ParseError(where + ".responses: must be an array");
            for (size_t s = 0; s < sets.size(); ++s) {
                ResponseVariantSet set;
                try {
                    set.variants = sets[s].get<std::vector<std::string>>();
                } catch (const nlohmann::ordered_json::exception&) {
                    throw ParseError(where + ".responses[" + std::to_string(s) +
                                     "]: must be an array of strings");
                }
                intent.responses.push_back(std::move(set));
            }
        }
        intent.action = get_or<std::string>(ji, "action", "", where);
        agent.intents.push_back(std::move(intent));
    }
    return agent;
}

inline nlohmann::ordered_json agent_to_json(const AgentDefinition& agent) {
    using json = nlohmann::ordered_json;
    json doc;
    doc["name"] = agent.name;
    doc["entities"] = json::array();
    for (const auto& e : agent.entities) {
        json je;
        je["name"] = e.name;
        je["values"] = json::array();
        for (const auto& v : e.values) je["values"].push_back({{"value", v.canonical}, {"synonyms", v.synonyms}});
        doc["entities"].push_back(std::move(je));
    }
    doc["intents"] = json::array();
    for (const auto& intent : agent.intents) {
        json ji;
        ji["name"] = intent.name;
        ji["priority"] = intent.priority;
        ji["is_fallback"] = intent.is_fallback;
        ji["input_contexts"] = intent.input_contexts;
        ji["output_contexts"] = json::array();
        for (const auto& ctx : intent.output_contexts)
            ji["output_contexts"].push_back({{"name", ctx.name}, {"lifespan", ctx.lifespan}});
        ji["training_phrases"] = json::array();
        for (const auto& phrase : intent.training_phrases) {
            json jp = json::array();
            for (const auto& part : phrase.parts) {
                if (part.kind == PhrasePart::Kind::literal)
                    jp.push_back({{"text", part.text}});
                else
                    jp.push_back({{"slot", part.text}});
            }
            ji["training_phrases"].push_back(std::move(jp));
        }
        ji["parameters"] = json::array();
        for (const auto& p : intent.parameters)
            ji["parameters"].push_back({{"name", p.name},
                                        {"entity", p.entity},
                                        {"required", p.required},
                                        {"prompts", p.prompts}});
        ji["responses"] = json::array();
        for (const auto& set : intent.responses) ji["responses"].push_back(set.variants);
        ji["action"] = intent.action;
        doc["intents"].push_back(std::move(ji));
    }
    return doc;
}

inline AgentDefinition parse_agent(const std::string& content, Strictness mode = Strictness::strict) {
    nlohmann::ordered_json doc;
    try {
        doc = nlohmann::ordered_json::parse(content);
    } catch (const nlohmann::ordered_json::parse_error& e) {
        // Report the 1-based line of the byte offset nlohmann gives us.
        size_t line = 1;
        for (size_t i = 0; i < e.byte && i < content.size(); ++i)
            if (content[i] == '\n') ++line;
        throw ParseError("agent file line " + std::to_string(line) + ": " + e.what());
    }
    AgentDefinition agent = agent_from_json(doc);
    validate_agent(agent, mode);
    return agent;
}

inline AgentDefinition load_agent(const std::string& path, Strictness mode = Strictness::strict) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot read agent file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_agent(buf.str(), mode);
}

inline std::string save_agent(const AgentDefinition& agent) {
    return agent_to_json(agent).dump(2) + "\n";
}

inline void save_agent_file(const AgentDefinition& agent, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write agent file '" + path + "'");
    out << save_agent(agent);
}

// ---------------------------------------------------------------------------

// Concatenate literals and slot fills; the result is single-space normalized.
inline std::string render_phrase(const TrainingPhrase& phrase,
                                 const std::map<std::string, std::string>& fills) {
    std::string out;
    for (const auto& part : phrase.parts) {
        if (part.kind == PhrasePart::Kind::literal) {
            out += part.text;
        } else {
            auto it = fills.find(part.text);
            if (it == fills.end()) throw MissingFill(part.text);
            out += it->second;
        }
    }
    return text::collapse_ws(out);
}

}  // namespace convogen
