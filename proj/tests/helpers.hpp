#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "convogen/actions.hpp"
#include "convogen/agent.hpp"
#include "convogen/cleaner.hpp"
#include "convogen/convo.hpp"

namespace helpers {

inline std::string agent_path(const std::string& file) {
    return std::string(CONVOGEN_AGENTS_DIR) + "/" + file;
}

inline convogen::AgentDefinition dmv() { return convogen::load_agent(agent_path("dmv-scheduler.agent.json")); }
inline convogen::AgentDefinition currency() {
    return convogen::load_agent(agent_path("currency-converter.agent.json"));
}
inline convogen::AgentDefinition rooms() {
    return convogen::load_agent(agent_path("room-reservation.agent.json"));
}

inline convogen::Intent fallback_intent(const std::string& reply = "Sorry, what?") {
    convogen::Intent intent;
    intent.name = "Fallback";
    intent.is_fallback = true;
    intent.responses.push_back({{reply}});
    return intent;
}

// Minimal one-intent agent: a single literal phrase, no parameters.
inline convogen::AgentDefinition tiny_agent() {
    convogen::AgentDefinition agent;
    agent.name = "tiny";
    convogen::Intent greet;
    greet.name = "Greet";
    greet.training_phrases.push_back({{convogen::PhrasePart::literal("hello")}});
    greet.responses.push_back({{"Hello yourself."}});
    agent.intents.push_back(greet);
    agent.intents.push_back(fallback_intent());
    convogen::validate_agent(agent);
    return agent;
}

// The count-law agent: u opening phrases, one required entity of v values
// never pre-filled by a phrase.
inline convogen::AgentDefinition branching_agent(int utterances = 3, int values = 2) {
    convogen::AgentDefinition agent;
    agent.name = "drinks";
    convogen::EntityType drink;
    drink.name = "DrinkType";
    for (int v = 0; v < values; ++v) drink.values.push_back({"drink" + std::to_string(v), {}});
    agent.entities.push_back(drink);

    convogen::Intent order;
    order.name = "Order";
    for (int u = 0; u < utterances; ++u)
        order.training_phrases.push_back(
            {{convogen::PhrasePart::literal("give me a beverage number " + std::to_string(u))}});
    order.parameters.push_back({"drink", "DrinkType", true, {"Which drink would you like? @DrinkType"}});
    order.responses.push_back({{"Enjoy your $drink."}});
    agent.intents.push_back(order);
    agent.intents.push_back(fallback_intent());
    convogen::validate_agent(agent);
    return agent;
}

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag) {
        path = std::filesystem::temp_directory_path() /
               ("convogen-" + tag + "-" + std::to_string(std::random_device{}()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

// ---------------------------------------------------------------------------
// Deterministic random model generators for the round-trip property tests.

class ModelGen {
  public:
    explicit ModelGen(uint64_t seed) : rng_(seed) {}

    convogen::Convo convo() {
        convogen::Convo c;
        c.name = ident("convo");
        int pairs = 1 + pick(4);
        for (int i = 0; i < pairs; ++i) {
            c.steps.push_back(convogen::Step::me(block_text()));
            c.steps.push_back(convogen::Step::bot(block_text()));
        }
        c.seed = pick(2) == 0;
        c.origin = static_cast<convogen::Origin>(pick(3));
        c.unreachable = pick(5) == 0;
        c.oracle_unresolved = pick(5) == 0;
        return c;
    }

    convogen::AgentDefinition agent() {
        convogen::AgentDefinition a;
        a.name = ident("agent");
        int entities = pick(3);
        for (int e = 0; e < entities; ++e) {
            convogen::EntityType entity;
            entity.name = ident("Ent");
            int values = 1 + pick(3);
            for (int v = 0; v < values; ++v) {
                convogen::EntityValue value;
                value.canonical = ident("val");
                int syns = pick(3);
                for (int s = 0; s < syns; ++s) value.synonyms.push_back(ident("syn"));
                entity.values.push_back(value);
            }
            a.entities.push_back(entity);
        }

        int intents = 1 + pick(3);
        for (int i = 0; i < intents; ++i) {
            convogen::Intent intent;
            intent.name = ident("Intent");
            intent.priority = 250000 * (1 + pick(4));
            if (pick(3) == 0) intent.input_contexts.push_back(ident("ctx"));
            if (pick(3) == 0) intent.output_contexts.push_back({ident("ctx"), 1 + pick(4)});

            int params = a.entities.empty() ? 0 : pick(3);
            for (int p = 0; p < params; ++p) {
                convogen::Parameter param;
                param.name = ident("param");
                param.entity = a.entities[pick(a.entities.size())].name;
                param.required = pick(2) == 0;
                if (param.required) param.prompts.push_back("Please pick a value. @" + param.entity);
                intent.parameters.push_back(param);
            }

            int phrases = 1 + pick(3);
            for (int ph = 0; ph < phrases; ++ph) {
                convogen::TrainingPhrase phrase;
                phrase.parts.push_back(convogen::PhrasePart::literal(words(1 + pick(4))));
                for (const auto& param : intent.parameters) {
                    if (pick(2) == 0) continue;
                    phrase.parts.push_back(convogen::PhrasePart::slot(param.name));
                    phrase.parts.push_back(convogen::PhrasePart::literal(" " + words(1 + pick(2))));
                }
                intent.training_phrases.push_back(phrase);
            }

            convogen::ResponseVariantSet set;
            int variants = 1 + pick(2);
            for (int v = 0; v < variants; ++v) {
                std::string variant = words(2 + pick(4)) + ".";
                if (!intent.parameters.empty() && pick(2) == 0)
                    variant += " You chose $" + intent.parameters[pick(intent.parameters.size())].name + ".";
                set.variants.push_back(variant);
            }
            intent.responses.push_back(set);
            a.intents.push_back(intent);
        }
        a.intents.push_back(fallback_intent());
        convogen::validate_agent(a);
        return a;
    }

  private:
    size_t pick(size_t n) { return n == 0 ? 0 : rng_() % n; }

    std::string ident(const std::string& prefix) { return prefix + std::to_string(++counter_); }

    std::string word() {
        static const char* pool[] = {"alpha", "bravo", "carrier", "delta", "echo",   "fox",
                                     "golf",  "hotel", "india",  "jazz",  "keeper", "lima"};
        return pool[pick(sizeof(pool) / sizeof(pool[0]))];
    }

    std::string words(int n) {
        std::string out;
        for (int i = 0; i < n; ++i) {
            if (i) out += " ";
            out += word();
        }
        return out;
    }

    // Block text must not look like a tag or metadata header and must not
    // start or end with blank lines; interior newlines are fair game.
    std::string block_text() {
        std::string out = words(1 + pick(5));
        if (pick(3) == 0) out += "\n" + words(1 + pick(3));
        if (pick(4) == 0) out += "?";
        return out;
    }

    std::mt19937_64 rng_;
    uint64_t counter_ = 0;
};

}  // namespace helpers
