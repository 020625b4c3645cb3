#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "convogen/agent.hpp"
#include "convogen/errors.hpp"
#include "convogen/matching.hpp"
#include "convogen/store.hpp"

namespace convogen {

enum class SimMode { deterministic, seeded_random };

struct Extraction {
    std::string entity;
    std::string value;  // canonical value or recognized system-entity literal
    bool operator==(const Extraction&) const = default;
};

struct BotReply {
    std::string text;
    std::string matched_intent;  // intent name, or "fallback"
    std::map<std::string, Extraction> extracted;  // parameters bound this turn
    bool is_prompt = false;
    // Position counters the expander uses to walk a seed script.
    int turn = 0;                // user messages sent so far, including this one
    int completed_intents = 0;   // non-prompt exchanges finished so far, including this one
};

class Session;

// Action handlers run when an intent completes. They receive the collected
// parameter fills, the persistence store scoped helpers, and the live
// session; the returned map feeds the %key response placeholders.
struct ActionContext {
    PersistenceStore& store;
    std::string ns;
    Session& session;

    std::optional<std::string> get(const std::string& key) { return store.get(ns, key); }
    void put(const std::string& key, const std::string& payload) { store.put(ns, key, payload); }
    bool erase(const std::string& key) { return store.erase(ns, key); }
    std::vector<StoreItem> items() { return store.items(ns); }
};

using ActionHandler =
    std::function<std::map<std::string, std::string>(const std::map<std::string, Extraction>&, ActionContext&)>;

class ActionRegistry {
  public:
    void register_action(const std::string& id, ActionHandler handler) {
        if (handlers_.count(id)) throw DuplicateHandler(id);
        handlers_[id] = std::move(handler);
    }
    const ActionHandler* find(const std::string& id) const {
        auto it = handlers_.find(id);
        return it == handlers_.end() ? nullptr : &it->second;
    }
    bool has(const std::string& id) const { return handlers_.count(id) != 0; }

  private:
    std::map<std::string, ActionHandler> handlers_;
};

struct SessionOptions {
    uint64_t seed = 0;
    SimMode mode = SimMode::deterministic;
    std::string ns;  // empty -> fresh namespace
};

struct PendingSlot {
    std::string intent;
    std::string parameter;
    std::map<std::string, Extraction> fills;
    bool operator==(const PendingSlot&) const = default;
};

// Live dialog state for one conversation. Not safe for concurrent use;
// distinct sessions may run in parallel.
class Session {
  public:
    Session(const AgentDefinition& agent, const ActionRegistry& actions, PersistenceStore& store,
            const SessionOptions& opts)
        : agent_(&agent),
          actions_(&actions),
          store_(&store),
          mode_(opts.mode),
          seed_(opts.seed),
          rng_(opts.seed),
          ns_(opts.ns.empty() ? store.fresh_namespace(agent.name) : opts.ns) {
        for (const auto& intent : agent.intents)
            if (!intent.action.empty() && !actions.has(intent.action)) throw UnknownAction(intent.action);
    }

    const std::string& store_namespace() const { return ns_; }
    const std::map<std::string, int>& active_contexts() const { return contexts_; }
    int turn_counter() const { return turn_; }
    uint64_t rng_seed() const { return seed_; }
    bool closed() const { return closed_; }
    void close() { closed_ = true; }

    BotReply send_message(const std::string& user_text) {
        if (closed_) throw SessionClosed();
        ++turn_;

        // (a) A pending required slot first tries to read the message as a
        // value of its entity.
        if (pending_) {
            const Intent* intent = agent_->find_intent(pending_->intent);
            const Parameter* param = intent ? intent->find_parameter(pending_->parameter) : nullptr;
            if (param) {
                auto value = matching::parse_entity_value(*agent_, param->entity, user_text);
                if (value) {
                    auto fills = pending_->fills;
                    fills[param->name] = {param->entity, *value};
                    pending_.reset();
                    std::map<std::string, Extraction> new_fill{{param->name, fills.at(param->name)}};
                    return continue_intent(*intent, std::move(fills), std::move(new_fill));
                }
            }
        }

        // (b) Full intent matching over intents whose input contexts are
        // active; (c) selection ties broken by literal length, priority, name.
        auto match = matching::match_message(*agent_, user_text, [&](const Intent& intent) {
            for (const auto& ctx : intent.input_contexts)
                if (!contexts_.count(ctx)) return false;
            return true;
        });

        if (!match) return fallback_reply();

        pending_.reset();
        std::map<std::string, Extraction> fills;
        for (const auto& [param, value] : match->phrase.fills) {
            const Parameter* p = match->intent->find_parameter(param);
            fills[param] = {p ? p->entity : std::string{}, value};
        }
        return continue_intent(*match->intent, fills, fills);
    }

  private:
    // Either prompt for the first missing required parameter or complete the
    // intent: run its action, age contexts, apply output contexts, render a
    // response variant.
    BotReply continue_intent(const Intent& intent, std::map<std::string, Extraction> fills,
                             std::map<std::string, Extraction> new_fills) {
        for (const auto& param : intent.parameters) {
            if (!param.required || fills.count(param.name)) continue;
            pending_ = PendingSlot{intent.name, param.name, fills};
            BotReply reply;
            reply.text = param.prompts.front();
            reply.matched_intent = intent.name;
            reply.extracted = std::move(new_fills);
            reply.is_prompt = true;
            reply.turn = turn_;
            reply.completed_intents = completed_;
            return reply;
        }
        return complete_intent(intent, std::move(fills), std::move(new_fills), intent.name);
    }

    BotReply fallback_reply() {
        const Intent* fb = agent_->fallback();
        std::map<std::string, Extraction> none;
        // Pending slot filling survives a fallback turn so the user may still answer.
        return complete_intent(*fb, none, {}, "fallback");
    }

    BotReply complete_intent(const Intent& intent, std::map<std::string, Extraction> fills,
                             std::map<std::string, Extraction> new_fills, std::string reported_name) {
        std::map<std::string, std::string> action_results;
        if (!intent.action.empty()) {
            const ActionHandler* handler = actions_->find(intent.action);
            if (!handler) throw UnknownAction(intent.action);
            ActionContext ctx{*store_, ns_, *this};
            action_results = (*handler)(fills, ctx);
        }

        for (auto it = contexts_.begin(); it != contexts_.end();) {
            if (--it->second <= 0)
                it = contexts_.erase(it);
            else
                ++it;
        }
        for (const auto& ctx : intent.output_contexts) contexts_[ctx.name] = ctx.lifespan;

        BotReply reply;
        reply.text = render_response(intent, fills, action_results);
        reply.matched_intent = std::move(reported_name);
        reply.extracted = std::move(new_fills);
        reply.is_prompt = false;
        reply.turn = turn_;
        reply.completed_intents = ++completed_;
        return reply;
    }

    std::string render_response(const Intent& intent, const std::map<std::string, Extraction>& fills,
                                const std::map<std::string, std::string>& action_results) {
        std::vector<std::string> pieces;
        for (const auto& set : intent.responses) {
            size_t pick = 0;
            if (mode_ == SimMode::seeded_random && set.variants.size() > 1)
                pick = static_cast<size_t>(rng_() % set.variants.size());
            pieces.push_back(interpolate(set.variants[pick], fills, action_results));
        }
        return text::join(pieces, " ");
    }

    static std::string interpolate(const std::string& tmpl, const std::map<std::string, Extraction>& fills,
                                   const std::map<std::string, std::string>& action_results) {
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
                if (c == '$') {
                    auto it = fills.find(name);
                    out += (it != fills.end()) ? it->second.value : "";
                } else {
                    auto it = action_results.find(name);
                    if (it != action_results.end())
                        out += it->second;
                    else
                        out += tmpl.substr(i, j - i);  // unresolved %key stays literal
                }
                i = j;
            } else {
                out += c;
                ++i;
            }
        }
        return out;
    }

    const AgentDefinition* agent_;
    const ActionRegistry* actions_;
    PersistenceStore* store_;
    SimMode mode_;
    uint64_t seed_;
    std::mt19937_64 rng_;
    std::string ns_;
    std::map<std::string, int> contexts_;  // name -> remaining lifespan
    std::optional<PendingSlot> pending_;
    int turn_ = 0;
    int completed_ = 0;
    bool closed_ = false;
};

inline Session open_session(const AgentDefinition& agent, const ActionRegistry& actions,
                            PersistenceStore& store, uint64_t seed,
                            SimMode mode = SimMode::deterministic, const std::string& ns = "") {
    return Session(agent, actions, store, SessionOptions{seed, mode, ns});
}

}  // namespace convogen
