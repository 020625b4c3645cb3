#pragma once

#include <map>
#include <string>
#include <vector>

#include "convogen/cleaner.hpp"
#include "convogen/convo.hpp"
#include "convogen/expander.hpp"

namespace convogen {

struct GeneratorOptions {
    size_t max_combinations = 10;
    size_t max_tests_per_seed = 256;
    // With truncate_branches, branch tests only replay their inherited
    // messages instead of conversing on to the end of the script.
    bool truncate_branches = false;
};

struct AbortedTest {
    std::string seed;
    std::string name;
    std::vector<std::string> me_messages;
    std::string cause;
};

struct GenerationResult {
    // Augmented tests per seed name, in creation order.
    std::map<std::string, std::vector<Convo>> tests;
    std::vector<AbortedTest> aborted;

    size_t total() const {
        size_t n = 0;
        for (const auto& [_, list] : tests) n += list.size();
        return n;
    }
};

namespace detail {

struct DraftTest {
    std::vector<std::string> me;   // user messages, branch prefixes included
    std::vector<std::string> bot;  // recorded replies; grows during execution
    bool seed_flagged = false;
    bool aborted = false;
    std::string abort_cause;
    size_t replay_count = 0;  // how many me messages were inherited
};

}  // namespace detail

// Dynamic augmented-test generation: run each seed script against the live
// bot, record actual replies as oracles, and branch a new test for every
// alternative the expander reports. Branch tests inherit the conversation
// prefix, replay it, then keep taking alternative 0 until the script ends.
inline GenerationResult generate_tests(const std::vector<Convo>& seeds, const ConnectorRegistry& registry,
                                       const CleaningRoutine& routine, const AgentDefinition& agent,
                                       const GeneratorOptions& opts = {}) {
    GenerationResult result;
    ExpandOptions expand_opts{opts.max_combinations};

    for (const auto& seed : seeds) {
        std::vector<detail::DraftTest> drafts;

        std::vector<std::string> start_msgs;
        try {
            start_msgs = expand(seed, std::nullopt, agent, expand_opts);
        } catch (const UnknownIntent& e) {
            result.aborted.push_back({seed.name, seed.name, {}, e.what()});
            continue;
        }
        // Branch creation is capped, so reserving up front keeps references
        // into the list stable while it grows.
        drafts.reserve(opts.max_tests_per_seed + start_msgs.size());
        for (size_t i = 0; i < start_msgs.size(); ++i) {
            detail::DraftTest draft;
            draft.me.push_back(start_msgs[i]);
            draft.replay_count = 1;
            draft.seed_flagged = true;
            drafts.push_back(std::move(draft));
        }

        // The list grows while we iterate: branch tests created by test i are
        // executed later at their own index.
        for (size_t i = 0; i < drafts.size(); ++i) {
            CleaningRoutine test_routine = routine;
            test_routine.connect_params["namespace"] =
                routine.param("namespace", "gen") + "." + seed.name + "." + std::to_string(i);
            Cleaner cleaner(registry, test_routine);
            Connection& conn = cleaner.set_up();

            auto send_recorded = [&](detail::DraftTest& draft, const std::string& msg) {
                BotReply reply = conn.session->send_message(msg);
                draft.bot.push_back(reply.text);
                if (reply.matched_intent == "fallback") {
                    draft.aborted = true;
                    draft.abort_cause = "bot answered fallback to \"" + msg + "\"";
                }
                return reply;
            };

            auto branch_from = [&](const detail::DraftTest& current, const std::string& alternative) {
                if (drafts.size() >= drafts.capacity() || drafts.size() >= opts.max_tests_per_seed) return;
                detail::DraftTest branch;
                branch.me = current.me;
                branch.me.push_back(alternative);
                branch.replay_count = branch.me.size();
                branch.seed_flagged = false;
                drafts.push_back(std::move(branch));
            };

            detail::DraftTest& draft = drafts[i];
            try {
                std::optional<BotReply> last;

                // Replay the inherited part of the conversation first. For a
                // fresh seed-flagged test that is just its start message.
                for (size_t m = 0; m < draft.replay_count && !draft.aborted; ++m)
                    last = send_recorded(draft, draft.me[m]);

                bool conversing = !draft.aborted && (draft.seed_flagged || !opts.truncate_branches);
                while (conversing) {
                    std::vector<std::string> alts = expand(seed, last, agent, expand_opts);
                    if (alts.empty()) break;
                    if (draft.seed_flagged && alts.size() > 1)
                        for (size_t j = 1; j < alts.size(); ++j) branch_from(draft, alts[j]);
                    draft.me.push_back(alts[0]);
                    last = send_recorded(draft, alts[0]);
                    conversing = !draft.aborted;
                }
            } catch (const Error& e) {
                draft.aborted = true;
                draft.abort_cause = e.what();
            }

            cleaner.tear_down();
        }

        // Emit surviving drafts in creation order; wrong-at-birth tests are
        // reported, not kept.
        std::vector<Convo>& out = result.tests[seed.name];
        for (size_t i = 0; i < drafts.size(); ++i) {
            const auto& draft = drafts[i];
            std::string name = seed.name + "." + std::to_string(i);
            if (draft.aborted) {
                result.aborted.push_back({seed.name, name, draft.me, draft.abort_cause});
                continue;
            }
            Convo convo;
            convo.name = name;
            convo.seed = draft.seed_flagged;
            convo.origin = draft.seed_flagged ? Origin::generator_seed : Origin::generator_branch;
            for (size_t t = 0; t < draft.me.size(); ++t) {
                convo.steps.push_back(Step::me(draft.me[t]));
                if (t < draft.bot.size()) convo.steps.push_back(Step::bot(draft.bot[t]));
            }
            out.push_back(std::move(convo));
        }
    }
    return result;
}

// Write the suite as tests/<seed>/<index>.convo.txt with origin headers.
inline void write_generated(const GenerationResult& result, const std::filesystem::path& dir) {
    for (const auto& [seed_name, convos] : result.tests) {
        for (size_t i = 0; i < convos.size(); ++i) {
            char idx[8];
            std::snprintf(idx, sizeof(idx), "%03zu", i);
            save_convo(convos[i], dir / seed_name / (std::string(idx) + ".convo.txt"));
        }
    }
}

}  // namespace convogen
