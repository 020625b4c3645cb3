#include <doctest.h>

#include "convogen/actions.hpp"
#include "convogen/simulator.hpp"
#include "helpers.hpp"

using namespace convogen;

namespace {

std::vector<std::string> transcript(Session& session, const std::vector<std::string>& msgs) {
    std::vector<std::string> out;
    for (const auto& msg : msgs) out.push_back(session.send_message(msg).text);
    return out;
}

}  // namespace

TEST_CASE("open_session starts with no contexts or pending slot") {
    auto agent = helpers::dmv();
    auto actions = builtin_actions();
    PersistenceStore store;
    Session session = open_session(agent, actions, store, 7);
    CHECK(session.active_contexts().empty());
    CHECK(session.turn_counter() == 0);
}

TEST_CASE("two sessions from the same agent get distinct namespaces") {
    auto agent = helpers::dmv();
    auto actions = builtin_actions();
    PersistenceStore store;
    Session a = open_session(agent, actions, store, 7);
    Session b = open_session(agent, actions, store, 7);
    CHECK(a.store_namespace() != b.store_namespace());
}

TEST_CASE("same seed in seeded-random mode replays identically") {
    auto agent = helpers::rooms();
    auto actions = builtin_actions();
    std::vector<std::string> msgs = {"hello", "hi there", "hello", "good morning", "hello"};
    PersistenceStore store;
    Session a = open_session(agent, actions, store, 7, SimMode::seeded_random);
    Session b = open_session(agent, actions, store, 7, SimMode::seeded_random);
    CHECK(transcript(a, msgs) == transcript(b, msgs));
}

TEST_CASE("the dmv slot-filling exchange follows the appointment figure") {
    auto agent = helpers::dmv();
    auto actions = builtin_actions();
    PersistenceStore store;
    Session session = open_session(agent, actions, store, 0);

    BotReply prompt = session.send_message("I would like to set an appointment for 3pm on Tuesday");
    CHECK(prompt.is_prompt);
    CHECK(prompt.matched_intent == "ScheduleAppointment");
    CHECK(prompt.text.find("What services are you looking to get? DMV offers Driver license and vehicle "
                           "registration services.") != std::string::npos);
    CHECK(prompt.text.find("@AppointmentType") != std::string::npos);
    REQUIRE(prompt.extracted.count("time"));
    CHECK(prompt.extracted.at("time").value == "15:00");
    REQUIRE(prompt.extracted.count("date"));
    CHECK(prompt.extracted.at("date").value == "2024-05-07");

    BotReply done = session.send_message("Driver License");
    CHECK_FALSE(done.is_prompt);
    CHECK(done.matched_intent == "ScheduleAppointment");
    CHECK(done.text == "Let me see if we can fit you in on 2024-05-07 at 15:00! Yes It is fine!");
    REQUIRE(done.extracted.count("service"));
    CHECK(done.extracted.at("service").value == "driver license");
}

TEST_CASE("gibberish with no pending slot falls back") {
    auto agent = helpers::dmv();
    auto actions = builtin_actions();
    PersistenceStore store;
    Session session = open_session(agent, actions, store, 0);
    BotReply reply = session.send_message("xyzzy");
    CHECK(reply.matched_intent == "fallback");
    CHECK(reply.text == "I missed what you said. What was that?");
    CHECK_FALSE(reply.is_prompt);
}

TEST_CASE("a context-gated intent cannot open a conversation") {
    auto agent = helpers::currency();
    auto actions = builtin_actions();
    PersistenceStore store;
    Session session = open_session(agent, actions, store, 0);
    BotReply reply = session.send_message("now into Euros");
    CHECK(reply.matched_intent == "fallback");
    CHECK(reply.text == "Invalid currency conversion parameters");
}

TEST_CASE("the currency conversation reproduces the converter figure") {
    auto agent = helpers::currency();
    auto actions = builtin_actions();
    PersistenceStore store;
    Session session = open_session(agent, actions, store, 0);

    BotReply first = session.send_message("Convert 30 Dollars");
    CHECK(first.matched_intent == "Convert");
    CHECK(first.text == "What is the currency-to?");
    CHECK(session.active_contexts().count("conversion"));

    BotReply second = session.send_message("now into Euros");
    CHECK(second.matched_intent == "ConvertTo");
    CHECK(second.text == "At the moment 30USD are 27.642EUR");
}

TEST_CASE("the currency handler returns the converted amount as its result key") {
    auto actions = builtin_actions();
    PersistenceStore store;
    auto agent = helpers::currency();
    Session session(agent, actions, store, SessionOptions{0, SimMode::deterministic, "probe"});
    session.send_message("Convert 30 Dollars");

    std::map<std::string, Extraction> fills{{"currency_to", {"Currency", "Euros"}}};
    ActionContext ctx{store, "probe", session};
    auto result = (*actions.find("convert_currency"))(fills, ctx);
    CHECK(result.at("result") == "27.642");
    CHECK(result.at("from") == "30USD");
    CHECK(result.at("to") == "EUR");
}

TEST_CASE("check_slot books once then refuses the same slot") {
    auto actions = builtin_actions();
    PersistenceStore store;
    auto agent = helpers::dmv();
    Session session(agent, actions, store, SessionOptions{0, SimMode::deterministic, "probe"});
    std::map<std::string, Extraction> fills{{"date", {"sys.date", "2024-05-07"}},
                                            {"time", {"sys.time", "15:00"}},
                                            {"service", {"AppointmentType", "driver license"}}};
    ActionContext ctx{store, "probe", session};
    auto first = (*actions.find("check_slot"))(fills, ctx);
    CHECK(first.at("result") == "Yes It is fine!");
    auto second = (*actions.find("check_slot"))(fills, ctx);
    CHECK(second.at("result") == "I'm sorry, there are no slots available");
}

TEST_CASE("registering a duplicate handler id fails") {
    ActionRegistry registry;
    registry.register_action("x", [](const auto&, auto&) { return std::map<std::string, std::string>{}; });
    CHECK_THROWS_AS(
        registry.register_action("x", [](const auto&, auto&) { return std::map<std::string, std::string>{}; }),
        DuplicateHandler);
}

TEST_CASE("an agent naming an unregistered action cannot open a session") {
    auto agent = helpers::dmv();
    ActionRegistry empty;
    PersistenceStore store;
    CHECK_THROWS_AS(open_session(agent, empty, store, 0), UnknownAction);
}

TEST_CASE("deterministic mode yields byte-identical transcripts") {
    auto agent = helpers::rooms();
    auto actions = builtin_actions();
    std::vector<std::string> msgs = {"hello", "I would like to book a room", "small",
                                     "Tuesday", "cancel my reservation", "what rooms do you have"};
    PersistenceStore store;
    Session a = open_session(agent, actions, store, 1);
    Session b = open_session(agent, actions, store, 99);  // seed ignored in deterministic mode
    CHECK(transcript(a, msgs) == transcript(b, msgs));
}

TEST_CASE("send_message never errors on arbitrary text") {
    auto agent = helpers::currency();
    auto actions = builtin_actions();
    PersistenceStore store;
    Session session = open_session(agent, actions, store, 3);
    std::mt19937_64 rng(11);
    for (int i = 0; i < 200; ++i) {
        std::string msg;
        int len = 1 + rng() % 8;
        for (int w = 0; w < len; ++w) msg += std::string(1 + rng() % 6, static_cast<char>('a' + rng() % 26)) + " ";
        CHECK_NOTHROW(session.send_message(msg));
    }
}

TEST_CASE("slot filling answers exactly the missing parameters") {
    auto agent = helpers::rooms();
    auto actions = builtin_actions();
    PersistenceStore store;
    Session session = open_session(agent, actions, store, 0);
    // Two required parameters, none pre-filled: two prompts, then completion.
    BotReply p1 = session.send_message("I would like to book a room");
    CHECK(p1.is_prompt);
    CHECK(p1.text.find("@RoomType") != std::string::npos);
    BotReply p2 = session.send_message("medium");
    CHECK(p2.is_prompt);
    CHECK(p2.text.find("@sys.date") != std::string::npos);
    BotReply done = session.send_message("2024-06-03");
    CHECK_FALSE(done.is_prompt);
    CHECK(done.text == "Great choice! I reserved the medium room for 2024-06-03.");
}

TEST_CASE("an invalid slot answer falls back and keeps the slot pending") {
    auto agent = helpers::rooms();
    auto actions = builtin_actions();
    PersistenceStore store;
    Session session = open_session(agent, actions, store, 0);
    session.send_message("I would like to book a room");
    BotReply oops = session.send_message("a ballroom please");
    CHECK(oops.matched_intent == "fallback");
    BotReply retry = session.send_message("large");
    CHECK(retry.is_prompt);
    CHECK(retry.matched_intent == "BookRoom");
}

TEST_CASE("a full-match interrupts slot filling") {
    auto agent = helpers::rooms();
    auto actions = builtin_actions();
    PersistenceStore store;
    Session session = open_session(agent, actions, store, 0);
    session.send_message("I would like to book a room");
    BotReply reply = session.send_message("what rooms do you have");
    CHECK(reply.matched_intent == "ListRooms");
}

TEST_CASE("context lifespans age per completed exchange") {
    auto agent = helpers::currency();
    auto actions = builtin_actions();
    PersistenceStore store;
    Session session = open_session(agent, actions, store, 0);
    session.send_message("Convert 30 Dollars");  // conversion lifespan 2
    session.send_message("xyzzy");               // fallback completion ages it to 1
    BotReply still = session.send_message("now into Pounds");
    CHECK(still.matched_intent == "ConvertTo");  // matched before its own decrement

    Session fresh = open_session(agent, actions, store, 0);
    fresh.send_message("Convert 30 Dollars");
    fresh.send_message("xyzzy");
    fresh.send_message("xyzzy");  // lifespan hits 0
    BotReply gone = fresh.send_message("now into Pounds");
    CHECK(gone.matched_intent == "fallback");
}

TEST_CASE("intent selection prefers literal length, then priority, then name") {
    AgentDefinition agent;
    agent.name = "tie";
    Intent shorter;
    shorter.name = "Shorter";
    shorter.priority = 500000;
    shorter.training_phrases.push_back({{PhrasePart::literal("book it")}});
    shorter.responses.push_back({{"short"}});
    Intent longer;
    longer.name = "ZLonger";
    longer.priority = 250000;
    longer.training_phrases.push_back({{PhrasePart::literal("book it now")}});
    longer.responses.push_back({{"long"}});
    Intent rival;
    rival.name = "Rival";
    rival.priority = 750000;
    rival.training_phrases.push_back({{PhrasePart::literal("book it")}});
    rival.responses.push_back({{"rival"}});
    agent.intents = {shorter, longer, rival};
    agent.intents.push_back(helpers::fallback_intent());
    validate_agent(agent);

    auto actions = builtin_actions();
    PersistenceStore store;
    Session session = open_session(agent, actions, store, 0);
    // Longest literal wins even at lower priority.
    CHECK(session.send_message("book it now").matched_intent == "ZLonger");
    // Equal literals: higher priority wins.
    CHECK(session.send_message("book it").matched_intent == "Rival");

    agent.intents[2].priority = 500000;  // tie on priority too: lexicographic name
    Session tie = open_session(agent, actions, store, 0);
    CHECK(tie.send_message("book it").matched_intent == "Rival");
}

TEST_CASE("store namespaces are isolated") {
    PersistenceStore store;
    store.put("ns-a", "k", "1");
    CHECK(store.items("ns-b").empty());
    CHECK(store.get("ns-b", "k") == std::nullopt);
    store.put("ns-b", "k", "2");
    CHECK(store.get("ns-a", "k") == "1");
    CHECK(store.get("ns-b", "k") == "2");
    store.erase_all("ns-a");
    CHECK(store.items("ns-a").empty());
    CHECK(store.get("ns-b", "k") == "2");
}

TEST_CASE("store enumeration preserves insertion order") {
    PersistenceStore store;
    store.put("ns", "b", "1");
    store.put("ns", "a", "2");
    store.put("ns", "c", "3");
    auto items = store.items("ns");
    REQUIRE(items.size() == 3);
    CHECK(items[0].key == "b");
    CHECK(items[1].key == "a");
    CHECK(items[2].key == "c");
}

TEST_CASE("a closed session rejects messages") {
    auto agent = helpers::tiny_agent();
    ActionRegistry actions;
    PersistenceStore store;
    Session session = open_session(agent, actions, store, 0);
    session.close();
    CHECK_THROWS_AS(session.send_message("hello"), SessionClosed);
}

TEST_CASE("system entity parsing covers the documented forms") {
    CHECK(parse_system_value("sys.number", "30") == "30");
    CHECK(parse_system_value("sys.number", "-2.5") == "-2.5");
    CHECK(parse_system_value("sys.number", "+7") == "7");
    CHECK(parse_system_value("sys.number", "7.") == std::nullopt);
    CHECK(parse_system_value("sys.number", "abc") == std::nullopt);

    CHECK(parse_system_value("sys.date", "2024-05-07") == "2024-05-07");
    CHECK(parse_system_value("sys.date", "Tuesday") == "2024-05-07");
    CHECK(parse_system_value("sys.date", "wednesday") == "2024-05-08");
    CHECK(parse_system_value("sys.date", "2024-13-01") == std::nullopt);
    CHECK(parse_system_value("sys.date", "someday") == std::nullopt);

    CHECK(parse_system_value("sys.time", "3pm") == "15:00");
    CHECK(parse_system_value("sys.time", "3:30pm") == "15:30");
    CHECK(parse_system_value("sys.time", "3 pm") == "15:00");
    CHECK(parse_system_value("sys.time", "15:00") == "15:00");
    CHECK(parse_system_value("sys.time", "12am") == "00:00");
    CHECK(parse_system_value("sys.time", "12pm") == "12:00");
    CHECK(parse_system_value("sys.time", "25:00") == std::nullopt);
    CHECK(parse_system_value("sys.time", "15") == std::nullopt);

    CHECK(parse_system_value("sys.any", "whatever you like") == "whatever you like");
    CHECK(parse_system_value("sys.any", "  ") == std::nullopt);
}
