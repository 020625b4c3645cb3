#include <doctest.h>

#include "convogen/agent.hpp"
#include "helpers.hpp"

using namespace convogen;

TEST_CASE("load_agent reads the bundled dmv agent") {
    AgentDefinition agent = helpers::dmv();
    CHECK(agent.name == "dmv-scheduler");
    CHECK(agent.intents.size() == 3);
    CHECK(agent.entities.size() == 1);
    CHECK(agent.entities[0].name == "AppointmentType");
    REQUIRE(agent.entities[0].values.size() == 2);
    CHECK(agent.entities[0].values[0].canonical == "driver license");
    CHECK(agent.entities[0].values[1].canonical == "vehicle registration");
    REQUIRE(agent.find_intent("Welcome") != nullptr);
    REQUIRE(agent.find_intent("ScheduleAppointment") != nullptr);
    REQUIRE(agent.fallback() != nullptr);
    CHECK(agent.fallback()->name == "Fallback");
    CHECK(agent.non_fallback_count() == 2);
}

TEST_CASE("agent without intents fails validation naming the fallback") {
    CHECK_THROWS_WITH_AS(parse_agent(R"({"name":"empty","entities":[],"intents":[]})"),
                         doctest::Contains("no fallback intent"), ValidationError);
}

TEST_CASE("dangling entity reference names the entity") {
    std::string doc = R"({
      "name": "bad",
      "entities": [],
      "intents": [
        {"name": "Paint", "training_phrases": ["paint it"],
         "parameters": [{"name": "color", "entity": "Color", "required": false, "prompts": []}],
         "responses": [["ok"]]},
        {"name": "Fallback", "is_fallback": true, "responses": [["what"]]}
      ]
    })";
    CHECK_THROWS_WITH_AS(parse_agent(doc), doctest::Contains("Color"), ValidationError);
}

TEST_CASE("unknown top-level keys are rejected") {
    CHECK_THROWS_AS(parse_agent(R"({"name":"x","intents":[],"surprise":1})"), ParseError);
}

TEST_CASE("malformed json reports a line locus") {
    CHECK_THROWS_WITH_AS(parse_agent("{\n  \"name\": \"x\",\n  oops\n}"), doctest::Contains("line 3"),
                         ParseError);
}

TEST_CASE("unreadable path raises ParseError") {
    CHECK_THROWS_AS(load_agent("/nonexistent/missing.agent.json"), ParseError);
}

TEST_CASE("validation catches the documented shape errors") {
    AgentDefinition agent = helpers::tiny_agent();

    SUBCASE("two fallbacks") {
        agent.intents.push_back(helpers::fallback_intent());
        agent.intents.back().name = "Fallback2";
        CHECK_THROWS_AS(validate_agent(agent), ValidationError);
        CHECK_NOTHROW(validate_agent(agent, Strictness::lenient));
    }
    SUBCASE("required parameter without prompt") {
        agent.entities.push_back({"Thing", {{"one", {}}}});
        agent.intents[0].parameters.push_back({"thing", "Thing", true, {}});
        CHECK_THROWS_WITH_AS(validate_agent(agent), doctest::Contains("thing"), ValidationError);
    }
    SUBCASE("prompt without the @entity reference") {
        agent.entities.push_back({"Thing", {{"one", {}}}});
        agent.intents[0].parameters.push_back({"thing", "Thing", true, {"Pick one."}});
        CHECK_THROWS_WITH_AS(validate_agent(agent), doctest::Contains("@Thing"), ValidationError);
    }
    SUBCASE("optional parameter with prompts") {
        agent.entities.push_back({"Thing", {{"one", {}}}});
        agent.intents[0].parameters.push_back({"thing", "Thing", false, {"Pick one. @Thing"}});
        CHECK_THROWS_AS(validate_agent(agent), ValidationError);
    }
    SUBCASE("% placeholder without an action") {
        agent.intents[0].responses[0].variants[0] = "done %result";
        CHECK_THROWS_WITH_AS(validate_agent(agent), doctest::Contains("%result"), ValidationError);
    }
    SUBCASE("$ placeholder naming no parameter") {
        agent.intents[0].responses[0].variants[0] = "done $ghost";
        CHECK_THROWS_WITH_AS(validate_agent(agent), doctest::Contains("$ghost"), ValidationError);
    }
    SUBCASE("fallback with training phrases") {
        agent.intents[1].training_phrases.push_back({{PhrasePart::literal("nope")}});
        CHECK_THROWS_AS(validate_agent(agent), ValidationError);
    }
    SUBCASE("lifespan below one") {
        agent.intents[0].output_contexts.push_back({"ctx", 0});
        CHECK_THROWS_AS(validate_agent(agent), ValidationError);
    }
    SUBCASE("duplicate intent names") {
        agent.intents.push_back(agent.intents[0]);
        CHECK_THROWS_WITH_AS(validate_agent(agent), doctest::Contains("Greet"), ValidationError);
    }
    SUBCASE("slot naming no parameter") {
        agent.intents[0].training_phrases.push_back({{PhrasePart::slot("ghost")}});
        CHECK_THROWS_WITH_AS(validate_agent(agent), doctest::Contains("ghost"), ValidationError);
    }
}

TEST_CASE("adjacent literals are merged on load") {
    std::string doc = R"({
      "name": "merge",
      "intents": [
        {"name": "Say", "training_phrases": [[{"text": "a "}, {"text": "b"}]], "responses": [["ok"]]},
        {"name": "Fallback", "is_fallback": true, "responses": [["what"]]}
      ]
    })";
    AgentDefinition agent = parse_agent(doc);
    REQUIRE(agent.intents[0].training_phrases[0].parts.size() == 1);
    CHECK(agent.intents[0].training_phrases[0].parts[0].text == "a b");
}

TEST_CASE("plain string training phrases load as single literals") {
    AgentDefinition agent = helpers::rooms();
    const Intent* welcome = agent.find_intent("Welcome");
    REQUIRE(welcome != nullptr);
    REQUIRE(welcome->training_phrases[0].parts.size() == 1);
    CHECK(welcome->training_phrases[0].parts[0].kind == PhrasePart::Kind::literal);
    CHECK(welcome->training_phrases[0].parts[0].text == "hello");
}

TEST_CASE("render_phrase concatenates literals and fills") {
    TrainingPhrase phrase{{PhrasePart::literal("Convert "), PhrasePart::slot("amount"),
                           PhrasePart::literal(" Dollars")}};
    CHECK(render_phrase(phrase, {{"amount", "30"}}) == "Convert 30 Dollars");
}

TEST_CASE("render_phrase with one literal and no fills is the identity") {
    TrainingPhrase phrase{{PhrasePart::literal("just text")}};
    CHECK(render_phrase(phrase, {}) == "just text");
}

TEST_CASE("render_phrase reports the missing slot") {
    TrainingPhrase phrase{{PhrasePart::literal("Convert "), PhrasePart::slot("amount")}};
    try {
        render_phrase(phrase, {});
        FAIL("expected MissingFill");
    } catch (const MissingFill& e) {
        CHECK(e.parameter == "amount");
    }
}

TEST_CASE("render_phrase output is single-space normalized") {
    TrainingPhrase phrase{{PhrasePart::literal("  a  "), PhrasePart::slot("x"), PhrasePart::literal("  b ")}};
    CHECK(render_phrase(phrase, {{"x", " y "}}) == "a y b");
}

TEST_CASE("save/load round trip is the identity on random agents") {
    for (uint64_t seed = 1; seed <= 200; ++seed) {
        helpers::ModelGen gen(seed);
        AgentDefinition agent = gen.agent();
        AgentDefinition reloaded = parse_agent(save_agent(agent));
        REQUIRE(reloaded == agent);
    }
}

TEST_CASE("bundled agents survive the save/load round trip") {
    for (const auto& agent : {helpers::dmv(), helpers::currency(), helpers::rooms()})
        CHECK(parse_agent(save_agent(agent)) == agent);
}
