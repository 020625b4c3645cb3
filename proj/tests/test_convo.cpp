#include <doctest.h>

#include "convogen/convo.hpp"
#include "helpers.hpp"

using namespace convogen;

TEST_CASE("parse_convo reads the greeting example") {
    Convo convo = parse_convo("greet\n\n#me\nhello\n\n#bot\nHi! I'm your room booking bot.");
    CHECK(convo.name == "greet");
    REQUIRE(convo.steps.size() == 2);
    CHECK(convo.steps[0] == Step::me("hello"));
    CHECK(convo.steps[1] == Step::bot("Hi! I'm your room booking bot."));
    CHECK(convo.seed);  // headerless files default to seed
    CHECK(convo.origin == Origin::seedgen);
}

TEST_CASE("a #bot tag before any #me is rejected with its line") {
    try {
        parse_convo("greet\n\n#bot\nHi!\n");
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(e.line == 3);
    }
}

TEST_CASE("unknown tags and empty blocks are format errors") {
    CHECK_THROWS_AS(parse_convo("t\n\n#me\nhi\n\n#robot\nx\n"), FormatError);
    CHECK_THROWS_AS(parse_convo("t\n\n#me\n\n#bot\nx\n"), FormatError);
    CHECK_THROWS_AS(parse_convo("t\n\n#me\nhi\n\n#me\nagain\n"), FormatError);
    CHECK_THROWS_AS(parse_convo(""), FormatError);
    CHECK_THROWS_AS(parse_convo("name only\n"), FormatError);
}

TEST_CASE("multi-line blocks join with single newlines, trimmed") {
    Convo convo = parse_convo("t\n\n#me\n  line one  \nline two\n\n#bot\nok\n");
    CHECK(convo.steps[0].text == "line one  \nline two");
}

TEST_CASE("metadata header round trips origin and flags") {
    Convo convo;
    convo.name = "meta";
    convo.steps = {Step::me("a"), Step::bot("b")};
    convo.seed = false;
    convo.origin = Origin::generator_branch;
    convo.unreachable = true;
    convo.oracle_unresolved = true;
    Convo back = parse_convo(serialize_convo(convo));
    CHECK(back == convo);
}

TEST_CASE("serialize emits the canonical layout") {
    Convo convo;
    convo.name = "greet";
    convo.steps = {Step::me("hello"), Step::bot("Hi there.")};
    CHECK(serialize_convo(convo) ==
          "-- origin: seedgen seed=true\n"
          "greet\n"
          "\n"
          "#me\n"
          "hello\n"
          "\n"
          "#bot\n"
          "Hi there.\n");
}

TEST_CASE("parse then serialize is the identity on canonical files") {
    for (uint64_t seed = 1; seed <= 200; ++seed) {
        helpers::ModelGen gen(seed);
        std::string file = serialize_convo(gen.convo());
        CHECK(serialize_convo(parse_convo(file)) == file);
    }
}

TEST_CASE("serialize then parse is the identity on random convos") {
    for (uint64_t seed = 1; seed <= 200; ++seed) {
        helpers::ModelGen gen(seed);
        Convo convo = gen.convo();
        CHECK(parse_convo(serialize_convo(convo)) == convo);
    }
}

TEST_CASE("save/load roundtrip through the filesystem") {
    helpers::TempDir dir("convo");
    helpers::ModelGen gen(7);
    Convo convo = gen.convo();
    save_convo(convo, dir.path / "x.convo.txt");
    CHECK(load_convo(dir.path / "x.convo.txt") == convo);
}

TEST_CASE("load_convo_dir walks recursively in sorted order") {
    helpers::TempDir dir("suite");
    Convo a;
    a.name = "alpha";
    a.steps = {Step::me("x"), Step::bot("y")};
    Convo b = a;
    b.name = "beta";
    save_convo(b, dir.path / "sub" / "b.convo.txt");
    save_convo(a, dir.path / "a.convo.txt");
    auto convos = load_convo_dir(dir.path);
    REQUIRE(convos.size() == 2);
    CHECK(convos[0].name == "alpha");
    CHECK(convos[1].name == "beta");
    CHECK(load_convo_dir(dir.path / "missing").empty());
}
