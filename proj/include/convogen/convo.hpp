#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "convogen/errors.hpp"
#include "convogen/text.hpp"

namespace convogen {

enum class Origin { seedgen, generator_seed, generator_branch };

inline std::string to_string(Origin o) {
    switch (o) {
        case Origin::seedgen: return "seedgen";
        case Origin::generator_seed: return "generator-seed";
        case Origin::generator_branch: return "generator-branch";
    }
    return "seedgen";
}

inline Origin origin_from_string(const std::string& s) {
    if (s == "generator-seed") return Origin::generator_seed;
    if (s == "generator-branch") return Origin::generator_branch;
    if (s == "seedgen") return Origin::seedgen;
    throw FormatError(1, "unknown origin '" + s + "'");
}

// One conversation script: strictly alternating user (#me) and expected bot
// (#bot) steps, always starting with #me.
struct Step {
    enum class Kind { me, bot };
    Kind kind = Kind::me;
    std::string text;
    bool operator==(const Step&) const = default;

    static Step me(std::string t) { return {Kind::me, std::move(t)}; }
    static Step bot(std::string t) { return {Kind::bot, std::move(t)}; }
};

struct Convo {
    std::string name;
    std::vector<Step> steps;
    bool seed = true;
    Origin origin = Origin::seedgen;
    bool unreachable = false;       // no static intent chain establishes the input contexts
    bool oracle_unresolved = false; // a bot step kept an unresolvable placeholder
    bool operator==(const Convo&) const = default;

    std::vector<std::string> me_texts() const {
        std::vector<std::string> out;
        for (const auto& s : steps)
            if (s.kind == Step::Kind::me) out.push_back(s.text);
        return out;
    }
    std::vector<std::string> bot_texts() const {
        std::vector<std::string> out;
        for (const auto& s : steps)
            if (s.kind == Step::Kind::bot) out.push_back(s.text);
        return out;
    }
};

// Parse a `.convo.txt` file. The optional metadata header is a leading
// comment line "-- origin: <o> seed=<b> [unreachable=true] [oracle-unresolved=true]";
// the first following non-empty line is the convo name, then "#me"/"#bot"
// blocks in strict alternation.
inline Convo parse_convo(const std::string& content) {
    auto lines = text::split_lines(content);
    Convo convo;
    size_t i = 0;

    // Metadata header, ignored when absent.
    while (i < lines.size() && text::starts_with(lines[i], "--")) {
        std::string header = text::trim(lines[i].substr(2));
        std::istringstream in(header);
        std::string word;
        while (in >> word) {
            auto take = [&](const std::string& key) -> std::optional<std::string> {
                if (text::starts_with(word, key + "=")) return word.substr(key.size() + 1);
                return std::nullopt;
            };
            if (word == "origin:") {
                std::string value;
                if (in >> value) convo.origin = origin_from_string(value);
            } else if (auto v = take("seed")) {
                convo.seed = (*v == "true");
            } else if (auto v = take("unreachable")) {
                convo.unreachable = (*v == "true");
            } else if (auto v = take("oracle-unresolved")) {
                convo.oracle_unresolved = (*v == "true");
            }
        }
        ++i;
    }

    while (i < lines.size() && text::trim(lines[i]).empty()) ++i;
    if (i == lines.size()) throw FormatError(static_cast<int>(lines.size()), "missing convo name");
    if (text::starts_with(text::trim(lines[i]), "#"))
        throw FormatError(static_cast<int>(i + 1), "expected convo name before any #me/#bot tag");
    convo.name = text::trim(lines[i]);
    ++i;

    Step::Kind expected = Step::Kind::me;
    while (i < lines.size()) {
        const std::string line = text::trim(lines[i]);
        if (line.empty()) {
            ++i;
            continue;
        }
        int tag_line = static_cast<int>(i + 1);
        if (!text::starts_with(line, "#")) throw FormatError(tag_line, "expected #me or #bot tag");
        Step::Kind kind;
        if (line == "#me")
            kind = Step::Kind::me;
        else if (line == "#bot")
            kind = Step::Kind::bot;
        else
            throw FormatError(tag_line, "unknown tag '" + line + "'");
        if (kind != expected)
            throw FormatError(tag_line, std::string("expected ") +
                                             (expected == Step::Kind::me ? "#me" : "#bot") + " but found " + line);

        ++i;
        std::vector<std::string> block;
        while (i < lines.size() && !text::starts_with(text::trim(lines[i]), "#")) {
            block.push_back(lines[i]);
            ++i;
        }
        std::string body = text::trim(text::join(block, "\n"));
        if (body.empty()) throw FormatError(tag_line, "empty block");
        convo.steps.push_back({kind, body});
        expected = (expected == Step::Kind::me) ? Step::Kind::bot : Step::Kind::me;
    }

    if (convo.steps.empty()) throw FormatError(static_cast<int>(lines.size()), "convo has no steps");
    return convo;
}

// Canonical form: header (when not a plain seedgen seed), name, blank line,
// then per step the tag line, the text, a blank line; LF endings.
inline std::string serialize_convo(const Convo& convo) {
    std::string out;
    out += "-- origin: " + to_string(convo.origin) + " seed=" + (convo.seed ? "true" : "false");
    if (convo.unreachable) out += " unreachable=true";
    if (convo.oracle_unresolved) out += " oracle-unresolved=true";
    out += "\n";
    out += convo.name + "\n\n";
    for (size_t i = 0; i < convo.steps.size(); ++i) {
        const Step& step = convo.steps[i];
        out += (step.kind == Step::Kind::me) ? "#me\n" : "#bot\n";
        out += step.text + "\n";
        if (i + 1 < convo.steps.size()) out += "\n";
    }
    return out;
}

inline Convo load_convo(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError(0, "cannot read convo file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_convo(buf.str());
    } catch (const FormatError& e) {
        throw FormatError(e.line, path.string() + ": " + e.what());
    }
}

inline void save_convo(const Convo& convo, const std::filesystem::path& path) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError(0, "cannot write convo file '" + path.string() + "'");
    out << serialize_convo(convo);
}

// Load every *.convo.txt under `dir` (recursive), sorted by path so suite
// order is stable.
inline std::vector<Convo> load_convo_dir(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> paths;
    if (std::filesystem::exists(dir))
        for (const auto& entry : std::filesystem::recursive_directory_iterator(dir))
            if (entry.is_regular_file() && entry.path().string().ends_with(".convo.txt"))
                paths.push_back(entry.path());
    std::sort(paths.begin(), paths.end());
    std::vector<Convo> convos;
    for (const auto& p : paths) convos.push_back(load_convo(p));
    return convos;
}

}  // namespace convogen
