#pragma once

#include <array>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "convogen/text.hpp"

namespace convogen {

// Built-in system entities. User agents may reference sys.number, sys.date
// and sys.time; sys.any exists so mutated agents with deleted entities still
// load (a slot that accepts any text).
inline const std::vector<std::string>& system_entity_names() {
    static const std::vector<std::string> names = {"sys.number", "sys.date", "sys.time", "sys.any"};
    return names;
}

inline bool is_system_entity(std::string_view name) {
    for (const auto& n : system_entity_names())
        if (n == name) return true;
    return false;
}

namespace sysent {

// All date words resolve against a fixed reference day so transcripts are
// reproducible: 2024-05-01 is a Wednesday, so "Tuesday" -> 2024-05-07.
constexpr int kRefYear = 2024, kRefMonth = 5, kRefDay = 1;
constexpr int kRefWeekday = 3;  // 1 = Monday .. 7 = Sunday

inline std::optional<std::string> parse_number(std::string_view raw) {
    std::string s = text::trim(raw);
    if (s.empty()) return std::nullopt;
    size_t i = 0;
    if (s[i] == '+' || s[i] == '-') ++i;
    size_t digits = 0, dots = 0;
    bool digit_after_dot = false;
    for (; i < s.size(); ++i) {
        if (s[i] >= '0' && s[i] <= '9') {
            ++digits;
            if (dots) digit_after_dot = true;
        } else if (s[i] == '.') {
            if (++dots > 1) return std::nullopt;
        } else {
            return std::nullopt;
        }
    }
    if (digits == 0 || (dots == 1 && !digit_after_dot)) return std::nullopt;
    if (s[0] == '+') s.erase(0, 1);
    return s;
}

inline int days_in_month(int year, int month) {
    static constexpr std::array<int, 12> d = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (month == 2 && (year % 4 == 0 && (year % 100 != 0 || year % 400 == 0))) return 29;
    return d[month - 1];
}

inline std::optional<int> weekday_index(std::string_view word) {
    static constexpr std::array<std::string_view, 7> names = {
        "monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday"};
    std::string w = text::to_lower(word);
    for (size_t i = 0; i < names.size(); ++i)
        if (w == names[i]) return static_cast<int>(i) + 1;
    return std::nullopt;
}

inline std::string format_date(int y, int m, int d) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, d);
    return buf;
}

// ISO yyyy-mm-dd, or a weekday word resolved to the next such day strictly
// after the reference date. Canonical form is always ISO.
inline std::optional<std::string> parse_date(std::string_view raw) {
    std::string s = text::trim(raw);
    if (auto wd = weekday_index(s)) {
        int ahead = (*wd - kRefWeekday + 7) % 7;
        if (ahead == 0) ahead = 7;
        int y = kRefYear, m = kRefMonth, d = kRefDay + ahead;
        while (d > days_in_month(y, m)) {
            d -= days_in_month(y, m);
            if (++m > 12) m = 1, ++y;
        }
        return format_date(y, m, d);
    }
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
    for (size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
        if (s[i] < '0' || s[i] > '9') return std::nullopt;
    int y = std::stoi(s.substr(0, 4)), m = std::stoi(s.substr(5, 2)), d = std::stoi(s.substr(8, 2));
    if (m < 1 || m > 12 || d < 1 || d > days_in_month(y, m)) return std::nullopt;
    return s;
}

// "h[h]:mm", "3pm", "3:30pm", "3 pm". Canonical form is 24h "HH:MM".
inline std::optional<std::string> parse_time(std::string_view raw) {
    std::string s = text::to_lower(text::collapse_ws(raw));
    int suffix = 0;  // 0 none, 1 am, 2 pm
    auto chop = [&](std::string_view tail, int kind) {
        if (s.size() < tail.size()) return;
        if (s.compare(s.size() - tail.size(), tail.size(), tail) == 0) {
            suffix = kind;
            s.erase(s.size() - tail.size());
            while (!s.empty() && s.back() == ' ') s.pop_back();
        }
    };
    chop("am", 1);
    if (suffix == 0) chop("pm", 2);
    if (s.empty()) return std::nullopt;
    int hours = 0, minutes = 0;
    size_t colon = s.find(':');
    auto all_digits = [](std::string_view v) {
        return !v.empty() && v.size() <= 2 &&
               std::all_of(v.begin(), v.end(), [](char c) { return c >= '0' && c <= '9'; });
    };
    if (colon != std::string::npos) {
        std::string h = s.substr(0, colon), m = s.substr(colon + 1);
        if (!all_digits(h) || m.size() != 2 || !all_digits(m)) return std::nullopt;
        hours = std::stoi(h);
        minutes = std::stoi(m);
    } else {
        if (!all_digits(s)) return std::nullopt;
        if (suffix == 0) return std::nullopt;  // bare "15" is a number, not a time
        hours = std::stoi(s);
    }
    if (minutes > 59) return std::nullopt;
    if (suffix != 0) {
        if (hours < 1 || hours > 12) return std::nullopt;
        if (suffix == 1) hours = (hours == 12) ? 0 : hours;
        if (suffix == 2) hours = (hours == 12) ? 12 : hours + 12;
    } else if (hours > 23) {
        return std::nullopt;
    }
    char buf[8];
    std::snprintf(buf, sizeof(buf), "%02d:%02d", hours, minutes);
    return buf;
}

}  // namespace sysent

// Parse `raw` as a value of the given system entity; returns the canonical
// spelling used for extraction and placeholder interpolation.
inline std::optional<std::string> parse_system_value(std::string_view entity, std::string_view raw) {
    if (entity == "sys.number") return sysent::parse_number(raw);
    if (entity == "sys.date") return sysent::parse_date(raw);
    if (entity == "sys.time") return sysent::parse_time(raw);
    if (entity == "sys.any") {
        std::string t = text::collapse_ws(raw);
        if (t.empty()) return std::nullopt;
        return t;
    }
    return std::nullopt;
}

// Representative values used when a slot must be filled without runtime
// information (seed generation, expansion of system-entity prompts).
inline std::vector<std::string> system_entity_samples(std::string_view entity) {
    if (entity == "sys.number") return {"30"};
    if (entity == "sys.date") return {"Tuesday"};
    if (entity == "sys.time") return {"3pm"};
    if (entity == "sys.any") return {"anything"};
    return {};
}

}  // namespace convogen
