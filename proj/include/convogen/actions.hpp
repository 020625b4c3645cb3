#pragma once

#include <cmath>
#include <cstdio>
#include <map>
#include <string>

#include "convogen/simulator.hpp"

namespace convogen {

// Handlers backing the bundled example agents. Each one is deterministic and
// keeps its state in the session's store namespace, so the cleaner can fully
// reset it between tests.
namespace actions {

inline std::string fill_or(const std::map<std::string, Extraction>& fills, const std::string& key,
                           const std::string& def = "") {
    auto it = fills.find(key);
    return it == fills.end() ? def : it->second.value;
}

// DMV appointment desk: the first booking for a (date, time) slot succeeds,
// a second attempt for the same slot is refused until the store is cleaned.
inline ActionHandler check_slot() {
    return [](const std::map<std::string, Extraction>& fills, ActionContext& ctx) {
        std::string key = "appointment:" + fill_or(fills, "date") + "T" + fill_or(fills, "time");
        std::map<std::string, std::string> out;
        if (ctx.get(key)) {
            out["result"] = "I'm sorry, there are no slots available";
        } else {
            ctx.put(key, fill_or(fills, "service", "unspecified"));
            out["result"] = "Yes It is fine!";
        }
        return out;
    };
}

// First half of the currency conversion: remember what is being converted.
// The bundled phrases are dollar-denominated, so the source code is USD.
inline ActionHandler stash_conversion() {
    return [](const std::map<std::string, Extraction>& fills, ActionContext& ctx) {
        ctx.put("conversion:amount", fill_or(fills, "amount"));
        ctx.put("conversion:from", "USD");
        return std::map<std::string, std::string>{};
    };
}

inline const std::map<std::string, std::string>& currency_codes() {
    static const std::map<std::string, std::string> codes = {
        {"Euros", "EUR"}, {"Dollars", "USD"}, {"Pounds", "GBP"}};
    return codes;
}

// Rates are scaled by 10^4 and applied with integer-free formatting so the
// reply text is stable: 30 USD -> 27.642 EUR.
inline const std::map<std::string, double>& currency_rates() {
    static const std::map<std::string, double> rates = {
        {"USD:EUR", 0.9214}, {"USD:GBP", 0.7901}, {"USD:USD", 1.0},
        {"EUR:USD", 1.0853}, {"GBP:USD", 1.2657}};
    return rates;
}

inline std::string format_amount(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", value);
    std::string s = buf;
    while (!s.empty() && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
}

inline ActionHandler convert_currency() {
    return [](const std::map<std::string, Extraction>& fills, ActionContext& ctx) {
        std::map<std::string, std::string> out;
        auto amount_text = ctx.get("conversion:amount");
        auto from_code = ctx.get("conversion:from");
        std::string to_name = fill_or(fills, "currency_to");
        auto code_it = currency_codes().find(to_name);
        if (!amount_text || !from_code || code_it == currency_codes().end()) {
            out["from"] = "your amount";
            out["result"] = "unknown";
            out["to"] = "the requested currency";
            return out;
        }
        std::string to_code = code_it->second;
        double amount = std::strtod(amount_text->c_str(), nullptr);
        auto rate_it = currency_rates().find(*from_code + ":" + to_code);
        double rate = rate_it == currency_rates().end() ? 1.0 : rate_it->second;
        out["from"] = *amount_text + *from_code;
        out["result"] = format_amount(amount * rate);
        out["to"] = to_code;
        return out;
    };
}

// Room reservation desk: one booking per (date, room type); cancellation
// removes the most recent booking in the namespace.
inline ActionHandler book_room() {
    return [](const std::map<std::string, Extraction>& fills, ActionContext& ctx) {
        std::string room = fill_or(fills, "room_type");
        std::string date = fill_or(fills, "date");
        std::string key = "room:" + date + ":" + room;
        std::map<std::string, std::string> out;
        if (ctx.get(key)) {
            out["summary"] = "Unfortunately the " + room + " room is already reserved for " + date + ".";
        } else {
            ctx.put(key, room + " " + date);
            out["summary"] = "I reserved the " + room + " room for " + date + ".";
        }
        return out;
    };
}

inline ActionHandler cancel_booking() {
    return [](const std::map<std::string, Extraction>&, ActionContext& ctx) {
        std::map<std::string, std::string> out;
        auto items = ctx.items();
        for (auto it = items.rbegin(); it != items.rend(); ++it) {
            if (it->key.rfind("room:", 0) == 0) {
                ctx.erase(it->key);
                size_t date_begin = 5;
                size_t date_end = it->key.find(':', date_begin);
                out["note"] = "Your reservation for " + it->key.substr(date_begin, date_end - date_begin) +
                              " has been cancelled.";
                return out;
            }
        }
        out["note"] = "I could not find a reservation to cancel.";
        return out;
    };
}

}  // namespace actions

// Registry with every handler the bundled agents reference.
inline ActionRegistry builtin_actions() {
    ActionRegistry registry;
    registry.register_action("check_slot", actions::check_slot());
    registry.register_action("stash_conversion", actions::stash_conversion());
    registry.register_action("convert_currency", actions::convert_currency());
    registry.register_action("book_room", actions::book_room());
    registry.register_action("cancel_booking", actions::cancel_booking());
    return registry;
}

}  // namespace convogen
