#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "convogen/errors.hpp"

namespace convogen {

struct StoreItem {
    std::string key;
    std::string payload;
    bool operator==(const StoreItem&) const = default;
};

// Namespaced sets of opaque items; enumeration order is insertion order.
// Items from one namespace are invisible to every other. Optionally backed
// by one JSON file per namespace under `root`.
class PersistenceStore {
  public:
    PersistenceStore() = default;
    explicit PersistenceStore(std::filesystem::path root) : root_(std::move(root)) {
        std::filesystem::create_directories(root_);
    }

    void put(const std::string& ns, const std::string& key, const std::string& payload) {
        std::lock_guard lock(mu_);
        auto& items = load_locked(ns);
        for (auto& item : items) {
            if (item.key == key) {
                item.payload = payload;
                persist_locked(ns);
                return;
            }
        }
        items.push_back({key, payload});
        persist_locked(ns);
    }

    std::optional<std::string> get(const std::string& ns, const std::string& key) {
        std::lock_guard lock(mu_);
        for (const auto& item : load_locked(ns))
            if (item.key == key) return item.payload;
        return std::nullopt;
    }

    std::vector<StoreItem> items(const std::string& ns) {
        std::lock_guard lock(mu_);
        return load_locked(ns);
    }

    bool erase(const std::string& ns, const std::string& key) {
        std::lock_guard lock(mu_);
        auto& items = load_locked(ns);
        for (auto it = items.begin(); it != items.end(); ++it) {
            if (it->key == key) {
                items.erase(it);
                persist_locked(ns);
                return true;
            }
        }
        return false;
    }

    template <typename Pred>
    size_t erase_if(const std::string& ns, Pred&& pred) {
        std::lock_guard lock(mu_);
        auto& items = load_locked(ns);
        size_t before = items.size();
        items.erase(std::remove_if(items.begin(), items.end(), pred), items.end());
        persist_locked(ns);
        return before - items.size();
    }

    // Drop the whole namespace; the backing file, if any, is removed.
    size_t erase_all(const std::string& ns) {
        std::lock_guard lock(mu_);
        size_t n = load_locked(ns).size();
        data_.erase(ns);
        if (!root_.empty()) std::filesystem::remove(file_for(ns));
        return n;
    }

    // Fresh namespace ids for sessions that did not pin one.
    std::string fresh_namespace(const std::string& prefix) {
        std::lock_guard lock(mu_);
        return prefix + "-" + std::to_string(++counter_);
    }

    bool file_backed() const { return !root_.empty(); }
    std::filesystem::path file_for(const std::string& ns) const {
        std::string safe;
        for (char c : ns) safe += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.') ? c : '_';
        return root_ / (safe + ".store.json");
    }

  private:
    std::vector<StoreItem>& load_locked(const std::string& ns) {
        auto it = data_.find(ns);
        if (it != data_.end()) return it->second;
        auto& items = data_[ns];
        if (!root_.empty()) {
            std::ifstream in(file_for(ns), std::ios::binary);
            if (in) {
                nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
                if (doc.is_array())
                    for (const auto& j : doc)
                        items.push_back({j.value("key", ""), j.value("payload", "")});
            }
        }
        return items;
    }

    // Write-temp-then-rename keeps the namespace file atomic.
    void persist_locked(const std::string& ns) {
        if (root_.empty()) return;
        nlohmann::json doc = nlohmann::json::array();
        for (const auto& item : data_[ns]) doc.push_back({{"key", item.key}, {"payload", item.payload}});
        auto path = file_for(ns);
        auto tmp = path;
        tmp += ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary);
            out << doc.dump(2) << "\n";
        }
        std::filesystem::rename(tmp, path);
    }

    std::filesystem::path root_;
    std::map<std::string, std::vector<StoreItem>> data_;
    std::mutex mu_;
    uint64_t counter_ = 0;
};

}  // namespace convogen
