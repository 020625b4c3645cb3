#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "convogen/errors.hpp"
#include "convogen/simulator.hpp"

namespace convogen {

// Connection between one test and the bot service: a live session plus the
// store namespace backing it.
struct Connection {
    std::unique_ptr<Session> session;
    PersistenceStore* store = nullptr;
    std::string ns;
};

// How to reach the chatbot deployment and what to wipe after a test. The
// item_filter is "all" (default) or "key-prefix:<p>".
struct CleaningRoutine {
    std::string service_id = "local-sim";
    std::map<std::string, std::string> connect_params;
    std::string item_filter = "all";

    std::string param(const std::string& key, const std::string& def = "") const {
        auto it = connect_params.find(key);
        return it == connect_params.end() ? def : it->second;
    }
};

using ConnectorFactory = std::function<Connection(const CleaningRoutine&)>;

// Connector factories by service id. The local simulator is registered by
// the caller with the agent, actions and store it should serve; the registry
// keeps the interface open for other back ends.
class ConnectorRegistry {
  public:
    void register_connector(const std::string& service_id, ConnectorFactory factory) {
        factories_[service_id] = std::move(factory);
    }
    const ConnectorFactory* find(const std::string& service_id) const {
        auto it = factories_.find(service_id);
        return it == factories_.end() ? nullptr : &it->second;
    }

  private:
    std::map<std::string, ConnectorFactory> factories_;
};

// Factory for the bundled local simulator service. Recognized connect
// params: "mode" (deterministic | seeded-random), "seed", "namespace".
inline ConnectorFactory local_sim_connector(const AgentDefinition& agent, const ActionRegistry& actions,
                                            PersistenceStore& store) {
    return [&agent, &actions, &store](const CleaningRoutine& cr) {
        SessionOptions opts;
        opts.mode = cr.param("mode", "deterministic") == "seeded-random" ? SimMode::seeded_random
                                                                         : SimMode::deterministic;
        opts.seed = std::strtoull(cr.param("seed", "0").c_str(), nullptr, 10);
        opts.ns = cr.param("namespace");
        Connection conn;
        conn.session = std::make_unique<Session>(agent, actions, store, opts);
        conn.store = &store;
        conn.ns = conn.session->store_namespace();
        return conn;
    };
}

// One set_up/tear_down pair per test run. set_up opens the connection,
// tear_down deletes the items selected by the routine's filter and closes;
// tearing down a never-opened cleaner is a no-op.
class Cleaner {
  public:
    Cleaner(const ConnectorRegistry& registry, CleaningRoutine routine)
        : registry_(&registry), routine_(std::move(routine)) {}

    const CleaningRoutine& routine() const { return routine_; }
    bool open() const { return conn_.has_value(); }

    Connection& set_up() {
        if (conn_) throw ConnectError("already open");
        const ConnectorFactory* factory = registry_->find(routine_.service_id);
        if (!factory) throw ConnectError(routine_.service_id);
        conn_ = (*factory)(routine_);
        return *conn_;
    }

    void tear_down() {
        if (!conn_) return;
        if (conn_->store) {
            if (routine_.item_filter == "all" || routine_.item_filter.empty()) {
                conn_->store->erase_all(conn_->ns);
            } else if (routine_.item_filter.rfind("key-prefix:", 0) == 0) {
                std::string prefix = routine_.item_filter.substr(11);
                conn_->store->erase_if(conn_->ns, [&](const StoreItem& item) {
                    return item.key.rfind(prefix, 0) == 0;
                });
            }
        }
        if (conn_->session) conn_->session->close();
        conn_.reset();
    }

  private:
    const ConnectorRegistry* registry_;
    CleaningRoutine routine_;
    std::optional<Connection> conn_;
};

// Ready-to-use environment bundling agent, actions, store, registry and a
// routine pointed at the local simulator.
struct SimEnvironment {
    const AgentDefinition* agent = nullptr;
    const ActionRegistry* actions = nullptr;
    PersistenceStore* store = nullptr;
    ConnectorRegistry registry;
    CleaningRoutine routine;

    SimEnvironment(const AgentDefinition& agent_, const ActionRegistry& actions_, PersistenceStore& store_,
                   SimMode mode = SimMode::deterministic, uint64_t seed = 0)
        : agent(&agent_), actions(&actions_), store(&store_) {
        registry.register_connector("local-sim", local_sim_connector(agent_, actions_, store_));
        routine.service_id = "local-sim";
        routine.connect_params["mode"] = mode == SimMode::seeded_random ? "seeded-random" : "deterministic";
        routine.connect_params["seed"] = std::to_string(seed);
    }
};

}  // namespace convogen
