#pragma once

// In-memory episode service behind the HTTP API. Handlers take and return
// JSON so they can be exercised without a socket; mount() wires them to an
// httplib server.

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>

#include "json.hpp"
#include "pack3d/env.hpp"
#include "pack3d/policy.hpp"

namespace httplib {
class Server;
}

namespace pack3d::service {

using nlohmann::json;

struct Response {
  int status = 200;
  json body;
};

struct ServiceConfig {
  std::string policy = "greedy";
  int k = 1;
  StabilityMode mode = StabilityMode::kFullTree;
  PolicyOptions policy_options;
  BinConfig bin{10, 10, 10, 1.0};
};

/// Episode payload: height map and masks are X-major (outer index x).
json state_json(const Episode& episode);

class Service {
 public:
  explicit Service(ServiceConfig config = {}) : config_(std::move(config)) {}

  /// Body: {"dist": "rs"|"cut1"|"cut2", "seed"?, "bin"?: "LxWxH"} or
  /// {"sequence": [{"l","w","h","mass"?}, ...], "bin"?}, plus optional
  /// "k" and "policy".
  Response create_episode(const json& body);
  Response get_episode(const std::string& id) const;
  /// Body: {"x","y","o", "item"?} where "item" is a lookahead offset.
  Response place(const std::string& id, const json& body);
  Response suggest(const std::string& id);
  Response ai_step(const std::string& id);

  void mount(httplib::Server& server);

  [[nodiscard]] std::size_t episode_count() const;

 private:
  struct Entry {
    mutable std::shared_mutex mutex;
    std::unique_ptr<Episode> episode;
    std::unique_ptr<Policy> policy;
  };

  std::shared_ptr<Entry> find(const std::string& id) const;
  static Response decide(Entry& entry, PolicyDecision* out);

  ServiceConfig config_;
  mutable std::shared_mutex map_mutex_;
  std::map<std::string, std::shared_ptr<Entry>> episodes_;
  std::atomic<unsigned long long> next_id_{1};
};

}  // namespace pack3d::service
