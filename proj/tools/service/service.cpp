#include "service.hpp"

#include "httplib.h"
#include "pack3d/error.hpp"

namespace pack3d::service {

namespace {

Response error(int status, const std::string& message) {
  return Response{status, json{{"error", message}}};
}

json grid_json(const HeightMap& h) {
  json rows = json::array();
  for (int x = 0; x < h.length(); ++x) {
    json row = json::array();
    for (int y = 0; y < h.width(); ++y) row.push_back(h.at(x, y));
    rows.push_back(std::move(row));
  }
  return rows;
}

json mask_json(const FeasibilityMask& m) {
  json rows = json::array();
  for (int x = 0; x < m.length; ++x) {
    json row = json::array();
    for (int y = 0; y < m.width; ++y) row.push_back(m.at(x, y) ? 1 : 0);
    rows.push_back(std::move(row));
  }
  return rows;
}

ItemSequence sequence_from_json(const json& items, const BinConfig& bin) {
  if (!items.is_array()) throw InvalidSequence("sequence must be an array");
  ItemSequence seq;
  seq.provenance = Provenance::kCustom;
  seq.bin = bin;
  int id = 0;
  for (const json& it : items) {
    const Dims d{it.at("l").get<int>(), it.at("w").get<int>(), it.at("h").get<int>()};
    Item item = Item::with_unit_density(id++, d);
    if (it.contains("mass")) item.mass = it.at("mass").get<double>();
    seq.items.push_back(item);
  }
  return seq;
}

}  // namespace

json state_json(const Episode& ep) {
  json lookahead = json::array();
  for (const Item& it : ep.lookahead()) {
    lookahead.push_back({{"id", it.id}, {"l", it.dims.l}, {"w", it.dims.w}, {"h", it.dims.h},
                         {"mass", it.mass}});
  }
  const EpisodeMetrics m = ep.metrics();
  return json{{"bin", {{"L", ep.bin().length}, {"W", ep.bin().width}, {"H", ep.bin().height}}},
              {"height_map", grid_json(ep.state().hmap())},
              {"lookahead", std::move(lookahead)},
              {"masks", json::array({mask_json(ep.mask(Orientation::kAsIs)),
                                     mask_json(ep.mask(Orientation::kSwapped))})},
              {"metrics", {{"utilization", m.utilization},
                           {"item_count", m.item_count},
                           {"total_reward", m.total_reward},
                           {"refused", m.refused},
                           {"v_safe", ep.v_safe()}}},
              {"cursor", ep.cursor()},
              {"k", ep.k()},
              {"done", ep.done()}};
}

std::shared_ptr<Service::Entry> Service::find(const std::string& id) const {
  std::shared_lock lock(map_mutex_);
  const auto it = episodes_.find(id);
  return it == episodes_.end() ? nullptr : it->second;
}

std::size_t Service::episode_count() const {
  std::shared_lock lock(map_mutex_);
  return episodes_.size();
}

Response Service::create_episode(const json& body) {
  try {
    if (!body.is_object()) return error(400, "body must be an object");
    const BinConfig bin = body.contains("bin") ? parse_bin(body.at("bin").get<std::string>())
                                               : config_.bin;
    const int k = body.value("k", config_.k);
    const std::string policy_name = body.value("policy", config_.policy);
    if (k < 1) return error(400, "k must be positive");

    ItemSequence seq;
    if (body.contains("sequence")) {
      seq = sequence_from_json(body.at("sequence"), bin);
    } else {
      const Provenance dist = provenance_from_string(body.value("dist", std::string("rs")));
      if (dist == Provenance::kCustom) return error(400, "dist must be rs, cut1 or cut2");
      const auto seed = body.value("seed", std::uint64_t{1});
      seq = generate(ItemRegistry::default_for(bin), bin, seed, dist);
    }

    auto entry = std::make_shared<Entry>();
    PolicyOptions popts = config_.policy_options;
    entry->policy = make_policy(policy_name, popts);
    entry->episode = std::make_unique<Episode>(bin, std::move(seq), k, config_.mode,
                                               RewardParams{}, entry->policy->reorders());
    const std::string id = std::to_string(next_id_.fetch_add(1));
    json state = state_json(*entry->episode);
    {
      std::unique_lock lock(map_mutex_);
      episodes_.emplace(id, std::move(entry));
    }
    return Response{201, json{{"episode_id", id}, {"state", std::move(state)}}};
  } catch (const json::exception& e) {
    return error(400, e.what());
  } catch (const Error& e) {
    return error(400, e.what());
  }
}

Response Service::get_episode(const std::string& id) const {
  const auto entry = find(id);
  if (!entry) return error(404, "no episode " + id);
  std::shared_lock lock(entry->mutex);
  return Response{200, state_json(*entry->episode)};
}

Response Service::place(const std::string& id, const json& body) {
  const auto entry = find(id);
  if (!entry) return error(404, "no episode " + id);
  int x = 0;
  int y = 0;
  int o = 0;
  int offset = 0;
  try {
    x = body.at("x").get<int>();
    y = body.at("y").get<int>();
    o = body.at("o").get<int>();
    offset = body.value("item", 0);
  } catch (const json::exception& e) {
    return error(400, e.what());
  }
  if (o != 0 && o != 1) return error(400, "o must be 0 or 1");
  std::unique_lock lock(entry->mutex);
  Episode& ep = *entry->episode;
  if (ep.done()) return error(409, "episode is done");
  try {
    const StepResult r = ep.step_item(offset, Action{x, y, orientation_from_int(o)});
    return Response{200, json{{"accepted", r.accepted},
                              {"reward", r.reward},
                              {"state", state_json(ep)}}};
  } catch (const Error& e) {
    return error(400, e.what());
  }
}

Response Service::decide(Entry& entry, PolicyDecision* out) {
  try {
    *out = entry.policy->decide(*entry.episode);
    return Response{};
  } catch (const NoFeasible& e) {
    return error(409, e.what());
  }
}

Response Service::suggest(const std::string& id) {
  const auto entry = find(id);
  if (!entry) return error(404, "no episode " + id);
  // Policies carry RNG state, so deciding is a mutation.
  std::unique_lock lock(entry->mutex);
  if (entry->episode->done()) return error(409, "episode is done");
  PolicyDecision d;
  if (Response r = decide(*entry, &d); r.status != 200) return r;
  return Response{200, json{{"x", d.action.x},
                            {"y", d.action.y},
                            {"o", to_int(d.action.o)},
                            {"item", d.item_offset},
                            {"score", d.score}}};
}

Response Service::ai_step(const std::string& id) {
  const auto entry = find(id);
  if (!entry) return error(404, "no episode " + id);
  std::unique_lock lock(entry->mutex);
  Episode& ep = *entry->episode;
  if (ep.done()) return error(409, "episode is done");
  PolicyDecision d;
  if (Response r = decide(*entry, &d); r.status != 200) return r;
  const StepResult r = ep.step_item(d.item_offset, d.action);
  return Response{200, json{{"action", {{"x", d.action.x},
                                        {"y", d.action.y},
                                        {"o", to_int(d.action.o)},
                                        {"item", d.item_offset},
                                        {"score", d.score}}},
                            {"accepted", r.accepted},
                            {"reward", r.reward},
                            {"state", state_json(ep)}}};
}

void Service::mount(httplib::Server& server) {
  auto send = [](httplib::Response& res, const Response& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  auto parse = [](const httplib::Request& req, json* out) {
    if (req.body.empty()) {
      *out = json::object();
      return true;
    }
    *out = json::parse(req.body, nullptr, false);
    return !out->is_discarded();
  };

  server.Post("/episodes", [this, send, parse](const httplib::Request& req, httplib::Response& res) {
    json body;
    if (!parse(req, &body)) return send(res, error(400, "malformed JSON"));
    send(res, create_episode(body));
  });
  server.Get(R"(/episodes/([^/]+))", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, get_episode(req.matches[1]));
  });
  server.Post(R"(/episodes/([^/]+)/place)",
              [this, send, parse](const httplib::Request& req, httplib::Response& res) {
                json body;
                if (!parse(req, &body)) return send(res, error(400, "malformed JSON"));
                send(res, place(req.matches[1], body));
              });
  server.Get(R"(/episodes/([^/]+)/suggest)",
             [this, send](const httplib::Request& req, httplib::Response& res) {
               send(res, suggest(req.matches[1]));
             });
  server.Post(R"(/episodes/([^/]+)/ai-step)",
              [this, send](const httplib::Request& req, httplib::Response& res) {
                send(res, ai_step(req.matches[1]));
              });
  // The browser client is served from another origin during development.
  server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
    res.status = 204;
  });
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Headers", "Content-Type"},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
}

}  // namespace pack3d::service
