#include <gtest/gtest.h>

#include <thread>

#include "httplib.h"
#include "pack3d/search.hpp"
#include "service.hpp"

using namespace pack3d;
using pack3d::service::json;
using pack3d::service::Service;
using pack3d::service::ServiceConfig;

namespace {

std::string created_id(const pack3d::service::Response& r) {
  EXPECT_EQ(r.status, 201);
  return r.body.at("episode_id").get<std::string>();
}

}  // namespace

TEST(Service, NewEpisodeHasEmptyHeightMap) {
  Service svc;
  const auto r = svc.create_episode(json{{"dist", "rs"}, {"seed", 4}, {"k", 2}});
  const json& st = r.body.at("state");
  ASSERT_EQ(st.at("height_map").size(), 10u);
  for (const json& row : st.at("height_map")) {
    ASSERT_EQ(row.size(), 10u);
    for (const json& h : row) EXPECT_EQ(h.get<int>(), 0);
  }
  EXPECT_EQ(st.at("lookahead").size(), 2u);
  EXPECT_EQ(st.at("masks").size(), 2u);
  EXPECT_FALSE(st.at("done").get<bool>());
  const auto g = svc.get_episode(created_id(r));
  EXPECT_EQ(g.status, 200);
  EXPECT_EQ(g.body, st);
}

TEST(Service, GridsAreXMajor) {
  Service svc;
  const std::string id = created_id(svc.create_episode(
      json{{"bin", "4x3x3"}, {"sequence", json::array({{{"l", 2}, {"w", 1}, {"h", 1}},
                                                       {{"l", 1}, {"w", 1}, {"h", 1}}})}}));
  const auto r = svc.place(id, json{{"x", 2}, {"y", 0}, {"o", 0}});
  ASSERT_TRUE(r.body.at("accepted").get<bool>());
  const json& hm = r.body.at("state").at("height_map");
  ASSERT_EQ(hm.size(), 4u);      // outer index is x
  ASSERT_EQ(hm[0].size(), 3u);   // inner index is y
  EXPECT_EQ(hm[2][0], 1);
  EXPECT_EQ(hm[3][0], 1);
  EXPECT_EQ(hm[0][2], 0);
}

TEST(Service, MaskedOutPlacementIsRefused) {
  Service svc;
  const std::string id = created_id(svc.create_episode(json{{"dist", "rs"}, {"seed", 1}}));
  const auto r = svc.place(id, json{{"x", 9}, {"y", 9}, {"o", 0}});
  ASSERT_EQ(r.status, 200);
  EXPECT_FALSE(r.body.at("accepted").get<bool>());
  EXPECT_EQ(r.body.at("reward").get<double>(), 0.0);
  EXPECT_TRUE(r.body.at("state").at("done").get<bool>());
  EXPECT_EQ(svc.place(id, json{{"x", 0}, {"y", 0}, {"o", 0}}).status, 409);
}

TEST(Service, SuggestIsMaskValid) {
  for (const char* policy : {"random", "greedy", "boundary", "bph", "mcts"}) {
    ServiceConfig cfg;
    cfg.policy_options.mcts_m = 30;
    Service svc(cfg);
    const std::string id =
        created_id(svc.create_episode(json{{"dist", "rs"}, {"seed", 2}, {"k", 2}, {"policy", policy}}));
    for (int step = 0; step < 5; ++step) {
      const auto s = svc.suggest(id);
      ASSERT_EQ(s.status, 200) << policy;
      const json state = svc.get_episode(id).body;
      const int x = s.body.at("x");
      const int y = s.body.at("y");
      const int o = s.body.at("o");
      EXPECT_EQ(state.at("masks")[static_cast<std::size_t>(o)][static_cast<std::size_t>(x)]
                     [static_cast<std::size_t>(y)],
                1)
          << policy;
      const auto a = svc.ai_step(id);
      ASSERT_EQ(a.status, 200);
      EXPECT_TRUE(a.body.at("accepted").get<bool>());
      if (a.body.at("state").at("done").get<bool>()) break;
    }
  }
}

TEST(Service, ErrorsAndUnknownIds) {
  Service svc;
  EXPECT_EQ(svc.get_episode("nope").status, 404);
  EXPECT_EQ(svc.place("nope", json{{"x", 0}, {"y", 0}, {"o", 0}}).status, 404);
  EXPECT_EQ(svc.create_episode(json{{"dist", "weird"}}).status, 400);
  EXPECT_EQ(svc.create_episode(json{{"policy", "nope"}}).status, 400);
  EXPECT_EQ(svc.create_episode(json{{"sequence", json::array({{{"l", 20}, {"w", 1}, {"h", 1}}})}}).status,
            400);
  const std::string id = created_id(svc.create_episode(json::object()));
  EXPECT_EQ(svc.place(id, json{{"x", 0}}).status, 400);
  EXPECT_EQ(svc.place(id, json{{"x", 0}, {"y", 0}, {"o", 3}}).status, 400);
}

TEST(Service, ReplayEqualsLibraryTransitions) {
  // Service state after an action stream equals an Episode driven directly.
  const BinConfig bin{10, 10, 10, 1.0};
  const ItemSequence seq = generate_rs(ItemRegistry::default_for(bin), bin, 8);
  Service svc;
  const std::string id = created_id(svc.create_episode(json{{"dist", "rs"}, {"seed", 8}}));
  Episode ep(bin, seq, 1, StabilityMode::kFullTree);
  GreedyPolicy policy;
  while (!ep.done()) {
    const PolicyDecision d = policy.decide(ep);
    const StepResult lib = ep.step(d.action);
    const auto r = svc.place(id, json{{"x", d.action.x}, {"y", d.action.y}, {"o", to_int(d.action.o)}});
    ASSERT_EQ(r.status, 200);
    EXPECT_EQ(r.body.at("reward").get<double>(), lib.reward);
    EXPECT_EQ(r.body.at("state"), pack3d::service::state_json(ep));
  }
}

TEST(Service, ConcurrentEpisodes) {
  ServiceConfig cfg;
  cfg.policy = "greedy";
  Service svc(cfg);
  std::vector<std::string> ids;
  for (int i = 0; i < 6; ++i) ids.push_back(created_id(svc.create_episode(json{{"seed", i + 1}})));
  std::vector<std::thread> workers;
  for (const std::string& id : ids) {
    workers.emplace_back([&svc, id] {
      for (int s = 0; s < 200; ++s) {
        const auto r = svc.ai_step(id);
        if (r.status != 200 || r.body.at("state").at("done").get<bool>()) break;
        (void)svc.get_episode(id);
      }
    });
  }
  for (std::thread& t : workers) t.join();
  for (const std::string& id : ids) EXPECT_TRUE(svc.get_episode(id).body.at("done").get<bool>());
  EXPECT_EQ(svc.episode_count(), 6u);
}

TEST(Service, OverHttp) {
  Service svc;
  httplib::Server server;
  svc.mount(server);
  const int port = server.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread th([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  httplib::Client cli("127.0.0.1", port);
  auto created = cli.Post("/episodes", R"({"dist":"cut1","seed":3,"k":1})", "application/json");
  ASSERT_TRUE(created);
  EXPECT_EQ(created->status, 201);
  const json body = json::parse(created->body);
  const std::string id = body.at("episode_id");

  auto got = cli.Get("/episodes/" + id);
  ASSERT_TRUE(got);
  EXPECT_EQ(json::parse(got->body), body.at("state"));

  auto sug = cli.Get("/episodes/" + id + "/suggest");
  ASSERT_TRUE(sug);
  const json s = json::parse(sug->body);
  for (const char* key : {"x", "y", "o", "score"}) EXPECT_TRUE(s.contains(key));

  auto placed = cli.Post("/episodes/" + id + "/place", s.dump(), "application/json");
  ASSERT_TRUE(placed);
  EXPECT_TRUE(json::parse(placed->body).at("accepted").get<bool>());

  auto step = cli.Post("/episodes/" + id + "/ai-step", "", "application/json");
  ASSERT_TRUE(step);
  EXPECT_EQ(step->status, 200);
  EXPECT_EQ(json::parse(step->body).at("state").at("metrics").at("item_count"), 2);

  auto bad = cli.Post("/episodes", "{oops", "application/json");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);
  auto missing = cli.Get("/episodes/999");
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 404);

  server.stop();
  th.join();
}
