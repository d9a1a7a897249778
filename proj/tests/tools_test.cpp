// SPDX-License-Identifier: Apache-2.0
#include "toolcache/tools.hpp"

#include <gtest/gtest.h>

using namespace toolcache;

namespace {

struct Fixture : ::testing::Test {
  UniverseConfig config;
  Database db;
  LatencyModel latency;
  MetadataCache cache{5, EvictionPolicy::lru()};
  Registry registry = registry_default();
  EpisodeContext ctx;

  void SetUp() override {
    config.datasets = {"xview1", "fair1m"};
    config.years = {2021, 2022};
    config.min_records = 12;
    config.max_records = 18;
    config.seed = 3;
    db = generate_universe(config);
    latency.jitter_fraction = 0.0;
    ctx.db = &db;
    ctx.cache = &cache;
    ctx.latency = &latency;
    ctx.rng.seed(11);
  }

  ToolResult run(const std::string& name, json args) {
    return registry.execute({"call_0", name, std::move(args)}, ctx);
  }
};

TEST_F(Fixture, DefaultRegistryContainsCacheAndDataTools) {
  EXPECT_TRUE(registry.has("load_db"));
  EXPECT_TRUE(registry.has("read_cache"));
  EXPECT_TRUE(registry.has("detect_objects"));
  EXPECT_TRUE(registry.has("classify_landcover"));
  EXPECT_TRUE(registry.has("answer_vqa"));
  EXPECT_TRUE(registry.has("plot_images"));
  EXPECT_GE(registry.specs().size(), 6u);
  for (const auto& spec : registry.specs()) {
    EXPECT_NO_THROW(registry.spec(spec.name));
  }
}

TEST_F(Fixture, DuplicateRegistrationRejected) {
  EXPECT_THROW(registry.add({"load_db", "again", {}}, [](const json&, EpisodeContext&) {
    return ToolResult::success({}, 0.0);
  }),
               RegistryError);
}

TEST_F(Fixture, WireFormatMatchesChatCompletionsLayout) {
  json wire = registry.wire_tools();
  ASSERT_GE(wire.size(), 6u);
  const json& first = wire[0];
  EXPECT_EQ(first["type"], "function");
  EXPECT_EQ(first["function"]["name"], "load_db");
  EXPECT_EQ(first["function"]["parameters"]["type"], "object");
  EXPECT_TRUE(first["function"]["parameters"]["properties"].contains("key"));
  EXPECT_EQ(first["function"]["parameters"]["required"][0], "key");
  // array params carry items
  for (const auto& t : wire) {
    if (t["function"]["name"] == "detect_objects") {
      EXPECT_EQ(t["function"]["parameters"]["properties"]["keys"]["type"], "array");
      EXPECT_EQ(t["function"]["parameters"]["properties"]["keys"]["items"]["type"], "string");
    }
  }
}

TEST_F(Fixture, LoadDbBringsTableIntoContextWithoutTouchingCache) {
  auto r = run("load_db", {{"key", "xview1-2022"}});
  ASSERT_TRUE(r.ok()) << r.message;
  EXPECT_DOUBLE_EQ(r.elapsed, 1.0);
  EXPECT_TRUE(ctx.has_loaded(CacheKey::parse("xview1-2022")));
  EXPECT_EQ(cache.size(), 0u);  // loads never auto-insert
}

TEST_F(Fixture, ReadCacheHitAndMiss) {
  auto table = db.find(CacheKey::parse("xview1-2022"));
  cache.put(CacheKey::parse("xview1-2022"), table, table->size_bytes);

  auto hit = run("read_cache", {{"key", "xview1-2022"}});
  ASSERT_TRUE(hit.ok());
  EXPECT_DOUBLE_EQ(hit.elapsed, 1.0 / 7.5);
  EXPECT_TRUE(ctx.has_loaded(CacheKey::parse("xview1-2022")));

  auto miss = run("read_cache", {{"key", "fair1m-2022"}});
  EXPECT_FALSE(miss.ok());
  EXPECT_EQ(miss.message, "cache miss: fair1m-2022");
}

TEST_F(Fixture, LoadDbUnknownKeyFailsAsToolResult) {
  auto r = run("load_db", {{"key", "unknown-1999"}});
  EXPECT_FALSE(r.ok());
  EXPECT_EQ(r.message, "key not found: unknown-1999");
}

TEST_F(Fixture, UnknownToolAndBadArgumentsFailSoftly) {
  auto r = run("nonexistent_tool", {});
  EXPECT_FALSE(r.ok());
  EXPECT_NE(r.message.find("unknown tool"), std::string::npos);

  r = run("load_db", {{"wrong", 1}});
  EXPECT_FALSE(r.ok());
  EXPECT_NE(r.message.find("invalid arguments"), std::string::npos);

  r = run("detect_objects", {{"keys", "not-an-array"}, {"object_class", "ship"}});
  EXPECT_FALSE(r.ok());

  r = run("load_db", {{"key", "xview1-2022"}, {"extra", true}});
  EXPECT_FALSE(r.ok());
  EXPECT_NE(r.message.find("unknown argument"), std::string::npos);
}

TEST_F(Fixture, DetectObjectsMatchesGroundTruthSums) {
  ASSERT_TRUE(run("load_db", {{"key", "xview1-2022"}}).ok());
  ASSERT_TRUE(run("load_db", {{"key", "fair1m-2021"}}).ok());

  auto r = run("detect_objects", {{"keys", {"xview1-2022", "fair1m-2021"}}, {"object_class", "airplane"}});
  ASSERT_TRUE(r.ok()) << r.message;

  std::uint64_t expected = 0;
  for (const auto& key : {"xview1-2022", "fair1m-2021"}) {
    for (const auto& rec : db.find(CacheKey::parse(key))->records) {
      for (const auto& d : rec.detections) {
        if (d.class_label == "airplane") expected += d.count;
      }
    }
  }
  EXPECT_EQ(r.payload["count"].get<std::uint64_t>(), expected);
  EXPECT_DOUBLE_EQ(r.elapsed, 1.3);
}

TEST_F(Fixture, AnalyticsRequireLoadedData) {
  auto r = run("plot_images", {{"keys", {"xview1-2022"}}});
  EXPECT_FALSE(r.ok());
  EXPECT_EQ(r.message, "data not loaded: xview1-2022");

  ASSERT_TRUE(run("load_db", {{"key", "xview1-2022"}}).ok());
  r = run("plot_images", {{"keys", {"xview1-2022"}}});
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r.payload["plotted"].get<std::size_t>(),
            db.find(CacheKey::parse("xview1-2022"))->records.size());
}

TEST_F(Fixture, VqaAnswersAreDeterministic) {
  ASSERT_TRUE(run("load_db", {{"key", "fair1m-2022"}}).ok());
  auto r1 = run("answer_vqa", {{"keys", {"fair1m-2022"}},
                               {"question", "How many ship are visible in the fair1m images from 2022?"}});
  auto r2 = run("answer_vqa", {{"keys", {"fair1m-2022"}},
                               {"question", "How many ship are visible in the fair1m images from 2022?"}});
  ASSERT_TRUE(r1.ok());
  EXPECT_EQ(r1.payload["answer"], r2.payload["answer"]);
  const std::string answer = r1.payload["answer"].get<std::string>();
  EXPECT_NE(answer.find("ship"), std::string::npos);
  EXPECT_NE(answer.find("fair1m-2022"), std::string::npos);
}

TEST_F(Fixture, ElapsedComesFromLatencyModel) {
  ASSERT_TRUE(run("load_db", {{"key", "xview1-2021"}}).ok());
  auto lcc = run("classify_landcover", {{"keys", {"xview1-2021"}}});
  ASSERT_TRUE(lcc.ok());
  EXPECT_DOUBLE_EQ(lcc.elapsed, 1.1);
  auto vqa = run("answer_vqa", {{"keys", {"xview1-2021"}}, {"question", "How many images?"}});
  ASSERT_TRUE(vqa.ok());
  EXPECT_DOUBLE_EQ(vqa.elapsed, 1.2);
}

}  // namespace
