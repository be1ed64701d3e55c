#include "gm/agent.hpp"
#include "gm/providers.hpp"
#include "gm/tools.hpp"

#include "golden.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <set>

namespace gm::agent {
namespace {

using nlohmann::json;

ToolSignature sig(const std::string& name) {
  for (auto& s : tools::builtin_signatures())
    if (s.name == name) return s;
  throw std::runtime_error("no signature " + name);
}

DesignResource dummy_resource() {
  DesignResource r;
  r.task = DesignTask::layout;
  r.media = MediaKind::layout_dsl;
  r.content = "(C,0,0,1,1,[(G,0,0,1,1,[(title,0,0,1,1)])])";
  return r;
}

/// Returns the queued decisions in order; records what it was shown.
class QueueProvider : public Provider {
 public:
  std::vector<ProviderDecision> queue;
  std::vector<std::vector<Message>> seen;
  std::size_t signature_count = 0;

  ProviderDecision decide(const std::vector<Message>& history, const std::vector<ToolSignature>& s) override {
    seen.push_back(history);
    signature_count = s.size();
    if (queue.empty()) throw Error("Empty", "no decision queued");
    auto d = queue.front();
    queue.erase(queue.begin());
    return d;
  }
};

Conversation ask(const std::string& text) {
  Conversation c;
  c.append({Role::user, text, {}});
  return c;
}

TEST(Registry, KeepsRegistrationOrder) {
  ToolRegistry r;
  r.register_tool(sig("pivot_figure"), [](const ArgMap&, const ToolContext&) { return dummy_resource(); });
  r.register_tool(sig("background_figure"), [](const ArgMap&, const ToolContext&) { return dummy_resource(); });
  EXPECT_EQ(r.names(), (std::vector<std::string>{"pivot_figure", "background_figure"}));
  try {
    r.register_tool(sig("pivot_figure"), [](const ArgMap&, const ToolContext&) { return dummy_resource(); });
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "DuplicateName");
  }
  EXPECT_EQ(r.size(), 2u);
}

TEST(Registry, BuiltinsAreTheSixAgentManagedTools) {
  ToolRegistry r;
  tools::register_builtin_tools(r, tools::Toolkit{});
  EXPECT_EQ(r.names(), (std::vector<std::string>{"pivot_figure", "background_figure", "collect_information",
                                                 "search_icons", "generate_layout", "edit_image"}));
  for (const auto& s : r.signatures()) {
    EXPECT_FALSE(s.description.empty());
    for (const auto& p : s.params) EXPECT_FALSE(p.examples.empty()) << s.name << "." << p.name;
  }
}

TEST(Registry, SignatureRules) {
  ToolSignature s{"t", "d", {ParamSpec{"a", ValueType::string, true, "x", {}, {}}}};
  EXPECT_THROW(check_signature(s), Error);  // no example
  s.params[0].examples = {"v"};
  EXPECT_NO_THROW(check_signature(s));
  s.params.push_back(s.params[0]);
  EXPECT_THROW(check_signature(s), Error);  // duplicate param
  ToolSignature e{"e", "d", {ParamSpec{"k", ValueType::enumeration, false, "x", {"a"}, {}}}};
  EXPECT_THROW(check_signature(e), Error);  // enum without values
  EXPECT_THROW(check_signature(ToolSignature{"", "d", {}}), Error);
}

TEST(Signature, JsonCarriesExamplesAndEnums) {
  const json j = sig("pivot_figure");
  EXPECT_EQ(j["name"], "pivot_figure");
  EXPECT_EQ(j["params"][0]["name"], "caption");
  EXPECT_TRUE(j["params"][0]["examples"].size() >= 1);
  EXPECT_EQ(j["params"][1]["type"], "enum");
  EXPECT_TRUE(j["params"][1].contains("enum"));
}

TEST(ValidateArgs, Examples) {
  const auto pivot = sig("pivot_figure");
  EXPECT_FALSE(validate_args(pivot, {{"caption", "a cute cat"}, {"style", "watercolor"}}));
  EXPECT_EQ(validate_args(pivot, {}), (ArgValidation{"caption", "missing"}));
  EXPECT_EQ(validate_args(pivot, {{"caption", "x"}, {"style", "oilpaint"}}), (ArgValidation{"style", "not-in-enum"}));
  EXPECT_EQ(validate_args(pivot, {{"caption", 3}}), (ArgValidation{"caption", "wrong-type"}));
  EXPECT_EQ(validate_args(pivot, {{"caption", "  "}}), (ArgValidation{"caption", "empty"}));
  EXPECT_EQ(validate_args(pivot, {{"caption", "x"}, {"mood", "happy"}}), (ArgValidation{"mood", "unknown-arg"}));
  EXPECT_FALSE(validate_args(pivot, {{"caption", "x"}, {"seed", "12"}}));
  EXPECT_EQ(validate_args(pivot, {{"caption", "x"}, {"seed", "twelve"}}), (ArgValidation{"seed", "wrong-type"}));
  EXPECT_EQ(validate_args(pivot, {{"caption", "x"}, {"seed", std::numeric_limits<double>::infinity()}}),
            (ArgValidation{"seed", "wrong-type"}));
}

TEST(Dispatch, ChatAppendsAssistantMessage) {
  ToolRegistry r;
  tools::register_builtin_tools(r, tools::Toolkit{});
  QueueProvider p;
  p.queue.push_back(ProviderDecision::chat("Hi there"));
  auto c = ask("hello there");
  const auto out = dispatch(c, r, p);
  EXPECT_FALSE(out.decision.is_tool_call());
  EXPECT_FALSE(out.resource);
  EXPECT_FALSE(out.error);
  ASSERT_EQ(c.messages.size(), 2u);
  EXPECT_EQ(c.messages[1].role, Role::assistant);
  EXPECT_EQ(c.messages[1].text, "Hi there");
  ASSERT_EQ(p.seen.size(), 1u);
  EXPECT_EQ(p.seen[0].size(), 1u);
  EXPECT_EQ(p.signature_count, 6u);
}

TEST(Dispatch, ToolCallProducesResource) {
  ToolRegistry r;
  tools::register_builtin_tools(r, tools::Toolkit{});
  QueueProvider p;
  p.queue.push_back(ProviderDecision::tool("pivot_figure", {{"caption", "a cute cat"}}));
  auto c = ask("draw a cute cat");
  const auto out = dispatch(c, r, p, {CanvasSpec{}, 0, {}});
  ASSERT_TRUE(out.resource);
  EXPECT_FALSE(out.error);
  EXPECT_EQ(out.resource->resource_id, "r0001");
  EXPECT_EQ(out.resource->task, DesignTask::pivot_figure);
  EXPECT_EQ(out.resource->media, MediaKind::png);
  EXPECT_EQ(out.resource->content, "assets/r0001.png");
  EXPECT_FALSE(out.resource->data.empty());
  ASSERT_EQ(c.messages.size(), 2u);
  EXPECT_EQ(c.messages[1].role, Role::tool);
  ASSERT_EQ(c.messages[1].resources.size(), 1u);
  EXPECT_EQ(c.find_resource("r0001")->label, "a cute cat");
}

TEST(Dispatch, UnknownToolDegradesToChat) {
  ToolRegistry r;
  tools::register_builtin_tools(r, tools::Toolkit{});
  QueueProvider p;
  p.queue.push_back(ProviderDecision::tool("paint_wall", {}));
  auto c = ask("paint the wall");
  const auto out = dispatch(c, r, p);
  ASSERT_TRUE(out.error);
  EXPECT_EQ(out.error->code, "UnknownTool");
  EXPECT_FALSE(out.resource);
  EXPECT_EQ(c.messages.back().role, Role::assistant);
}

TEST(Dispatch, ArgValidationRetriesOnceWithReport) {
  ToolRegistry r;
  tools::register_builtin_tools(r, tools::Toolkit{});
  QueueProvider p;
  p.queue.push_back(ProviderDecision::tool("pivot_figure", {{"caption", "x"}, {"style", "oilpaint"}}));
  p.queue.push_back(ProviderDecision::tool("pivot_figure", {{"caption", "x"}, {"style", "watercolor"}}));
  auto c = ask("draw x");
  const auto out = dispatch(c, r, p);
  EXPECT_EQ(out.attempts, 2);
  ASSERT_TRUE(out.resource);
  ASSERT_EQ(p.seen.size(), 2u);
  ASSERT_EQ(p.seen[1].size(), 2u);
  EXPECT_EQ(p.seen[1][1].role, Role::tool);
  EXPECT_NE(p.seen[1][1].text.find("style: not-in-enum"), std::string::npos);
  // the retry note is provider context only
  EXPECT_EQ(c.messages.size(), 2u);
}

TEST(Dispatch, ArgValidationSurfacesAfterRetry) {
  ToolRegistry r;
  tools::register_builtin_tools(r, tools::Toolkit{});
  QueueProvider p;
  p.queue.push_back(ProviderDecision::tool("pivot_figure", {}));
  p.queue.push_back(ProviderDecision::tool("pivot_figure", {{"style", "flat"}}));
  auto c = ask("draw");
  const auto out = dispatch(c, r, p);
  ASSERT_TRUE(out.error);
  EXPECT_EQ(out.error->code, "ArgValidation");
  EXPECT_EQ(out.error->arg, (ArgValidation{"caption", "missing"}));
  EXPECT_EQ(c.messages.size(), 2u);
}

TEST(Dispatch, ExecutorFailureKeepsConversationConsistent) {
  ToolRegistry r;
  tools::register_builtin_tools(r, tools::Toolkit{});
  QueueProvider p;
  p.queue.push_back(ProviderDecision::tool("edit_image", {{"resource_id", "r0042"}, {"instruction", "grayscale"}}));
  auto c = ask("make it grayscale");
  const auto out = dispatch(c, r, p);
  ASSERT_TRUE(out.error);
  EXPECT_EQ(out.error->code, "ToolExecution");
  EXPECT_EQ(c.messages.size(), 2u);
  EXPECT_EQ(c.messages.back().role, Role::assistant);
}

TEST(Dispatch, ProviderFailureIsSurfaced) {
  ToolRegistry r;
  QueueProvider p;
  auto c = ask("anything");
  const auto out = dispatch(c, r, p);
  ASSERT_TRUE(out.error);
  EXPECT_EQ(out.error->code, "ProviderError");
  EXPECT_EQ(c.messages.size(), 2u);
}

TEST(Dispatch, NeedsTrailingUserMessage) {
  ToolRegistry r;
  QueueProvider p;
  Conversation c;
  EXPECT_THROW(dispatch(c, r, p), Error);
}

TEST(Dispatch, DeterministicWithRuleProvider) {
  ToolRegistry r;
  tools::register_builtin_tools(r, tools::Toolkit{});
  auto run = [&] {
    RuleBasedProvider p;
    Conversation c;
    for (const char* t : {"hello there", "an infographic about climate change", "draw a cute cat",
                          "now a background please", "make it grayscale", "Generate a waved layout"}) {
      c.append({Role::user, t, {}});
      dispatch(c, r, p);
    }
    return c;
  };
  EXPECT_EQ(run(), run());
}

// Fuzzed argument maps never reach an executor unless they validate.
TEST(Dispatch, ValidationGateFuzz) {
  std::mt19937_64 rng(1234);
  const auto signatures = tools::builtin_signatures();
  std::vector<std::string> extra{"mood", "colour", "x", ""};
  auto value = [&](const ParamSpec* p) -> json {
    switch (std::uniform_int_distribution<int>(0, 11)(rng)) {
      case 0: return "";
      case 1: return "   ";
      case 2: return "a cute cat";
      case 3: return p && !p->enum_values.empty() ? json(p->enum_values[rng() % p->enum_values.size()]) : json("flat");
      case 4: return 7;
      case 5: return -2.5;
      case 6: return "12";
      case 7: return true;
      case 8: return nullptr;
      case 9: return json::array({1, 2});
      case 10: return std::numeric_limits<double>::quiet_NaN();
      default: return json{{"k", "v"}};
    }
  };
  auto fuzz = [&](const ToolSignature& s) {
    ArgMap args;
    for (const auto& p : s.params)
      if (std::bernoulli_distribution(0.7)(rng)) args[p.name] = value(&p);
    if (std::bernoulli_distribution(0.15)(rng)) args[extra[rng() % extra.size()]] = value(nullptr);
    return args;
  };

  int executed = 0, rejected = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto& s = signatures[static_cast<std::size_t>(i) % signatures.size()];
    std::vector<ArgMap> reached;
    ToolRegistry r;
    r.register_tool(s, [&](const ArgMap& args, const ToolContext&) {
      reached.push_back(args);
      return dummy_resource();
    });
    QueueProvider p;
    const ArgMap first = fuzz(s), second = fuzz(s);
    p.queue.push_back(ProviderDecision::tool(s.name, first));
    p.queue.push_back(ProviderDecision::tool(s.name, second));
    auto c = ask("go");
    const auto out = dispatch(c, r, p);

    const bool first_ok = !validate_args(s, first);
    const bool second_ok = !validate_args(s, second);
    ASSERT_LE(reached.size(), 1u);
    for (const auto& args : reached) ASSERT_FALSE(validate_args(s, args)) << json(args).dump();
    if (first_ok) {
      ASSERT_EQ(reached.size(), 1u);
      ASSERT_EQ(reached[0], first);
    } else if (second_ok) {
      ASSERT_EQ(reached.size(), 1u);
      ASSERT_EQ(reached[0], second);
    } else {
      ASSERT_TRUE(reached.empty());
      ASSERT_TRUE(out.error);
      ASSERT_EQ(out.error->code, "ArgValidation");
    }
    (reached.empty() ? rejected : executed)++;
  }
  EXPECT_GT(executed, 50);
  EXPECT_GT(rejected, 50);
}

TEST(Decision, JsonRoundTrip) {
  const auto d = ProviderDecision::tool("search_icons", {{"keyword", "pyramid"}, {"limit", 3}});
  EXPECT_EQ(json(d).get<ProviderDecision>(), d);
  const auto c = ProviderDecision::chat("hi");
  EXPECT_EQ(json(c).get<ProviderDecision>(), c);
  EXPECT_THROW(json({{"variant", "shout"}}).get<ProviderDecision>(), Error);
}

TEST(Scripted, ReplaysInOrderAndChecksText) {
  std::vector<ScriptedTurn> turns{{"cat", ProviderDecision::chat("meow")}, {"dog", ProviderDecision::chat("woof")}};
  ScriptedProvider p(turns);
  std::vector<Message> h{{Role::user, "a cat", {}}};
  EXPECT_EQ(p.decide(h, {}).chat_text, "meow");
  try {
    p.decide(h, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "FixtureMismatch");
  }
  h.push_back({Role::user, "a dog", {}});
  EXPECT_EQ(p.decide(h, {}).chat_text, "woof");
  EXPECT_EQ(p.remaining(), 0u);
  try {
    p.decide(h, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "FixtureExhausted");
  }
}

TEST(Scripted, FixtureErrors) {
  EXPECT_THROW(parse_fixture(json::object()), Error);
  EXPECT_THROW(parse_fixture(json::array({{{"decision", {{"variant", "chat"}}}}})), Error);
  test::TempDir dir;
  const auto bad = dir.path() / "bad.json";
  write_file_atomic(bad, std::string("[{"));
  EXPECT_THROW(load_fixture(bad.string()), Error);
}

TEST(Golden, TranscriptReplaysExactly) {
  const auto g = test::load_golden();
  ASSERT_EQ(g.user_messages.size(), 10u);
  const auto run = test::replay_golden(g);
  EXPECT_EQ(run.calls, g.expected_calls);
  EXPECT_EQ(run.fixture_remaining, 0u);
  std::vector<std::string> ids, tasks;
  for (const auto& o : run.outcomes) {
    EXPECT_FALSE(o.error) << o.error->message;
    if (o.resource) {
      ids.push_back(o.resource->resource_id);
      tasks.emplace_back(to_string(o.resource->task));
    }
  }
  EXPECT_EQ(ids, g.expected_resource_ids);
  EXPECT_EQ(tasks, g.expected_tasks);
  std::set<std::string> used;
  for (const auto& c : run.calls) used.insert(c.tool_name);
  EXPECT_EQ(used.size(), 6u);
  // the waved layout turn and the cute cat turn
  EXPECT_EQ(run.calls[1].args.at("instruction"), "Generate a waved layout");
  EXPECT_EQ(run.calls[2].args.at("caption"), "a cute cat");
  EXPECT_EQ(run.outcomes[3].attempts, 2);
}

TEST(Golden, ReplayIsDeterministic) {
  const auto g = test::load_golden();
  const auto a = test::replay_golden(g);
  const auto b = test::replay_golden(g);
  EXPECT_EQ(a.conversation, b.conversation);
  for (std::size_t i = 0; i < a.conversation.messages.size(); ++i)
    for (std::size_t k = 0; k < a.conversation.messages[i].resources.size(); ++k)
      EXPECT_EQ(a.conversation.messages[i].resources[k].data, b.conversation.messages[i].resources[k].data);
}

std::vector<Message> history(std::initializer_list<const char*> user_texts) {
  std::vector<Message> h;
  for (const char* t : user_texts) h.push_back({Role::user, t, {}});
  return h;
}

TEST(Rules, CanonicalRequests) {
  RuleBasedProvider p;
  const auto cat = p.decide(history({"draw a cute cat"}), {});
  ASSERT_TRUE(cat.is_tool_call());
  EXPECT_EQ(cat.call.tool_name, "pivot_figure");
  EXPECT_EQ(cat.call.args.at("caption"), "a cute cat");

  EXPECT_FALSE(p.decide(history({"hello there"}), {}).is_tool_call());

  const auto bg =
      p.decide(history({"I want an infographic about the polar bear and climate change", "now a background please"}),
               {});
  EXPECT_EQ(bg.call.tool_name, "background_figure");
  EXPECT_EQ(bg.call.args.at("caption"), "the melting iceberg");

  const auto layout = p.decide(history({"Generate a waved layout"}), {});
  EXPECT_EQ(layout.call.tool_name, "generate_layout");
  EXPECT_EQ(layout.call.args.at("instruction"), "Generate a waved layout");

  const auto icon = p.decide(history({"find an icon for a pyramid"}), {});
  EXPECT_EQ(icon.call.tool_name, "search_icons");
  EXPECT_EQ(icon.call.args.at("keyword"), "pyramid");

  const auto info = p.decide(history({"Make an infographic about Ancient Civilizations"}), {});
  EXPECT_EQ(info.call.tool_name, "collect_information");
  EXPECT_EQ(info.call.args.at("topic"), "Ancient Civilizations");
}

TEST(Rules, EditTargetsLatestImage) {
  RuleBasedProvider p;
  auto h = history({"draw a cute cat"});
  DesignResource png;
  png.resource_id = "r0007";
  png.task = DesignTask::pivot_figure;
  png.media = MediaKind::png;
  h.push_back({Role::tool, "done", {png}});
  h.push_back({Role::user, "make it grayscale", {}});
  const auto d = p.decide(h, {});
  EXPECT_EQ(d.call.tool_name, "edit_image");
  EXPECT_EQ(d.call.args.at("resource_id"), "r0007");
}

TEST(Rules, DecisionsAlwaysValidate) {
  RuleBasedProvider p;
  const auto sigs = tools::builtin_signatures();
  for (const char* t : {"hello", "draw", "a background", "an icon", "layout please", "explain volcanoes",
                        "draw me a tiger", "picture of the sea", "background of a forest", "icons for space"}) {
    const auto d = p.decide(history({t}), sigs);
    if (!d.is_tool_call()) continue;
    const ToolSignature* s = nullptr;
    for (const auto& x : sigs)
      if (x.name == d.call.tool_name) s = &x;
    ASSERT_TRUE(s) << t;
    EXPECT_FALSE(validate_args(*s, d.call.args)) << t;
  }
}

TEST(Remote, ToolCallOverHttp) {
  test::MockServer mock;
  json captured;
  std::string auth;
  mock.http.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    captured = json::parse(req.body);
    auth = req.get_header_value("Authorization");
    json reply{{"choices",
                {{{"message",
                   {{"role", "assistant"},
                    {"content", nullptr},
                    {"tool_calls",
                     {{{"id", "call_1"},
                       {"type", "function"},
                       {"function", {{"name", "pivot_figure"}, {"arguments", R"({"caption":"a cute cat"})"}}}}}}}}}}}};
    res.set_content(reply.dump(), "application/json");
  });
  const auto base = mock.start();
  RemoteLlm llm({base + "/v1/", "secret", "test-model"}, make_http_client());
  const auto d = llm.decide(history({"draw a cute cat"}), tools::builtin_signatures());
  ASSERT_TRUE(d.is_tool_call());
  EXPECT_EQ(d.call.tool_name, "pivot_figure");
  EXPECT_EQ(d.call.args.at("caption"), "a cute cat");
  EXPECT_EQ(auth, "Bearer secret");
  EXPECT_EQ(captured["model"], "test-model");
  EXPECT_EQ(captured["tools"].size(), 6u);
  EXPECT_EQ(captured["messages"][0]["role"], "system");
  EXPECT_EQ(captured["messages"][1]["content"], "draw a cute cat");
  const auto& fn = captured["tools"][0]["function"];
  EXPECT_EQ(fn["name"], "pivot_figure");
  EXPECT_EQ(fn["parameters"]["required"], json::array({"caption"}));
  EXPECT_NE(fn["parameters"]["properties"]["caption"]["description"].get<std::string>().find("Examples:"),
            std::string::npos);
}

TEST(Remote, ChatAndCompletion) {
  test::MockServer mock;
  mock.http.Post("/chat/completions", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"choices":[{"message":{"role":"assistant","content":"Hello!"}}]})", "application/json");
  });
  const auto base = mock.start();
  RemoteLlm llm({base, "", "m"}, make_http_client());
  EXPECT_EQ(llm.decide(history({"hi"}), {}).chat_text, "Hello!");
  EXPECT_EQ(llm.complete({{"user", "hi"}}), "Hello!");
}

TEST(Remote, FailuresBecomeProviderErrors) {
  test::MockServer mock;
  mock.http.Post("/chat/completions", [](const httplib::Request& req, httplib::Response& res) {
    if (req.body.find("broken") != std::string::npos) {
      res.set_content("not json", "text/plain");
    } else {
      res.status = 503;
    }
  });
  const auto base = mock.start();
  RemoteLlm llm({base, "", "m"}, make_http_client());
  for (const char* text : {"broken", "fine"}) {
    try {
      llm.decide(history({text}), {});
      FAIL() << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), "ProviderError");
    }
  }
  RemoteLlm unset({"", "", "m"}, make_http_client());
  EXPECT_THROW(unset.decide(history({"x"}), {}), Error);

  // the dispatcher turns the failure into a visible apology
  ToolRegistry r;
  auto c = ask("fine");
  const auto out = dispatch(c, r, llm);
  ASSERT_TRUE(out.error);
  EXPECT_EQ(out.error->code, "ProviderError");
}

}  // namespace
}  // namespace gm::agent
