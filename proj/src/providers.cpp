#include "gm/providers.hpp"

#include "gm/util.hpp"

#include <algorithm>

namespace gm::agent {

using nlohmann::json;

std::vector<ScriptedTurn> parse_fixture(const json& j) {
  if (!j.is_array()) throw Error("InvalidFixture", "provider fixture must be a JSON list");
  std::vector<ScriptedTurn> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const json& e = j[i];
    try {
      out.push_back(ScriptedTurn{e.at("expect_last_user_contains").get<std::string>(),
                                 e.at("decision").get<ProviderDecision>()});
    } catch (const json::exception& ex) {
      throw Error("InvalidFixture", "fixture entry " + std::to_string(i) + ": " + ex.what());
    }
  }
  return out;
}

std::vector<ScriptedTurn> load_fixture(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw Error("InvalidFixture", path + ": " + e.what());
  }
  return parse_fixture(j);
}

namespace {

const Message* last_user(const std::vector<Message>& history) {
  for (auto it = history.rbegin(); it != history.rend(); ++it)
    if (it->role == Role::user) return &*it;
  return nullptr;
}

}  // namespace

ProviderDecision ScriptedProvider::decide(const std::vector<Message>& history, const std::vector<ToolSignature>&) {
  std::lock_guard lock(mu_);
  if (next_ >= turns_.size()) throw Error("FixtureExhausted", "scripted provider has no decisions left");
  const Message* user = last_user(history);
  const ScriptedTurn& turn = turns_[next_];
  if (!user || user->text.find(turn.expect_last_user_contains) == std::string::npos)
    throw Error("FixtureMismatch", "fixture entry " + std::to_string(next_) + " expects a user message containing '" +
                                       turn.expect_last_user_contains + "'");
  ++next_;
  return turn.decision;
}

// ---------------------------------------------------------------------------

namespace {

struct Topic {
  const char* key;
  const char* pivot;
  const char* background;
  const char* icon;
};

constexpr Topic kTopics[] = {
    {"polar bear", "a crying polar bear", "the melting iceberg", "iceberg"},
    {"climate", "a crying polar bear", "the melting iceberg", "thermometer"},
    {"global warming", "a crying polar bear", "the melting iceberg", "thermometer"},
    {"ancient", "a pharaoh beside the great pyramid", "a desert with ancient ruins at sunset", "pyramid"},
    {"space", "an astronaut floating above the earth", "a starry night sky", "rocket"},
    {"ocean", "a sea turtle swimming over a reef", "the deep blue sea", "fish"},
    {"pet", "a smiling dog wearing a hat", "the park under warm sunlight", "dog"},
};

const Topic* find_topic(const std::vector<Message>& history) {
  for (auto it = history.rbegin(); it != history.rend(); ++it) {
    if (it->role != Role::user) continue;
    const std::string lower = to_lower(it->text);
    for (const auto& t : kTopics)
      if (lower.find(t.key) != std::string::npos) return &t;
  }
  return nullptr;
}

bool has_any(const std::string& s, std::initializer_list<const char*> words) {
  return std::any_of(words.begin(), words.end(), [&](const char* w) { return s.find(w) != std::string::npos; });
}

std::string strip_punct(std::string s) {
  while (!s.empty() && std::string_view(".!?,;:\"'").find(s.back()) != std::string_view::npos) s.pop_back();
  return trim(s);
}

/// Text following the first of `markers` in `text` (case-insensitive), or "".
std::string after(const std::string& text, std::initializer_list<const char*> markers) {
  const std::string lower = to_lower(text);
  for (const char* m : markers) {
    const auto pos = lower.find(m);
    if (pos != std::string::npos) return strip_punct(text.substr(pos + std::string_view(m).size()));
  }
  return {};
}

std::string drop_prefix(std::string s, std::initializer_list<const char*> prefixes) {
  for (const char* p : prefixes) {
    const std::string_view pv(p);
    if (to_lower(s).rfind(pv, 0) == 0) s = trim(s.substr(pv.size()));
  }
  return s;
}

const DesignResource* latest_png(const std::vector<Message>& history) {
  for (auto it = history.rbegin(); it != history.rend(); ++it)
    for (auto r = it->resources.rbegin(); r != it->resources.rend(); ++r)
      if (r->media == MediaKind::png) return &*r;
  return nullptr;
}

}  // namespace

ProviderDecision RuleBasedProvider::decide(const std::vector<Message>& history, const std::vector<ToolSignature>&) {
  const Message* user = last_user(history);
  if (!user) return ProviderDecision::chat("What would you like to design?");
  const std::string text = trim(user->text);
  const std::string lower = to_lower(text);
  const Topic* topic = find_topic(history);

  if (lower.find("layout") != std::string::npos)
    return ProviderDecision::tool("generate_layout", {{"instruction", text}});

  if (has_any(lower, {"background", "backdrop"})) {
    std::string caption = after(text, {"background of ", "backdrop of ", "background with "});
    if (caption.empty()) caption = topic ? topic->background : "a soft pastel gradient";
    return ProviderDecision::tool("background_figure", {{"caption", caption}});
  }

  if (lower.find("icon") != std::string::npos) {
    std::string keyword = after(text, {"icon for ", "icon of ", "icons for ", "icons of ", "icon: "});
    keyword = drop_prefix(keyword, {"a ", "an ", "the "});
    if (keyword.empty()) keyword = topic ? topic->icon : "star";
    return ProviderDecision::tool("search_icons", {{"keyword", keyword}});
  }

  if (has_any(lower, {"grayscale", "greyscale", "invert", "blur", "edit", "make it"})) {
    if (const DesignResource* png = latest_png(history))
      return ProviderDecision::tool("edit_image", {{"resource_id", png->resource_id}, {"instruction", text}});
  }

  if (has_any(lower, {"draw", "picture", "image", "figure", "illustration"})) {
    std::string caption = after(text, {"draw ", "picture of ", "image of ", "figure of ", "illustration of "});
    caption = drop_prefix(caption, {"me "});
    if (caption.empty()) caption = topic ? topic->pivot : "a friendly robot";
    return ProviderDecision::tool("pivot_figure", {{"caption", caption}});
  }

  if (has_any(lower, {"infographic", "information", "about", "explain"})) {
    std::string subject = after(text, {"infographic about ", "information about ", "infographic on ", "about ",
                                       "explain "});
    if (subject.empty()) subject = text;
    return ProviderDecision::tool("collect_information", {{"topic", subject}});
  }

  return ProviderDecision::chat(
      "Hi! Tell me the topic of your infographic, or ask for a picture, a background, icons or a layout.");
}

// ---------------------------------------------------------------------------

RemoteLlmConfig RemoteLlmConfig::from_env() {
  return RemoteLlmConfig{env_or("GM_LLM_ENDPOINT"), env_or("GM_LLM_KEY"), env_or("GM_LLM_MODEL", "gpt-4o-mini")};
}

RemoteLlm::RemoteLlm(RemoteLlmConfig config, std::shared_ptr<HttpClient> http)
    : config_(std::move(config)), http_(std::move(http)) {
  while (!config_.endpoint.empty() && config_.endpoint.back() == '/') config_.endpoint.pop_back();
}

json RemoteLlm::tool_schema(const ToolSignature& sig) {
  json props = json::object();
  json required = json::array();
  for (const auto& p : sig.params) {
    std::string desc = p.description + " Examples: ";
    for (std::size_t i = 0; i < p.examples.size(); ++i) desc += (i ? ", " : "") + p.examples[i].dump();
    json prop{{"type", p.type == ValueType::number ? "number" : "string"}, {"description", desc}};
    if (p.type == ValueType::enumeration) prop["enum"] = p.enum_values;
    props[p.name] = std::move(prop);
    if (p.required) required.push_back(p.name);
  }
  return json{{"type", "function"},
              {"function",
               {{"name", sig.name},
                {"description", sig.description},
                {"parameters", {{"type", "object"}, {"properties", props}, {"required", required}}}}}};
}

json RemoteLlm::chat_request(const std::vector<Message>& history, const std::vector<ToolSignature>& signatures) const {
  json messages = json::array();
  messages.push_back(
      {{"role", "system"},
       {"content",
        "You are a design assistant that builds infographics with the user. Either reply conversationally or call "
        "exactly one tool when the user asks for a design task. Infer missing captions from the conversation."}});
  for (const auto& m : history) {
    // tool results carry no call id here, so they are replayed as assistant notes
    const bool is_user = m.role == Role::user;
    messages.push_back({{"role", is_user ? "user" : "assistant"},
                        {"content", m.role == Role::tool ? "[tool] " + m.text : m.text}});
  }
  json tools = json::array();
  for (const auto& s : signatures) tools.push_back(tool_schema(s));
  json body{{"model", config_.model}, {"messages", messages}};
  if (!tools.empty()) body["tools"] = tools;
  return body;
}

json RemoteLlm::post(const json& body) {
  if (config_.endpoint.empty()) throw Error("ProviderError", "GM_LLM_ENDPOINT is not set");
  HttpHeaders headers;
  if (!config_.api_key.empty()) headers["Authorization"] = "Bearer " + config_.api_key;
  const HttpResponse res = http_->post_json(config_.endpoint + "/chat/completions", body.dump(), headers);
  if (!res.ok())
    throw Error("ProviderError", "LLM request failed: " +
                                     (res.status ? "HTTP " + std::to_string(res.status) : res.error));
  try {
    json j = json::parse(res.body);
    return j.at("choices").at(0).at("message");
  } catch (const json::exception& e) {
    throw Error("ProviderError", std::string("malformed LLM response: ") + e.what());
  }
}

ProviderDecision RemoteLlm::decide(const std::vector<Message>& history, const std::vector<ToolSignature>& signatures) {
  const json msg = post(chat_request(history, signatures));
  try {
    if (msg.contains("tool_calls") && msg["tool_calls"].is_array() && !msg["tool_calls"].empty()) {
      const json& fn = msg["tool_calls"][0].at("function");
      ArgMap args;
      const json& raw = fn.at("arguments");
      const json parsed = raw.is_string() ? json::parse(raw.get<std::string>()) : raw;
      if (parsed.is_object())
        for (const auto& [k, v] : parsed.items()) args[k] = v;
      return ProviderDecision::tool(fn.at("name").get<std::string>(), std::move(args));
    }
    return ProviderDecision::chat(msg.value("content", std::string()));
  } catch (const json::exception& e) {
    throw Error("ProviderError", std::string("malformed tool call: ") + e.what());
  }
}

std::string RemoteLlm::complete(const std::vector<PromptTurn>& prompt) {
  json messages = json::array();
  for (const auto& t : prompt) messages.push_back({{"role", t.role}, {"content", t.text}});
  const json msg = post(json{{"model", config_.model}, {"messages", messages}});
  if (!msg.contains("content") || !msg["content"].is_string())
    throw Error("ProviderError", "LLM response has no text content");
  return msg["content"].get<std::string>();
}

}  // namespace gm::agent
