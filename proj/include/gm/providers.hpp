#pragma once

#include "gm/agent.hpp"
#include "gm/http.hpp"
#include "gm/text_model.hpp"

#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace gm::agent {

/// One fixture entry: the decision to return when the latest user message
/// contains `expect_last_user_contains`.
struct ScriptedTurn {
  std::string expect_last_user_contains;
  ProviderDecision decision;
};

std::vector<ScriptedTurn> parse_fixture(const nlohmann::json& j);
std::vector<ScriptedTurn> load_fixture(const std::string& path);

/// Replays fixture entries strictly in order. A mismatch or an exhausted
/// fixture throws gm::Error("FixtureMismatch" | "FixtureExhausted").
class ScriptedProvider final : public Provider {
 public:
  explicit ScriptedProvider(std::vector<ScriptedTurn> turns) : turns_(std::move(turns)) {}

  ProviderDecision decide(const std::vector<Message>& history,
                          const std::vector<ToolSignature>& signatures) override;

  std::size_t consumed() const { return next_; }
  std::size_t remaining() const { return turns_.size() - next_; }
  ScriptedProvider(const ScriptedProvider&) = delete;
  ScriptedProvider& operator=(const ScriptedProvider&) = delete;

 private:
  std::mutex mu_;
  std::vector<ScriptedTurn> turns_;
  std::size_t next_ = 0;
};

/// Offline keyword rules. Deterministic in the message history alone.
class RuleBasedProvider final : public Provider {
 public:
  ProviderDecision decide(const std::vector<Message>& history,
                          const std::vector<ToolSignature>& signatures) override;
};

struct RemoteLlmConfig {
  std::string endpoint;  // base URL, e.g. https://api.example.com/v1
  std::string api_key;
  std::string model;

  /// GM_LLM_ENDPOINT, GM_LLM_KEY, GM_LLM_MODEL.
  static RemoteLlmConfig from_env();
};

/// OpenAI-compatible `POST {endpoint}/chat/completions` with function tools.
/// Transport or protocol failures throw gm::Error("ProviderError").
class RemoteLlm final : public Provider, public TextModel {
 public:
  RemoteLlm(RemoteLlmConfig config, std::shared_ptr<HttpClient> http);

  ProviderDecision decide(const std::vector<Message>& history,
                          const std::vector<ToolSignature>& signatures) override;
  std::string complete(const std::vector<PromptTurn>& prompt) override;

  /// Request bodies, exposed for inspection.
  static nlohmann::json tool_schema(const ToolSignature& sig);
  nlohmann::json chat_request(const std::vector<Message>& history,
                              const std::vector<ToolSignature>& signatures) const;

 private:
  nlohmann::json post(const nlohmann::json& body);

  RemoteLlmConfig config_;
  std::shared_ptr<HttpClient> http_;
};

}  // namespace gm::agent
