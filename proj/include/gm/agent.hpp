#pragma once

// Tool-augmented dispatcher: a provider decides between chatting and calling
// one registered tool; the call is validated against the tool's signature
// and executed, and the produced resource is appended to the conversation.

#include "gm/model.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gm::agent {

enum class ValueType { string, enumeration, number };
std::string_view to_string(ValueType t);

struct ParamSpec {
  std::string name;
  ValueType type = ValueType::string;
  bool required = false;
  /// Explanatory text: what the argument means.
  std::string description;
  /// Exemplary values; at least one is mandatory.
  std::vector<nlohmann::json> examples;
  std::vector<std::string> enum_values;
};

struct ToolSignature {
  std::string name;
  std::string description;
  std::vector<ParamSpec> params;

  const ParamSpec* param(std::string_view n) const;
};

void to_json(nlohmann::json& j, const ToolSignature& s);

using ArgMap = std::map<std::string, nlohmann::json>;

struct ToolCall {
  std::string tool_name;
  ArgMap args;
  bool operator==(const ToolCall&) const = default;
};

struct ProviderDecision {
  enum class Variant { chat, tool_call };
  Variant variant = Variant::chat;
  std::string chat_text;
  ToolCall call;

  static ProviderDecision chat(std::string text);
  static ProviderDecision tool(std::string name, ArgMap args);
  bool is_tool_call() const { return variant == Variant::tool_call; }
  bool operator==(const ProviderDecision&) const = default;
};

void to_json(nlohmann::json& j, const ProviderDecision& d);
void from_json(const nlohmann::json& j, ProviderDecision& d);

struct ArgValidation {
  std::string param;
  std::string reason;  // missing | not-in-enum | wrong-type | unknown-arg | empty
  std::string to_text() const;
  bool operator==(const ArgValidation&) const = default;
};

/// nullopt when `args` satisfies `sig`.
std::optional<ArgValidation> validate_args(const ToolSignature& sig, const ArgMap& args);

/// Reads a number argument given either as a JSON number or a numeric string.
std::optional<double> number_arg(const ArgMap& args, const std::string& name);
std::string string_arg(const ArgMap& args, const std::string& name, std::string fallback = {});

struct ToolContext {
  const Conversation& conversation;
  CanvasSpec canvas;
  std::uint64_t seed = 0;
};

/// Produces the resource for a validated call. Throws on failure. The
/// returned resource gets its id from the dispatcher.
using ToolExecutor = std::function<DesignResource(const ArgMap&, const ToolContext&)>;

class ToolRegistry {
 public:
  struct Entry {
    ToolSignature signature;
    ToolExecutor executor;
  };

  /// Throws gm::Error("DuplicateName") or ("InvalidSignature").
  ToolRegistry& register_tool(ToolSignature sig, ToolExecutor exec);

  const Entry* find(std::string_view name) const;
  std::vector<ToolSignature> signatures() const;
  std::vector<std::string> names() const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::vector<Entry> entries_;
};

/// Throws gm::Error("InvalidSignature") on duplicate params or missing examples.
void check_signature(const ToolSignature& sig);

class Provider {
 public:
  virtual ~Provider() = default;
  virtual ProviderDecision decide(const std::vector<Message>& history,
                                  const std::vector<ToolSignature>& signatures) = 0;
};

struct DispatchError {
  std::string code;  // UnknownTool | ArgValidation | ToolExecution | ProviderError
  std::string message;
  std::optional<ArgValidation> arg;
};

struct DispatchOutcome {
  ProviderDecision decision;
  std::optional<DesignResource> resource;
  std::optional<DispatchError> error;
  /// Provider consultations, 2 when the argument retry fired.
  int attempts = 1;
};

struct DispatchOptions {
  CanvasSpec canvas;
  std::uint64_t seed = 0;
  /// Observes the call just before the executor runs (progress events, tests).
  std::function<void(const ToolCall&)> on_execute;
};

/// Next resource id for a conversation: "r0001", "r0002", ...
std::string next_resource_id(const Conversation& c);

/// Runs one scheduling/execution round for the trailing user message.
/// Always appends at least one message.
DispatchOutcome dispatch(Conversation& conversation, const ToolRegistry& registry,
                         Provider& provider, const DispatchOptions& opts = {});

}  // namespace gm::agent
