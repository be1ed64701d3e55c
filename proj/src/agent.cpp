#include "gm/agent.hpp"

#include "gm/util.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>

namespace gm::agent {

using nlohmann::json;

std::string_view to_string(ValueType t) {
  switch (t) {
    case ValueType::string: return "string";
    case ValueType::enumeration: return "enum";
    case ValueType::number: return "number";
  }
  return "string";
}

const ParamSpec* ToolSignature::param(std::string_view n) const {
  for (const auto& p : params)
    if (p.name == n) return &p;
  return nullptr;
}

void to_json(json& j, const ToolSignature& s) {
  json params = json::array();
  for (const auto& p : s.params) {
    json pj{{"name", p.name},
            {"type", to_string(p.type)},
            {"required", p.required},
            {"description", p.description},
            {"examples", p.examples}};
    if (!p.enum_values.empty()) pj["enum"] = p.enum_values;
    params.push_back(std::move(pj));
  }
  j = json{{"name", s.name}, {"description", s.description}, {"params", std::move(params)}};
}

ProviderDecision ProviderDecision::chat(std::string text) {
  ProviderDecision d;
  d.variant = Variant::chat;
  d.chat_text = std::move(text);
  return d;
}

ProviderDecision ProviderDecision::tool(std::string name, ArgMap args) {
  ProviderDecision d;
  d.variant = Variant::tool_call;
  d.call = ToolCall{std::move(name), std::move(args)};
  return d;
}

void to_json(json& j, const ProviderDecision& d) {
  if (d.is_tool_call()) {
    j = json{{"variant", "tool_call"}, {"call", {{"tool_name", d.call.tool_name}, {"args", d.call.args}}}};
  } else {
    j = json{{"variant", "chat"}, {"chat_text", d.chat_text}};
  }
}

void from_json(const json& j, ProviderDecision& d) {
  const auto variant = j.at("variant").get<std::string>();
  if (variant == "chat") {
    d = ProviderDecision::chat(j.value("chat_text", std::string()));
  } else if (variant == "tool_call") {
    const auto& call = j.at("call");
    ArgMap args;
    if (call.contains("args"))
      for (const auto& [k, v] : call["args"].items()) args[k] = v;
    d = ProviderDecision::tool(call.at("tool_name").get<std::string>(), std::move(args));
  } else {
    throw Error("InvalidDecision", "unknown decision variant: " + variant);
  }
}

std::string ArgValidation::to_text() const { return param + ": " + reason; }

std::optional<double> number_arg(const ArgMap& args, const std::string& name) {
  auto it = args.find(name);
  if (it == args.end()) return std::nullopt;
  const json& v = it->second;
  if (v.is_number()) {
    const double d = v.get<double>();
    return std::isfinite(d) ? std::optional<double>(d) : std::nullopt;
  }
  if (v.is_string()) {
    const std::string s = trim(v.get<std::string>());
    double d = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), d);
    if (!s.empty() && ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(d)) return d;
  }
  return std::nullopt;
}

std::string string_arg(const ArgMap& args, const std::string& name, std::string fallback) {
  auto it = args.find(name);
  if (it == args.end() || !it->second.is_string()) return fallback;
  return it->second.get<std::string>();
}

std::optional<ArgValidation> validate_args(const ToolSignature& sig, const ArgMap& args) {
  for (const auto& p : sig.params) {
    auto it = args.find(p.name);
    if (it == args.end()) {
      if (p.required) return ArgValidation{p.name, "missing"};
      continue;
    }
    const json& v = it->second;
    switch (p.type) {
      case ValueType::string:
        if (!v.is_string()) return ArgValidation{p.name, "wrong-type"};
        if (p.required && trim(v.get<std::string>()).empty()) return ArgValidation{p.name, "empty"};
        break;
      case ValueType::enumeration: {
        if (!v.is_string()) return ArgValidation{p.name, "wrong-type"};
        const auto s = v.get<std::string>();
        if (std::find(p.enum_values.begin(), p.enum_values.end(), s) == p.enum_values.end())
          return ArgValidation{p.name, "not-in-enum"};
        break;
      }
      case ValueType::number:
        if (!number_arg(args, p.name)) return ArgValidation{p.name, "wrong-type"};
        break;
    }
  }
  for (const auto& [name, value] : args)
    if (!sig.param(name)) return ArgValidation{name, "unknown-arg"};
  return std::nullopt;
}

void check_signature(const ToolSignature& sig) {
  if (sig.name.empty()) throw Error("InvalidSignature", "tool name is empty");
  std::set<std::string> seen;
  for (const auto& p : sig.params) {
    if (!seen.insert(p.name).second)
      throw Error("InvalidSignature", sig.name + ": duplicate parameter " + p.name);
    if (p.examples.empty())
      throw Error("InvalidSignature", sig.name + "." + p.name + ": at least one example is required");
    if (p.type == ValueType::enumeration && p.enum_values.empty())
      throw Error("InvalidSignature", sig.name + "." + p.name + ": enum parameter without values");
  }
}

ToolRegistry& ToolRegistry::register_tool(ToolSignature sig, ToolExecutor exec) {
  check_signature(sig);
  if (find(sig.name)) throw Error("DuplicateName", "tool already registered: " + sig.name);
  entries_.push_back(Entry{std::move(sig), std::move(exec)});
  return *this;
}

const ToolRegistry::Entry* ToolRegistry::find(std::string_view name) const {
  for (const auto& e : entries_)
    if (e.signature.name == name) return &e;
  return nullptr;
}

std::vector<ToolSignature> ToolRegistry::signatures() const {
  std::vector<ToolSignature> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.signature);
  return out;
}

std::vector<std::string> ToolRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& e : entries_) out.push_back(e.signature.name);
  return out;
}

std::string next_resource_id(const Conversation& c) {
  std::size_t n = 0;
  for (const auto& m : c.messages) n += m.resources.size();
  char buf[24];
  std::snprintf(buf, sizeof buf, "r%04zu", n + 1);
  return buf;
}

namespace {

DispatchOutcome fail(Conversation& c, ProviderDecision decision, std::string code, std::string text,
                     std::optional<ArgValidation> arg = std::nullopt) {
  c.append(Message{Role::assistant, text, {}});
  DispatchOutcome out;
  out.decision = std::move(decision);
  out.error = DispatchError{std::move(code), std::move(text), std::move(arg)};
  return out;
}

}  // namespace

DispatchOutcome dispatch(Conversation& conversation, const ToolRegistry& registry, Provider& provider,
                         const DispatchOptions& opts) {
  if (conversation.messages.empty() || conversation.messages.back().role != Role::user)
    throw Error("InvalidConversation", "dispatch needs a conversation ending with a user message");

  const auto signatures = registry.signatures();
  std::vector<Message> context = conversation.messages;

  for (int attempt = 1;; ++attempt) {
    ProviderDecision decision;
    try {
      decision = provider.decide(context, signatures);
    } catch (const std::exception& e) {
      spdlog::warn("provider failed: {}", e.what());
      auto out = fail(conversation, ProviderDecision::chat(""), "ProviderError",
                      std::string("Sorry, the assistant is unavailable right now (") + e.what() + ").");
      out.attempts = attempt;
      return out;
    }

    if (!decision.is_tool_call()) {
      conversation.append(Message{Role::assistant, decision.chat_text, {}});
      DispatchOutcome out;
      out.decision = std::move(decision);
      out.attempts = attempt;
      return out;
    }

    const auto* entry = registry.find(decision.call.tool_name);
    if (!entry) {
      spdlog::warn("provider requested unknown tool '{}'", decision.call.tool_name);
      auto out = fail(conversation, decision, "UnknownTool",
                      "Sorry, I don't have a tool called '" + decision.call.tool_name +
                          "'. Could you rephrase what you would like to design?");
      out.attempts = attempt;
      return out;
    }

    if (auto bad = validate_args(entry->signature, decision.call.args)) {
      if (attempt == 1) {
        context.push_back(Message{Role::tool,
                                  "Argument validation failed for " + decision.call.tool_name + ": " +
                                      bad->to_text() + ". Correct the arguments and call again.",
                                  {}});
        continue;
      }
      auto out = fail(conversation, decision, "ArgValidation",
                      "I could not call " + decision.call.tool_name + ": argument " + bad->to_text() + ".",
                      bad);
      out.attempts = attempt;
      return out;
    }

    if (opts.on_execute) opts.on_execute(decision.call);
    DesignResource resource;
    try {
      const ToolContext ctx{conversation, opts.canvas, opts.seed};
      resource = entry->executor(decision.call.args, ctx);
      check_pairing(resource);
    } catch (const std::exception& e) {
      auto out = fail(conversation, decision, "ToolExecution",
                      "The " + decision.call.tool_name + " tool failed: " + e.what());
      out.attempts = attempt;
      return out;
    }
    resource.resource_id = next_resource_id(conversation);
    if (resource.media == MediaKind::png && resource.content.empty())
      resource.content = "assets/" + resource.resource_id + ".png";
    std::string text = decision.call.tool_name + " produced " + std::string(to_string(resource.media)) +
                       " resource " + resource.resource_id;
    if (!resource.label.empty()) text += " (" + resource.label + ")";
    if (!resource.warning.empty()) text += " [warning: " + resource.warning + "]";
    conversation.append(Message{Role::tool, std::move(text), {resource}});

    DispatchOutcome out;
    out.decision = std::move(decision);
    out.resource = std::move(resource);
    out.attempts = attempt;
    return out;
  }
}

}  // namespace gm::agent
