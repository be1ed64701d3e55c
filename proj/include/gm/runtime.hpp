#pragma once

#include "gm/http.hpp"
#include "gm/server.hpp"
#include "gm/tools.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <string_view>

namespace gm {

/// stub: scripted fixture when one is given, keyword rules otherwise; all
/// tools offline. rules: keyword rules, tools offline. remote: the
/// OpenAI-compatible LLM plus any remote tool endpoints configured in the
/// environment (GM_IMG_ENDPOINT, GM_EDIT_ENDPOINT, GM_ICON_ENDPOINT).
enum class ProviderMode { stub, rules, remote };

ProviderMode provider_mode_from(std::string_view s);

struct Runtime {
  std::shared_ptr<agent::ToolRegistry> registry;
  server::ProviderFactory providers;
};

Runtime make_runtime(ProviderMode mode, const std::optional<std::filesystem::path>& fixture = std::nullopt,
                     std::shared_ptr<HttpClient> http = nullptr);

}  // namespace gm
