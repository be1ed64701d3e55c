#include "gm/runtime.hpp"

#include "gm/providers.hpp"

namespace gm {

ProviderMode provider_mode_from(std::string_view s) {
  if (s == "stub") return ProviderMode::stub;
  if (s == "rules") return ProviderMode::rules;
  if (s == "remote") return ProviderMode::remote;
  throw Error("InvalidRequest", "unknown provider mode '" + std::string(s) + "' (stub|rules|remote)");
}

Runtime make_runtime(ProviderMode mode, const std::optional<std::filesystem::path>& fixture,
                     std::shared_ptr<HttpClient> http) {
  Runtime rt;
  rt.registry = std::make_shared<agent::ToolRegistry>();
  tools::Toolkit kit;

  switch (mode) {
    case ProviderMode::stub:
      if (fixture) {
        auto scripted = std::make_shared<agent::ScriptedProvider>(agent::load_fixture(fixture->string()));
        rt.providers = [scripted](const std::string&) { return scripted; };
        break;
      }
      [[fallthrough]];
    case ProviderMode::rules: {
      auto rules = std::make_shared<agent::RuleBasedProvider>();
      rt.providers = [rules](const std::string&) { return rules; };
      break;
    }
    case ProviderMode::remote: {
      if (!http) http = make_http_client();
      auto llm = std::make_shared<agent::RemoteLlm>(agent::RemoteLlmConfig::from_env(), http);
      rt.providers = [llm](const std::string&) { return llm; };
      kit.info = std::make_shared<tools::ModelInfoSource>(llm);
      kit.layouts = llm;
      if (auto ep = env_or("GM_IMG_ENDPOINT"); !ep.empty())
        kit.images = std::make_shared<tools::FallbackImageBackend>(
            std::make_shared<tools::RemoteImageBackend>(http, ep), std::make_shared<tools::StubImageBackend>());
      if (auto ep = env_or("GM_EDIT_ENDPOINT"); !ep.empty())
        kit.editor = std::make_shared<tools::RemoteEditBackend>(http, ep);
      kit.icons = std::make_shared<tools::IconSearch>(http, env_or("GM_ICON_ENDPOINT", "https://api.iconify.design"));
      break;
    }
  }
  tools::register_builtin_tools(*rt.registry, kit);
  return rt;
}

}  // namespace gm
