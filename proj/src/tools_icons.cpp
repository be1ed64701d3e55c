#include "gm/tools.hpp"
#include "gm/util.hpp"

#include <spdlog/spdlog.h>

#include <sstream>

namespace gm::tools {

using nlohmann::json;

std::string_view to_string(IconSource s) {
  switch (s) {
    case IconSource::remote: return "remote";
    case IconSource::local: return "local";
    case IconSource::placeholder: return "placeholder";
  }
  return "placeholder";
}

namespace {

std::string wrap(std::string_view body) {
  return std::string(R"(<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 24 24">)") + std::string(body) + "</svg>";
}

// Filled shapes use currentColor; outlined ones stroke with it.
constexpr const char* kStroke = R"(fill="none" stroke="currentColor" stroke-width="2" stroke-linecap="round" stroke-linejoin="round")";

std::map<std::string, std::string> build_bundle() {
  const std::string s = kStroke;
  std::map<std::string, std::string> m{
      {"pyramid", R"(<path fill="currentColor" d="M12 3L2 20h20L12 3zm0 4.2L18.6 18H12V7.2z"/>)"},
      {"scroll", "<path " + s + R"( d="M6 4h11a2 2 0 0 1 2 2v12a2 2 0 0 1-2 2H7a2 2 0 0 1-2-2V6"/><path )" + s + R"( d="M5 6a2 2 0 1 1 4 0v12M9 9h7M9 13h7"/>)"},
      {"temple", R"(<path fill="currentColor" d="M12 2L2 7h20L12 2zM4 9h2v9H4zm4.5 0h2v9h-2zm5 0h2v9h-2zM18 9h2v9h-2zM2 19h20v3H2z"/>)"},
      {"crown", R"(<path fill="currentColor" d="M3 7l4.5 4L12 4l4.5 7L21 7l-2 11H5L3 7zm2 13h14v2H5z"/>)"},
      {"book", "<path " + s + R"( d="M4 4h6a2 2 0 0 1 2 2v14a2 2 0 0 0-2-2H4zM20 4h-6a2 2 0 0 0-2 2v14a2 2 0 0 1 2-2h6z"/>)"},
      {"thermometer", "<path " + s + R"( d="M14 14.8V5a2 2 0 0 0-4 0v9.8a4 4 0 1 0 4 0z"/><circle fill="currentColor" cx="12" cy="18" r="2"/>)"},
      {"iceberg", R"(<path fill="currentColor" d="M9 3l3 4 2-2 3 7H5l4-9z"/><path fill="currentColor" opacity=".45" d="M5 13h12l-2 8H8z"/><path )" + s + R"( d="M2 13h20"/>)"},
      {"factory", R"(<path fill="currentColor" d="M2 21V10l6 4v-4l6 4V6h3V3h3v18H2z"/>)"},
      {"recycle", "<path " + s + R"( d="M7 19H4.8a1.8 1.8 0 0 1-1.6-2.7L7 10M11 19h8.2a1.8 1.8 0 0 0 1.6-2.7L19 13M14 16l-3 3 3 3M8.3 8l2.1-3.6a1.8 1.8 0 0 1 3.1 0L17 10M13.4 10.3L17 10l.4-3.6"/>)"},
      {"tree", R"(<path fill="currentColor" d="M12 2l6 8h-3l4 6H5l4-6H6l6-8zm-1 15h2v5h-2z"/>)"},
      {"rocket", R"(<path fill="currentColor" d="M12 2c3 2 5 6 5 10l-2 4H9l-2-4c0-4 2-8 5-10zm0 5a2 2 0 1 0 0 4 2 2 0 0 0 0-4zM7 14l-3 4 4-1zm10 0l3 4-4-1zM10 17h4l-2 5z"/>)"},
      {"moon", R"(<path fill="currentColor" d="M20 14.5A8.5 8.5 0 0 1 9.5 4 8.5 8.5 0 1 0 20 14.5z"/>)"},
      {"planet", R"(<circle fill="currentColor" cx="12" cy="12" r="6"/><ellipse )" + s + R"~( cx="12" cy="12" rx="11" ry="3.5" transform="rotate(-20 12 12)"/>)~"},
      {"star", R"(<path fill="currentColor" d="M12 2l3.1 6.3 6.9 1-5 4.9 1.2 6.8L12 17.8 5.8 21l1.2-6.8-5-4.9 6.9-1z"/>)"},
      {"fish", R"(<path fill="currentColor" d="M2 12c3-5 9-6 14-3l4-3v12l-4-3c-5 3-11 2-14-3zm5-1a1 1 0 1 0 0 2 1 1 0 0 0 0-2z"/>)"},
      {"wave", "<path " + s + R"( d="M2 8c2.5-2 5-2 7.5 0s5 2 7.5 0 3.5-1.5 5 0M2 14c2.5-2 5-2 7.5 0s5 2 7.5 0 3.5-1.5 5 0M2 20c2.5-2 5-2 7.5 0s5 2 7.5 0 3.5-1.5 5 0"/>)"},
      {"water", R"(<path fill="currentColor" d="M12 2s7 7.5 7 12.5A7 7 0 0 1 5 14.5C5 9.5 12 2 12 2z"/>)"},
      {"shield", R"(<path fill="currentColor" d="M12 2l8 3v6c0 5.2-3.4 9.6-8 11-4.6-1.4-8-5.8-8-11V5l8-3z"/>)"},
      {"chip", R"(<rect fill="currentColor" x="6" y="6" width="12" height="12" rx="1"/><path )" + s + R"( d="M9 2v4M15 2v4M9 18v4M15 18v4M2 9h4M2 15h4M18 9h4M18 15h4"/>)"},
      {"computer", "<rect " + s + R"( x="3" y="4" width="18" height="12" rx="1"/><path )" + s + R"( d="M8 20h8M12 16v4"/>)"},
      {"lightbulb", R"(<path fill="currentColor" d="M12 2a7 7 0 0 0-4 12.7V17h8v-2.3A7 7 0 0 0 12 2zM9 19h6v1.5a1.5 1.5 0 0 1-1.5 1.5h-3A1.5 1.5 0 0 1 9 20.5z"/>)"},
      {"lock", R"(<rect fill="currentColor" x="4" y="10" width="16" height="12" rx="2"/><path )" + s + R"( d="M8 10V7a4 4 0 0 1 8 0v3"/>)"},
      {"apple", R"(<path fill="currentColor" d="M12 7c-1.5-1-5-1.5-6.5 1.5S5 17 8 20c1.5 1.5 2.5 1 4 .5 1.5.5 2.5 1 4-.5 3-3 4-8.5 2.5-11.5S13.5 6 12 7zm0-1c0-2 1-3.5 3-4-.2 2-1.2 3.5-3 4z"/>)"},
      {"heart", R"(<path fill="currentColor" d="M12 21s-8-5.3-8-11a4.5 4.5 0 0 1 8-2.8A4.5 4.5 0 0 1 20 10c0 5.7-8 11-8 11z"/>)"},
      {"clock", "<circle " + s + R"( cx="12" cy="12" r="9"/><path )" + s + R"( d="M12 7v5l3 3"/>)"},
      {"dog", R"(<path fill="currentColor" d="M5 5l3 2h8l3-2 1 6-2 1v4a5 5 0 0 1-5 5h-2a5 5 0 0 1-5-5v-4l-2-1 1-6zm4.5 6a1 1 0 1 0 0 2 1 1 0 0 0 0-2zm5 0a1 1 0 1 0 0 2 1 1 0 0 0 0-2zM12 15l-1.5 1h3z"/>)"},
      {"cat", R"(<path fill="currentColor" d="M4 3l4 4h8l4-4v9a8 8 0 0 1-16 0V3zm5 8a1 1 0 1 0 0 2 1 1 0 0 0 0-2zm6 0a1 1 0 1 0 0 2 1 1 0 0 0 0-2zm-3 4l-1 1h2z"/>)"},
      {"bird", R"(<path fill="currentColor" d="M16 4a3 3 0 0 1 3 3l3 1-3 1c0 6-5 11-12 11H3l4-4c-2-3-1-7 2-9l7 5V7a3 3 0 0 1 0-3z"/>)"},
      {"bear", R"(<circle fill="currentColor" cx="6" cy="6" r="3"/><circle fill="currentColor" cx="18" cy="6" r="3"/><circle fill="currentColor" cx="12" cy="13" r="8"/>)"},
      {"chart", R"(<path fill="currentColor" d="M4 20V12h4v8zm6 0V6h4v14zm6 0V9h4v11zM2 21h20v1H2z"/>)"},
      {"globe", "<circle " + s + R"( cx="12" cy="12" r="9"/><path )" + s + R"( d="M3 12h18M12 3c3 3 3 15 0 18M12 3c-3 3-3 15 0 18"/>)"},
      {"people", R"(<circle fill="currentColor" cx="8" cy="7" r="3"/><circle fill="currentColor" cx="16" cy="7" r="3"/><path fill="currentColor" d="M2 20a6 6 0 0 1 12 0zm10 0a6 6 0 0 1 10 0z"/>)"},
      {"person", R"(<circle fill="currentColor" cx="12" cy="7" r="4"/><path fill="currentColor" d="M4 21a8 8 0 0 1 16 0z"/>)"},
      {"flag", R"(<path fill="currentColor" d="M5 2h2v20H5zm3 1h11l-3 4 3 4H8z"/>)"},
      {"sun", R"(<circle fill="currentColor" cx="12" cy="12" r="5"/><path )" + s + R"( d="M12 1v3M12 20v3M1 12h3M20 12h3M4.2 4.2l2.1 2.1M17.7 17.7l2.1 2.1M4.2 19.8l2.1-2.1M17.7 6.3l2.1-2.1"/>)"},
      {"cloud", R"(<path fill="currentColor" d="M7 19a5 5 0 0 1-.5-10A6 6 0 0 1 18 9.5a4.5 4.5 0 0 1-.5 9.5z"/>)"},
      {"rain", R"(<path fill="currentColor" d="M7 15a5 5 0 0 1-.5-10A6 6 0 0 1 18 5.5a4.5 4.5 0 0 1-.5 9.5z"/><path )" + s + R"( d="M8 18l-1 3M12 18l-1 3M16 18l-1 3"/>)"},
      {"snowflake", "<path " + s + R"( d="M12 2v20M3.3 7l17.4 10M3.3 17L20.7 7M9 4l3 2 3-2M9 20l3-2 3 2"/>)"},
      {"leaf", R"(<path fill="currentColor" d="M20 3C9 3 4 8 4 15c0 2 .5 4 1.5 5.5L4 22h2l1-1.5C15 21 20 14 20 3zM7 18c2-5 5-8 9-10-3 3-6 6-9 10z"/>)"},
      {"fire", R"(<path fill="currentColor" d="M12 2s6 5 6 11a6 6 0 0 1-12 0c0-3 2-5 2-5s0 3 2 4c0-5 2-10 2-10z"/>)"},
      {"lightning", R"(<path fill="currentColor" d="M13 2L4 14h6l-1 8 9-12h-6z"/>)"},
      {"car", R"(<path fill="currentColor" d="M5 11l2-5h10l2 5h2v6h-2a2 2 0 0 1-4 0H9a2 2 0 0 1-4 0H3v-6zm2.5-.5h9L15.5 8h-7z"/>)"},
      {"house", R"(<path fill="currentColor" d="M12 3l10 9h-3v9h-5v-6h-4v6H5v-9H2z"/>)"},
      {"mountain", R"(<path fill="currentColor" d="M2 20l7-12 4 6 3-4 6 10z"/>)"},
      {"phone", R"(<rect fill="currentColor" x="6" y="2" width="12" height="20" rx="2"/><rect fill="#FFFFFF" x="8" y="4" width="8" height="13"/>)"},
      {"gear", "<circle " + s + R"( cx="12" cy="12" r="3"/><path )" + s + R"( d="M12 2v3M12 19v3M2 12h3M19 12h3M4.9 4.9l2.1 2.1M17 17l2.1 2.1M4.9 19.1L7 17M17 7l2.1-2.1"/><circle )" + s + R"( cx="12" cy="12" r="7"/>)"},
      {"key", "<circle " + s + R"( cx="7" cy="15" r="4"/><path )" + s + R"( d="M10 12l10-10M16 6l3 3M14 8l2 2"/>)"},
      {"money", R"(<rect fill="currentColor" x="2" y="6" width="20" height="12" rx="1"/><circle fill="#FFFFFF" cx="12" cy="12" r="3"/>)"},
      {"trophy", R"(<path fill="currentColor" d="M7 3h10v6a5 5 0 0 1-10 0zM4 4h3v2H5a2 2 0 0 0 2 3v1a4 4 0 0 1-3-4zm16 0h-3v2h2a2 2 0 0 1-2 3v1a4 4 0 0 0 3-4zM11 14h2v4h3v3H8v-3h3z"/>)"},
      {"pin", R"(<path fill="currentColor" d="M12 2a7 7 0 0 1 7 7c0 5-7 13-7 13S5 14 5 9a7 7 0 0 1 7-7zm0 4a3 3 0 1 0 0 6 3 3 0 0 0 0-6z"/>)"},
      {"calendar", "<rect " + s + R"( x="3" y="5" width="18" height="16" rx="2"/><path )" + s + R"( d="M3 10h18M8 3v4M16 3v4"/>)"},
      {"battery", "<rect " + s + R"( x="2" y="7" width="17" height="10" rx="2"/><path fill="currentColor" d="M4 9h9v6H4zM20 10h2v4h-2z"/>)"},
      {"wifi", "<path " + s + R"( d="M2 9a15 15 0 0 1 20 0M5 12.5a10 10 0 0 1 14 0M8.5 16a5 5 0 0 1 7 0"/><circle fill="currentColor" cx="12" cy="19.5" r="1.5"/>)"},
      {"camera", R"(<path fill="currentColor" d="M4 7h3l2-3h6l2 3h3a2 2 0 0 1 2 2v10a2 2 0 0 1-2 2H4a2 2 0 0 1-2-2V9a2 2 0 0 1 2-2zm8 3a4 4 0 1 0 0 8 4 4 0 0 0 0-8z"/>)"},
      {"music", R"(<path fill="currentColor" d="M9 4l12-2v13a3 3 0 1 1-2-2.8V6l-8 1.3V17a3 3 0 1 1-2-2.8z"/>)"},
  };
  for (auto& [k, v] : m) v = wrap(v);
  return m;
}

}  // namespace

const std::map<std::string, std::string>& local_icon_bundle() {
  static const auto bundle = build_bundle();
  return bundle;
}

std::string placeholder_icon() {
  return wrap(R"(<circle cx="12" cy="12" r="9" fill="none" stroke="currentColor" stroke-width="2"/>)");
}

std::optional<std::string> local_icon(const std::string& keyword) {
  const auto& bundle = local_icon_bundle();
  const std::string kw = to_lower(trim(keyword));
  auto lookup = [&](const std::string& k) -> std::optional<std::string> {
    if (auto it = bundle.find(k); it != bundle.end()) return it->second;
    if (k.size() > 3 && k.back() == 's') {
      if (auto it = bundle.find(k.substr(0, k.size() - 1)); it != bundle.end()) return it->second;
    }
    return std::nullopt;
  };
  if (auto hit = lookup(kw)) return hit;
  std::istringstream words(kw);
  std::string w;
  std::optional<std::string> last;
  // the last matching word wins: "polar bear" -> bear
  while (words >> w)
    if (auto hit = lookup(w)) last = hit;
  return last;
}

IconSearch::IconSearch(std::shared_ptr<HttpClient> http, std::string endpoint)
    : http_(std::move(http)), endpoint_(std::move(endpoint)) {
  while (!endpoint_.empty() && endpoint_.back() == '/') endpoint_.pop_back();
}

std::vector<IconResult> IconSearch::remote(const std::string& keyword, int limit) {
  std::vector<IconResult> out;
  if (!http_) return out;
  const auto res = http_->get(endpoint_ + "/search?query=" + url_encode(keyword) + "&limit=" + std::to_string(limit));
  if (!res.ok()) {
    spdlog::info("icon search unavailable for '{}': {}", keyword, res.status ? std::to_string(res.status) : res.error);
    return out;
  }
  std::vector<std::string> names;
  try {
    const json body = json::parse(res.body);
    for (const auto& n : body.at("icons")) names.push_back(n.get<std::string>());
  } catch (const std::exception& e) {
    spdlog::info("icon search returned a malformed body: {}", e.what());
    return out;
  }
  for (const auto& name : names) {
    if (static_cast<int>(out.size()) >= limit) break;
    const auto colon = name.find(':');
    if (colon == std::string::npos) continue;
    const auto svg = http_->get(endpoint_ + "/" + url_encode(name.substr(0, colon)) + "/" +
                                url_encode(name.substr(colon + 1)) + ".svg");
    if (svg.ok() && is_valid_svg(svg.body)) out.push_back(IconResult{keyword, svg.body, IconSource::remote});
  }
  return out;
}

std::vector<IconResult> IconSearch::search(const std::string& keyword, int limit) {
  if (auto hits = remote(keyword, limit); !hits.empty()) return hits;
  if (auto svg = local_icon(keyword)) return {IconResult{keyword, *svg, IconSource::local}};
  return {IconResult{keyword, placeholder_icon(), IconSource::placeholder}};
}

std::vector<IconResult> search_icons(const std::string& keyword, int limit, IconSearch& client) {
  if (trim(keyword).empty()) throw Error("InvalidRequest", "icon keyword is empty");
  if (limit < 1 || limit > 20) throw Error("InvalidRequest", "icon limit must be between 1 and 20");
  return client.search(trim(keyword), limit);
}

}  // namespace gm::tools
