#include "gm/model.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <set>

namespace gm {

using nlohmann::json;

double intersection_area(const Rect& a, const Rect& b) {
  const double ox = std::min(a.right(), b.right()) - std::max(a.x, b.x);
  const double oy = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
  return std::max(0.0, ox) * std::max(0.0, oy);
}

Rect clamp_to_canvas(Rect rect, const CanvasSpec& canvas) {
  const double cw = canvas.width;
  const double ch = canvas.height;
  if (rect.w > cw || rect.h > ch) {
    if (cw / rect.w <= ch / rect.h) {
      rect.h = rect.h * cw / rect.w;
      rect.w = cw;
    } else {
      rect.w = rect.w * ch / rect.h;
      rect.h = ch;
    }
    rect.x = (cw - rect.w) / 2;
    rect.y = (ch - rect.h) / 2;
    return rect;
  }
  rect.x = std::clamp(rect.x, 0.0, cw - rect.w);
  rect.y = std::clamp(rect.y, 0.0, ch - rect.h);
  return rect;
}

bool contains(const CanvasSpec& canvas, const Rect& r, double eps) {
  return r.x >= -eps && r.y >= -eps && r.right() <= canvas.width + eps &&
         r.bottom() <= canvas.height + eps;
}

bool is_hex_color(std::string_view s) {
  if (s.size() != 7 || s[0] != '#') return false;
  return std::all_of(s.begin() + 1, s.end(),
                     [](unsigned char c) { return std::isxdigit(c) != 0; });
}

// ---------------------------------------------------------------------------
// enum names

namespace {

template <typename E, std::size_t N>
E from_table(const std::array<std::string_view, N>& names, std::string_view s,
             const char* what) {
  for (std::size_t i = 0; i < N; ++i)
    if (names[i] == s) return static_cast<E>(i);
  throw Error("InvalidValue", std::string("unknown ") + what + ": '" + std::string(s) + "'");
}

constexpr std::array<std::string_view, 4> kAssetKinds{"text", "icon", "image", "background"};
constexpr std::array<std::string_view, 3> kAligns{"left", "center", "right"};
constexpr std::array<std::string_view, 5> kSlotTypes{"title", "image", "icon", "headline",
                                                     "content"};
constexpr std::array<std::string_view, 6> kTasks{"information_collection", "visual_element",
                                                 "pivot_figure",           "background",
                                                 "layout",                 "local_adjustment"};
constexpr std::array<std::string_view, 4> kMedia{"text_bundle", "svg", "png", "layout_dsl"};
constexpr std::array<std::string_view, 3> kRoles{"user", "assistant", "tool"};

}  // namespace

std::string_view to_string(AssetKind k) { return kAssetKinds[static_cast<int>(k)]; }
std::string_view to_string(TextAlign a) { return kAligns[static_cast<int>(a)]; }
std::string_view to_string(SlotType t) { return kSlotTypes[static_cast<int>(t)]; }
std::string_view to_string(DesignTask t) { return kTasks[static_cast<int>(t)]; }
std::string_view to_string(MediaKind m) { return kMedia[static_cast<int>(m)]; }
std::string_view to_string(Role r) { return kRoles[static_cast<int>(r)]; }

AssetKind asset_kind_from(std::string_view s) { return from_table<AssetKind>(kAssetKinds, s, "asset kind"); }
TextAlign text_align_from(std::string_view s) { return from_table<TextAlign>(kAligns, s, "text_align"); }
DesignTask design_task_from(std::string_view s) { return from_table<DesignTask>(kTasks, s, "task"); }
MediaKind media_kind_from(std::string_view s) { return from_table<MediaKind>(kMedia, s, "media"); }
Role role_from(std::string_view s) { return from_table<Role>(kRoles, s, "role"); }

std::optional<SlotType> slot_type_from(std::string_view s) {
  for (std::size_t i = 0; i < kSlotTypes.size(); ++i)
    if (kSlotTypes[i] == s) return static_cast<SlotType>(i);
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// document

const DesignAsset* InfographicDocument::find(std::string_view id) const {
  for (const auto& a : assets)
    if (a.id == id) return &a;
  return nullptr;
}

DesignAsset* InfographicDocument::find(std::string_view id) {
  for (auto& a : assets)
    if (a.id == id) return &a;
  return nullptr;
}

bool InfographicDocument::is_unplaced(std::string_view id) const {
  return std::find(unplaced.begin(), unplaced.end(), id) != unplaced.end();
}

int base_z(AssetKind kind) {
  switch (kind) {
    case AssetKind::background: return kBackgroundZ;
    case AssetKind::image: return 100;
    case AssetKind::icon: return 200;
    case AssetKind::text: return 300;
  }
  return 0;
}

int next_z(const InfographicDocument& doc, AssetKind kind) {
  if (kind == AssetKind::background) return kBackgroundZ;
  int z = base_z(kind);
  for (const auto& a : doc.assets)
    if (a.kind == kind) z = std::max(z, a.z + 1);
  return z;
}

std::string next_asset_id(InfographicDocument& doc) {
  std::string id;
  do {
    char buf[24];
    std::snprintf(buf, sizeof buf, "a%04d", ++doc.asset_seq);
    id = buf;
  } while (doc.find(id) != nullptr);
  return id;
}

DesignAsset& insert_asset(InfographicDocument& doc, DesignAsset asset, bool assign_z) {
  if (asset.id.empty()) asset.id = next_asset_id(doc);
  if (doc.find(asset.id) != nullptr)
    throw Error("DuplicateAsset", "asset id already present: " + asset.id);
  if (asset.kind == AssetKind::background) {
    std::vector<std::string> old;
    for (const auto& a : doc.assets)
      if (a.kind == AssetKind::background) old.push_back(a.id);
    for (const auto& id : old) remove_asset(doc, id);
    asset.rect = Rect{0, 0, double(doc.canvas.width), double(doc.canvas.height)};
    asset.z = kBackgroundZ;
    asset.role.reset();
  } else if (assign_z) {
    asset.z = next_z(doc, asset.kind);
  }
  doc.assets.push_back(std::move(asset));
  return doc.assets.back();
}

bool remove_asset(InfographicDocument& doc, std::string_view id) {
  auto it = std::find_if(doc.assets.begin(), doc.assets.end(),
                         [&](const DesignAsset& a) { return a.id == id; });
  if (it == doc.assets.end()) return false;
  doc.assets.erase(it);
  std::erase(doc.unplaced, std::string(id));
  return true;
}

std::vector<std::size_t> z_order(const InfographicDocument& doc) {
  std::vector<std::size_t> idx(doc.assets.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    const auto& x = doc.assets[a];
    const auto& y = doc.assets[b];
    if (x.z != y.z) return x.z < y.z;
    return x.id < y.id;
  });
  return idx;
}

std::vector<std::string> check_document(const InfographicDocument& doc) {
  std::vector<std::string> out;
  const auto& c = doc.canvas;
  if (c.width < 1 || c.height < 1) out.push_back("canvas size must be positive");
  if (!is_hex_color(c.background_color)) out.push_back("canvas background_color is not #RRGGBB");

  std::set<std::string> ids;
  int min_z = 0;
  bool first = true;
  for (const auto& a : doc.assets) {
    min_z = first ? a.z : std::min(min_z, a.z);
    first = false;
  }
  int backgrounds = 0;
  const bool has_background = std::any_of(doc.assets.begin(), doc.assets.end(), [](const auto& a) {
    return a.kind == AssetKind::background;
  });
  for (const auto& a : doc.assets) {
    const std::string where = "asset " + a.id + ": ";
    if (a.id.empty()) out.push_back("asset with empty id");
    if (!ids.insert(a.id).second) out.push_back(where + "duplicate id");
    if (!(a.rect.w > 0) || !(a.rect.h > 0)) out.push_back(where + "non-positive size");
    if (!contains(c, a.rect)) out.push_back(where + "rect exits the canvas");
    const auto& s = a.style;
    if (!is_hex_color(s.fill_color) || !is_hex_color(s.edge_color) ||
        (s.mask_color && !is_hex_color(*s.mask_color)))
      out.push_back(where + "color is not #RRGGBB");
    if (!(s.edge_thickness >= 0)) out.push_back(where + "negative edge_thickness");
    if (!(s.font_size > 0)) out.push_back(where + "font_size must be > 0");
    if (a.kind == AssetKind::icon && a.payload.find("viewBox") == std::string::npos)
      out.push_back(where + "icon payload lacks a viewBox");
    if (a.kind == AssetKind::background) {
      ++backgrounds;
      if (a.z != min_z) out.push_back(where + "background is not at the minimum z");
      if (a.rect != Rect{0, 0, double(c.width), double(c.height)})
        out.push_back(where + "background does not cover the canvas");
    } else if (has_background && a.z <= kBackgroundZ) {
      out.push_back(where + "z must sit above the background");
    }
  }
  if (backgrounds > 1) out.push_back("more than one background asset");
  std::set<std::string> seen;
  for (const auto& id : doc.unplaced) {
    if (!ids.count(id)) out.push_back("unplaced id not in document: " + id);
    if (!seen.insert(id).second) out.push_back("unplaced id listed twice: " + id);
  }
  return out;
}

// ---------------------------------------------------------------------------
// resources

MediaKind media_for(DesignTask task) {
  switch (task) {
    case DesignTask::information_collection: return MediaKind::text_bundle;
    case DesignTask::visual_element: return MediaKind::svg;
    case DesignTask::pivot_figure:
    case DesignTask::background:
    case DesignTask::local_adjustment: return MediaKind::png;
    case DesignTask::layout: return MediaKind::layout_dsl;
  }
  return MediaKind::text_bundle;
}

void check_pairing(const DesignResource& r) {
  if (media_for(r.task) != r.media)
    throw Error("InvalidResource", "task " + std::string(to_string(r.task)) +
                                       " cannot carry media " + std::string(to_string(r.media)));
}

const DesignResource* Conversation::find_resource(std::string_view id) const {
  for (const auto& m : messages)
    for (const auto& r : m.resources)
      if (r.resource_id == id) return &r;
  return nullptr;
}

const DesignResource* Conversation::latest_resource(DesignTask task) const {
  for (auto m = messages.rbegin(); m != messages.rend(); ++m)
    for (auto r = m->resources.rbegin(); r != m->resources.rend(); ++r)
      if (r->task == task) return &*r;
  return nullptr;
}

// ---------------------------------------------------------------------------
// JSON

void to_json(json& j, const Rect& r) { j = json{{"x", r.x}, {"y", r.y}, {"w", r.w}, {"h", r.h}}; }

void from_json(const json& j, Rect& r) {
  r.x = j.at("x").get<double>();
  r.y = j.at("y").get<double>();
  r.w = j.at("w").get<double>();
  r.h = j.at("h").get<double>();
}

void to_json(json& j, const CanvasSpec& c) {
  j = json{{"width", c.width}, {"height", c.height}, {"background_color", c.background_color}};
}

void from_json(const json& j, CanvasSpec& c) {
  c.width = j.at("width").get<int>();
  c.height = j.at("height").get<int>();
  c.background_color = j.value("background_color", std::string("#FFFFFF"));
}

void to_json(json& j, const StyleProps& s) {
  j = json{{"fill_color", s.fill_color},   {"edge_color", s.edge_color},
           {"edge_thickness", s.edge_thickness}, {"font_family", s.font_family},
           {"font_size", s.font_size},     {"bold", s.bold},
           {"italic", s.italic},           {"text_align", to_string(s.text_align)},
           {"mask_color", s.mask_color ? json(*s.mask_color) : json(nullptr)}};
}

StyleProps merge_style(StyleProps s, const json& j) {
  if (!j.is_object()) throw Error("InvalidOp", "style patch must be an object");
  for (const auto& [key, v] : j.items()) {
    if (key == "fill_color") s.fill_color = v.get<std::string>();
    else if (key == "edge_color") s.edge_color = v.get<std::string>();
    else if (key == "edge_thickness") s.edge_thickness = v.get<double>();
    else if (key == "font_family") s.font_family = v.get<std::string>();
    else if (key == "font_size") s.font_size = v.get<double>();
    else if (key == "bold") s.bold = v.get<bool>();
    else if (key == "italic") s.italic = v.get<bool>();
    else if (key == "text_align") s.text_align = text_align_from(v.get<std::string>());
    else if (key == "mask_color") {
      if (v.is_null()) s.mask_color.reset();
      else s.mask_color = v.get<std::string>();
    } else {
      throw Error("InvalidOp", "unknown style property: " + key);
    }
  }
  return s;
}

void from_json(const json& j, StyleProps& s) { s = merge_style(StyleProps{}, j); }

void to_json(json& j, const DesignAsset& a) {
  j = json{{"id", a.id},
           {"kind", to_string(a.kind)},
           {"rect", a.rect},
           {"z", a.z},
           {"style", a.style},
           {"payload", a.payload},
           {"role", a.role ? json(to_string(*a.role)) : json(nullptr)},
           {"group", a.group},
           {"resource_id", a.resource_id},
           {"pinned", a.pinned},
           {"overflow", a.overflow}};
}

void from_json(const json& j, DesignAsset& a) {
  a.id = j.at("id").get<std::string>();
  a.kind = asset_kind_from(j.at("kind").get<std::string>());
  a.rect = j.at("rect").get<Rect>();
  a.z = j.at("z").get<int>();
  a.style = j.at("style").get<StyleProps>();
  a.payload = j.at("payload").get<std::string>();
  a.role.reset();
  if (j.contains("role") && !j["role"].is_null()) {
    a.role = slot_type_from(j["role"].get<std::string>());
    if (!a.role) throw Error("InvalidValue", "unknown role for asset " + a.id);
  }
  a.group = j.value("group", -1);
  a.resource_id = j.value("resource_id", std::string());
  a.pinned = j.value("pinned", false);
  a.overflow = j.value("overflow", false);
}

void to_json(json& j, const InfographicDocument& d) {
  j = json{{"canvas", d.canvas},
           {"assets", d.assets},
           {"layout", d.layout ? json(*d.layout) : json(nullptr)},
           {"unplaced", d.unplaced},
           {"accent_color", d.accent_color},
           {"asset_seq", d.asset_seq}};
}

void from_json(const json& j, InfographicDocument& d) {
  d.canvas = j.at("canvas").get<CanvasSpec>();
  d.assets = j.at("assets").get<std::vector<DesignAsset>>();
  d.layout.reset();
  if (j.contains("layout") && !j["layout"].is_null()) d.layout = j["layout"].get<std::string>();
  d.unplaced = j.value("unplaced", std::vector<std::string>{});
  d.accent_color = j.value("accent_color", std::string(kDefaultAccent));
  d.asset_seq = j.value("asset_seq", 0);
}

void to_json(json& j, const DesignResource& r) {
  j = json{{"resource_id", r.resource_id}, {"task", to_string(r.task)},
           {"media", to_string(r.media)},  {"content", r.content},
           {"label", r.label},             {"warning", r.warning}};
}

void from_json(const json& j, DesignResource& r) {
  r.resource_id = j.at("resource_id").get<std::string>();
  r.task = design_task_from(j.at("task").get<std::string>());
  r.media = media_kind_from(j.at("media").get<std::string>());
  r.content = j.at("content").get<std::string>();
  r.label = j.value("label", std::string());
  r.warning = j.value("warning", std::string());
  r.data.clear();
  check_pairing(r);
}

void to_json(json& j, const Message& m) {
  j = json{{"role", to_string(m.role)}, {"text", m.text}, {"resources", m.resources}};
}

void from_json(const json& j, Message& m) {
  m.role = role_from(j.at("role").get<std::string>());
  m.text = j.at("text").get<std::string>();
  m.resources = j.value("resources", std::vector<DesignResource>{});
}

void to_json(json& j, const Conversation& c) {
  j = json{{"session_id", c.session_id}, {"messages", c.messages}};
}

void from_json(const json& j, Conversation& c) {
  c.session_id = j.at("session_id").get<std::string>();
  c.messages = j.at("messages").get<std::vector<Message>>();
}

}  // namespace gm
