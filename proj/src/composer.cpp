#include "gm/composer.hpp"

#include "gm/image.hpp"
#include "gm/util.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

namespace gm::composer {

namespace {

std::size_t utf8_length(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char c : s)
    if ((c & 0xC0) != 0x80) ++n;
  return n;
}

/// Byte offset of the `n`-th code point (or s.size()).
std::size_t utf8_offset(std::string_view s, std::size_t n) {
  std::size_t seen = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if ((static_cast<unsigned char>(s[i]) & 0xC0) != 0x80) {
      if (seen == n) return i;
      ++seen;
    }
  }
  return s.size();
}

std::vector<std::string> wrap(std::string_view text, double width, double size) {
  const std::size_t per_line = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(width / (kAdvance * size))));
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto nl = text.find('\n', start);
    const std::string_view para = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    std::istringstream words{std::string(para)};
    std::string word, line;
    bool any = false;
    while (words >> word) {
      any = true;
      // hard-split words longer than a line
      while (utf8_length(word) > per_line) {
        if (!line.empty()) {
          lines.push_back(line);
          line.clear();
        }
        const auto cut = utf8_offset(word, per_line);
        lines.push_back(word.substr(0, cut));
        word = word.substr(cut);
      }
      if (line.empty()) {
        line = word;
      } else if (utf8_length(line) + 1 + utf8_length(word) <= per_line) {
        line += ' ' + word;
      } else {
        lines.push_back(line);
        line = word;
      }
    }
    if (!line.empty() || !any) lines.push_back(line);
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  return lines;
}

}  // namespace

TextFit fit_text(std::string_view text, const Rect& rect, const StyleProps& style) {
  double size = style.font_size;  // an explicitly small font is never enlarged
  for (;;) {
    auto lines = wrap(text, rect.w, size);
    if (static_cast<double>(lines.size()) * size * kLineHeight <= rect.h + 1e-9) return TextFit{size, std::move(lines), false};
    if (size <= kMinFontSize) {
      const auto fit = static_cast<std::size_t>(std::floor((rect.h + 1e-9) / (size * kLineHeight)));
      lines.resize(std::max<std::size_t>(1, fit));
      return TextFit{size, std::move(lines), true};
    }
    size = std::max(kMinFontSize, size - 1.0);
  }
}

std::string darkest_color(std::span<const std::uint8_t> png) {
  Image img;
  try {
    img = decode_png(png);
  } catch (const Error&) {
    return kDefaultAccent;
  }
  if (img.width == 0 || img.height == 0) return kDefaultAccent;
  const int step = std::max(1, std::min(img.width, img.height) / 64);
  int best = -1;
  Rgb color{0x33, 0x33, 0x33};
  for (int y = 0; y < img.height; y += step) {
    for (int x = 0; x < img.width; x += step) {
      const auto* p = img.px(x, y);
      if (p[3] == 0) continue;
      const int lum = 299 * p[0] + 587 * p[1] + 114 * p[2];
      if (best < 0 || lum < best) {
        best = lum;
        color = Rgb{p[0], p[1], p[2]};
      }
    }
  }
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02X%02X%02X", color.r, color.g, color.b);
  return buf;
}

StyleProps text_style(SlotType role) {
  StyleProps s;
  switch (role) {
    case SlotType::title:
      s.font_size = 40;
      s.bold = true;
      s.text_align = TextAlign::center;
      s.fill_color = "#222222";
      break;
    case SlotType::headline:
      s.font_size = 22;
      s.bold = true;
      s.fill_color = "#222222";
      break;
    default:
      s.font_size = 15;
      s.fill_color = "#444444";
      break;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Resource -> assets
// ---------------------------------------------------------------------------

namespace {

int next_group(const InfographicDocument& doc) {
  int g = -1;
  for (const auto& a : doc.assets) g = std::max(g, a.group);
  return g + 1;
}

void set_background(InfographicDocument& doc, const DesignResource& r) {
  const std::string old_accent = doc.accent_color;
  if (!r.data.empty()) doc.accent_color = darkest_color(r.data);
  for (auto& a : doc.assets) {
    if (a.kind == AssetKind::icon && a.style.fill_color == old_accent) {
      a.style.fill_color = doc.accent_color;
      a.style.edge_color = doc.accent_color;
    }
  }
  for (auto& a : doc.assets) {
    if (a.kind == AssetKind::background) {
      a.payload = r.content;
      a.resource_id = r.resource_id;
      return;
    }
  }
  DesignAsset bg;
  bg.kind = AssetKind::background;
  bg.payload = r.content;
  bg.resource_id = r.resource_id;
  insert_asset(doc, std::move(bg));
}

DesignAsset icon_asset(const InfographicDocument& doc, std::string svg) {
  DesignAsset a;
  a.kind = AssetKind::icon;
  a.payload = std::move(svg);
  a.style.fill_color = doc.accent_color;
  a.style.edge_color = doc.accent_color;
  a.style.edge_thickness = 0;
  return a;
}

void add_resources(InfographicDocument& doc, const std::optional<tools::InfoBundle>& bundle, const IconMap& icons,
                   const std::vector<DesignResource>& images, const std::string& bundle_resource_id) {
  for (const auto& r : images) {
    if (r.media != MediaKind::png) continue;
    if (r.task == DesignTask::background) {
      set_background(doc, r);
      continue;
    }
    DesignAsset a;
    a.kind = AssetKind::image;
    a.payload = r.content;
    a.resource_id = r.resource_id;
    a.role = SlotType::image;
    insert_asset(doc, std::move(a));
  }
  if (!bundle) return;

  DesignAsset title;
  title.kind = AssetKind::text;
  title.payload = bundle->title;
  title.role = SlotType::title;
  title.style = text_style(SlotType::title);
  title.resource_id = bundle_resource_id;
  insert_asset(doc, std::move(title));

  int group = next_group(doc);
  for (const auto& p : bundle->bullet_points) {
    std::string svg;
    if (auto it = icons.find(p.icon_keyword); it != icons.end()) {
      svg = it->second.svg;
    } else if (auto local = tools::local_icon(p.icon_keyword)) {
      svg = *local;
    } else {
      svg = tools::placeholder_icon();
    }
    DesignAsset icon = icon_asset(doc, std::move(svg));
    icon.role = SlotType::icon;
    icon.group = group;
    icon.resource_id = bundle_resource_id;
    insert_asset(doc, std::move(icon));

    for (auto [role, text] : {std::pair{SlotType::headline, p.headline}, std::pair{SlotType::content, p.content}}) {
      DesignAsset t;
      t.kind = AssetKind::text;
      t.payload = text;
      t.role = role;
      t.group = group;
      t.style = text_style(role);
      t.resource_id = bundle_resource_id;
      insert_asset(doc, std::move(t));
    }
    ++group;
  }
}

// ---------------------------------------------------------------------------
// Placement
// ---------------------------------------------------------------------------

struct SlotTable {
  std::vector<Rect> titles;
  std::vector<Rect> images;
  /// Bullet containers in depth-first order: slot type -> first rect.
  std::vector<std::map<SlotType, Rect>> bullets;
};

bool is_bullet_role(SlotType t) { return t == SlotType::icon || t == SlotType::headline || t == SlotType::content; }

SlotTable slot_table(const std::vector<layout::PlacementTarget>& targets) {
  SlotTable t;
  std::map<int, std::size_t> rank;
  for (const auto& p : targets) {
    if (p.slot_type == SlotType::title) {
      t.titles.push_back(p.abs_rect);
    } else if (p.slot_type == SlotType::image) {
      t.images.push_back(p.abs_rect);
    } else {
      auto [it, fresh] = rank.emplace(p.container_index, t.bullets.size());
      if (fresh) t.bullets.emplace_back();
      t.bullets[it->second].emplace(p.slot_type, p.abs_rect);
    }
  }
  return t;
}

void stack_tray(InfographicDocument& doc) {
  const double W = doc.canvas.width;
  const double H = doc.canvas.height;
  const double cell = kTrayWidth * W;
  const std::size_t rows = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(H / cell)));
  const double inset = (1.0 - kTrayScale) / 2.0 * cell;
  for (std::size_t i = 0; i < doc.unplaced.size(); ++i) {
    DesignAsset* a = doc.find(doc.unplaced[i]);
    if (!a) continue;
    const double col = static_cast<double>(i / rows);
    const double row = static_cast<double>(i % rows);
    a->rect = clamp_to_canvas(Rect{W - (col + 1) * cell + inset, row * cell + inset, kTrayScale * cell, kTrayScale * cell},
                              doc.canvas);
  }
}

void place(InfographicDocument& doc, const SlotTable& slots) {
  std::vector<DesignAsset*> movable;
  for (auto& a : doc.assets)
    if (!a.pinned && a.kind != AssetKind::background && a.role) movable.push_back(&a);
  std::sort(movable.begin(), movable.end(), [](const DesignAsset* x, const DesignAsset* y) {
    if (x->group != y->group) return x->group < y->group;
    return x->id < y->id;
  });

  std::vector<int> groups;
  for (const auto* a : movable)
    if (is_bullet_role(*a->role) && (groups.empty() || groups.back() != a->group)) groups.push_back(a->group);

  std::size_t next_title = 0, next_image = 0;
  std::set<std::pair<std::size_t, SlotType>> used;
  std::vector<std::string> unplaced;
  for (auto* a : movable) {
    std::optional<Rect> slot;
    const SlotType role = *a->role;
    if (role == SlotType::title) {
      if (next_title < slots.titles.size()) slot = slots.titles[next_title++];
    } else if (role == SlotType::image) {
      if (next_image < slots.images.size()) slot = slots.images[next_image++];
    } else {
      const auto k = static_cast<std::size_t>(std::find(groups.begin(), groups.end(), a->group) - groups.begin());
      if (k < slots.bullets.size() && !used.count({k, role})) {
        if (auto it = slots.bullets[k].find(role); it != slots.bullets[k].end()) {
          slot = it->second;
          used.insert({k, role});
        }
      }
    }
    if (slot) {
      a->rect = clamp_to_canvas(*slot, doc.canvas);
    } else {
      unplaced.push_back(a->id);
    }
  }
  std::sort(unplaced.begin(), unplaced.end());
  doc.unplaced = std::move(unplaced);
  stack_tray(doc);
  refresh_overflow(doc);
}

}  // namespace

void refresh_overflow(InfographicDocument& doc) {
  for (auto& a : doc.assets)
    if (a.kind == AssetKind::text) a.overflow = fit_text(a.payload, a.rect, a.style).overflow;
}

InfographicDocument apply_layout(InfographicDocument doc, const layout::LayoutTree& tree) {
  const auto targets = layout::draw_layout(tree, doc.canvas);
  doc.layout = layout::serialize_layout(tree);
  place(doc, slot_table(targets));
  return doc;
}

InfographicDocument arrange(InfographicDocument doc) {
  if (doc.layout) {
    const auto tree = layout::parse_layout(*doc.layout);
    return apply_layout(std::move(doc), tree);
  }
  place(doc, SlotTable{});
  return doc;
}

InfographicDocument auto_place(InfographicDocument doc, const std::optional<tools::InfoBundle>& bundle,
                               const IconMap& icons, const std::vector<DesignResource>& images,
                               const std::optional<layout::LayoutTree>& tree, const std::string& bundle_resource_id) {
  std::optional<layout::LayoutTree> use = tree;
  if (!use) {
    if (!doc.layout) throw NoLayout();
    use = layout::parse_layout(*doc.layout);
  }
  const auto targets = layout::draw_layout(*use, doc.canvas);  // validates before any mutation
  add_resources(doc, bundle, icons, images, bundle_resource_id);
  doc.layout = layout::serialize_layout(*use);
  place(doc, slot_table(targets));
  return doc;
}

InfographicDocument stage(InfographicDocument doc, const std::optional<tools::InfoBundle>& bundle,
                          const IconMap& icons, const std::vector<DesignResource>& images,
                          const std::string& bundle_resource_id) {
  add_resources(doc, bundle, icons, images, bundle_resource_id);
  return arrange(std::move(doc));
}

InfographicDocument place_resource(InfographicDocument doc, const DesignResource& r, double x, double y) {
  switch (r.media) {
    case MediaKind::layout_dsl:
      return apply_layout(std::move(doc), layout::parse_layout(r.content));
    case MediaKind::text_bundle: {
      const auto info = tools::collected_from_json(nlohmann::json::parse(r.content));
      return stage(std::move(doc), info.bundle, info.icons, {}, r.resource_id);
    }
    case MediaKind::svg: {
      DesignAsset a = icon_asset(doc, r.content);
      a.resource_id = r.resource_id;
      a.rect = clamp_to_canvas(Rect{x - kDropIconSize / 2, y - kDropIconSize / 2, kDropIconSize, kDropIconSize},
                               doc.canvas);
      insert_asset(doc, std::move(a));
      return doc;
    }
    case MediaKind::png: {
      if (r.task == DesignTask::background) {
        set_background(doc, r);
        return doc;
      }
      double w = 0.35 * std::min(doc.canvas.width, doc.canvas.height);
      double h = w;
      if (!r.data.empty()) {
        try {
          const Image img = decode_png(r.data);
          if (img.width > 0) h = w * img.height / img.width;
        } catch (const Error&) {
        }
      }
      DesignAsset a;
      a.kind = AssetKind::image;
      a.payload = r.content;
      a.resource_id = r.resource_id;
      a.rect = clamp_to_canvas(Rect{x - w / 2, y - h / 2, w, h}, doc.canvas);
      insert_asset(doc, std::move(a));
      return doc;
    }
  }
  return doc;
}

// ---------------------------------------------------------------------------
// SVG export
// ---------------------------------------------------------------------------

namespace {

std::string n(double v) { return fmt_num(v, 2); }

std::string attr(std::string_view name, std::string_view value) {
  return " " + std::string(name) + "=\"" + xml_escape(value) + "\"";
}

std::string rect_attrs(const Rect& r) {
  return attr("x", n(r.x)) + attr("y", n(r.y)) + attr("width", n(r.w)) + attr("height", n(r.h));
}

std::string classes(const DesignAsset& a) {
  std::string c = "gm-" + std::string(to_string(a.kind));
  if (a.role && to_string(*a.role) != to_string(a.kind)) c += " gm-" + std::string(to_string(*a.role));
  return c;
}

std::string common(const DesignAsset& a) {
  std::string s = attr("id", a.id) + attr("class", classes(a));
  if (a.group >= 0) s += attr("data-group", std::to_string(a.group));
  return s;
}

std::string href(const DesignAsset& a, const ExportOptions& opts) {
  if (!opts.link_assets && opts.blob) {
    if (auto bytes = opts.blob(a.payload)) return "data:image/png;base64," + base64_encode(*bytes);
  }
  return a.payload;
}

/// viewBox and inner markup of a standalone SVG icon.
std::pair<std::string, std::string> icon_parts(const std::string& svg) {
  std::string view_box = "0 0 24 24";
  const auto open = svg.find("<svg");
  const auto open_end = open == std::string::npos ? std::string::npos : svg.find('>', open);
  const auto close = svg.rfind("</svg>");
  if (open_end == std::string::npos || close == std::string::npos || close < open_end) return {view_box, ""};
  const std::string tag = svg.substr(open, open_end - open);
  if (auto vb = tag.find("viewBox=\""); vb != std::string::npos) {
    const auto end = tag.find('"', vb + 9);
    if (end != std::string::npos) view_box = tag.substr(vb + 9, end - vb - 9);
  }
  return {view_box, svg.substr(open_end + 1, close - open_end - 1)};
}

void write_text(std::ostringstream& out, const DesignAsset& a) {
  const auto fit = fit_text(a.payload, a.rect, a.style);
  double x = a.rect.x;
  const char* anchor = "start";
  if (a.style.text_align == TextAlign::center) {
    x = a.rect.x + a.rect.w / 2;
    anchor = "middle";
  } else if (a.style.text_align == TextAlign::right) {
    x = a.rect.right();
    anchor = "end";
  }
  std::string text = "<text" + (a.style.mask_color ? std::string() : common(a)) + attr("x", n(x)) +
                     attr("y", n(a.rect.y + fit.font_size)) + attr("font-family", a.style.font_family) +
                     attr("font-size", n(fit.font_size));
  if (a.style.bold) text += attr("font-weight", "bold");
  if (a.style.italic) text += attr("font-style", "italic");
  text += attr("fill", a.style.fill_color) + attr("text-anchor", anchor) + ">";
  for (std::size_t i = 0; i < fit.lines.size(); ++i) {
    text += "<tspan" + attr("x", n(x));
    if (i > 0) text += attr("dy", n(fit.font_size * kLineHeight));
    text += ">" + xml_escape(fit.lines[i]) + "</tspan>";
  }
  text += "</text>";
  if (a.style.mask_color) {
    out << "<g" << common(a) << "><rect" << rect_attrs(a.rect) << attr("fill", *a.style.mask_color) << "/>" << text
        << "</g>\n";
  } else {
    out << text << "\n";
  }
}

}  // namespace

std::string export_svg(const InfographicDocument& doc, const ExportOptions& opts) {
  std::ostringstream out;
  const auto W = std::to_string(doc.canvas.width);
  const auto H = std::to_string(doc.canvas.height);
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" xmlns:xlink=\"http://www.w3.org/1999/xlink\" version=\"1.1\""
      << attr("width", W) << attr("height", H) << attr("viewBox", "0 0 " + W + " " + H) << ">\n";

  const bool has_background = std::any_of(doc.assets.begin(), doc.assets.end(),
                                          [](const DesignAsset& a) { return a.kind == AssetKind::background; });
  if (!has_background)
    out << "<rect class=\"gm-canvas\"" << rect_attrs(Rect{0, 0, double(doc.canvas.width), double(doc.canvas.height)})
        << attr("fill", doc.canvas.background_color) << "/>\n";

  for (std::size_t i : z_order(doc)) {
    const DesignAsset& a = doc.assets[i];
    if (doc.is_unplaced(a.id)) continue;
    switch (a.kind) {
      case AssetKind::background:
        if (is_hex_color(a.payload)) {
          out << "<rect" << common(a) << rect_attrs(a.rect) << attr("fill", a.payload) << "/>\n";
        } else {
          out << "<image" << common(a) << rect_attrs(a.rect) << attr("preserveAspectRatio", "xMidYMid slice")
              << attr("xlink:href", href(a, opts)) << "/>\n";
        }
        break;
      case AssetKind::image:
        out << "<image" << common(a) << rect_attrs(a.rect) << attr("preserveAspectRatio", "xMidYMid meet")
            << attr("xlink:href", href(a, opts)) << "/>\n";
        break;
      case AssetKind::icon: {
        const auto [view_box, inner] = icon_parts(a.payload);
        out << "<svg" << common(a) << rect_attrs(a.rect) << attr("viewBox", view_box)
            << attr("preserveAspectRatio", "xMidYMid meet") << attr("color", a.style.fill_color)
            << attr("fill", a.style.fill_color);
        if (a.style.edge_thickness > 0)
          out << attr("stroke", a.style.edge_color) << attr("stroke-width", n(a.style.edge_thickness));
        out << ">" << inner << "</svg>\n";
        break;
      }
      case AssetKind::text:
        write_text(out, a);
        break;
    }
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace gm::composer
