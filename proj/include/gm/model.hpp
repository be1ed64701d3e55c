#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gm {

/// Base of every error the engine raises. `code()` is the stable,
/// machine-readable identifier surfaced through the REST API and CLI.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

// ---------------------------------------------------------------------------
// Geometry
// ---------------------------------------------------------------------------

/// Axis-aligned rectangle in canvas pixels. Origin top-left, y grows down.
struct Rect {
  double x = 0;
  double y = 0;
  double w = 1;
  double h = 1;

  double area() const { return w * h; }
  double right() const { return x + w; }
  double bottom() const { return y + h; }
  bool operator==(const Rect&) const = default;
};

double intersection_area(const Rect& a, const Rect& b);

struct CanvasSpec {
  int width = 1280;
  int height = 720;
  std::string background_color = "#FFFFFF";
  bool operator==(const CanvasSpec&) const = default;
};

/// Moves `rect` inside the canvas. Rects larger than the canvas are first
/// scaled down (aspect preserved) and centered.
Rect clamp_to_canvas(Rect rect, const CanvasSpec& canvas);

bool contains(const CanvasSpec& canvas, const Rect& rect, double eps = 1e-9);

/// True for `#RRGGBB` (either hex case).
bool is_hex_color(std::string_view s);

// ---------------------------------------------------------------------------
// Assets
// ---------------------------------------------------------------------------

enum class AssetKind { text, icon, image, background };
enum class TextAlign { left, center, right };
enum class SlotType { title, image, icon, headline, content };

std::string_view to_string(AssetKind k);
std::string_view to_string(TextAlign a);
std::string_view to_string(SlotType t);
AssetKind asset_kind_from(std::string_view s);
TextAlign text_align_from(std::string_view s);
std::optional<SlotType> slot_type_from(std::string_view s);

struct StyleProps {
  std::string fill_color = "#333333";
  std::string edge_color = "#000000";
  double edge_thickness = 1.0;
  std::string font_family = "sans-serif";
  double font_size = 16.0;
  bool bold = false;
  bool italic = false;
  TextAlign text_align = TextAlign::left;
  std::optional<std::string> mask_color;
  bool operator==(const StyleProps&) const = default;
};

struct DesignAsset {
  std::string id;
  AssetKind kind = AssetKind::text;
  Rect rect;
  int z = 0;
  StyleProps style;
  /// text string | inline SVG markup | relative image path
  std::string payload;

  /// Slot type this asset fills when a layout is applied; bullet index for
  /// icon/headline/content triples (-1 otherwise).
  std::optional<SlotType> role;
  int group = -1;
  std::string resource_id;
  /// Set on the first manual move/resize; re-layout leaves pinned assets alone.
  bool pinned = false;
  /// Text did not fit even at the minimum font size.
  bool overflow = false;

  bool operator==(const DesignAsset&) const = default;
};

inline constexpr const char* kDefaultAccent = "#333333";

struct InfographicDocument {
  CanvasSpec canvas;
  std::vector<DesignAsset> assets;
  /// Canonical DSL text of the applied layout.
  std::optional<std::string> layout;
  std::vector<std::string> unplaced;
  /// Icon colour; the darkest colour sampled from the background image.
  std::string accent_color = kDefaultAccent;
  /// Monotonic counter backing fresh asset ids.
  int asset_seq = 0;

  bool operator==(const InfographicDocument&) const = default;

  const DesignAsset* find(std::string_view id) const;
  DesignAsset* find(std::string_view id);
  bool is_unplaced(std::string_view id) const;
};

inline constexpr int kBackgroundZ = 0;
int base_z(AssetKind kind);

/// Next z for `kind`: one above the highest z of that kind, or the kind's base.
int next_z(const InfographicDocument& doc, AssetKind kind);

/// Fresh zero-padded id ("a0001", ...) so lexicographic and numeric order agree.
std::string next_asset_id(InfographicDocument& doc);

/// Inserts `asset`, assigning an id and z when they are empty/unset.
/// A background asset replaces any existing background and is stretched to
/// the full canvas.
DesignAsset& insert_asset(InfographicDocument& doc, DesignAsset asset, bool assign_z = true);

bool remove_asset(InfographicDocument& doc, std::string_view id);

/// Asset indices ordered by (z, id).
std::vector<std::size_t> z_order(const InfographicDocument& doc);

/// Every invariant violation of the document, empty when it is valid.
std::vector<std::string> check_document(const InfographicDocument& doc);

// ---------------------------------------------------------------------------
// Conversation and resources
// ---------------------------------------------------------------------------

enum class DesignTask {
  information_collection,
  visual_element,
  pivot_figure,
  background,
  layout,
  local_adjustment
};
enum class MediaKind { text_bundle, svg, png, layout_dsl };

std::string_view to_string(DesignTask t);
std::string_view to_string(MediaKind m);
DesignTask design_task_from(std::string_view s);
MediaKind media_kind_from(std::string_view s);

/// Media a task must produce. local_adjustment results are edited rasters.
MediaKind media_for(DesignTask task);

struct DesignResource {
  std::string resource_id;
  DesignTask task = DesignTask::information_collection;
  MediaKind media = MediaKind::text_bundle;
  /// text_bundle: bundle JSON; svg: markup; png: relative asset path;
  /// layout_dsl: canonical DSL.
  std::string content;
  /// Human label: caption, keyword, topic or instruction.
  std::string label;
  std::string warning;
  /// Raw PNG bytes. Not serialized; persisted as a blob under `content`.
  std::vector<std::uint8_t> data;

  bool operator==(const DesignResource&) const = default;
};

/// Throws gm::Error("InvalidResource") when task and media disagree.
void check_pairing(const DesignResource& r);

enum class Role { user, assistant, tool };
std::string_view to_string(Role r);
Role role_from(std::string_view s);

struct Message {
  Role role = Role::user;
  std::string text;
  std::vector<DesignResource> resources;
  bool operator==(const Message&) const = default;
};

struct Conversation {
  std::string session_id;
  std::vector<Message> messages;

  bool operator==(const Conversation&) const = default;

  void append(Message m) { messages.push_back(std::move(m)); }
  const DesignResource* find_resource(std::string_view id) const;
  const DesignResource* latest_resource(DesignTask task) const;
};

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

void to_json(nlohmann::json& j, const Rect& r);
void from_json(const nlohmann::json& j, Rect& r);
void to_json(nlohmann::json& j, const CanvasSpec& c);
void from_json(const nlohmann::json& j, CanvasSpec& c);
void to_json(nlohmann::json& j, const StyleProps& s);
void from_json(const nlohmann::json& j, StyleProps& s);
void to_json(nlohmann::json& j, const DesignAsset& a);
void from_json(const nlohmann::json& j, DesignAsset& a);
void to_json(nlohmann::json& j, const InfographicDocument& d);
void from_json(const nlohmann::json& j, InfographicDocument& d);
void to_json(nlohmann::json& j, const DesignResource& r);
void from_json(const nlohmann::json& j, DesignResource& r);
void to_json(nlohmann::json& j, const Message& m);
void from_json(const nlohmann::json& j, Message& m);
void to_json(nlohmann::json& j, const Conversation& c);
void from_json(const nlohmann::json& j, Conversation& c);

/// Applies the keys present in `patch` over `style`.
StyleProps merge_style(StyleProps style, const nlohmann::json& patch);

}  // namespace gm
