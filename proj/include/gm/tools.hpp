#pragma once

// Agent-managed design tools. Each executor sits behind a backend interface
// with a deterministic offline implementation, so the whole pipeline runs
// without network or GPU.

#include "gm/agent.hpp"
#include "gm/http.hpp"
#include "gm/image.hpp"
#include "gm/layout.hpp"
#include "gm/model.hpp"
#include "gm/text_model.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace gm::tools {

// ---------------------------------------------------------------------------
// Image generation

enum class ImageKind { pivot, background };
enum class ImageStyle { watercolor, render_3d, flat, photo, none };
enum class ImageEffect { blur, focused, none };

std::string_view to_string(ImageStyle s);
std::string_view to_string(ImageEffect e);
ImageStyle image_style_from(std::string_view s);
ImageEffect image_effect_from(std::string_view s);
const std::vector<std::string>& style_names();
const std::vector<std::string>& effect_names();

struct ImageRequest {
  std::string caption;
  ImageKind kind = ImageKind::pivot;
  ImageStyle style = ImageStyle::none;
  ImageEffect effect = ImageEffect::none;
  std::uint64_t seed = 0;
};

inline constexpr std::string_view kPivotTemplate = "a focused image of ";
inline constexpr std::string_view kBackgroundTemplate = "a background of ";

/// Template for the kind filled with the caption, then ", style" and
/// ", effect" for non-none values.
std::string assemble_prompt(const ImageRequest& req);

/// 1024x1024 for pivots; 1024 wide at the canvas aspect for backgrounds.
std::pair<int, int> image_size(ImageKind kind, const CanvasSpec& canvas);

class BackendUnavailable : public Error {
 public:
  explicit BackendUnavailable(const std::string& msg) : Error("BackendUnavailable", msg) {}
};

class ImageBackend {
 public:
  virtual ~ImageBackend() = default;
  virtual std::vector<std::uint8_t> txt2img(const std::string& prompt, int width, int height,
                                            std::uint64_t seed) = 0;
};

/// Seeded gradient, prompt-hash palette and the caption stamped into the bitmap.
class StubImageBackend final : public ImageBackend {
 public:
  std::vector<std::uint8_t> txt2img(const std::string& prompt, int width, int height,
                                    std::uint64_t seed) override;
};

/// `POST {endpoint}/txt2img` {prompt,width,height,steps:50,seed} -> {png_base64}.
class RemoteImageBackend final : public ImageBackend {
 public:
  RemoteImageBackend(std::shared_ptr<HttpClient> http, std::string endpoint);
  std::vector<std::uint8_t> txt2img(const std::string& prompt, int width, int height,
                                    std::uint64_t seed) override;

 private:
  std::shared_ptr<HttpClient> http_;
  std::string endpoint_;
};

/// Tries `primary`, falls back to `fallback` on BackendUnavailable.
class FallbackImageBackend final : public ImageBackend {
 public:
  FallbackImageBackend(std::shared_ptr<ImageBackend> primary, std::shared_ptr<ImageBackend> fallback)
      : primary_(std::move(primary)), fallback_(std::move(fallback)) {}
  std::vector<std::uint8_t> txt2img(const std::string& prompt, int width, int height,
                                    std::uint64_t seed) override;

 private:
  std::shared_ptr<ImageBackend> primary_;
  std::shared_ptr<ImageBackend> fallback_;
};

DesignResource generate_image(const ImageRequest& req, const CanvasSpec& canvas, ImageBackend& backend);

// ---------------------------------------------------------------------------
// Information collection

struct BulletPoint {
  std::string icon_keyword;
  std::string headline;
  std::string content;
  bool operator==(const BulletPoint&) const = default;
};

struct InfoBundle {
  std::string title;
  std::vector<BulletPoint> bullet_points;
  bool operator==(const InfoBundle&) const = default;
};

class SchemaError : public Error {
 public:
  SchemaError(std::string path, std::string reason)
      : Error("SchemaError", "schema error at " + path + ": " + reason),
        path_(std::move(path)),
        reason_(std::move(reason)) {}
  const std::string& path() const { return path_; }
  const std::string& reason() const { return reason_; }

 private:
  std::string path_;
  std::string reason_;
};

nlohmann::json bundle_to_json(const InfoBundle& b);
/// Strict parse. Accepts the spaced key spellings ("bullet points",
/// "icon keyword") as well as the underscored ones. Throws SchemaError.
InfoBundle bundle_from_json(const nlohmann::json& j);
/// Parses model text (code fences tolerated) then validates. Throws SchemaError.
InfoBundle parse_bundle_text(std::string_view text);

class InfoSource {
 public:
  virtual ~InfoSource() = default;
  virtual InfoBundle collect(const std::string& topic, int bullet_count) = 0;
};

/// Fixture table keyed by the longest topic key contained in the request.
class StubInfoSource final : public InfoSource {
 public:
  InfoBundle collect(const std::string& topic, int bullet_count) override;
};

/// Prompts a model for the bundle JSON; one repair retry with the parse error.
class ModelInfoSource final : public InfoSource {
 public:
  explicit ModelInfoSource(std::shared_ptr<TextModel> model) : model_(std::move(model)) {}
  InfoBundle collect(const std::string& topic, int bullet_count) override;

 private:
  std::shared_ptr<TextModel> model_;
};

/// Checks topic and hint (1..8) then asks the source.
InfoBundle collect_information(const std::string& topic, int bullet_count_hint, InfoSource& source);

// ---------------------------------------------------------------------------
// Icons

enum class IconSource { remote, local, placeholder };
std::string_view to_string(IconSource s);

struct IconResult {
  std::string keyword;
  std::string svg;
  IconSource source = IconSource::placeholder;
};

/// Bundled keyword -> SVG pairs used when the remote search is unreachable.
const std::map<std::string, std::string>& local_icon_bundle();
std::string placeholder_icon();

/// Remote search (Iconify protocol) -> local bundle -> placeholder glyph.
class IconSearch {
 public:
  /// `http` may be null for offline use.
  IconSearch(std::shared_ptr<HttpClient> http = nullptr,
             std::string endpoint = "https://api.iconify.design");
  std::vector<IconResult> search(const std::string& keyword, int limit);

 private:
  std::vector<IconResult> remote(const std::string& keyword, int limit);

  std::shared_ptr<HttpClient> http_;
  std::string endpoint_;
};

std::vector<IconResult> search_icons(const std::string& keyword, int limit, IconSearch& client);

/// Local-bundle match: exact keyword, plural-stripped, then any word of it.
std::optional<std::string> local_icon(const std::string& keyword);

// ---------------------------------------------------------------------------
// Layout generation

class LayoutGenerationError : public Error {
 public:
  LayoutGenerationError(const std::string& msg, std::string last_report)
      : Error("LayoutGeneration", msg), last_report_(std::move(last_report)) {}
  const std::string& last_report() const { return last_report_; }

 private:
  std::string last_report_;
};

/// Prompts the model with the DSL grammar and the instruction; parses and
/// validates the answer, retrying once with the violation report.
layout::LayoutTree generate_layout(const std::string& instruction, TextModel& model);

/// Offline layout writer: answers with a built-in template chosen by keyword
/// (rows, columns, waved, grid).
class TemplateLayoutModel final : public TextModel {
 public:
  std::string complete(const std::vector<PromptTurn>& prompt) override;
};

/// Named built-in templates, all of which validate.
const std::map<std::string, std::string>& layout_templates();

// ---------------------------------------------------------------------------
// Image editing and clipping

class EditBackend {
 public:
  virtual ~EditBackend() = default;
  virtual std::vector<std::uint8_t> edit(std::span<const std::uint8_t> png, const std::string& instruction) = 0;
};

struct EditResult {
  std::vector<std::uint8_t> png;
  std::string warning;
};

/// grayscale / invert / blur by keyword; anything else returns the input
/// unchanged with a warning.
EditResult stub_edit(std::span<const std::uint8_t> png, const std::string& instruction);

class StubEditBackend final : public EditBackend {
 public:
  std::vector<std::uint8_t> edit(std::span<const std::uint8_t> png, const std::string& instruction) override;
};

/// `POST {endpoint}/edit` {png_base64, instruction} -> {png_base64}.
class RemoteEditBackend final : public EditBackend {
 public:
  RemoteEditBackend(std::shared_ptr<HttpClient> http, std::string endpoint);
  std::vector<std::uint8_t> edit(std::span<const std::uint8_t> png, const std::string& instruction) override;

 private:
  std::shared_ptr<HttpClient> http_;
  std::string endpoint_;
};

/// `backend` null selects the stub filters.
DesignResource edit_image(std::span<const std::uint8_t> png, const std::string& instruction,
                          EditBackend* backend);

struct RectSelector {
  Rect rect;
};
struct PointSelector {
  double x = 0, y = 0;
};
struct LineSelector {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
};
using Selector = std::variant<RectSelector, PointSelector, LineSelector>;

/// Semantic segmentation for point/line selections; returns a PNG with the
/// mask applied as alpha.
class SegmentationBackend {
 public:
  virtual ~SegmentationBackend() = default;
  virtual std::vector<std::uint8_t> segment(std::span<const std::uint8_t> png, const Selector& sel) = 0;
};

class SegmentationUnavailable : public Error {
 public:
  SegmentationUnavailable()
      : Error("SegmentationUnavailable", "point and line selections need a segmentation backend") {}
};

/// Rectangle selections are cropped locally; point/line go to `backend`.
DesignResource clip_image(std::span<const std::uint8_t> png, const Selector& selector,
                          SegmentationBackend* backend);

// ---------------------------------------------------------------------------
// Registry wiring

struct Toolkit {
  std::shared_ptr<ImageBackend> images = std::make_shared<StubImageBackend>();
  std::shared_ptr<EditBackend> editor;  // null: stub filters
  std::shared_ptr<InfoSource> info = std::make_shared<StubInfoSource>();
  std::shared_ptr<IconSearch> icons = std::make_shared<IconSearch>();
  std::shared_ptr<TextModel> layouts = std::make_shared<TemplateLayoutModel>();
};

/// Signatures for pivot_figure, background_figure, collect_information,
/// search_icons, generate_layout and edit_image.
std::vector<agent::ToolSignature> builtin_signatures();

/// Registers the six agent-managed tools backed by `kit`.
void register_builtin_tools(agent::ToolRegistry& registry, Toolkit kit);

/// Bundle + resolved icons, as carried by an information_collection resource.
struct CollectedInfo {
  InfoBundle bundle;
  std::map<std::string, IconResult> icons;
};
nlohmann::json collected_to_json(const CollectedInfo& c);
CollectedInfo collected_from_json(const nlohmann::json& j);

}  // namespace gm::tools
