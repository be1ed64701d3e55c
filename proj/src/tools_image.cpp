#include "gm/tools.hpp"
#include "gm/util.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

namespace gm::tools {

using nlohmann::json;

namespace {

const std::array<std::string_view, 5> kStyles{"watercolor", "3d_render", "flat", "photo", "none"};
const std::array<std::string_view, 3> kEffects{"blur", "focused", "none"};

}  // namespace

std::string_view to_string(ImageStyle s) { return kStyles[static_cast<int>(s)]; }
std::string_view to_string(ImageEffect e) { return kEffects[static_cast<int>(e)]; }

ImageStyle image_style_from(std::string_view s) {
  for (std::size_t i = 0; i < kStyles.size(); ++i)
    if (kStyles[i] == s) return static_cast<ImageStyle>(i);
  throw Error("InvalidRequest", "unknown style: " + std::string(s));
}

ImageEffect image_effect_from(std::string_view s) {
  for (std::size_t i = 0; i < kEffects.size(); ++i)
    if (kEffects[i] == s) return static_cast<ImageEffect>(i);
  throw Error("InvalidRequest", "unknown effect: " + std::string(s));
}

const std::vector<std::string>& style_names() {
  static const std::vector<std::string> names(kStyles.begin(), kStyles.end());
  return names;
}

const std::vector<std::string>& effect_names() {
  static const std::vector<std::string> names(kEffects.begin(), kEffects.end());
  return names;
}

std::string assemble_prompt(const ImageRequest& req) {
  std::string prompt(req.kind == ImageKind::pivot ? kPivotTemplate : kBackgroundTemplate);
  prompt += req.caption;
  if (req.style != ImageStyle::none) prompt += ", " + std::string(to_string(req.style));
  if (req.effect != ImageEffect::none) prompt += ", " + std::string(to_string(req.effect));
  return prompt;
}

std::pair<int, int> image_size(ImageKind kind, const CanvasSpec& canvas) {
  if (kind == ImageKind::pivot) return {1024, 1024};
  const int h = static_cast<int>(std::lround(1024.0 * canvas.height / canvas.width));
  return {1024, std::max(1, h)};
}

// ---------------------------------------------------------------------------
// stub generator

namespace {

Rgb mix(Rgb a, Rgb b, unsigned t /*0..255*/) {
  auto m = [t](std::uint8_t x, std::uint8_t y) {
    return static_cast<std::uint8_t>((x * (255u - t) + y * t + 127u) / 255u);
  };
  return {m(a.r, b.r), m(a.g, b.g), m(a.b, b.b)};
}

Rgb color_from(std::uint64_t bits, int lo, int hi) {
  auto ch = [&](int shift) {
    return static_cast<std::uint8_t>(lo + static_cast<int>((bits >> shift) & 0xFF) * (hi - lo) / 255);
  };
  return {ch(0), ch(8), ch(16)};
}

}  // namespace

std::vector<std::uint8_t> StubImageBackend::txt2img(const std::string& prompt, int width, int height,
                                                    std::uint64_t seed) {
  if (width <= 0 || height <= 0) throw Error("InvalidRequest", "image size must be positive");
  const std::uint64_t h = fnv1a(prompt);
  std::mt19937_64 rng(h ^ (seed * 0x9E3779B97F4A7C15ull));

  // palette: two light tones for the gradient, one saturated accent, one dark ink
  const Rgb light_a = color_from(h, 150, 245);
  const Rgb light_b = color_from(h >> 24, 120, 235);
  const Rgb accent = color_from(rng(), 40, 220);
  const Rgb ink = color_from(h >> 40, 10, 70);

  Image img(width, height);
  const unsigned span = static_cast<unsigned>(std::max(1, width + height - 2));
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const Rgb c = mix(light_a, light_b, static_cast<unsigned>(x + y) * 255u / span);
      auto* p = img.px(x, y);
      p[0] = c.r;
      p[1] = c.g;
      p[2] = c.b;
      p[3] = 255;
    }
  }

  // soft blobs
  const int blobs = 3 + static_cast<int>(rng() % 4);
  for (int i = 0; i < blobs; ++i) {
    const int cx = static_cast<int>(rng() % static_cast<std::uint64_t>(width));
    const int cy = static_cast<int>(rng() % static_cast<std::uint64_t>(height));
    const int r = std::max(4, static_cast<int>(rng() % static_cast<std::uint64_t>(std::max(8, std::min(width, height) / 4))));
    const unsigned alpha = 60 + static_cast<unsigned>(rng() % 80);
    for (int y = std::max(0, cy - r); y < std::min(height, cy + r); ++y) {
      for (int x = std::max(0, cx - r); x < std::min(width, cx + r); ++x) {
        const int dx = x - cx, dy = y - cy;
        if (dx * dx + dy * dy > r * r) continue;
        auto* p = img.px(x, y);
        const Rgb c = mix(Rgb{p[0], p[1], p[2]}, accent, alpha);
        p[0] = c.r;
        p[1] = c.g;
        p[2] = c.b;
      }
    }
  }

  // caption band
  const int scale = std::max(1, width / 256);
  const int band = 7 * scale + 4 * scale;
  fill_rect(img, 0, height - band, width, band, mix(light_a, Rgb{255, 255, 255}, 180));
  fill_rect(img, 0, height - band, width, std::max(1, scale / 2), ink);
  const int max_chars = std::max(1, (width - 4 * scale) / (6 * scale));
  std::string caption = prompt.substr(0, static_cast<std::size_t>(max_chars));
  draw_text(img, 2 * scale, height - band + 2 * scale, caption, scale, ink);
  return encode_png(img);
}

RemoteImageBackend::RemoteImageBackend(std::shared_ptr<HttpClient> http, std::string endpoint)
    : http_(std::move(http)), endpoint_(std::move(endpoint)) {
  while (!endpoint_.empty() && endpoint_.back() == '/') endpoint_.pop_back();
}

namespace {

std::vector<std::uint8_t> png_from_response(const HttpResponse& res, const std::string& what) {
  if (!res.ok())
    throw BackendUnavailable(what + " failed: " + (res.status ? "HTTP " + std::to_string(res.status) : res.error));
  std::vector<std::uint8_t> png;
  try {
    png = base64_decode(json::parse(res.body).at("png_base64").get<std::string>());
  } catch (const std::exception& e) {
    throw BackendUnavailable(what + " returned a malformed body: " + e.what());
  }
  try {
    decode_png(png);
  } catch (const Error& e) {
    throw BackendUnavailable(what + " returned a non-PNG payload: " + e.what());
  }
  return png;
}

}  // namespace

std::vector<std::uint8_t> RemoteImageBackend::txt2img(const std::string& prompt, int width, int height,
                                                      std::uint64_t seed) {
  const json body{{"prompt", prompt}, {"width", width}, {"height", height}, {"steps", 50}, {"seed", seed}};
  return png_from_response(http_->post_json(endpoint_ + "/txt2img", body.dump()), "txt2img");
}

std::vector<std::uint8_t> FallbackImageBackend::txt2img(const std::string& prompt, int width, int height,
                                                        std::uint64_t seed) {
  try {
    return primary_->txt2img(prompt, width, height, seed);
  } catch (const BackendUnavailable&) {
    return fallback_->txt2img(prompt, width, height, seed);
  }
}

DesignResource generate_image(const ImageRequest& req, const CanvasSpec& canvas, ImageBackend& backend) {
  if (trim(req.caption).empty()) throw Error("InvalidRequest", "image caption is empty");
  const auto [w, h] = image_size(req.kind, canvas);
  DesignResource r;
  r.task = req.kind == ImageKind::pivot ? DesignTask::pivot_figure : DesignTask::background;
  r.media = MediaKind::png;
  r.label = req.caption;
  r.data = backend.txt2img(assemble_prompt(req), w, h, req.seed);
  decode_png(r.data);
  return r;
}

// ---------------------------------------------------------------------------
// editing

EditResult stub_edit(std::span<const std::uint8_t> png, const std::string& instruction) {
  const Image img = decode_png(png);
  if (contains_ci(instruction, "grayscale") || contains_ci(instruction, "greyscale"))
    return {encode_png(grayscale(img)), {}};
  if (contains_ci(instruction, "invert")) return {encode_png(invert(img)), {}};
  if (contains_ci(instruction, "blur")) return {encode_png(box_blur(img)), {}};
  return {std::vector<std::uint8_t>(png.begin(), png.end()),
          "offline editor cannot apply \"" + instruction + "\"; image returned unchanged"};
}

std::vector<std::uint8_t> StubEditBackend::edit(std::span<const std::uint8_t> png, const std::string& instruction) {
  return stub_edit(png, instruction).png;
}

RemoteEditBackend::RemoteEditBackend(std::shared_ptr<HttpClient> http, std::string endpoint)
    : http_(std::move(http)), endpoint_(std::move(endpoint)) {
  while (!endpoint_.empty() && endpoint_.back() == '/') endpoint_.pop_back();
}

std::vector<std::uint8_t> RemoteEditBackend::edit(std::span<const std::uint8_t> png, const std::string& instruction) {
  const json body{{"png_base64", base64_encode(png)}, {"instruction", instruction}};
  return png_from_response(http_->post_json(endpoint_ + "/edit", body.dump()), "edit");
}

DesignResource edit_image(std::span<const std::uint8_t> png, const std::string& instruction, EditBackend* backend) {
  decode_png(png);
  if (trim(instruction).empty()) throw Error("InvalidRequest", "edit instruction is empty");
  DesignResource r;
  r.task = DesignTask::pivot_figure;
  r.media = MediaKind::png;
  r.label = instruction;
  if (backend) {
    r.data = backend->edit(png, instruction);
    decode_png(r.data);
  } else {
    auto res = stub_edit(png, instruction);
    r.data = std::move(res.png);
    r.warning = std::move(res.warning);
  }
  return r;
}

// ---------------------------------------------------------------------------
// clipping

namespace {

bool inside(const Image& img, double x, double y) {
  return x >= 0 && y >= 0 && x <= img.width && y <= img.height;
}

}  // namespace

DesignResource clip_image(std::span<const std::uint8_t> png, const Selector& selector,
                          SegmentationBackend* backend) {
  const Image img = decode_png(png);
  DesignResource r;
  r.task = DesignTask::local_adjustment;
  r.media = MediaKind::png;

  if (const auto* rect = std::get_if<RectSelector>(&selector)) {
    const auto& q = rect->rect;
    if (!(q.w > 0 && q.h > 0) || !inside(img, q.x, q.y) || !inside(img, q.right(), q.bottom()))
      throw Error("InvalidSelector", "rectangle selection lies outside the image");
    const int x = static_cast<int>(std::lround(q.x));
    const int y = static_cast<int>(std::lround(q.y));
    const int w = static_cast<int>(std::lround(q.right())) - x;
    const int h = static_cast<int>(std::lround(q.bottom())) - y;
    if (w <= 0 || h <= 0) throw Error("InvalidSelector", "rectangle selection is smaller than a pixel");
    r.label = "clip " + std::to_string(x) + "," + std::to_string(y) + "," + std::to_string(w) + "," +
              std::to_string(h);
    r.data = encode_png(crop(img, x, y, w, h));
    return r;
  }

  if (const auto* p = std::get_if<PointSelector>(&selector)) {
    if (!inside(img, p->x, p->y)) throw Error("InvalidSelector", "point selection lies outside the image");
    r.label = "clip point";
  } else {
    const auto& l = std::get<LineSelector>(selector);
    if (!inside(img, l.x0, l.y0) || !inside(img, l.x1, l.y1))
      throw Error("InvalidSelector", "line selection lies outside the image");
    r.label = "clip line";
  }
  if (!backend) throw SegmentationUnavailable();
  r.data = backend->segment(png, selector);
  decode_png(r.data);
  return r;
}

}  // namespace gm::tools
