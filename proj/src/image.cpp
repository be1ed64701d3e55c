#include "gm/image.hpp"

#include "gm/model.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cctype>

namespace gm {

std::vector<std::uint8_t> encode_png(const Image& img) {
  if (img.width <= 0 || img.height <= 0) throw Error("InvalidImage", "cannot encode an empty image");
  png_image info{};
  info.version = PNG_IMAGE_VERSION;
  info.width = static_cast<png_uint_32>(img.width);
  info.height = static_cast<png_uint_32>(img.height);
  info.format = PNG_FORMAT_RGBA;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&info, nullptr, &size, 0, img.rgba.data(), 0, nullptr))
    throw Error("InvalidImage", std::string("png sizing failed: ") + info.message);
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&info, out.data(), &size, 0, img.rgba.data(), 0, nullptr))
    throw Error("InvalidImage", std::string("png encode failed: ") + info.message);
  out.resize(size);
  return out;
}

Image decode_png(std::span<const std::uint8_t> png) {
  png_image info{};
  info.version = PNG_IMAGE_VERSION;
  if (png.empty() || !png_image_begin_read_from_memory(&info, png.data(), png.size()))
    throw Error("InvalidImage", std::string("not a PNG: ") + (png.empty() ? "empty input" : info.message));
  info.format = PNG_FORMAT_RGBA;
  Image img(static_cast<int>(info.width), static_cast<int>(info.height));
  if (!png_image_finish_read(&info, nullptr, img.rgba.data(), 0, nullptr)) {
    png_image_free(&info);
    throw Error("InvalidImage", std::string("png decode failed: ") + info.message);
  }
  return img;
}

Image crop(const Image& img, int x, int y, int w, int h) {
  if (x < 0 || y < 0 || w <= 0 || h <= 0 || x + w > img.width || y + h > img.height)
    throw Error("InvalidSelector", "crop rectangle lies outside the image");
  Image out(w, h);
  for (int row = 0; row < h; ++row)
    std::copy_n(img.px(x, y + row), std::size_t(w) * 4, out.px(0, row));
  return out;
}

Image grayscale(const Image& img) {
  Image out = img;
  for (std::size_t i = 0; i < out.rgba.size(); i += 4) {
    // Rec. 601 luma in integer arithmetic
    const unsigned v = (299u * out.rgba[i] + 587u * out.rgba[i + 1] + 114u * out.rgba[i + 2] + 500u) / 1000u;
    out.rgba[i] = out.rgba[i + 1] = out.rgba[i + 2] = static_cast<std::uint8_t>(v);
  }
  return out;
}

Image invert(const Image& img) {
  Image out = img;
  for (std::size_t i = 0; i < out.rgba.size(); i += 4)
    for (int c = 0; c < 3; ++c) out.rgba[i + c] = static_cast<std::uint8_t>(255 - out.rgba[i + c]);
  return out;
}

Image box_blur(const Image& img) {
  Image out(img.width, img.height);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      unsigned sum[4] = {0, 0, 0, 0};
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const auto* p = img.px(std::clamp(x + dx, 0, img.width - 1), std::clamp(y + dy, 0, img.height - 1));
          for (int c = 0; c < 4; ++c) sum[c] += p[c];
        }
      }
      auto* q = out.px(x, y);
      for (int c = 0; c < 4; ++c) q[c] = static_cast<std::uint8_t>((sum[c] + 4) / 9);
    }
  }
  return out;
}

void fill_rect(Image& img, int x, int y, int w, int h, Rgb c) {
  const int x0 = std::max(0, x), y0 = std::max(0, y);
  const int x1 = std::min(img.width, x + w), y1 = std::min(img.height, y + h);
  for (int yy = y0; yy < y1; ++yy) {
    for (int xx = x0; xx < x1; ++xx) {
      auto* p = img.px(xx, yy);
      p[0] = c.r;
      p[1] = c.g;
      p[2] = c.b;
      p[3] = 255;
    }
  }
}

namespace {

using Glyph = std::array<std::uint8_t, 7>;

const Glyph* glyph_for(char ch) {
  static const Glyph letters[26] = {
      {0x0E, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}, {0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E},
      {0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E}, {0x1C, 0x12, 0x11, 0x11, 0x11, 0x12, 0x1C},
      {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F}, {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10},
      {0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F}, {0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11},
      {0x0E, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E}, {0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0C},
      {0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11}, {0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F},
      {0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11}, {0x11, 0x11, 0x19, 0x15, 0x13, 0x11, 0x11},
      {0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}, {0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10},
      {0x0E, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0D}, {0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11},
      {0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E}, {0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04},
      {0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}, {0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04},
      {0x11, 0x11, 0x11, 0x15, 0x15, 0x15, 0x0A}, {0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11},
      {0x11, 0x11, 0x0A, 0x04, 0x04, 0x04, 0x04}, {0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F},
  };
  static const Glyph digits[10] = {
      {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}, {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E},
      {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}, {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E},
      {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}, {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E},
      {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}, {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08},
      {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}, {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C},
  };
  static const Glyph period{0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C};
  static const Glyph comma{0x00, 0x00, 0x00, 0x00, 0x0C, 0x04, 0x08};
  static const Glyph bang{0x04, 0x04, 0x04, 0x04, 0x04, 0x00, 0x04};
  static const Glyph question{0x0E, 0x11, 0x01, 0x02, 0x04, 0x00, 0x04};
  static const Glyph dash{0x00, 0x00, 0x00, 0x1F, 0x00, 0x00, 0x00};
  static const Glyph apostrophe{0x04, 0x04, 0x08, 0x00, 0x00, 0x00, 0x00};
  static const Glyph colon{0x00, 0x0C, 0x0C, 0x00, 0x0C, 0x0C, 0x00};

  const unsigned char u = static_cast<unsigned char>(std::toupper(static_cast<unsigned char>(ch)));
  if (u >= 'A' && u <= 'Z') return &letters[u - 'A'];
  if (u >= '0' && u <= '9') return &digits[u - '0'];
  switch (u) {
    case ' ': return nullptr;
    case '.': return &period;
    case ',': return &comma;
    case '!': return &bang;
    case '-': return &dash;
    case '\'': return &apostrophe;
    case ':': return &colon;
    default: return &question;
  }
}

}  // namespace

int text_width(std::string_view text, int scale) {
  return text.empty() ? 0 : static_cast<int>(text.size()) * 6 * scale - scale;
}

void draw_text(Image& img, int x, int y, std::string_view text, int scale, Rgb c) {
  int pen = x;
  for (char ch : text) {
    if (const Glyph* g = glyph_for(ch)) {
      for (int row = 0; row < 7; ++row)
        for (int col = 0; col < 5; ++col)
          if ((*g)[row] & (0x10 >> col)) fill_rect(img, pen + col * scale, y + row * scale, scale, scale, c);
    }
    pen += 6 * scale;
  }
}

}  // namespace gm
