#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace gm {

/// 8-bit RGBA raster, row-major, no padding.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgba;

  Image() = default;
  Image(int w, int h) : width(w), height(h), rgba(std::size_t(w) * std::size_t(h) * 4, 0) {}

  std::uint8_t* px(int x, int y) { return &rgba[(std::size_t(y) * std::size_t(width) + std::size_t(x)) * 4]; }
  const std::uint8_t* px(int x, int y) const {
    return &rgba[(std::size_t(y) * std::size_t(width) + std::size_t(x)) * 4];
  }
  bool operator==(const Image&) const = default;
};

std::vector<std::uint8_t> encode_png(const Image& img);
/// Throws gm::Error("InvalidImage") when the bytes are not a decodable PNG.
Image decode_png(std::span<const std::uint8_t> png);

/// Copy of the [x, x+w) x [y, y+h) region. Throws when it leaves the image.
Image crop(const Image& img, int x, int y, int w, int h);
Image grayscale(const Image& img);
Image invert(const Image& img);
/// 3x3 box blur with clamped edges.
Image box_blur(const Image& img);

struct Rgb {
  std::uint8_t r, g, b;
};

void fill_rect(Image& img, int x, int y, int w, int h, Rgb c);

/// Stamps `text` with a built-in 5x7 bitmap font (uppercase, digits, basic
/// punctuation; lowercase is upper-cased). `scale` multiplies each dot.
void draw_text(Image& img, int x, int y, std::string_view text, int scale, Rgb c);
int text_width(std::string_view text, int scale);

}  // namespace gm
