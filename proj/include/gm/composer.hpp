#pragma once

// Binds design resources to layout slots and renders documents to SVG.
// Every operation takes a document by value and returns the new one.

#include "gm/layout.hpp"
#include "gm/model.hpp"
#include "gm/tools.hpp"

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gm::composer {

class NoLayout : public Error {
 public:
  NoLayout() : Error("NoLayout", "no layout given and none applied to the document") {}
};

using IconMap = std::map<std::string, tools::IconResult>;

inline constexpr double kMinFontSize = 8.0;
/// Average glyph advance and line height, as multiples of the font size.
inline constexpr double kAdvance = 0.55;
inline constexpr double kLineHeight = 1.2;
/// Unplaced tray: right margin column of this canvas-width fraction.
inline constexpr double kTrayWidth = 0.10;
inline constexpr double kTrayScale = 0.80;
inline constexpr double kDropIconSize = 64.0;

struct TextFit {
  double font_size = 0;
  std::vector<std::string> lines;
  bool overflow = false;
};

/// Greedy word wrap at the average advance, shrinking the font one point at a
/// time down to kMinFontSize. At the floor the lines that do not fit are
/// dropped (at least one is kept) and `overflow` is set.
TextFit fit_text(std::string_view text, const Rect& rect, const StyleProps& style);

/// Darkest pixel on a sampling grid, as #RRGGBB; kDefaultAccent for
/// undecodable input.
std::string darkest_color(std::span<const std::uint8_t> png);

/// Default styles for text created from an information bundle.
StyleProps text_style(SlotType role);

/// Creates assets for `bundle` (title plus icon/headline/content per bullet)
/// and for each png resource in `images`, then arranges the document against
/// `tree` or the applied layout. A background resource fills the canvas at
/// z 0, updating the existing background in place when there is one.
/// Throws NoLayout when neither a tree nor an applied layout exists, and
/// layout::InvalidTree when the tree fails validation.
InfographicDocument auto_place(InfographicDocument doc, const std::optional<tools::InfoBundle>& bundle,
                               const IconMap& icons, const std::vector<DesignResource>& images,
                               const std::optional<layout::LayoutTree>& tree, const std::string& bundle_resource_id = {});

/// As auto_place, but without a layout: new assets go to the unplaced tray.
InfographicDocument stage(InfographicDocument doc, const std::optional<tools::InfoBundle>& bundle,
                          const IconMap& icons, const std::vector<DesignResource>& images,
                          const std::string& bundle_resource_id = {});

/// Re-assigns every unpinned asset with a role to the slots of `tree`.
/// Titles and images fill their slots in id order; bullet groups fill the
/// containers holding icon/headline/content slots in depth-first order.
/// Assets without a free slot are listed in `unplaced` and stacked in the tray.
InfographicDocument apply_layout(InfographicDocument doc, const layout::LayoutTree& tree);

/// Re-runs placement against the applied layout, or the tray when none.
InfographicDocument arrange(InfographicDocument doc);

/// Manual drop of a conversation resource at canvas point (x, y). Icons get a
/// kDropIconSize square centered there; images keep their aspect ratio;
/// bundles and layouts behave like their automatic counterparts.
InfographicDocument place_resource(InfographicDocument doc, const DesignResource& resource, double x, double y);

/// Recomputes the overflow flag of every text asset.
void refresh_overflow(InfographicDocument& doc);

struct ExportOptions {
  /// Reference images by their relative path instead of embedding them.
  bool link_assets = false;
  /// PNG bytes of an image asset payload path; nullopt falls back to linking.
  std::function<std::optional<std::vector<std::uint8_t>>(const std::string& path)> blob;
};

/// SVG 1.1 text, one top-level element per placed asset in (z, id) order.
/// Unplaced assets are left out. Byte-deterministic for a given document.
std::string export_svg(const InfographicDocument& doc, const ExportOptions& opts = {});

}  // namespace gm::composer
