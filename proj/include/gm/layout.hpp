#pragma once

// Layout DSL: a tuple-based tree of coordinate nodes (scaffolding) and
// container nodes (leaves holding typed slots).
//
//   node := "(" tag "," num "," num "," num "," num "," "[" items "]" ")"
//   tag  := "C" | "G"            C items are nodes (>= 1), G items are slots
//   slot := "(" slotType "," num "," num "," num "," num ")"
//   slotType := title | image | icon | headline | content
//
// Numbers are decimals, whitespace is insignificant. Every rect is relative
// to its parent: (x, y, w, h) in [0, 1].

#include "gm/model.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace gm::layout {

inline constexpr int kMaxDepth = 16;
inline constexpr int kMaxContainers = 64;
inline constexpr double kBoundsEps = 1e-9;
/// Sibling overlap above this fraction of the smaller rect's area is significant.
inline constexpr double kOverlapThreshold = 0.05;

enum class NodeKind { coordinate, container };

struct RelRect {
  double x = 0;
  double y = 0;
  double w = 1;
  double h = 1;
  bool operator==(const RelRect&) const = default;
};

struct Slot {
  SlotType type = SlotType::content;
  RelRect rel;
  bool operator==(const Slot&) const = default;
};

struct LayoutNode {
  NodeKind kind = NodeKind::coordinate;
  RelRect rel;
  std::vector<LayoutNode> children;  // coordinate nodes only
  std::vector<Slot> slots;           // container nodes only
  bool operator==(const LayoutNode&) const = default;
};

struct LayoutTree {
  LayoutNode root;
  std::string source_text;

  /// Structural equality; the source text is not compared.
  bool operator==(const LayoutTree& o) const { return root == o.root; }
};

class SyntaxError : public Error {
 public:
  SyntaxError(int line, int col, std::string expected, std::string found);
  int line() const { return line_; }
  int col() const { return col_; }
  const std::string& expected() const { return expected_; }

 private:
  int line_;
  int col_;
  std::string expected_;
};

class DepthError : public Error {
 public:
  explicit DepthError(const std::string& msg) : Error("DepthError", msg) {}
};

class InvalidTree : public Error {
 public:
  explicit InvalidTree(const std::string& msg) : Error("InvalidTree", msg) {}
};

LayoutTree parse_layout(std::string_view source);

/// Canonical text: no whitespace, up to four fractional digits, no trailing zeros.
std::string serialize_layout(const LayoutTree& tree);
std::string serialize_node(const LayoutNode& node);
std::string format_number(double v);

enum class ViolationCode { OVERLAP, SLOT_MULTIPLICITY, TITLE_MULTIPLICITY, BOUNDS, EMPTY_CONTAINER };
std::string_view to_string(ViolationCode c);

struct Violation {
  ViolationCode code;
  std::string path;
  std::string detail;
  /// OVERLAP only: overlap area / smaller sibling area.
  double ratio = 0;
};

struct ValidationReport {
  bool ok = true;
  std::vector<Violation> violations;

  bool has(ViolationCode c) const;
  std::size_t count(ViolationCode c) const;
  /// One line per violation, suitable for a model retry prompt or lint output.
  std::string to_text() const;
};

ValidationReport validate_layout(const LayoutTree& tree);

struct PlacementTarget {
  SlotType slot_type;
  Rect abs_rect;
  /// Index of the owning container in depth-first order.
  int container_index = 0;
  std::string path;
};

/// Resolves every slot to absolute canvas pixels, depth-first, left to right.
/// Throws InvalidTree when the tree fails validation.
std::vector<PlacementTarget> draw_layout(const LayoutTree& tree, const CanvasSpec& canvas);

/// Slot types of each container, in depth-first order.
std::vector<std::vector<SlotType>> container_slots(const LayoutTree& tree);

/// Grammar and rules handed to a model that writes layouts.
std::string_view grammar_document();

/// Wireframe SVG showing only slot rectangles and their types.
std::string wireframe_svg(const LayoutTree& tree, const CanvasSpec& canvas);

}  // namespace gm::layout
