#include "gm/layout.hpp"

#include "gm/util.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <sstream>

namespace gm::layout {

SyntaxError::SyntaxError(int line, int col, std::string expected, std::string found)
    : Error("SyntaxError", "line " + std::to_string(line) + ", col " + std::to_string(col) +
                               ": expected " + expected + ", found " + found),
      line_(line),
      col_(col),
      expected_(std::move(expected)) {}

namespace {

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  LayoutTree parse() {
    skip_ws();
    const int line = line_, col = col_;
    LayoutNode root = parse_node(1);
    if (root.kind != NodeKind::coordinate || root.rel != RelRect{0, 0, 1, 1})
      throw SyntaxError(line, col, "root coordinate node (C,0,0,1,1,[...])", "a different root");
    skip_ws();
    if (pos_ < src_.size()) fail("end of input");
    return LayoutTree{std::move(root), std::string(src_)};
  }

 private:
  LayoutNode parse_node(int depth) {
    if (depth > kMaxDepth)
      throw DepthError("layout nesting exceeds " + std::to_string(kMaxDepth) + " levels at line " +
                       std::to_string(line_) + ", col " + std::to_string(col_));
    expect('(');
    skip_ws();
    const int tag_line = line_, tag_col = col_;
    const std::string tag = ident();
    LayoutNode node;
    if (tag == "C") {
      node.kind = NodeKind::coordinate;
    } else if (tag == "G") {
      node.kind = NodeKind::container;
      if (++containers_ > kMaxContainers)
        throw DepthError("layout holds more than " + std::to_string(kMaxContainers) + " containers");
    } else {
      throw SyntaxError(tag_line, tag_col, "node tag C or G", describe(tag));
    }
    node.rel = rect_fields();
    expect(',');
    expect('[');
    skip_ws();
    if (node.kind == NodeKind::coordinate) {
      if (peek() == ']') fail("child node (coordinate nodes need at least one)");
      for (;;) {
        node.children.push_back(parse_node(depth + 1));
        if (!list_continues()) break;
      }
    } else if (peek() != ']') {
      for (;;) {
        node.slots.push_back(parse_slot());
        if (!list_continues()) break;
      }
    }
    expect(']');
    expect(')');
    return node;
  }

  Slot parse_slot() {
    expect('(');
    skip_ws();
    const int l = line_, c = col_;
    const std::string name = ident();
    auto type = slot_type_from(name);
    if (!type)
      throw SyntaxError(l, c, "slot type (title, image, icon, headline, content)", describe(name));
    Slot s{*type, rect_fields()};
    expect(')');
    return s;
  }

  RelRect rect_fields() {
    RelRect r;
    expect(',');
    r.x = number();
    expect(',');
    r.y = number();
    expect(',');
    r.w = number();
    expect(',');
    r.h = number();
    return r;
  }

  bool list_continues() {
    skip_ws();
    if (peek() == ',') {
      advance();
      skip_ws();
      return true;
    }
    if (peek() != ']') fail("',' or ']'");
    return false;
  }

  double number() {
    skip_ws();
    const std::size_t start = pos_;
    const int l = line_, c = col_;
    if (peek() == '-' || peek() == '+') advance();
    bool digits = false;
    while (std::isdigit(static_cast<unsigned char>(peek()))) advance(), digits = true;
    if (peek() == '.') {
      advance();
      while (std::isdigit(static_cast<unsigned char>(peek()))) advance(), digits = true;
    }
    if (!digits) throw SyntaxError(l, c, "number", found());
    std::string_view text = src_.substr(start, pos_ - start);
    if (text.front() == '+') text.remove_prefix(1);
    double v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size())
      throw SyntaxError(l, c, "number", "'" + std::string(text) + "'");
    return v;
  }

  std::string ident() {
    std::string out;
    while (std::isalpha(static_cast<unsigned char>(peek())) || peek() == '_') {
      out += peek();
      advance();
    }
    if (out.empty()) fail("identifier");
    return out;
  }

  void expect(char ch) {
    skip_ws();
    if (peek() != ch) fail(std::string("'") + ch + "'");
    advance();
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) advance();
  }

  char peek() const { return pos_ < src_.size() ? src_[pos_] : '\0'; }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  std::string found() const {
    if (pos_ >= src_.size()) return "end of input";
    return "'" + std::string(1, src_[pos_]) + "'";
  }

  static std::string describe(const std::string& tok) { return "'" + tok + "'"; }

  [[noreturn]] void fail(const std::string& expected) const {
    throw SyntaxError(line_, col_, expected, found());
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
  int containers_ = 0;
};

void serialize_into(const LayoutNode& n, std::string& out) {
  auto rect = [&](const RelRect& r) {
    out += ',' + format_number(r.x) + ',' + format_number(r.y) + ',' + format_number(r.w) + ',' +
           format_number(r.h);
  };
  out += n.kind == NodeKind::coordinate ? "(C" : "(G";
  rect(n.rel);
  out += ",[";
  if (n.kind == NodeKind::coordinate) {
    for (std::size_t i = 0; i < n.children.size(); ++i) {
      if (i) out += ',';
      serialize_into(n.children[i], out);
    }
  } else {
    for (std::size_t i = 0; i < n.slots.size(); ++i) {
      if (i) out += ',';
      out += '(';
      out += to_string(n.slots[i].type);
      rect(n.slots[i].rel);
      out += ')';
    }
  }
  out += "])";
}

bool in_bounds(const RelRect& r) {
  return r.x >= -kBoundsEps && r.y >= -kBoundsEps && r.x <= 1 + kBoundsEps &&
         r.y <= 1 + kBoundsEps && r.w > 0 && r.h > 0 && r.w <= 1 + kBoundsEps &&
         r.h <= 1 + kBoundsEps && r.x + r.w <= 1 + kBoundsEps && r.y + r.h <= 1 + kBoundsEps;
}

double rel_overlap(const RelRect& a, const RelRect& b) {
  const double ox = std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x);
  const double oy = std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y);
  return std::max(0.0, ox) * std::max(0.0, oy);
}

std::string rect_text(const RelRect& r) {
  return "(" + fmt_num(r.x, 4) + "," + fmt_num(r.y, 4) + "," + fmt_num(r.w, 4) + "," +
         fmt_num(r.h, 4) + ")";
}

class Validator {
 public:
  ValidationReport run(const LayoutTree& t) {
    visit(t.root, "$");
    if (titles_.size() > 1) {
      std::string where;
      for (const auto& p : titles_) where += (where.empty() ? "" : ", ") + p;
      add(ViolationCode::TITLE_MULTIPLICITY, "$",
          std::to_string(titles_.size()) + " title slots (" + where + "); at most one allowed");
    }
    report_.ok = report_.violations.empty();
    return std::move(report_);
  }

 private:
  void visit(const LayoutNode& n, const std::string& path) {
    if (!in_bounds(n.rel))
      add(ViolationCode::BOUNDS, path, "node rect " + rect_text(n.rel) + " exits the unit square");
    if (n.kind == NodeKind::coordinate) {
      if (n.children.empty()) add(ViolationCode::EMPTY_CONTAINER, path, "coordinate node holds no children");
      std::vector<RelRect> rects;
      for (const auto& c : n.children) rects.push_back(c.rel);
      overlaps(rects, path, [](std::size_t i) { return "[" + std::to_string(i) + "]"; });
      for (std::size_t i = 0; i < n.children.size(); ++i)
        visit(n.children[i], path + "[" + std::to_string(i) + "]");
      return;
    }
    if (n.slots.empty()) add(ViolationCode::EMPTY_CONTAINER, path, "container holds no slots");
    std::vector<RelRect> rects;
    int icons = 0, headlines = 0, contents = 0;
    for (std::size_t i = 0; i < n.slots.size(); ++i) {
      const auto& s = n.slots[i];
      const std::string sp = path + ".slot[" + std::to_string(i) + "]";
      rects.push_back(s.rel);
      if (!in_bounds(s.rel))
        add(ViolationCode::BOUNDS, sp,
            std::string(to_string(s.type)) + " slot rect " + rect_text(s.rel) + " exits its container");
      switch (s.type) {
        case SlotType::icon: ++icons; break;
        case SlotType::headline: ++headlines; break;
        case SlotType::content: ++contents; break;
        case SlotType::title: titles_.push_back(sp); break;
        case SlotType::image: break;
      }
    }
    auto multi = [&](int n_slots, const char* what) {
      if (n_slots > 1)
        add(ViolationCode::SLOT_MULTIPLICITY, path,
            std::to_string(n_slots) + " " + what + " slots in one container; at most one allowed");
    };
    multi(icons, "icon");
    multi(headlines, "headline");
    multi(contents, "content");
    overlaps(rects, path, [](std::size_t i) { return ".slot[" + std::to_string(i) + "]"; });
  }

  template <typename Name>
  void overlaps(const std::vector<RelRect>& rects, const std::string& path, Name name) {
    for (std::size_t i = 0; i < rects.size(); ++i) {
      for (std::size_t j = i + 1; j < rects.size(); ++j) {
        const double smaller = std::min(rects[i].w * rects[i].h, rects[j].w * rects[j].h);
        if (!(smaller > 0)) continue;
        const double ratio = rel_overlap(rects[i], rects[j]) / smaller;
        if (ratio > kOverlapThreshold) {
          add(ViolationCode::OVERLAP, path + name(i),
              "overlaps sibling " + path + name(j) + " by " + fmt_num(ratio * 100, 2) +
                  "% of the smaller area (limit 5%)",
              ratio);
        }
      }
    }
  }

  void add(ViolationCode c, std::string path, std::string detail, double ratio = 0) {
    report_.violations.push_back(Violation{c, std::move(path), std::move(detail), ratio});
  }

  ValidationReport report_;
  std::vector<std::string> titles_;
};

Rect compose(const Rect& parent, const RelRect& r) {
  return Rect{parent.x + r.x * parent.w, parent.y + r.y * parent.h, r.w * parent.w, r.h * parent.h};
}

void draw_into(const LayoutNode& n, const Rect& parent, const std::string& path, int& container,
               std::vector<PlacementTarget>& out) {
  const Rect abs = compose(parent, n.rel);
  if (n.kind == NodeKind::coordinate) {
    for (std::size_t i = 0; i < n.children.size(); ++i)
      draw_into(n.children[i], abs, path + "[" + std::to_string(i) + "]", container, out);
    return;
  }
  for (std::size_t i = 0; i < n.slots.size(); ++i)
    out.push_back(PlacementTarget{n.slots[i].type, compose(abs, n.slots[i].rel), container,
                                  path + ".slot[" + std::to_string(i) + "]"});
  ++container;
}

void collect_containers(const LayoutNode& n, std::vector<std::vector<SlotType>>& out) {
  if (n.kind == NodeKind::container) {
    std::vector<SlotType> types;
    for (const auto& s : n.slots) types.push_back(s.type);
    out.push_back(std::move(types));
    return;
  }
  for (const auto& c : n.children) collect_containers(c, out);
}

}  // namespace

LayoutTree parse_layout(std::string_view source) { return Parser(source).parse(); }

std::string format_number(double v) { return fmt_num(v, 4); }

std::string serialize_node(const LayoutNode& node) {
  std::string out;
  serialize_into(node, out);
  return out;
}

std::string serialize_layout(const LayoutTree& tree) { return serialize_node(tree.root); }

std::string_view to_string(ViolationCode c) {
  switch (c) {
    case ViolationCode::OVERLAP: return "OVERLAP";
    case ViolationCode::SLOT_MULTIPLICITY: return "SLOT_MULTIPLICITY";
    case ViolationCode::TITLE_MULTIPLICITY: return "TITLE_MULTIPLICITY";
    case ViolationCode::BOUNDS: return "BOUNDS";
    case ViolationCode::EMPTY_CONTAINER: return "EMPTY_CONTAINER";
  }
  return "?";
}

bool ValidationReport::has(ViolationCode c) const { return count(c) > 0; }

std::size_t ValidationReport::count(ViolationCode c) const {
  return static_cast<std::size_t>(std::count_if(violations.begin(), violations.end(),
                                                [c](const Violation& v) { return v.code == c; }));
}

std::string ValidationReport::to_text() const {
  std::string out;
  for (const auto& v : violations)
    out += std::string(to_string(v.code)) + " at " + v.path + ": " + v.detail + "\n";
  return out;
}

ValidationReport validate_layout(const LayoutTree& tree) { return Validator().run(tree); }

std::vector<PlacementTarget> draw_layout(const LayoutTree& tree, const CanvasSpec& canvas) {
  auto report = validate_layout(tree);
  if (!report.ok) throw InvalidTree("cannot draw an invalid layout:\n" + report.to_text());
  std::vector<PlacementTarget> out;
  int container = 0;
  const Rect full{0, 0, double(canvas.width), double(canvas.height)};
  draw_into(tree.root, full, "$", container, out);
  return out;
}

std::vector<std::vector<SlotType>> container_slots(const LayoutTree& tree) {
  std::vector<std::vector<SlotType>> out;
  collect_containers(tree.root, out);
  return out;
}

std::string_view grammar_document() {
  return R"DSL(You write infographic layouts in a small tuple language.

GRAMMAR
  node := "(" tag "," x "," y "," w "," h "," "[" items "]" ")"
  tag  := C   coordinate node; items are nodes (at least one)
        | G   container node; items are slots (containers never nest)
  slot := "(" type "," x "," y "," w "," h ")"
  type := title | image | icon | headline | content

Every rectangle is (x, y, w, h) relative to its parent, each number in [0, 1],
with x + w <= 1 and y + h <= 1. The origin is the top-left corner and y grows
downward. The outermost node must be (C,0,0,1,1,[...]).

RULES
  - Sibling nodes, and slots of the same container, must not overlap by more
    than 5% of the smaller rectangle's area.
  - A container holds at most one icon, one headline and one content slot.
    A bullet point is shown as one container with icon + headline + content.
  - The whole layout holds at most one title slot.
  - Every container holds at least one slot.
  - At most 16 levels of nesting and 64 containers.

EXAMPLE (title band, three rows of bullet points, picture on the right)
(C,0,0,1,1,[(G,0,0,1,0.2,[(title,0.05,0.1,0.9,0.8)]),(C,0,0.2,0.6,0.8,[(G,0,0,1,0.3333,[(icon,0.02,0.1,0.15,0.8),(headline,0.2,0.05,0.78,0.3),(content,0.2,0.4,0.78,0.55)]),(G,0,0.3333,1,0.3333,[(icon,0.02,0.1,0.15,0.8),(headline,0.2,0.05,0.78,0.3),(content,0.2,0.4,0.78,0.55)]),(G,0,0.6667,1,0.3333,[(icon,0.02,0.1,0.15,0.8),(headline,0.2,0.05,0.78,0.3),(content,0.2,0.4,0.78,0.55)])]),(G,0.6,0.2,0.4,0.8,[(image,0.05,0.05,0.9,0.9)])])

Reply with the layout string only, no prose and no code fences.
)DSL";
}

std::string wireframe_svg(const LayoutTree& tree, const CanvasSpec& canvas) {
  const auto targets = draw_layout(tree, canvas);
  std::ostringstream out;
  out << R"(<svg xmlns="http://www.w3.org/2000/svg" width=")" << canvas.width << R"(" height=")"
      << canvas.height << R"(" viewBox="0 0 )" << canvas.width << ' ' << canvas.height << R"(">)"
      << '\n';
  out << R"(<rect x="0" y="0" width=")" << canvas.width << R"(" height=")" << canvas.height
      << R"(" fill="#FFFFFF"/>)" << '\n';
  for (const auto& t : targets) {
    const auto& r = t.abs_rect;
    out << R"(<g class="slot slot-)" << to_string(t.slot_type) << R"(" data-container=")"
        << t.container_index << R"(">)";
    out << R"(<rect x=")" << fmt_num(r.x) << R"(" y=")" << fmt_num(r.y) << R"(" width=")"
        << fmt_num(r.w) << R"(" height=")" << fmt_num(r.h)
        << R"(" fill="none" stroke="#4A6FA5" stroke-width="2" stroke-dasharray="6 4"/>)";
    out << R"(<text x=")" << fmt_num(r.x + 6) << R"(" y=")" << fmt_num(r.y + 18)
        << R"(" font-family="sans-serif" font-size="14" fill="#4A6FA5">)"
        << xml_escape(to_string(t.slot_type)) << "</text></g>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace gm::layout
