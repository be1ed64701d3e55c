#pragma once

// Shared fixtures for the test binaries: random layout-tree generators,
// scratch directories and an in-process HTTP mock.

#include "gm/http.hpp"
#include "gm/layout.hpp"

#include <httplib.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>
#include <thread>
#include <vector>

namespace gm::test {

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "gm-test-XXXXXX").string();
    if (!mkdtemp(tmpl.data())) std::abort();
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// Random layout trees. Coordinates are multiples of 1e-4, so they survive
/// the four-decimal canonical text exactly.
class TreeGen {
 public:
  explicit TreeGen(std::uint64_t seed) : rng_(seed) {}

  int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }
  std::mt19937_64& rng() { return rng_; }

  /// A tree that passes validate_layout: siblings tile disjoint cells of
  /// their parent, every container has at most one slot of each bullet type
  /// and at most one title exists in the whole tree.
  layout::LayoutTree valid_tree() {
    title_used_ = false;
    containers_ = 0;
    layout::LayoutTree t;
    t.root = coordinate(layout::RelRect{0, 0, 1, 1}, 0);
    return t;
  }

  /// Arbitrary rectangles inside [0,1]; siblings may overlap.
  layout::LayoutTree loose_tree() {
    containers_ = 0;
    layout::LayoutTree t;
    t.root = loose(layout::RelRect{0, 0, 1, 1}, 0, true);
    return t;
  }

 private:
  double q(int ten_thousandths) { return ten_thousandths / 10000.0; }

  /// `n` disjoint sub-rectangles of the unit square, as a row or column strip.
  std::vector<layout::RelRect> cells(int n) {
    const bool rows = coin();
    std::vector<layout::RelRect> out;
    const int span = 10000 / n;
    for (int i = 0; i < n; ++i) {
      const int start = i * span;
      const int margin = uniform(0, span / 10);
      const int len = span - 2 * margin - uniform(0, span / 10);
      const int cross0 = uniform(0, 1000);
      const int cross_len = uniform(2000, 10000 - cross0);
      if (rows)
        out.push_back({q(cross0), q(start + margin), q(cross_len), q(std::max(1, len))});
      else
        out.push_back({q(start + margin), q(cross0), q(std::max(1, len)), q(cross_len)});
    }
    return out;
  }

  layout::LayoutNode coordinate(layout::RelRect rel, int depth) {
    layout::LayoutNode n;
    n.kind = layout::NodeKind::coordinate;
    n.rel = rel;
    const int k = uniform(1, 4);
    for (const auto& c : cells(k)) {
      const bool nest = depth < 3 && containers_ < 24 && coin(0.3);
      n.children.push_back(nest ? coordinate(c, depth + 1) : container(c));
    }
    return n;
  }

  layout::LayoutNode container(layout::RelRect rel) {
    ++containers_;
    layout::LayoutNode n;
    n.kind = layout::NodeKind::container;
    n.rel = rel;
    std::vector<SlotType> types{SlotType::image, SlotType::icon, SlotType::headline, SlotType::content};
    if (!title_used_ && coin(0.3)) {
      types.push_back(SlotType::title);
    }
    std::shuffle(types.begin(), types.end(), rng_);
    std::vector<SlotType> chosen;
    const int k = uniform(1, static_cast<int>(types.size()));
    for (int i = 0; i < k; ++i) {
      // image may repeat; bullet types and title may not
      chosen.push_back(types[static_cast<std::size_t>(i)]);
      if (types[static_cast<std::size_t>(i)] == SlotType::title) title_used_ = true;
    }
    if (coin(0.2)) chosen.push_back(SlotType::image);
    const auto rects = cells(static_cast<int>(chosen.size()));
    for (std::size_t i = 0; i < chosen.size(); ++i) n.slots.push_back(layout::Slot{chosen[i], rects[i]});
    return n;
  }

  layout::RelRect any_rect() {
    const int x = uniform(0, 9000), y = uniform(0, 9000);
    return {q(x), q(y), q(uniform(500, 10000 - x)), q(uniform(500, 10000 - y))};
  }

  layout::LayoutNode loose(layout::RelRect rel, int depth, bool root) {
    layout::LayoutNode n;
    n.rel = rel;
    if (root || (depth < 3 && containers_ < 24 && coin(0.35))) {
      n.kind = layout::NodeKind::coordinate;
      const int k = uniform(1, 5);
      for (int i = 0; i < k; ++i) n.children.push_back(loose(any_rect(), depth + 1, false));
      return n;
    }
    ++containers_;
    n.kind = layout::NodeKind::container;
    const int k = uniform(1, 5);
    for (int i = 0; i < k; ++i)
      n.slots.push_back(layout::Slot{static_cast<SlotType>(uniform(0, 4)), any_rect()});
    return n;
  }

  std::mt19937_64 rng_;
  bool title_used_ = false;
  int containers_ = 0;
};

/// httplib server on an ephemeral local port, run on a background thread.
class MockServer {
 public:
  httplib::Server http;

  MockServer() = default;
  ~MockServer() { stop(); }
  MockServer(const MockServer&) = delete;
  MockServer& operator=(const MockServer&) = delete;

  /// Binds and starts serving; returns the base URL.
  std::string start() {
    port_ = http.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { http.listen_after_bind(); });
    http.wait_until_ready();
    return url();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }
  void stop() {
    http.stop();
    if (thread_.joinable()) thread_.join();
  }

 private:
  int port_ = 0;
  std::thread thread_;
};

}  // namespace gm::test
