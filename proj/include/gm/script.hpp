#pragma once

#include "gm/runtime.hpp"
#include "gm/server.hpp"

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gm {

/// Script or fixture problem; `line` is 1-based, 0 when unknown.
class ScriptError : public Error {
 public:
  ScriptError(int line, const std::string& msg) : Error("ScriptError", msg), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// A step that ran but failed.
class StepError : public Error {
 public:
  StepError(std::size_t step, int line, std::string code, const std::string& msg)
      : Error(std::move(code), msg), step_(step), line_(line) {}
  std::size_t step() const { return step_; }
  int line() const { return line_; }

 private:
  std::size_t step_;
  int line_;
};

struct ScriptStep {
  enum class Kind { user, apply_layout, canvas };
  Kind kind = Kind::user;
  /// user: message text. apply_layout: resource id or "latest".
  std::string text;
  /// canvas: the operation object.
  nlohmann::json op;
  int line = 0;
};

/// YAML (or JSON) script:
///
///   seed: 0
///   canvas: {width: 1280, height: 720, background_color: "#FFFFFF"}
///   provider_fixture: fixture.json      # relative to the script
///   steps:
///     - user: "Make an infographic about Ancient Civilizations"
///     - apply_layout: latest
///     - canvas: {op: move, asset_id: a0001, x: 10, y: 10}
struct Script {
  std::uint64_t seed = 0;
  CanvasSpec canvas;
  std::optional<std::filesystem::path> fixture;
  std::vector<ScriptStep> steps;
};

Script parse_script(const std::string& text, const std::filesystem::path& base_dir);
Script load_script(const std::filesystem::path& path);

struct RunOptions {
  std::optional<std::uint64_t> seed;
  bool link_assets = false;
  ProviderMode mode = ProviderMode::stub;
  /// Session storage; a fresh temporary directory (removed afterwards) when unset.
  std::optional<std::filesystem::path> data_dir;
  /// Tear the engine down and rebuild it from disk between steps.
  bool restart_each_step = false;
  /// Called after each step with a one-line summary.
  std::function<void(const std::string&)> log;
  /// Called after each committed step.
  std::function<void(std::size_t step, server::Engine&, const std::string& session_id)> after_step;
  std::shared_ptr<HttpClient> http;
};

struct RunResult {
  std::string svg;
  server::Session session;
  /// With link_assets: relative path -> PNG bytes referenced by the SVG.
  std::map<std::string, std::vector<std::uint8_t>> linked;
};

/// Replays the script against an in-process engine and exports the document.
/// A step whose dispatch reports an error fails the run with StepError.
RunResult run_script(const Script& script, const RunOptions& opts = {});

}  // namespace gm
