// gm: headless driver for the infographic engine.
//
//   gm run <script> -o <out.svg> [--seed N] [--link-assets] [--provider stub|rules|remote]
//   gm lint <file.layout>
//   gm parse <file.layout> --wireframe <out.svg>
//   gm serve [--host H] [--port P] [--data-dir D] [--provider ...] [--fixture F]
//
// Exit codes: 0 ok, 1 lint/parse violations, 2 usage/script/fixture errors,
// 3 a script step failed.

#include "gm/http_api.hpp"
#include "gm/layout.hpp"
#include "gm/script.hpp"
#include "gm/util.hpp"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kViolations = 1;
constexpr int kUsage = 2;
constexpr int kStepFailed = 3;

int cmd_run(const std::string& script_path, const std::string& out, std::optional<std::uint64_t> seed,
            bool link_assets, const std::string& provider, bool quiet) {
  gm::Script script;
  try {
    script = gm::load_script(script_path);
  } catch (const gm::ScriptError& e) {
    std::cerr << script_path << ":" << e.line() << ": " << e.what() << "\n";
    return kUsage;
  }
  gm::RunOptions opts;
  opts.seed = seed;
  opts.link_assets = link_assets;
  opts.mode = gm::provider_mode_from(provider);
  if (!quiet) opts.log = [](const std::string& line) { std::cout << line << "\n"; };
  try {
    const gm::RunResult result = gm::run_script(script, opts);
    const fs::path out_path(out);
    gm::write_file_atomic(out_path, result.svg);
    for (const auto& [rel, bytes] : result.linked) {
      const fs::path p = out_path.parent_path() / rel;
      fs::create_directories(p.parent_path());
      gm::write_file_atomic(p, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
    }
    if (!quiet) std::cout << "wrote " << out << "\n";
    return kOk;
  } catch (const gm::ScriptError& e) {
    std::cerr << script_path << ":" << e.line() << ": " << e.what() << "\n";
    return kUsage;
  } catch (const gm::StepError& e) {
    std::cerr << script_path << ":" << e.line() << ": " << e.code() << ": " << e.what() << "\n";
    return kStepFailed;
  }
}

std::optional<gm::layout::LayoutTree> read_layout(const std::string& path, int& rc) {
  std::string text;
  try {
    text = gm::read_text(path);
  } catch (const gm::Error& e) {
    std::cerr << e.what() << "\n";
    rc = kUsage;
    return std::nullopt;
  }
  try {
    return gm::layout::parse_layout(text);
  } catch (const gm::layout::SyntaxError& e) {
    std::cerr << path << ":" << e.line() << ":" << e.col() << ": " << e.what() << "\n";
  } catch (const gm::Error& e) {
    std::cerr << path << ": " << e.code() << ": " << e.what() << "\n";
  }
  rc = kViolations;
  return std::nullopt;
}

int cmd_lint(const std::string& path) {
  int rc = kOk;
  const auto tree = read_layout(path, rc);
  if (!tree) return rc;
  const auto report = gm::layout::validate_layout(*tree);
  if (report.ok) {
    std::cout << path << ": ok\n";
    return kOk;
  }
  std::cout << report.to_text();
  return kViolations;
}

int cmd_parse(const std::string& path, const std::string& wireframe, int width, int height) {
  int rc = kOk;
  const auto tree = read_layout(path, rc);
  if (!tree) return rc;
  std::cout << gm::layout::serialize_layout(*tree) << "\n";
  if (!wireframe.empty()) {
    gm::CanvasSpec canvas;
    canvas.width = width;
    canvas.height = height;
    gm::write_file_atomic(wireframe, gm::layout::wireframe_svg(*tree, canvas));
  }
  const auto report = gm::layout::validate_layout(*tree);
  if (!report.ok) std::cerr << report.to_text();
  return report.ok ? kOk : kViolations;
}

gm::server::ApiServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

int cmd_serve(const std::string& host, int port, const std::string& data_dir, const std::string& provider,
              const std::string& fixture, std::uint64_t seed) {
  std::optional<fs::path> fx;
  if (!fixture.empty()) fx = fixture;
  const gm::Runtime rt = gm::make_runtime(gm::provider_mode_from(provider), fx);
  gm::server::EngineConfig cfg;
  cfg.data_dir = data_dir;
  cfg.seed = seed;
  gm::server::Engine engine(cfg, rt.registry, rt.providers);
  gm::server::ApiServer api(engine);
  const int bound = api.bind(host, port);
  if (bound < 0) {
    std::cerr << "cannot bind " << host << ":" << port << "\n";
    return kUsage;
  }
  g_server = &api;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  spdlog::info("serving on http://{}:{} (data in {})", host, bound, data_dir);
  api.listen();
  g_server = nullptr;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Infographic authoring engine"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Verbose logging");

  std::string script, out, provider = "stub";
  std::optional<std::uint64_t> seed;
  bool link_assets = false, quiet = false;
  auto* run = app.add_subcommand("run", "Replay a conversation script and export the SVG");
  run->add_option("script", script, "YAML or JSON script")->required();
  run->add_option("-o,--out", out, "Output SVG path")->required();
  run->add_option("--seed", seed, "Seed for the stub tools (overrides the script)");
  run->add_flag("--link-assets", link_assets, "Reference images by relative path instead of embedding");
  run->add_option("--provider", provider, "stub|rules|remote")->check(CLI::IsMember({"stub", "rules", "remote"}));
  run->add_flag("-q,--quiet", quiet, "Only print errors");

  std::string layout_file;
  auto* lint = app.add_subcommand("lint", "Validate a layout DSL file");
  lint->add_option("file", layout_file, "Layout file")->required();

  std::string wireframe;
  int width = 1280, height = 720;
  auto* parse = app.add_subcommand("parse", "Parse a layout file, print it canonically, render a wireframe");
  parse->add_option("file", layout_file, "Layout file")->required();
  parse->add_option("--wireframe", wireframe, "Write slot rectangles to this SVG");
  parse->add_option("--width", width, "Canvas width")->check(CLI::PositiveNumber);
  parse->add_option("--height", height, "Canvas height")->check(CLI::PositiveNumber);

  std::string host = "127.0.0.1", data_dir = gm::env_or("GM_DATA_DIR", "gm-data"), fixture;
  int port = std::atoi(gm::env_or("GM_PORT", "8780").c_str());
  std::uint64_t serve_seed = 0;
  auto* serve = app.add_subcommand("serve", "Run the REST server");
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port (GM_PORT)");
  serve->add_option("--data-dir", data_dir, "Session storage (GM_DATA_DIR)");
  serve->add_option("--provider", provider, "stub|rules|remote")->check(CLI::IsMember({"stub", "rules", "remote"}));
  serve->add_option("--fixture", fixture, "Scripted provider fixture for --provider stub");
  serve->add_option("--seed", serve_seed, "Seed for the stub tools");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::warn);
  if (*serve && !verbose) spdlog::set_level(spdlog::level::info);

  try {
    if (*run) return cmd_run(script, out, seed, link_assets, provider, quiet);
    if (*lint) return cmd_lint(layout_file);
    if (*parse) return cmd_parse(layout_file, wireframe, width, height);
    if (*serve) return cmd_serve(host, port, data_dir, provider, fixture, serve_seed);
  } catch (const gm::Error& e) {
    std::cerr << e.code() << ": " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
