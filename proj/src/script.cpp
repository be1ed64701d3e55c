#include "gm/script.hpp"

#include "gm/util.hpp"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cstdlib>

namespace gm {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int line_of(const YAML::Node& n) { return n.Mark().line >= 0 ? n.Mark().line + 1 : 0; }

json to_json_value(const YAML::Node& n) {
  switch (n.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined:
      return nullptr;
    case YAML::NodeType::Sequence: {
      json arr = json::array();
      for (const auto& e : n) arr.push_back(to_json_value(e));
      return arr;
    }
    case YAML::NodeType::Map: {
      json obj = json::object();
      for (const auto& kv : n) obj[kv.first.as<std::string>()] = to_json_value(kv.second);
      return obj;
    }
    case YAML::NodeType::Scalar:
      break;
  }
  const std::string s = n.Scalar();
  if (n.Tag() == "!") return s;  // quoted
  if (s == "true") return true;
  if (s == "false") return false;
  if (s == "null" || s == "~") return nullptr;
  long long i = 0;
  if (auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), i); ec == std::errc() && p == s.data() + s.size())
    return i;
  double d = 0;
  if (auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), d); ec == std::errc() && p == s.data() + s.size())
    return d;
  return s;
}

template <class T>
T scalar(const YAML::Node& n, const char* what) {
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw ScriptError(line_of(n), std::string("'") + what + "' has the wrong type");
  }
}

}  // namespace

Script parse_script(const std::string& text, const fs::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ScriptError(e.mark.line >= 0 ? e.mark.line + 1 : 0, e.msg);
  }
  if (!root.IsMap()) throw ScriptError(line_of(root), "script must be a mapping with a 'steps' list");

  Script s;
  for (const auto& kv : root) {
    const std::string key = kv.first.as<std::string>();
    const YAML::Node& v = kv.second;
    if (key == "seed") {
      s.seed = scalar<std::uint64_t>(v, "seed");
    } else if (key == "canvas") {
      try {
        s.canvas = to_json_value(v).get<CanvasSpec>();
      } catch (const std::exception& e) {
        throw ScriptError(line_of(v), std::string("invalid canvas: ") + e.what());
      }
      if (s.canvas.width <= 0 || s.canvas.height <= 0 || !is_hex_color(s.canvas.background_color))
        throw ScriptError(line_of(v), "canvas needs positive size and a #RRGGBB background");
    } else if (key == "provider_fixture") {
      fs::path p = scalar<std::string>(v, "provider_fixture");
      if (p.is_relative()) p = base_dir / p;
      s.fixture = p;
    } else if (key == "steps") {
      if (!v.IsSequence()) throw ScriptError(line_of(v), "'steps' must be a list");
      for (const auto& step : v) {
        if (!step.IsMap() || step.size() != 1)
          throw ScriptError(line_of(step), "each step has exactly one of: user, apply_layout, canvas");
        const auto entry = *step.begin();
        const std::string kind = entry.first.as<std::string>();
        ScriptStep st;
        st.line = line_of(step);
        if (kind == "user") {
          st.kind = ScriptStep::Kind::user;
          st.text = scalar<std::string>(entry.second, "user");
        } else if (kind == "apply_layout") {
          st.kind = ScriptStep::Kind::apply_layout;
          st.text = entry.second.IsNull() ? "latest" : scalar<std::string>(entry.second, "apply_layout");
        } else if (kind == "canvas") {
          st.kind = ScriptStep::Kind::canvas;
          st.op = to_json_value(entry.second);
          if (!st.op.is_object() || !st.op.contains("op"))
            throw ScriptError(st.line, "a canvas step needs an object with an 'op' key");
        } else {
          throw ScriptError(st.line, "unknown step kind '" + kind + "'");
        }
        s.steps.push_back(std::move(st));
      }
    } else {
      throw ScriptError(line_of(kv.first), "unknown key '" + key + "'");
    }
  }
  if (s.steps.empty()) throw ScriptError(line_of(root), "script has no steps");
  return s;
}

Script load_script(const fs::path& path) {
  std::string text;
  try {
    text = read_text(path);
  } catch (const Error& e) {
    throw ScriptError(0, e.what());
  }
  return parse_script(text, path.parent_path());
}

namespace {

/// Temporary directory removed on scope exit.
class TempDir {
 public:
  TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "gm-run-XXXXXX").string();
    if (!mkdtemp(tmpl.data())) throw Error("StorageError", "cannot create a temporary directory");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string latest_layout(const Conversation& c) {
  for (auto m = c.messages.rbegin(); m != c.messages.rend(); ++m)
    for (auto r = m->resources.rbegin(); r != m->resources.rend(); ++r)
      if (r->media == MediaKind::layout_dsl) return r->resource_id;
  return {};
}

}  // namespace

RunResult run_script(const Script& script, const RunOptions& opts) {
  if (script.fixture && !fs::exists(*script.fixture))
    throw ScriptError(0, "provider fixture not found: " + script.fixture->string());
  Runtime rt;
  try {
    rt = make_runtime(opts.mode, script.fixture, opts.http);
  } catch (const Error& e) {
    if (e.code() == "InvalidFixture") throw ScriptError(0, e.what());
    throw;
  }

  std::optional<TempDir> tmp;
  if (!opts.data_dir) tmp.emplace();
  server::EngineConfig cfg;
  cfg.data_dir = opts.data_dir ? *opts.data_dir : tmp->path();
  cfg.canvas = script.canvas;
  cfg.seed = opts.seed.value_or(script.seed);
  auto make_engine = [&] { return std::make_unique<server::Engine>(cfg, rt.registry, rt.providers); };
  auto engine = make_engine();
  const std::string id = engine->create_session().id;
  auto log = [&](const std::string& line) {
    if (opts.log) opts.log(line);
  };

  for (std::size_t i = 0; i < script.steps.size(); ++i) {
    const ScriptStep& st = script.steps[i];
    const std::string where = "step " + std::to_string(i + 1) + " (line " + std::to_string(st.line) + ")";
    try {
      switch (st.kind) {
        case ScriptStep::Kind::user: {
          const auto r = engine->post_message(id, st.text);
          if (r.outcome.error)
            throw StepError(i, st.line, r.outcome.error->code, where + ": " + r.outcome.error->message);
          if (r.outcome.resource)
            log(where + ": " + r.outcome.decision.call.tool_name + " -> " + r.outcome.resource->resource_id);
          else
            log(where + ": chat");
          break;
        }
        case ScriptStep::Kind::apply_layout: {
          std::string rid = st.text;
          if (rid == "latest") rid = latest_layout(engine->get_session(id).conversation);
          if (rid.empty()) throw StepError(i, st.line, "InvalidOp", where + ": no layout resource to apply");
          engine->canvas_op(id, json{{"op", "apply_layout"}, {"resource_id", rid}});
          log(where + ": applied layout " + rid);
          break;
        }
        case ScriptStep::Kind::canvas:
          engine->canvas_op(id, st.op);
          log(where + ": canvas " + st.op.value("op", std::string()));
          break;
      }
    } catch (const StepError&) {
      throw;
    } catch (const Error& e) {
      throw StepError(i, st.line, e.code(), where + ": " + e.what());
    }
    if (opts.after_step) opts.after_step(i, *engine, id);
    if (opts.restart_each_step) {
      engine.reset();
      engine = make_engine();
    }
  }

  RunResult out;
  out.svg = engine->export_svg(id, opts.link_assets);
  out.session = engine->get_session(id);
  if (opts.link_assets)
    for (const auto& a : out.session.document.assets)
      if (a.kind == AssetKind::image || a.kind == AssetKind::background)
        if (auto bytes = engine->read_blob(id, a.payload)) out.linked[a.payload] = std::move(*bytes);
  return out;
}

}  // namespace gm
