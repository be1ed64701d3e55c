#include "gm/server.hpp"

#include "gm/image.hpp"
#include "gm/util.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <random>

namespace gm::server {

namespace fs = std::filesystem;
using nlohmann::json;

void to_json(json& j, const Session& s) {
  j = json{{"id", s.id},
           {"created_at", s.created_at},
           {"updated_at", s.updated_at},
           {"conversation", s.conversation},
           {"document", s.document}};
}

void from_json(const json& j, Session& s) {
  s.id = j.at("id").get<std::string>();
  s.created_at = j.at("created_at").get<std::string>();
  s.updated_at = j.at("updated_at").get<std::string>();
  s.conversation = j.at("conversation").get<Conversation>();
  s.document = j.at("document").get<InfographicDocument>();
}

bool is_url_safe_id(std::string_view id) {
  if (id.empty() || id.size() > 64) return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_';
  });
}

// ---------------------------------------------------------------------------

namespace {

bool safe_relative(const std::string& rel) {
  if (rel.empty() || rel.front() == '/') return false;
  const fs::path p(rel);
  return std::none_of(p.begin(), p.end(), [](const fs::path& part) { return part == ".."; });
}

}  // namespace

SessionStore::SessionStore(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec) throw Error("StorageError", "cannot create data directory " + root_.string() + ": " + ec.message());
}

fs::path SessionStore::dir(const std::string& id) const {
  if (!is_url_safe_id(id)) throw SessionNotFound(id);
  return root_ / id;
}

bool SessionStore::exists(const std::string& id) const {
  return is_url_safe_id(id) && fs::exists(root_ / id / "session.json");
}

std::string SessionStore::read_json(const std::string& id) const {
  if (!exists(id)) throw SessionNotFound(id);
  return read_text(dir(id) / "session.json");
}

Session SessionStore::load(const std::string& id) const {
  Session s;
  try {
    s = json::parse(read_json(id)).get<Session>();
  } catch (const json::exception& e) {
    throw Error("StorageError", "corrupt session " + id + ": " + e.what());
  }
  for (auto& m : s.conversation.messages)
    for (auto& r : m.resources)
      if (r.media == MediaKind::png)
        if (auto bytes = read_blob(id, r.content)) r.data = std::move(*bytes);
  return s;
}

void SessionStore::save(const Session& s) const {
  const fs::path d = dir(s.id);
  std::error_code ec;
  fs::create_directories(d / "assets", ec);
  if (ec) throw Error("StorageError", "cannot create " + d.string() + ": " + ec.message());
  write_file_atomic(d / "session.json", json(s).dump(2) + "\n");
}

void SessionStore::write_blob(const std::string& id, const std::string& rel, std::span<const std::uint8_t> bytes) const {
  if (!safe_relative(rel)) throw Error("StorageError", "invalid blob path " + rel);
  const fs::path p = dir(id) / rel;
  std::error_code ec;
  fs::create_directories(p.parent_path(), ec);
  if (ec) throw Error("StorageError", "cannot create " + p.parent_path().string() + ": " + ec.message());
  write_file_atomic(p, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

std::optional<std::vector<std::uint8_t>> SessionStore::read_blob(const std::string& id, const std::string& rel) const {
  if (!is_url_safe_id(id) || !safe_relative(rel)) return std::nullopt;
  const fs::path p = root_ / id / rel;
  if (!fs::is_regular_file(p)) return std::nullopt;
  return read_file(p);
}

std::vector<std::string> SessionStore::list() const {
  std::vector<std::string> out;
  for (const auto& e : fs::directory_iterator(root_))
    if (e.is_directory() && fs::exists(e.path() / "session.json")) out.push_back(e.path().filename().string());
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------

DocumentDiff diff_documents(const InfographicDocument& before, const InfographicDocument& after) {
  DocumentDiff d;
  for (const auto& a : after.assets) {
    const DesignAsset* old = before.find(a.id);
    if (!old) d.added.push_back(a);
    else if (!(*old == a)) d.changed.push_back(a);
  }
  for (const auto& a : before.assets)
    if (!after.find(a.id)) d.removed.push_back(a.id);
  d.document_changed = before.layout != after.layout || before.unplaced != after.unplaced ||
                       before.accent_color != after.accent_color || before.canvas != after.canvas;
  return d;
}

void to_json(json& j, const DocumentDiff& d) {
  j = json{{"added", d.added}, {"removed", d.removed}, {"changed", d.changed}, {"document_changed", d.document_changed}};
}

}  // namespace gm::server

void gm::agent::to_json(nlohmann::json& j, const DispatchOutcome& o) {
  using nlohmann::json;
  j = json{{"decision", o.decision}, {"attempts", o.attempts}, {"resource", nullptr}, {"error", nullptr}};
  if (o.resource) j["resource"] = *o.resource;
  if (o.error) {
    json e{{"code", o.error->code}, {"message", o.error->message}};
    if (o.error->arg) e["arg"] = {{"param", o.error->arg->param}, {"reason", o.error->arg->reason}};
    j["error"] = std::move(e);
  }
}

namespace gm::server {

void to_json(json& j, const MessageResult& r) {
  j = json{{"outcome", r.outcome}, {"messages", r.messages}, {"diff", r.diff}, {"document", r.document}};
}

// ---------------------------------------------------------------------------

std::optional<json> EventHub::Subscription::next(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mu_);
  if (!cv_.wait_for(lock, timeout, [&] { return !queue_.empty(); })) return std::nullopt;
  json e = std::move(queue_.front());
  queue_.pop_front();
  return e;
}

std::shared_ptr<EventHub::Subscription> EventHub::subscribe(const std::string& session_id) {
  auto sub = std::make_shared<Subscription>();
  std::lock_guard lock(mu_);
  subs_[session_id].push_back(sub);
  return sub;
}

void EventHub::unsubscribe(const std::string& session_id, const std::shared_ptr<Subscription>& sub) {
  std::lock_guard lock(mu_);
  auto it = subs_.find(session_id);
  if (it == subs_.end()) return;
  std::erase(it->second, sub);
  if (it->second.empty()) subs_.erase(it);
}

void EventHub::publish(const std::string& session_id, const json& event) {
  std::vector<std::shared_ptr<Subscription>> targets;
  {
    std::lock_guard lock(mu_);
    if (auto it = subs_.find(session_id); it != subs_.end()) targets = it->second;
  }
  for (const auto& s : targets) {
    {
      std::lock_guard lock(s->mu_);
      s->queue_.push_back(event);
    }
    s->cv_.notify_all();
  }
}

// ---------------------------------------------------------------------------
// Canvas operations
// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void invalid(const std::string& msg) { throw Error("InvalidOp", msg); }

double number(const json& op, const char* key) {
  auto it = op.find(key);
  if (it == op.end() || !it->is_number()) invalid(std::string("'") + key + "' must be a number");
  const double v = it->get<double>();
  if (!std::isfinite(v)) invalid(std::string("'") + key + "' must be finite");
  return v;
}

std::string text_field(const json& op, const char* key) {
  auto it = op.find(key);
  if (it == op.end() || !it->is_string()) invalid(std::string("'") + key + "' must be a string");
  return it->get<std::string>();
}

DesignAsset& target_asset(InfographicDocument& doc, const json& op) {
  const std::string id = text_field(op, "asset_id");
  DesignAsset* a = doc.find(id);
  if (!a) throw Error("UnknownAsset", "no asset " + id);
  return *a;
}

DesignResource target_resource(const json& op, const CanvasContext& ctx) {
  const std::string id = text_field(op, "resource_id");
  const DesignResource* r = ctx.conversation ? ctx.conversation->find_resource(id) : nullptr;
  if (!r) throw Error("UnknownAsset", "no resource " + id);
  DesignResource copy = *r;
  if (copy.media == MediaKind::png && copy.data.empty() && ctx.blob)
    if (auto bytes = ctx.blob(copy.content)) copy.data = std::move(*bytes);
  return copy;
}

void pin(InfographicDocument& doc, DesignAsset& a) {
  a.pinned = true;
  std::erase(doc.unplaced, a.id);
}

}  // namespace

InfographicDocument apply_canvas_op(InfographicDocument doc, const json& op, const CanvasContext& ctx) {
  if (!op.is_object()) invalid("operation must be a JSON object");
  const std::string kind = text_field(op, "op");
  try {
    if (kind == "move") {
      DesignAsset& a = target_asset(doc, op);
      if (a.kind == AssetKind::background) invalid("the background cannot be moved");
      a.rect.x = number(op, "x");
      a.rect.y = number(op, "y");
      a.rect = clamp_to_canvas(a.rect, doc.canvas);
      pin(doc, a);
    } else if (kind == "resize") {
      DesignAsset& a = target_asset(doc, op);
      if (a.kind == AssetKind::background) invalid("the background cannot be resized");
      const double w = number(op, "w");
      const double h = number(op, "h");
      if (!(w > 0) || !(h > 0)) invalid("width and height must be positive");
      if (op.contains("x")) a.rect.x = number(op, "x");
      if (op.contains("y")) a.rect.y = number(op, "y");
      a.rect.w = w;
      a.rect.h = h;
      a.rect = clamp_to_canvas(a.rect, doc.canvas);
      pin(doc, a);
    } else if (kind == "set_style") {
      DesignAsset& a = target_asset(doc, op);
      if (!op.contains("style")) invalid("'style' is required");
      a.style = merge_style(a.style, op["style"]);
      if (a.kind == AssetKind::text) a.overflow = composer::fit_text(a.payload, a.rect, a.style).overflow;
    } else if (kind == "place_resource") {
      const DesignResource r = target_resource(op, ctx);
      const double x = op.contains("x") ? number(op, "x") : doc.canvas.width / 2.0;
      const double y = op.contains("y") ? number(op, "y") : doc.canvas.height / 2.0;
      doc = composer::place_resource(std::move(doc), r, x, y);
    } else if (kind == "apply_layout") {
      const DesignResource r = target_resource(op, ctx);
      if (r.media != MediaKind::layout_dsl) invalid("resource " + r.resource_id + " is not a layout");
      doc = composer::apply_layout(std::move(doc), layout::parse_layout(r.content));
    } else if (kind == "delete") {
      const std::string id = target_asset(doc, op).id;
      remove_asset(doc, id);
    } else if (kind == "clip_rect") {
      DesignAsset& a = target_asset(doc, op);
      if (a.kind != AssetKind::image && a.kind != AssetKind::background) invalid("only images can be clipped");
      std::optional<std::vector<std::uint8_t>> bytes = ctx.blob ? ctx.blob(a.payload) : std::nullopt;
      if (!bytes) invalid("image data for " + a.id + " is unavailable");
      const json& r = op.contains("rect") ? op["rect"] : op;
      const Rect sel{number(r, "x"), number(r, "y"), number(r, "w"), number(r, "h")};
      DesignResource clipped;
      try {
        clipped = tools::clip_image(*bytes, tools::RectSelector{sel}, nullptr);
      } catch (const Error& e) {
        invalid(e.what());
      }
      if (!ctx.store_blob) invalid("no blob storage available");
      a.payload = ctx.store_blob(a.id, clipped.data);
    } else {
      invalid("unknown canvas operation '" + kind + "'");
    }
  } catch (const json::exception& e) {
    invalid(e.what());
  }
  const auto violations = check_document(doc);
  if (!violations.empty()) {
    std::string msg = "operation rejected:";
    for (const auto& v : violations) msg += " " + v + ";";
    throw Error("InvariantViolation", msg);
  }
  return doc;
}

// ---------------------------------------------------------------------------
// Engine
// ---------------------------------------------------------------------------

class Engine::Lane {
 public:
  std::mutex mu;
  std::condition_variable cv;
  std::uint64_t next = 0;
  std::uint64_t serving = 0;
};

/// FIFO ticket held for the duration of one command.
class Engine::Turn {
 public:
  explicit Turn(Lane& lane) : lane_(lane) {
    std::unique_lock lock(lane_.mu);
    const std::uint64_t ticket = lane_.next++;
    lane_.cv.wait(lock, [&] { return lane_.serving == ticket; });
  }
  ~Turn() {
    {
      std::lock_guard lock(lane_.mu);
      ++lane_.serving;
    }
    lane_.cv.notify_all();
  }
  Turn(const Turn&) = delete;
  Turn& operator=(const Turn&) = delete;

 private:
  Lane& lane_;
};

namespace {

std::string system_clock_iso() {
  const auto now = std::chrono::system_clock::now();
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday,
                tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(ms));
  return buf;
}

std::string random_id() {
  static std::mutex mu;
  static std::mt19937_64 rng{std::random_device{}()};
  std::lock_guard lock(mu);
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(rng()));
  return buf;
}

InfographicDocument place_new_resource(InfographicDocument doc, const DesignResource& r) {
  const bool has_layout = doc.layout.has_value();
  switch (r.media) {
    case MediaKind::png: {
      const std::vector<DesignResource> images{r};
      return has_layout ? composer::auto_place(std::move(doc), std::nullopt, {}, images, std::nullopt)
                        : composer::stage(std::move(doc), std::nullopt, {}, images);
    }
    case MediaKind::text_bundle: {
      const auto info = tools::collected_from_json(json::parse(r.content));
      return has_layout
                 ? composer::auto_place(std::move(doc), info.bundle, info.icons, {}, std::nullopt, r.resource_id)
                 : composer::stage(std::move(doc), info.bundle, info.icons, {}, r.resource_id);
    }
    case MediaKind::layout_dsl:  // click-to-apply
    case MediaKind::svg:         // dragged in manually
      return doc;
  }
  return doc;
}

}  // namespace

Engine::Engine(EngineConfig config, std::shared_ptr<const agent::ToolRegistry> registry, ProviderFactory providers)
    : config_(std::move(config)),
      store_(config_.data_dir),
      registry_(std::move(registry)),
      provider_factory_(std::move(providers)) {
  if (!config_.clock) config_.clock = system_clock_iso;
  if (!config_.new_id) config_.new_id = random_id;
}

std::shared_ptr<Engine::Lane> Engine::lane(const std::string& id) {
  std::lock_guard lock(mu_);
  auto& l = lanes_[id];
  if (!l) l = std::make_shared<Lane>();
  return l;
}

std::shared_ptr<agent::Provider> Engine::provider(const std::string& id) {
  std::lock_guard lock(mu_);
  auto& p = providers_[id];
  if (!p) p = provider_factory_(id);
  if (!p) throw Error("ProviderError", "no provider configured");
  return p;
}

void Engine::commit(Session& s, const InfographicDocument& before) {
  const auto violations = check_document(s.document);
  if (!violations.empty()) throw Error("InvariantViolation", "document invariant broken: " + violations.front());
  s.updated_at = std::max(config_.clock(), s.created_at);
  store_.save(s);
  events_.publish(s.id, json{{"type", "document"}, {"diff", diff_documents(before, s.document)}});
}

Session Engine::create_session(std::optional<CanvasSpec> canvas) {
  Session s;
  const CanvasSpec c = canvas.value_or(config_.canvas);
  if (c.width <= 0 || c.height <= 0 || !is_hex_color(c.background_color))
    throw Error("InvalidRequest", "canvas needs positive size and a #RRGGBB background");
  do {
    s.id = config_.new_id();
  } while (store_.exists(s.id));
  if (!is_url_safe_id(s.id)) throw Error("StorageError", "generated session id is not URL-safe");
  s.conversation.session_id = s.id;
  s.document.canvas = c;
  s.created_at = s.updated_at = config_.clock();
  auto l = lane(s.id);
  Turn turn(*l);
  store_.save(s);
  spdlog::info("created session {}", s.id);
  return s;
}

Session Engine::get_session(const std::string& id) {
  auto l = lane(id);
  Turn turn(*l);
  return store_.load(id);
}

MessageResult Engine::post_message(const std::string& id, const std::string& text) {
  if (trim(text).empty()) throw Error("InvalidRequest", "message text is empty");
  auto l = lane(id);
  Turn turn(*l);
  Session s = store_.load(id);
  const InfographicDocument before = s.document;
  const std::size_t first = s.conversation.messages.size();
  s.conversation.append(Message{Role::user, text, {}});

  agent::DispatchOptions opts;
  opts.canvas = s.document.canvas;
  opts.seed = config_.seed;
  opts.on_execute = [&](const agent::ToolCall& call) {
    events_.publish(id, json{{"type", "tool_started"}, {"tool", call.tool_name}, {"args", call.args}});
  };
  MessageResult result;
  result.outcome = agent::dispatch(s.conversation, *registry_, *provider(id), opts);

  if (const auto& r = result.outcome.resource) {
    if (r->media == MediaKind::png) store_.write_blob(id, r->content, r->data);
    s.document = place_new_resource(std::move(s.document), *r);
    events_.publish(id, json{{"type", "tool_finished"}, {"resource", *r}});
  } else if (result.outcome.error) {
    events_.publish(id, json{{"type", "tool_failed"}, {"code", result.outcome.error->code}});
  }
  commit(s, before);
  result.messages.assign(s.conversation.messages.begin() + static_cast<std::ptrdiff_t>(first),
                         s.conversation.messages.end());
  result.diff = diff_documents(before, s.document);
  result.document = s.document;
  return result;
}

CanvasResult Engine::canvas_op(const std::string& id, const json& op) {
  auto l = lane(id);
  Turn turn(*l);
  Session s = store_.load(id);
  const InfographicDocument before = s.document;
  CanvasContext ctx;
  ctx.conversation = &s.conversation;
  ctx.blob = [&](const std::string& rel) { return store_.read_blob(id, rel); };
  ctx.store_blob = [&](const std::string& asset_id, std::span<const std::uint8_t> bytes) {
    char hash[20];
    std::snprintf(hash, sizeof hash, "%016llx",
                  static_cast<unsigned long long>(
                      fnv1a(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()))));
    const std::string rel = "assets/" + asset_id + "-clip-" + hash + ".png";
    store_.write_blob(id, rel, bytes);
    return rel;
  };
  s.document = apply_canvas_op(std::move(s.document), op, ctx);
  commit(s, before);
  return CanvasResult{diff_documents(before, s.document), s.document};
}

std::string Engine::export_svg(const std::string& id, bool link_assets) {
  const Session s = get_session(id);
  composer::ExportOptions opts;
  opts.link_assets = link_assets;
  opts.blob = [&](const std::string& rel) { return store_.read_blob(id, rel); };
  return composer::export_svg(s.document, opts);
}

std::optional<std::vector<std::uint8_t>> Engine::read_blob(const std::string& id, const std::string& rel) {
  if (!store_.exists(id)) throw SessionNotFound(id);
  return store_.read_blob(id, rel);
}

}  // namespace gm::server
