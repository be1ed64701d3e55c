#pragma once

#include "gm/agent.hpp"
#include "gm/composer.hpp"
#include "gm/model.hpp"

#include <chrono>
#include <condition_variable>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gm::agent {
void to_json(nlohmann::json& j, const DispatchOutcome& o);
}  // namespace gm::agent

namespace gm::server {

struct Session {
  std::string id;
  std::string created_at;  // ISO-8601 UTC
  std::string updated_at;
  Conversation conversation;
  InfographicDocument document;

  bool operator==(const Session&) const = default;
};

void to_json(nlohmann::json& j, const Session& s);
void from_json(const nlohmann::json& j, Session& s);

class SessionNotFound : public Error {
 public:
  explicit SessionNotFound(const std::string& id) : Error("SessionNotFound", "no session " + id) {}
};

/// True for ids made of [A-Za-z0-9_-], 1 to 64 characters.
bool is_url_safe_id(std::string_view id);

/// One directory per session: `session.json` plus an `assets/` blob
/// directory. Every write goes to a temp file renamed into place.
class SessionStore {
 public:
  explicit SessionStore(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  bool exists(const std::string& id) const;
  /// Loads the session and re-attaches png bytes to its resources.
  Session load(const std::string& id) const;
  void save(const Session& s) const;
  /// Raw `session.json` text.
  std::string read_json(const std::string& id) const;

  /// `rel` is a path under the session directory such as "assets/r0001.png".
  void write_blob(const std::string& id, const std::string& rel, std::span<const std::uint8_t> bytes) const;
  std::optional<std::vector<std::uint8_t>> read_blob(const std::string& id, const std::string& rel) const;
  std::vector<std::string> list() const;

 private:
  std::filesystem::path dir(const std::string& id) const;
  std::filesystem::path root_;
};

/// Asset-level difference between two documents.
struct DocumentDiff {
  std::vector<DesignAsset> added;
  std::vector<std::string> removed;
  std::vector<DesignAsset> changed;
  /// Set when the applied layout, unplaced list, accent or canvas changed.
  bool document_changed = false;

  bool empty() const { return added.empty() && removed.empty() && changed.empty() && !document_changed; }
};

DocumentDiff diff_documents(const InfographicDocument& before, const InfographicDocument& after);
void to_json(nlohmann::json& j, const DocumentDiff& d);

struct MessageResult {
  agent::DispatchOutcome outcome;
  /// Messages appended by this call, the user message first.
  std::vector<Message> messages;
  DocumentDiff diff;
  InfographicDocument document;
};

void to_json(nlohmann::json& j, const MessageResult& r);

struct CanvasResult {
  DocumentDiff diff;
  InfographicDocument document;
};

/// Per-session push channel. Subscribers receive every event published after
/// they subscribe.
class EventHub {
 public:
  class Subscription {
   public:
    /// Waits up to `timeout` for the next event.
    std::optional<nlohmann::json> next(std::chrono::milliseconds timeout);

   private:
    friend class EventHub;
    std::mutex mu_;
    std::condition_variable cv_;
    std::deque<nlohmann::json> queue_;
  };

  std::shared_ptr<Subscription> subscribe(const std::string& session_id);
  void unsubscribe(const std::string& session_id, const std::shared_ptr<Subscription>& sub);
  void publish(const std::string& session_id, const nlohmann::json& event);

 private:
  std::mutex mu_;
  std::map<std::string, std::vector<std::shared_ptr<Subscription>>> subs_;
};

using ProviderFactory = std::function<std::shared_ptr<agent::Provider>(const std::string& session_id)>;

struct EngineConfig {
  std::filesystem::path data_dir = "gm-data";
  CanvasSpec canvas;
  std::uint64_t seed = 0;
  /// Timestamp source; defaults to the system clock.
  std::function<std::string()> clock;
  /// Session id source; defaults to 16 random hex digits.
  std::function<std::string()> new_id;
};

/// The session service. Commands on one session run one at a time in
/// arrival order; distinct sessions proceed concurrently. Every command
/// loads the persisted session, mutates a copy and persists it before
/// returning, so a restarted engine resumes from exactly the saved state.
class Engine {
 public:
  Engine(EngineConfig config, std::shared_ptr<const agent::ToolRegistry> registry, ProviderFactory providers);

  Session create_session(std::optional<CanvasSpec> canvas = std::nullopt);
  Session get_session(const std::string& id);
  MessageResult post_message(const std::string& id, const std::string& text);
  /// `op` is {"op": move|resize|set_style|place_resource|apply_layout|delete|clip_rect, ...}.
  CanvasResult canvas_op(const std::string& id, const nlohmann::json& op);
  std::string export_svg(const std::string& id, bool link_assets = false);
  std::optional<std::vector<std::uint8_t>> read_blob(const std::string& id, const std::string& rel);

  EventHub& events() { return events_; }
  SessionStore& store() { return store_; }
  const EngineConfig& config() const { return config_; }

 private:
  class Lane;
  class Turn;
  std::shared_ptr<Lane> lane(const std::string& id);
  std::shared_ptr<agent::Provider> provider(const std::string& id);
  void commit(Session& s, const InfographicDocument& before);

  EngineConfig config_;
  SessionStore store_;
  std::shared_ptr<const agent::ToolRegistry> registry_;
  ProviderFactory provider_factory_;
  EventHub events_;

  std::mutex mu_;
  std::map<std::string, std::shared_ptr<Lane>> lanes_;
  std::map<std::string, std::shared_ptr<agent::Provider>> providers_;
};

/// Applies a canvas operation to `doc` (pure; used by Engine::canvas_op).
/// `blob` reads image bytes by payload path; `store_blob` persists a new one
/// and returns its relative path.
struct CanvasContext {
  const Conversation* conversation = nullptr;
  std::function<std::optional<std::vector<std::uint8_t>>(const std::string&)> blob;
  std::function<std::string(const std::string& asset_id, std::span<const std::uint8_t>)> store_blob;
};
InfographicDocument apply_canvas_op(InfographicDocument doc, const nlohmann::json& op, const CanvasContext& ctx);

}  // namespace gm::server
