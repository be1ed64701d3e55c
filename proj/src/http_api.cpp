#include "gm/http_api.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <atomic>

namespace gm::server {

using nlohmann::json;

int http_status(std::string_view code) {
  if (code == "SessionNotFound" || code == "UnknownAsset" || code == "NotFound") return 404;
  if (code == "InvalidOp" || code == "InvalidRequest" || code == "SyntaxError" || code == "InvalidTree" ||
      code == "DepthError")
    return 400;
  if (code == "InvariantViolation") return 422;
  return 500;
}

struct ApiServer::Impl {
  Engine& engine;
  httplib::Server http;
  std::atomic<bool> stopping{false};

  explicit Impl(Engine& e) : engine(e) {}

  static void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  static void send_error(httplib::Response& res, const std::string& code, const std::string& message,
                         json detail = nullptr) {
    send_json(res, http_status(code), json{{"code", code}, {"message", message}, {"detail", std::move(detail)}});
  }

  template <class F>
  static auto guarded(F f) {
    return [f](const httplib::Request& req, httplib::Response& res) {
      try {
        f(req, res);
      } catch (const layout::SyntaxError& e) {
        send_error(res, e.code(), e.what(), json{{"line", e.line()}, {"col", e.col()}});
      } catch (const Error& e) {
        send_error(res, e.code(), e.what());
      } catch (const json::exception& e) {
        send_error(res, "InvalidRequest", std::string("malformed JSON: ") + e.what());
      } catch (const std::exception& e) {
        spdlog::error("{} {} failed: {}", req.method, req.path, e.what());
        send_error(res, "Internal", e.what());
      }
    };
  }

  static json body(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    json j = json::parse(req.body);
    if (!j.is_object()) throw Error("InvalidRequest", "request body must be a JSON object");
    return j;
  }

  void routes() {
    http.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Headers", "Content-Type"},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
    http.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    http.Post("/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const json b = body(req);
      std::optional<CanvasSpec> canvas;
      if (b.contains("canvas")) canvas = b["canvas"].get<CanvasSpec>();
      send_json(res, 201, engine.create_session(canvas));
    }));

    http.Get("/sessions/:id", guarded([this](const httplib::Request& req, httplib::Response& res) {
      send_json(res, 200, engine.get_session(req.path_params.at("id")));
    }));

    http.Post("/sessions/:id/messages", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const json b = body(req);
      if (!b.contains("text") || !b["text"].is_string()) throw Error("InvalidRequest", "'text' must be a string");
      send_json(res, 200, engine.post_message(req.path_params.at("id"), b["text"].get<std::string>()));
    }));

    http.Post("/sessions/:id/canvas", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const auto r = engine.canvas_op(req.path_params.at("id"), body(req));
      send_json(res, 200, json{{"diff", r.diff}, {"document", r.document}});
    }));

    http.Post("/sessions/:id/layout/apply", guarded([this](const httplib::Request& req, httplib::Response& res) {
      json op = body(req);
      op["op"] = "apply_layout";
      const auto r = engine.canvas_op(req.path_params.at("id"), op);
      send_json(res, 200, json{{"diff", r.diff}, {"document", r.document}});
    }));

    http.Get("/sessions/:id/export.svg", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const bool link = req.has_param("link_assets") && req.get_param_value("link_assets") != "0";
      res.set_content(engine.export_svg(req.path_params.at("id"), link), "image/svg+xml");
    }));

    http.Get("/sessions/:id/assets/:file", guarded([this](const httplib::Request& req, httplib::Response& res) {
      auto bytes = engine.read_blob(req.path_params.at("id"), "assets/" + req.path_params.at("file"));
      if (!bytes) throw Error("NotFound", "no such asset file");
      res.set_content(std::string(bytes->begin(), bytes->end()), "image/png");
    }));

    http.Get("/sessions/:id/events", guarded([this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.path_params.at("id");
      if (!engine.store().exists(id)) throw SessionNotFound(id);
      auto sub = engine.events().subscribe(id);
      res.set_header("Cache-Control", "no-cache");
      res.set_chunked_content_provider(
          "text/event-stream",
          [this, sub](std::size_t, httplib::DataSink& sink) {
            if (stopping) {
              sink.done();
              return true;
            }
            const auto event = sub->next(std::chrono::milliseconds(500));
            const std::string frame = event ? "data: " + event->dump() + "\n\n" : ": keepalive\n\n";
            return sink.write(frame.data(), frame.size());
          },
          [this, id, sub](bool) { engine.events().unsubscribe(id, sub); });
    }));
  }
};

ApiServer::ApiServer(Engine& engine) : impl_(std::make_unique<Impl>(engine)) { impl_->routes(); }

ApiServer::~ApiServer() { stop(); }

int ApiServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->http.bind_to_any_port(host);
  return impl_->http.bind_to_port(host, port) ? port : -1;
}

bool ApiServer::listen() { return impl_->http.listen_after_bind(); }

void ApiServer::stop() {
  impl_->stopping = true;
  impl_->http.stop();
}

}  // namespace gm::server
