#pragma once

#include "gm/server.hpp"

#include <memory>
#include <string>

namespace gm::server {

/// REST + server-sent-events front end of an Engine.
///
///   POST /sessions                         {canvas?}        -> Session
///   GET  /sessions/{id}                                     -> Session
///   POST /sessions/{id}/messages           {text}           -> MessageResult
///   POST /sessions/{id}/canvas             {op, ...}        -> {diff, document}
///   POST /sessions/{id}/layout/apply       {resource_id}    -> {diff, document}
///   GET  /sessions/{id}/export.svg         ?link_assets=1   -> image/svg+xml
///   GET  /sessions/{id}/assets/{file}                       -> image/png
///   GET  /sessions/{id}/events                              -> text/event-stream
///
/// Errors are JSON {code, message, detail} with a matching HTTP status.
class ApiServer {
 public:
  explicit ApiServer(Engine& engine);
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  /// Binds `port` (0 picks a free one) and returns the bound port, or -1.
  int bind(const std::string& host, int port);
  /// Serves until stop(); call after bind().
  bool listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

int http_status(std::string_view code);

}  // namespace gm::server
