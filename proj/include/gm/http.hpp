#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <string>

namespace gm {

struct HttpResponse {
  /// 0 when no response arrived (connection refused, timeout, ...).
  int status = 0;
  std::string body;
  std::string error;

  bool ok() const { return status >= 200 && status < 300; }
};

using HttpHeaders = std::map<std::string, std::string>;

/// Seam for every outbound call so adapters can be pointed at mocks.
class HttpClient {
 public:
  virtual ~HttpClient() = default;
  virtual HttpResponse get(const std::string& url) = 0;
  virtual HttpResponse post_json(const std::string& url, const std::string& body,
                                 const HttpHeaders& headers = {}) = 0;
};

struct HttpClientOptions {
  std::chrono::seconds timeout{60};
  /// Simultaneous requests allowed through this client.
  int max_concurrency = 4;
};

std::shared_ptr<HttpClient> make_http_client(HttpClientOptions opts = {});

/// Splits "https://host:port/a/b?q" into ("https://host:port", "/a/b?q").
std::pair<std::string, std::string> split_url(const std::string& url);

std::string url_encode(std::string_view s);

/// Value of an environment variable, or `fallback` when unset/empty.
std::string env_or(const char* name, std::string fallback = {});

}  // namespace gm
