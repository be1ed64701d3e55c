#include "gm/http.hpp"

#include <httplib.h>

#include <cstdlib>
#include <semaphore>

namespace gm {

std::pair<std::string, std::string> split_url(const std::string& url) {
  const auto scheme = url.find("://");
  const auto path_start = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

std::string url_encode(std::string_view s) {
  static const char hex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out += static_cast<char>(c);
    } else {
      out += '%';
      out += hex[c >> 4];
      out += hex[c & 15];
    }
  }
  return out;
}

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return (v && *v) ? std::string(v) : fallback;
}

namespace {

class LibHttpClient final : public HttpClient {
 public:
  explicit LibHttpClient(HttpClientOptions opts)
      : opts_(opts), slots_(std::max(1, opts.max_concurrency)) {}

  HttpResponse get(const std::string& url) override {
    return call(url, [&](httplib::Client& cli, const std::string& path) { return cli.Get(path); });
  }

  HttpResponse post_json(const std::string& url, const std::string& body,
                         const HttpHeaders& headers) override {
    return call(url, [&](httplib::Client& cli, const std::string& path) {
      httplib::Headers h(headers.begin(), headers.end());
      return cli.Post(path, h, body, "application/json");
    });
  }

 private:
  template <typename Fn>
  HttpResponse call(const std::string& url, Fn&& fn) {
    slots_.acquire();
    struct Release {
      std::counting_semaphore<>& s;
      ~Release() { s.release(); }
    } release{slots_};

    HttpResponse out;
    try {
      auto [origin, path] = split_url(url);
      httplib::Client cli(origin);
      cli.set_connection_timeout(opts_.timeout);
      cli.set_read_timeout(opts_.timeout);
      cli.set_write_timeout(opts_.timeout);
      cli.set_follow_location(true);
      auto res = fn(cli, path);
      if (!res) {
        out.error = httplib::to_string(res.error());
        return out;
      }
      out.status = res->status;
      out.body = res->body;
    } catch (const std::exception& e) {
      out.error = e.what();
    }
    return out;
  }

  HttpClientOptions opts_;
  std::counting_semaphore<> slots_;
};

}  // namespace

std::shared_ptr<HttpClient> make_http_client(HttpClientOptions opts) {
  return std::make_shared<LibHttpClient>(opts);
}

}  // namespace gm
