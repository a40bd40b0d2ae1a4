#pragma once

// Thin HTTP layer over cpp-httplib, kept behind a pimpl so that only one
// translation unit pays for the header.

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <string>

namespace mma2a {

struct HttpRequest {
  std::string method;
  std::string path;
  std::string body;
  std::map<std::string, std::string> headers;  // lower-case names
  std::map<std::string, std::string> query;
  std::string path_match;  // first regex capture group, if any

  std::string header(const std::string& lower_name) const {
    auto it = headers.find(lower_name);
    return it == headers.end() ? std::string() : it->second;
  }
};

struct HttpResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

class HttpServer {
 public:
  using Handler = std::function<HttpResponse(const HttpRequest&)>;

  HttpServer();
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Patterns are ECMAScript regexes matched against the whole path.
  void get(const std::string& pattern, Handler handler);
  void post(const std::string& pattern, Handler handler);

  /// Binds to host:port (port 0 picks a free one) and starts serving on a
  /// background thread. Throws bind_failure naming the port.
  void start(const std::string& host, int port);
  void stop();

  int port() const noexcept { return port_; }
  std::string base_url() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::string host_;
  int port_ = 0;
};

struct HttpClientOptions {
  std::chrono::milliseconds timeout{30'000};
  std::map<std::string, std::string> headers;
};

/// Throws network_unreachable when no connection can be made. Any HTTP status
/// is returned to the caller.
HttpResponse http_get(const std::string& url, const HttpClientOptions& options = {});
HttpResponse http_post(const std::string& url, const std::string& body, const std::string& content_type,
                       const HttpClientOptions& options = {});

}  // namespace mma2a
