#include "mma2a/http.hpp"

#include <algorithm>
#include <cctype>
#include <thread>
#include <utility>

#include <httplib.h>

#include "mma2a/error.hpp"

namespace mma2a {
namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

HttpRequest to_request(const httplib::Request& req) {
  HttpRequest out;
  out.method = req.method;
  out.path = req.path;
  out.body = req.body;
  for (const auto& [k, v] : req.headers) out.headers.emplace(lower(k), v);
  for (const auto& [k, v] : req.params) out.query.emplace(k, v);
  if (req.matches.size() > 1) out.path_match = req.matches[1].str();
  return out;
}

httplib::Server::Handler wrap(HttpServer::Handler handler) {
  return [handler = std::move(handler)](const httplib::Request& req, httplib::Response& res) {
    HttpResponse out;
    try {
      out = handler(to_request(req));
    } catch (const std::exception& e) {
      out = HttpResponse{500, e.what(), "text/plain"};
    }
    res.status = out.status;
    res.set_content(out.body, out.content_type);
  };
}

std::pair<std::string, std::string> split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error(ErrorCode::network_unreachable, "not an absolute URL: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

httplib::Headers to_headers(const std::map<std::string, std::string>& headers) {
  httplib::Headers out;
  for (const auto& [k, v] : headers) out.emplace(k, v);
  return out;
}

HttpResponse from_result(const httplib::Result& result, const std::string& url) {
  if (!result) {
    throw Error(ErrorCode::network_unreachable, url + " (" + httplib::to_string(result.error()) + ")");
  }
  return HttpResponse{result->status, result->body, result->get_header_value("Content-Type")};
}

template <typename F>
HttpResponse with_client(const std::string& url, const HttpClientOptions& options, F&& call) {
  auto [base, path] = split_url(url);
  httplib::Client client(base);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(options.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(options.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  return from_result(call(client, path, to_headers(options.headers)), url);
}

}  // namespace

struct HttpServer::Impl {
  httplib::Server server;
  std::thread thread;
};

HttpServer::HttpServer() : impl_(std::make_unique<Impl>()) {}

HttpServer::~HttpServer() { stop(); }

void HttpServer::get(const std::string& pattern, Handler handler) { impl_->server.Get(pattern, wrap(std::move(handler))); }

void HttpServer::post(const std::string& pattern, Handler handler) {
  impl_->server.Post(pattern, wrap(std::move(handler)));
}

void HttpServer::start(const std::string& host, int port) {
  // httplib's default adds SO_REUSEPORT, which would let a second server
  // share a busy port instead of failing.
  impl_->server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  int bound = -1;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (impl_->server.bind_to_port(host, port)) {
    bound = port;
  }
  if (bound <= 0) throw Error(ErrorCode::bind_failure, "cannot bind " + host + ":" + std::to_string(port));
  host_ = host;
  port_ = bound;
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void HttpServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

std::string HttpServer::base_url() const { return "http://" + host_ + ":" + std::to_string(port_); }

HttpResponse http_get(const std::string& url, const HttpClientOptions& options) {
  return with_client(url, options, [](httplib::Client& c, const std::string& path, const httplib::Headers& h) {
    return c.Get(path, h);
  });
}

HttpResponse http_post(const std::string& url, const std::string& body, const std::string& content_type,
                       const HttpClientOptions& options) {
  return with_client(url, options, [&](httplib::Client& c, const std::string& path, const httplib::Headers& h) {
    return c.Post(path, h, body, content_type);
  });
}

}  // namespace mma2a
