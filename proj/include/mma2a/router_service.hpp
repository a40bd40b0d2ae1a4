#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "mma2a/http.hpp"
#include "mma2a/router.hpp"

namespace mma2a {

/// Callers name the real destination agent in this header; the proxy routes
/// each part of the outgoing message and forwards the rewritten request.
inline constexpr std::string_view kDestinationHeader = "X-A2A-Destination";

/// HTTP face of the router. Accepts JSON-RPC `tasks/send`,
/// `tasks/sendSubscribe` and `tasks/get` on POST /, and serves the blob store
/// on GET /blobs/<sha256>.
class RouterService {
 public:
  RouterService(std::shared_ptr<ModalityRouter> router, std::shared_ptr<BlobStore> blobs,
                TaskPriority default_priority = {});

  /// Binds, then points the blob store's base URL at this server.
  void start(const std::string& host = "127.0.0.1", int port = 0);
  void stop() { server_.stop(); }

  std::string base_url() const { return server_.base_url(); }
  ModalityRouter& router() noexcept { return *router_; }
  BlobStore& blobs() noexcept { return *blobs_; }

 private:
  HttpResponse handle_rpc(const HttpRequest& req);

  std::shared_ptr<ModalityRouter> router_;
  std::shared_ptr<BlobStore> blobs_;
  TaskPriority default_priority_;
  HttpServer server_;
};

}  // namespace mma2a
