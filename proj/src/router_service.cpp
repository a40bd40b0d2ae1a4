#include "mma2a/router_service.hpp"

#include "mma2a/error.hpp"

namespace mma2a {
namespace {

HttpResponse rpc_reply(std::string body) { return HttpResponse{200, std::move(body), "application/json"}; }

std::string trim_slash(std::string url) {
  while (!url.empty() && url.back() == '/') url.pop_back();
  return url;
}

}  // namespace

RouterService::RouterService(std::shared_ptr<ModalityRouter> router, std::shared_ptr<BlobStore> blobs,
                             TaskPriority default_priority)
    : router_(std::move(router)), blobs_(std::move(blobs)), default_priority_(default_priority) {
  server_.post("/", [this](const HttpRequest& req) { return handle_rpc(req); });
  server_.get("/blobs/([0-9a-f]{64})", [this](const HttpRequest& req) {
    auto bytes = blobs_->get(req.path_match);
    if (!bytes) return HttpResponse{404, "unknown blob", "text/plain"};
    return HttpResponse{200, std::string(bytes->begin(), bytes->end()), "application/octet-stream"};
  });
}

void RouterService::start(const std::string& host, int port) {
  server_.start(host, port);
  blobs_->set_base_url(server_.base_url());
}

HttpResponse RouterService::handle_rpc(const HttpRequest& req) {
  RpcRequest rpc;
  try {
    rpc = parse_rpc_request(req.body);
  } catch (const Error& e) {
    const int code = e.code() == ErrorCode::malformed_json ? rpc_code::parse_error : rpc_code::invalid_request;
    return rpc_reply(rpc_error(nullptr, code, e.what()));
  }
  const std::string destination = trim_slash(req.header("x-a2a-destination"));
  if (destination.empty()) {
    return rpc_reply(rpc_error(rpc.id, rpc_code::invalid_request, "missing X-A2A-Destination header"));
  }

  if (rpc.method == kMethodSend || rpc.method == kMethodSendSubscribe) {
    Message message;
    try {
      if (!rpc.params.is_object() || !rpc.params.contains("message")) {
        throw Error(ErrorCode::structural, "params.message is required");
      }
      message = message_from_json(rpc.params["message"]);
    } catch (const Error& e) {
      return rpc_reply(rpc_error(rpc.id, rpc_code::invalid_params, e.what()));
    }

    TaskPriority priority = default_priority_;
    std::string task_id;
    // Same precedence as the agents: message metadata, then params metadata.
    const Json meta = message.metadata.is_object() ? message.metadata : rpc.params.value("metadata", Json::object());
    if (meta.is_object()) {
      if (meta.contains("priority") && meta["priority"].is_number_integer()) priority.level = meta["priority"];
      if (meta.contains("benchmarkTaskId") && meta["benchmarkTaskId"].is_string()) task_id = meta["benchmarkTaskId"];
    }
    if (task_id.empty() && rpc.params.contains("id") && rpc.params["id"].is_string()) task_id = rpc.params["id"];

    try {
      std::vector<Part> routed;
      routed.reserve(message.parts.size());
      for (const auto& part : message.parts) {
        routed.push_back(encode_for_wire(router_->route(part, destination, priority, task_id).part, *blobs_));
      }
      message.parts = std::move(routed);
      rpc.params["message"] = message_to_json(message);
    } catch (const Error& e) {
      return rpc_reply(rpc_error(rpc.id, rpc_code::upstream_error, e.what()));
    }
  } else if (rpc.method != kMethodGet) {
    return rpc_reply(rpc_error(rpc.id, rpc_code::method_not_found, "unknown method " + rpc.method));
  }

  try {
    HttpResponse upstream = http_post(destination + "/", encode_rpc_request(rpc), "application/json");
    if (upstream.content_type.empty()) upstream.content_type = "application/json";
    return upstream;
  } catch (const Error& e) {
    return rpc_reply(rpc_error(rpc.id, rpc_code::upstream_error, e.what()));
  }
}

}  // namespace mma2a
