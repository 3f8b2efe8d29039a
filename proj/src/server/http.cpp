#include "dollhouse/server/http.hpp"

#include "dollhouse/error.hpp"
#include "httplib.h"

namespace dollhouse {
namespace {

void send(httplib::Response& res, const MissionService::Reply& reply) {
  res.status = reply.status;
  res.set_content(reply.body.dump(), "application/json");
}

}  // namespace

struct HttpServer::Impl {
  httplib::Server server;
};

HttpServer::HttpServer(MissionService& service, std::optional<std::filesystem::path> static_dir)
    : impl_(std::make_unique<Impl>()) {
  auto& s = impl_->server;
  s.Post("/api/command", [&service](const httplib::Request& req, httplib::Response& res) {
    send(res, service.command(req.body));
  });
  s.Post("/api/reset", [&service](const httplib::Request& req, httplib::Response& res) {
    send(res, service.reset(req.body));
  });
  s.Get("/api/status", [&service](const httplib::Request&, httplib::Response& res) { send(res, service.status()); });
  s.Get("/api/scene", [&service](const httplib::Request&, httplib::Response& res) { send(res, service.scene()); });
  s.Get("/api/items", [&service](const httplib::Request&, httplib::Response& res) { send(res, service.items()); });
  s.Get(R"(/clouds/([A-Za-z0-9_]+)\.ply)", [&service](const httplib::Request& req, httplib::Response& res) {
    if (!service.has_bundle()) {
      send(res, {503, {{"error", "no_bundle"}, {"message", "no scene bundle loaded"}}});
      return;
    }
    const auto ply = service.cloud_ply(req.matches[1]);
    if (!ply) {
      send(res, {404, {{"error", "not_found"}, {"message", "unknown cloud"}}});
      return;
    }
    res.set_content(*ply, "application/octet-stream");
  });
  s.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string message = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      message = e.what();
    } catch (...) {
    }
    send(res, {500, {{"error", "internal"}, {"message", message}}});
  });
  if (static_dir && !s.set_mount_point("/", static_dir->string())) {
    throw Error(ErrorKind::io_failure, "cannot serve static directory " + static_dir->string());
  }
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::start(const std::string& host, int port) {
  auto& s = impl_->server;
  int bound = port;
  if (port == 0) {
    bound = s.bind_to_any_port(host);
  } else if (!s.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) throw Error(ErrorKind::io_failure, "cannot bind " + host + ":" + std::to_string(port));
  thread_ = std::thread([&s] { s.listen_after_bind(); });
  s.wait_until_ready();
  return bound;
}

void HttpServer::run(const std::string& host, int port) {
  if (!impl_->server.listen(host, port)) {
    throw Error(ErrorKind::io_failure, "cannot listen on " + host + ":" + std::to_string(port));
  }
}

void HttpServer::stop() {
  impl_->server.stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace dollhouse
