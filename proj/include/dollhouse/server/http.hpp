#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <thread>

#include "dollhouse/server/service.hpp"

namespace dollhouse {

/// REST front end over a MissionService:
///   POST /api/command, GET /api/status, GET /api/scene, GET /api/items,
///   POST /api/reset, GET /clouds/<name>.ply
/// plus an optional static directory mounted at "/" for the console bundle.
class HttpServer {
 public:
  explicit HttpServer(MissionService& service, std::optional<std::filesystem::path> static_dir = std::nullopt);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds and serves on a background thread. Port 0 picks a free port.
  /// Returns the bound port; throws io_failure when binding fails.
  int start(const std::string& host, int port);
  /// Binds and serves on the calling thread until stop().
  void run(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::thread thread_;
};

}  // namespace dollhouse
