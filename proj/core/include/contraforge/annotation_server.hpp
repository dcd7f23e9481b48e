#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "contraforge/annotation.hpp"

namespace contraforge {

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  // When set, every /api request must carry it in X-Forge-Token.
  std::optional<std::string> token;
  // Directory served at / (the annotation UI bundle).
  std::optional<std::filesystem::path> static_dir;
};

nlohmann::json to_json(const AgreementReport& r);
nlohmann::json to_json(const ReviewSummary& s);

/// HTTP front end of an AnnotationService.
class AnnotationServer {
 public:
  AnnotationServer(AnnotationService& service, ServerOptions options);
  ~AnnotationServer();

  AnnotationServer(const AnnotationServer&) = delete;
  AnnotationServer& operator=(const AnnotationServer&) = delete;

  /// Binds the socket; returns the bound port.
  int bind();
  /// Serves on the calling thread until stop().
  void serve();
  /// bind() + serve() on a background thread; returns the port.
  int start();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace contraforge
