#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "docenh/harness.hpp"
#include "docenh/judgments.hpp"

namespace httplib {
class Server;
}

namespace docenh {

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::filesystem::path judgments = "judgments.jsonl";
  std::filesystem::path static_dir;  // served at / when it exists
};

class ServerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// HTTP API for the review UI. All bodies are JSON except images (PNG).
///
///   GET  /api/manifest                          entries, roles and engines
///   GET  /api/image/{id}/{role}                 raw | reference | white | enhanced/{engine}
///   GET  /api/scores/{id}                       report records for the entry
///   GET  /api/judgments                         latest judgment per pair
///   GET  /api/judgments/{id}/{engine}/history   every judgment for the pair
///   POST /api/judgments                         {entry, engine, criteria, verdict, note}
///   GET  /api/progress                          reviewed / total pair counts
class ReviewServer {
 public:
  ReviewServer(Manifest manifest, std::optional<EvaluationReport> report, ServerOptions options);
  ~ReviewServer();
  ReviewServer(const ReviewServer&) = delete;
  ReviewServer& operator=(const ReviewServer&) = delete;

  /// Binds the socket and returns the port. Throws ServerError on failure.
  int bind();
  /// Serves until stop(). Binds first if needed.
  void listen();
  /// bind() plus listen() on a background thread.
  int start();
  void stop();

  /// Engines that have an image for `entry`, manifest first, then report.
  std::vector<std::string> engines_for(const std::string& entry) const;
  std::optional<std::filesystem::path> enhanced_path(const std::string& entry,
                                                     const std::string& engine) const;
  const JudgmentLog& judgments() const noexcept { return log_; }

 private:
  void routes();

  Manifest manifest_;
  std::optional<EvaluationReport> report_;
  ServerOptions options_;
  JudgmentLog log_;
  std::unique_ptr<httplib::Server> http_;
  std::thread thread_;
  int port_ = -1;
};

}  // namespace docenh
