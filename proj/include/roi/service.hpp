#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>

#include <json.hpp>

#include "roi/pipeline.hpp"

namespace roi {

struct ServiceOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path model_dir;  // models addressable by file stem
  std::chrono::seconds session_ttl{30 * 60};
  std::string cors_origin = "*";
  std::size_t max_upload_bytes = std::size_t{16} << 20;
  PipelineConfig pipeline;
  std::uint64_t cluster_seed = 42;
  int threads = 8;
};

/// Click-to-segment HTTP facade.
///
///   POST /sessions                  multipart "image" (+ optional "mask"), or a raw image body
///   GET  /sessions/{id}/keypoints   ?features=fast|surf|brisk
///   POST /sessions/{id}/segment     {"cx", "cy", "features", "classifier", "model", "seed"}
///   GET  /health
///
/// The handlers are also callable directly, which is how most tests drive them.
class Service {
 public:
  struct Response {
    int status = 200;
    nlohmann::json body;
  };

  explicit Service(ServiceOptions opt);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  Response create_session(std::span<const std::uint8_t> image, std::optional<std::span<const std::uint8_t>> mask);
  Response keypoints(const std::string& session_id, const std::string& features);
  Response segment(const std::string& session_id, const nlohmann::json& request);

  /// Drops sessions idle for longer than the TTL; returns how many.
  std::size_t evict_expired();
  std::size_t session_count() const;

  /// Binds to opt.host; port 0 picks a free port. Returns the bound port or -1.
  int bind();
  /// Serves until stop(). Call after bind().
  bool listen_after_bind();
  /// bind() + listen_after_bind().
  bool listen();
  void stop();
  /// Blocks until the server is accepting connections.
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace roi
