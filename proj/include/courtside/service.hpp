// Read-only HTTP API over analyzed bundles, byte-range video and static
// viewer hosting.
#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "courtside/model.hpp"

namespace courtside {

struct ServiceConfig {
  std::filesystem::path data_dir;
  std::filesystem::path video_dir;
  std::filesystem::path static_dir;  // viewer build; optional
  std::string bind = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
};

// Bundles keyed by match id: `<id>.json` files and `<id>/bundle.json`
// directories inside the data dir. Throws Error{"MissingDataDir"},
// Error{"NoBundles"} or the bundle's read error.
std::map<std::string, MatchBundle> load_bundles(const std::filesystem::path& data_dir);

struct ApiResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

using QueryParams = std::multimap<std::string, std::string>;

// Pure request handler for every /api route.
class Api {
 public:
  explicit Api(std::map<std::string, MatchBundle> bundles);
  ApiResponse get(const std::string& path, const QueryParams& query) const;
  const std::map<std::string, MatchBundle>& bundles() const { return bundles_; }

 private:
  std::map<std::string, MatchBundle> bundles_;
};

class Server {
 public:
  // Loads bundles and binds. Throws Error{"PortUnavailable"} on bind failure.
  explicit Server(const ServiceConfig& config);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  int port() const;
  // Blocks until stop().
  void run();
  // Runs in a background thread.
  void start();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace courtside
