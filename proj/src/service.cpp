#include "courtside/service.hpp"

#include <algorithm>
#include <thread>

#include "httplib.h"

#include "courtside/bundle_io.hpp"
#include "courtside/error.hpp"
#include "courtside/query.hpp"
#include "courtside/stats.hpp"

namespace courtside {

namespace fs = std::filesystem;

std::map<std::string, MatchBundle> load_bundles(const fs::path& data_dir) {
  std::error_code ec;
  if (!fs::is_directory(data_dir, ec)) throw Error("MissingDataDir", "not a directory: " + data_dir.string());
  std::vector<std::pair<std::string, fs::path>> found;
  for (const auto& e : fs::directory_iterator(data_dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json") {
      found.emplace_back(e.path().stem().string(), e.path());
    } else if (e.is_directory() && fs::is_regular_file(e.path() / "bundle.json")) {
      found.emplace_back(e.path().filename().string(), e.path() / "bundle.json");
    }
  }
  if (found.empty()) throw Error("NoBundles", "no bundle found in " + data_dir.string());
  std::map<std::string, MatchBundle> out;
  for (const auto& [id, path] : found) {
    if (out.count(id)) throw Error("DuplicateMatchId", "match id " + id + " appears twice");
    out.emplace(id, read_bundle(path));
  }
  return out;
}

namespace {

ApiResponse error_response(int status, const std::string& code, const std::string& message) {
  Json j = {{"error", {{"code", code}, {"message", message}}}};
  return {status, j.dump()};
}

ApiResponse ok(const Json& j) { return {200, j.dump()}; }

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::size_t pos = 0;
  while (pos < path.size()) {
    const auto next = std::min(path.find('/', pos), path.size());
    if (next > pos) parts.push_back(path.substr(pos, next - pos));
    pos = next + 1;
  }
  return parts;
}

std::optional<int> parse_id(const std::string& s) {
  if (s.empty() || s.size() > 9 || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; }))
    return std::nullopt;
  return std::stoi(s);
}

ShotFilter filter_from(const QueryParams& q) {
  return parse_filter([&](std::string_view key) -> std::optional<std::string> {
    std::optional<std::string> v;
    const auto [lo, hi] = q.equal_range(std::string(key));
    for (auto it = lo; it != hi; ++it) v = v ? *v + "," + it->second : it->second;
    return v;
  });
}

std::optional<std::string> param(const QueryParams& q, const char* key) {
  const auto it = q.find(key);
  if (it == q.end() || it->second.empty()) return std::nullopt;
  return it->second;
}

Json match_entry(const std::string& id, const MatchBundle& b) {
  Json scores = Json::array();
  for (const auto& g : b.games) scores.push_back(Json::array({g.score[0], g.score[1]}));
  return {{"match_id", id},
          {"players", {{"A", b.manifest.player_a}, {"B", b.manifest.player_b}}},
          {"event", b.manifest.event},
          {"round", b.manifest.round},
          {"fps", b.manifest.fps},
          {"video", "/video/" + id},
          {"game_scores", std::move(scores)}};
}

Json summary_body(const MatchBundle& b, const Scope& s) {
  Json games = Json::array();
  for (const auto& g : b.games) {
    if (s.game && g.number != *s.game) continue;
    games.push_back({{"number", g.number},
                     {"score", Json::array({g.score[0], g.score[1]})},
                     {"finished", g.finished},
                     {"winner", g.winner ? Json(to_string(*g.winner)) : Json(nullptr)},
                     {"half_boundary_rally", g.half_boundary_rally ? Json(*g.half_boundary_rally) : Json(nullptr)}});
  }
  Json scope = Json::object();
  if (s.game) scope["game"] = *s.game;
  if (s.half) scope["half"] = to_string(*s.half);
  return {{"scope", std::move(scope)},
          {"players", {{"A", b.manifest.player_a}, {"B", b.manifest.player_b}}},
          {"summary", to_json(summarize(b, s))},
          {"outcomes", to_json(outcome_counts(b, s))},
          {"games", std::move(games)}};
}

}  // namespace

Api::Api(std::map<std::string, MatchBundle> bundles) : bundles_(std::move(bundles)) {}

ApiResponse Api::get(const std::string& path, const QueryParams& query) const {
  const auto parts = split_path(path);
  if (parts.size() < 2 || parts[0] != "api" || parts[1] != "matches") {
    return error_response(404, "NotFound", "no route " + path);
  }
  try {
    if (parts.size() == 2) {
      Json arr = Json::array();
      for (const auto& [id, b] : bundles_) arr.push_back(match_entry(id, b));
      return ok(arr);
    }
    const auto it = bundles_.find(parts[2]);
    if (it == bundles_.end()) return error_response(404, "UnknownMatch", "no match " + parts[2]);
    const MatchBundle& b = it->second;
    if (parts.size() == 3) return ok(match_entry(it->first, b));
    const std::string& what = parts[3];

    if (what == "summary" && parts.size() == 4) {
      const auto f = filter_from(query);
      return ok(summary_body(b, Scope{f.game, f.half}));
    }
    if (what == "rallies" && parts.size() == 4) {
      Json arr = Json::array();
      for (const auto& m : rally_menu(b, filter_from(query))) arr.push_back(to_json(m));
      return ok(arr);
    }
    if (what == "rallies" && parts.size() == 5) {
      const auto rid = parse_id(parts[4]);
      const Game* g = nullptr;
      const Rally* r = rid ? find_rally(b, *rid, &g) : nullptr;
      if (!r) return error_response(404, "UnknownRally", "no rally " + parts[4]);
      return ok(rally_json(b, *g, *r));
    }
    if (what == "shots" && parts.size() == 4) {
      return ok(shots_json(filter_shots(b, filter_from(query))));
    }
    if (what == "shots" && parts.size() == 6 && parts[5] == "context") {
      const auto sid = parse_id(parts[4]);
      if (!sid) return error_response(404, "UnknownShot", "no shot " + parts[4]);
      return ok(context_json(shot_context(b, *sid)));
    }
    if (what == "heatmap" && parts.size() == 4) {
      Direction dir = Direction::From;
      if (const auto d = param(query, "direction")) {
        const auto parsed = parse_direction(*d);
        if (!parsed) return error_response(400, "InvalidFilter", "direction=" + *d);
        dir = *parsed;
      }
      const auto shots = filter_shots(b, filter_from(query));
      const auto cells = heatmap(shots, dir);
      return ok(Json{{"direction", to_string(dir)},
                     {"total", static_cast<int>(shots.size())},
                     {"cells", heatmap_json(cells)}});
    }
    return error_response(404, "NotFound", "no route " + path);
  } catch (const Error& e) {
    const int status = e.code() == "UnknownShot" ? 404 : 400;
    return error_response(status, e.code(), e.what());
  }
}

struct Server::Impl {
  ServiceConfig config;
  Api api;
  httplib::Server http;
  int port = -1;
  std::thread thread;

  Impl(const ServiceConfig& c, std::map<std::string, MatchBundle> b) : config(c), api(std::move(b)) {}
};

namespace {

std::string video_content_type(const fs::path& p) {
  const auto ext = p.extension().string();
  if (ext == ".mp4" || ext == ".m4v") return "video/mp4";
  if (ext == ".webm") return "video/webm";
  if (ext == ".mov") return "video/quicktime";
  return "application/octet-stream";
}

bool safe_name(const std::string& s) {
  return !s.empty() && s.find('/') == std::string::npos && s.find('\\') == std::string::npos && s != "." &&
         s != ".." && s.find("..") == std::string::npos;
}

}  // namespace

Server::Server(const ServiceConfig& config) {
  impl_ = std::make_unique<Impl>(config, load_bundles(config.data_dir));
  auto& http = impl_->http;
  Impl* self = impl_.get();

  http.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                            {"Access-Control-Allow-Methods", "GET, OPTIONS"},
                            {"Access-Control-Allow-Headers", "Content-Type, Range"}});
  http.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  http.Get("/api/.*", [self](const httplib::Request& req, httplib::Response& res) {
    QueryParams q(req.params.begin(), req.params.end());
    const auto r = self->api.get(req.path, q);
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  });

  http.Get("/video/([^/]+)", [self](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    fs::path file;
    const auto& bundles = self->api.bundles();
    if (const auto it = bundles.find(id); it != bundles.end()) {
      const auto name = fs::path(it->second.manifest.video_uri).filename().string();
      if (safe_name(name)) file = self->config.video_dir / name;
    } else if (safe_name(id)) {
      file = self->config.video_dir / id;
    }
    std::error_code ec;
    if (self->config.video_dir.empty() || file.empty() || !fs::is_regular_file(file, ec)) {
      res.status = 404;
      res.set_content(R"({"error":{"code":"UnknownVideo","message":"no video )" + id + "\"}}", "application/json");
      return;
    }
    auto mm = std::make_shared<httplib::detail::mmap>(file.c_str());
    if (!mm->is_open()) {
      res.status = 500;
      return;
    }
    res.set_header("Accept-Ranges", "bytes");
    res.set_content_provider(mm->size(), video_content_type(file),
                             [mm](size_t offset, size_t length, httplib::DataSink& sink) {
                               sink.write(mm->data() + offset, length);
                               return true;
                             });
  });

  std::error_code ec;
  if (!config.static_dir.empty() && fs::is_directory(config.static_dir, ec)) {
    http.set_mount_point("/", config.static_dir.string());
  } else {
    http.Get("/", [](const httplib::Request&, httplib::Response& res) {
      res.set_content("courtside API: /api/matches\n", "text/plain");
    });
  }

  impl_->port = config.port == 0 ? http.bind_to_any_port(config.bind)
                                 : (http.bind_to_port(config.bind, config.port) ? config.port : -1);
  if (impl_->port < 0) {
    throw Error("PortUnavailable", "cannot bind " + config.bind + ":" + std::to_string(config.port));
  }
}

Server::~Server() { stop(); }

int Server::port() const { return impl_->port; }

void Server::run() { impl_->http.listen_after_bind(); }

void Server::start() {
  impl_->thread = std::thread([this] { impl_->http.listen_after_bind(); });
  impl_->http.wait_until_ready();
}

void Server::stop() {
  if (!impl_) return;
  impl_->http.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace courtside
