#include "docenh/server.hpp"

#include <httplib.h>

#include <fstream>
#include <iterator>
#include <json.hpp>

#include "docenh/image_io.hpp"
#include "docenh/iqa.hpp"

namespace docenh {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, {{"error", message}}, status);
}

std::string png_bytes_for(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ImageIoError(ImageIoError::Kind::missing_file, path, "cannot open");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  static const std::string signature("\x89PNG\r\n\x1a\n", 8);
  if (bytes.compare(0, signature.size(), signature) == 0) return bytes;
  const std::span<const std::uint8_t> view(reinterpret_cast<const std::uint8_t*>(bytes.data()),
                                           bytes.size());
  const auto png = encode_png(decode_image(view, path));
  return std::string(png.begin(), png.end());
}

}  // namespace

ReviewServer::ReviewServer(Manifest manifest, std::optional<EvaluationReport> report,
                           ServerOptions options)
    : manifest_(std::move(manifest)),
      report_(std::move(report)),
      options_(std::move(options)),
      log_(options_.judgments),
      http_(std::make_unique<httplib::Server>()) {
  routes();
}

ReviewServer::~ReviewServer() { stop(); }

std::vector<std::string> ReviewServer::engines_for(const std::string& entry) const {
  std::vector<std::string> out;
  if (const ManifestEntry* e = manifest_.find(entry)) {
    for (const auto& [engine, path] : e->enhanced) out.push_back(engine);
  }
  if (report_) {
    for (const auto& r : report_->records) {
      if (r.entry != entry || r.output.empty()) continue;
      if (std::find(out.begin(), out.end(), r.engine) == out.end()) out.push_back(r.engine);
    }
  }
  return out;
}

std::optional<fs::path> ReviewServer::enhanced_path(const std::string& entry,
                                                    const std::string& engine) const {
  const ManifestEntry* e = manifest_.find(entry);
  if (!e) return std::nullopt;
  if (auto it = e->enhanced.find(engine); it != e->enhanced.end()) return it->second;
  if (report_) {
    for (const auto& r : report_->records) {
      if (r.entry == entry && r.engine == engine && !r.output.empty()) return fs::path(r.output);
    }
  }
  return std::nullopt;
}

void ReviewServer::routes() {
  httplib::Server& http = *http_;

  http.Get("/api/manifest", [this](const httplib::Request&, httplib::Response& res) {
    json entries = json::array();
    std::vector<std::string> all_engines;
    for (const auto& e : manifest_.entries) {
      const auto engines = engines_for(e.id);
      json roles = {"raw", "reference", "white"};
      for (const auto& engine : engines) {
        roles.push_back("enhanced/" + engine);
        if (std::find(all_engines.begin(), all_engines.end(), engine) == all_engines.end()) {
          all_engines.push_back(engine);
        }
      }
      entries.push_back({{"id", e.id}, {"roles", roles}, {"engines", engines}});
    }
    send_json(res, {{"entries", entries}, {"engines", all_engines}});
  });

  http.Get(R"(/api/image/([^/]+)/(.+))", [this](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    const std::string role = req.matches[2];
    const ManifestEntry* e = manifest_.find(id);
    if (!e) return send_error(res, 404, "unknown entry '" + id + "'");
    try {
      std::string bytes;
      if (role == "raw") {
        bytes = png_bytes_for(e->raw);
      } else if (role == "reference") {
        bytes = png_bytes_for(e->reference);
      } else if (role == "white") {
        const auto png = encode_png(white_control(load_image(e->reference)));
        bytes.assign(png.begin(), png.end());
      } else if (role.rfind("enhanced/", 0) == 0) {
        const std::string engine = role.substr(9);
        const auto path = enhanced_path(id, engine);
        if (!path) return send_error(res, 404, "no enhanced image for engine '" + engine + "'");
        bytes = png_bytes_for(*path);
      } else {
        return send_error(res, 404, "unknown role '" + role + "'");
      }
      res.set_content(bytes, "image/png");
    } catch (const std::exception& ex) {
      send_error(res, 500, ex.what());
    }
  });

  http.Get(R"(/api/scores/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    if (!manifest_.find(id)) return send_error(res, 404, "unknown entry '" + id + "'");
    json metrics = json::array();
    json records = json::array();
    if (report_) {
      for (const auto& m : report_->metrics) {
        metrics.push_back({{"id", m.id}, {"label", m.label}, {"polarity", to_string(m.polarity)}});
      }
      for (const auto& r : report_->records) {
        if (r.entry == id) records.push_back(json::parse(score_record(r)));
      }
    }
    send_json(res, {{"entry", id}, {"metrics", metrics}, {"records", records}});
  });

  http.Get("/api/judgments", [this](const httplib::Request&, httplib::Response& res) {
    json latest = json::array();
    json accepted = json::array(), rejected = json::array();
    for (const auto& [key, s] : log_.latest()) {
      latest.push_back(json::parse(judgment_json(s)));
      json pair = {{"entry", key.first}, {"engine", key.second}};
      (s.judgment.verdict == Verdict::accept ? accepted : rejected).push_back(pair);
    }
    send_json(res, {{"judgments", latest}, {"accepted", accepted}, {"rejected", rejected}});
  });

  http.Get(R"(/api/judgments/([^/]+)/([^/]+)/history)",
           [this](const httplib::Request& req, httplib::Response& res) {
             json history = json::array();
             for (const auto& s : log_.history(req.matches[1], req.matches[2])) {
               history.push_back(json::parse(judgment_json(s)));
             }
             send_json(res, {{"entry", std::string(req.matches[1])},
                             {"engine", std::string(req.matches[2])},
                             {"history", history}});
           });

  http.Post("/api/judgments", [this](const httplib::Request& req, httplib::Response& res) {
    Judgment j;
    try {
      j = parse_judgment(req.body, false);
      j.timestamp.clear();
      j.validate();
    } catch (const JudgmentError& e) {
      return send_error(res, 400, e.what());
    }
    if (!manifest_.find(j.entry)) return send_error(res, 404, "unknown entry '" + j.entry + "'");
    if (!enhanced_path(j.entry, j.engine)) {
      return send_error(res, 404, "entry '" + j.entry + "' has no output from engine '" + j.engine + "'");
    }
    try {
      const auto id = log_.append(std::move(j));
      send_json(res, {{"record_id", id}}, 201);
    } catch (const std::exception& e) {
      send_error(res, 500, e.what());
    }
  });

  http.Get("/api/progress", [this](const httplib::Request&, httplib::Response& res) {
    int total = 0, reviewed = 0, accepted = 0, discarded = 0;
    const auto latest = log_.latest();
    for (const auto& e : manifest_.entries) {
      for (const auto& engine : engines_for(e.id)) {
        ++total;
        auto it = latest.find({e.id, engine});
        if (it == latest.end()) continue;
        ++reviewed;
        (it->second.judgment.verdict == Verdict::accept ? accepted : discarded) += 1;
      }
    }
    send_json(res, {{"total", total}, {"reviewed", reviewed}, {"accepted", accepted},
                    {"discarded", discarded}});
  });

  if (!options_.static_dir.empty() && fs::is_directory(options_.static_dir)) {
    http.set_mount_point("/", options_.static_dir.string());
  }
}

int ReviewServer::bind() {
  if (port_ >= 0) return port_;
  if (options_.port == 0) {
    port_ = http_->bind_to_any_port(options_.host);
  } else {
    port_ = http_->bind_to_port(options_.host, options_.port) ? options_.port : -1;
  }
  if (port_ < 0) {
    throw ServerError("cannot bind " + options_.host + ":" + std::to_string(options_.port));
  }
  return port_;
}

void ReviewServer::listen() {
  bind();
  http_->listen_after_bind();
}

int ReviewServer::start() {
  const int port = bind();
  thread_ = std::thread([this] { http_->listen_after_bind(); });
  http_->wait_until_ready();
  return port;
}

void ReviewServer::stop() {
  if (http_) http_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace docenh
