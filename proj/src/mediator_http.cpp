#include <httplib.h>

#include <thread>

#include "medley/mediator.hpp"

namespace medley {

QueryRequest parse_query_request(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::Syntax, std::string("request body is not JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorKind::InvalidQuery, "request body must be a JSON object");
  QueryRequest r;
  try {
    if (j.contains("query")) r.query = j.at("query").get<std::string>();
    if (j.contains("keyword") && !j.at("keyword").is_null()) r.keyword = j.at("keyword").get<std::string>();
    if (j.contains("sources")) r.sources = j.at("sources").get<std::vector<std::string>>();
    if (j.contains("format") && !j.at("format").is_null()) r.format = parse_format(j.at("format").get<std::string>());
    if (j.contains("explain")) r.explain = j.at("explain").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidQuery, std::string("malformed request field: ") + e.what());
  }
  if (r.query.empty() && !r.keyword) throw Error(ErrorKind::InvalidQuery, "request needs 'query' or 'keyword'");
  return r;
}

struct MediatorHttpServer::Impl {
  std::shared_ptr<const Mediator> mediator;
  httplib::Server server;
  std::thread thread;
};

namespace {

void send_json(httplib::Response& res, const nlohmann::json& j, int status = 200) {
  res.status = status;
  res.set_content(j.dump(2) + "\n", "application/json");
}

void send_error(httplib::Response& res, const StageError& e) {
  send_json(res, {{"error", e.to_json()}}, e.http_status());
}

}  // namespace

MediatorHttpServer::MediatorHttpServer(std::shared_ptr<const Mediator> mediator, std::optional<std::filesystem::path> static_dir)
    : impl_(std::make_unique<Impl>()) {
  impl_->mediator = std::move(mediator);
  auto* impl = impl_.get();
  impl->server.Get("/api/health", [](const httplib::Request&, httplib::Response& res) {
    send_json(res, {{"status", "ok"}});
  });
  impl->server.Get("/api/ontology", [impl](const httplib::Request&, httplib::Response& res) {
    send_json(res, impl->mediator->ontology_json());
  });
  impl->server.Get("/api/sources", [impl](const httplib::Request&, httplib::Response& res) {
    send_json(res, impl->mediator->sources_json());
  });
  impl->server.Post("/api/query", [impl](const httplib::Request& req, httplib::Response& res) {
    QueryRequest qr;
    try {
      qr = parse_query_request(req.body);
    } catch (const Error& e) {
      send_error(res, StageError{"request", e.kind(), e.detail(), e.position()});
      return;
    }
    QueryResponse out = impl->mediator->handle_query(qr);
    if (!out.ok()) {
      nlohmann::json j{{"error", out.error->to_json()}};
      if (qr.explain) j["diagnostics"] = out.diagnostics.to_json();
      send_json(res, j, out.error->http_status());
      return;
    }
    res.status = 200;
    res.set_content(out.body, std::string(content_type(out.format)));
  });
  impl->server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string msg = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      msg = e.what();
    } catch (...) {
    }
    send_json(res, {{"error", {{"stage", "request"}, {"kind", "Internal"}, {"message", msg}}}}, 500);
  });
  if (static_dir) impl->server.set_mount_point("/", static_dir->string());
}

MediatorHttpServer::~MediatorHttpServer() { stop(); }

int MediatorHttpServer::start(const std::string& host, int port) {
  if (port == 0) port_ = impl_->server.bind_to_any_port(host);
  else if (impl_->server.bind_to_port(host, port)) port_ = port;
  else port_ = -1;
  if (port_ <= 0) throw Error(ErrorKind::Transport, "cannot bind " + host + ":" + std::to_string(port));
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return port_;
}

bool MediatorHttpServer::listen(const std::string& host, int port) {
  port_ = port;
  return impl_->server.listen(host, port);
}

void MediatorHttpServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace medley
