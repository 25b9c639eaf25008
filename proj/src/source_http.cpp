#include <httplib.h>

#include <thread>

#include "medley/error.hpp"
#include "medley/source.hpp"

namespace medley {

struct SourceHttpServer::Impl {
  std::shared_ptr<const DataService> service;
  std::string endpoint;
  httplib::Server server;
  std::thread thread;
};

SourceHttpServer::SourceHttpServer(std::shared_ptr<const DataService> service, std::string public_endpoint)
    : impl_(std::make_unique<Impl>()) {
  impl_->service = std::move(service);
  impl_->endpoint = std::move(public_endpoint);
  auto* impl = impl_.get();
  impl->server.Post("/query", [impl](const httplib::Request& req, httplib::Response& res) {
    try {
      res.set_content(impl->service->query(req.body), "application/xml");
    } catch (const Error& e) {
      res.status = e.kind() == ErrorKind::Syntax ? 400 : 500;
      res.set_content(e.what(), "text/plain");
    }
  });
  impl->server.Get("/schema", [impl](const httplib::Request&, httplib::Response& res) {
    res.set_content(impl->service->schema_text(), "application/xml");
  });
  impl->server.Get("/provenance", [impl](const httplib::Request& req, httplib::Response& res) {
    std::string endpoint = impl->endpoint;
    if (endpoint.empty()) endpoint = "http://" + req.get_header_value("Host");
    res.set_content(xml::serialize(impl->service->provenance(endpoint).to_xml(), {.declaration = true, .indent = true}),
                    "application/xml");
  });
}

SourceHttpServer::~SourceHttpServer() { stop(); }

int SourceHttpServer::start(const std::string& host, int port) {
  if (port == 0) port_ = impl_->server.bind_to_any_port(host);
  else if (impl_->server.bind_to_port(host, port)) port_ = port;
  else port_ = -1;
  if (port_ <= 0) throw Error(ErrorKind::Transport, "cannot bind " + host + ":" + std::to_string(port));
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return port_;
}

bool SourceHttpServer::listen(const std::string& host, int port) {
  port_ = port;
  return impl_->server.listen(host, port);
}

void SourceHttpServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

namespace {

class HttpClient : public SourceClient {
 public:
  HttpClient(std::string name, std::string url) : name_(std::move(name)), url_(std::move(url)) {}

  const std::string& name() const override { return name_; }
  const std::string& endpoint() const override { return url_; }

  ServiceAnswer query(std::string_view xquery) const override {
    httplib::Client cli(url_);
    cli.set_connection_timeout(5);
    auto res = cli.Post("/query", std::string(xquery), "application/xquery");
    if (!res) throw Error(ErrorKind::Transport, "source " + name_ + " unreachable at " + url_ + ": " + httplib::to_string(res.error()));
    if (res->status == 400) throw Error(ErrorKind::Syntax, res->body);
    if (res->status != 200)
      throw Error(ErrorKind::Transport, "source " + name_ + " answered HTTP " + std::to_string(res->status) + ": " + res->body);
    ServiceAnswer a;
    a.raw = res->body;
    a.result = xml::parse(a.raw);
    a.provenance = provenance();
    return a;
  }

  std::string schema_text() const override { return get("/schema"); }

  ProvenanceRecord provenance() const override {
    ProvenanceRecord p = ProvenanceRecord::from_xml(xml::parse(get("/provenance")));
    p.endpoint = url_;
    return p;
  }

 private:
  std::string get(const std::string& path) const {
    httplib::Client cli(url_);
    cli.set_connection_timeout(5);
    auto res = cli.Get(path);
    if (!res) throw Error(ErrorKind::Transport, "source " + name_ + " unreachable at " + url_ + ": " + httplib::to_string(res.error()));
    if (res->status != 200) throw Error(ErrorKind::Transport, "source " + name_ + " answered HTTP " + std::to_string(res->status));
    return res->body;
  }

  std::string name_;
  std::string url_;
};

}  // namespace

std::shared_ptr<SourceClient> make_http_client(std::string name, std::string url) {
  return std::make_shared<HttpClient>(std::move(name), std::move(url));
}

}  // namespace medley
