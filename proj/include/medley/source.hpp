// Data services: wrappers that answer XQuery sub-queries over one source's XML
// export, plus the client interface the mediator uses to reach them either
// in-process or over HTTP.
#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>

#include "medley/schema.hpp"
#include "medley/xml.hpp"

namespace medley {

struct ProvenanceRecord {
  std::string source;
  std::string endpoint;
  std::string schema_id;
  std::string description;
  std::string retrieved_at;  // UTC, ISO 8601

  xml::Node to_xml() const;
  static ProvenanceRecord from_xml(const xml::Node& node);
};

/// `service.json` next to each fixture export (stands in for a WSDL document).
struct ServiceDescriptor {
  std::string name;
  std::string description;
  std::string schema_id;

  static ServiceDescriptor parse_json(std::string_view text);
};

std::string utc_timestamp();

/// One source's data service over a local XML export. Immutable after load.
class DataService {
 public:
  DataService(ServiceDescriptor descriptor, SourceSchema schema, xml::Node data);

  /// Loads `data.xml`, `schema.xml` and `service.json` from `dir` and validates
  /// the export against its schema.
  static std::shared_ptr<const DataService> load(const std::filesystem::path& dir);

  const std::string& name() const noexcept { return descriptor_.name; }
  const ServiceDescriptor& descriptor() const noexcept { return descriptor_; }
  const SourceSchema& schema() const noexcept { return schema_; }
  const xml::Node& data() const noexcept { return data_; }

  /// Evaluates an XQuery and returns the serialized `<Result>` document.
  /// Parse errors surface as Error(Syntax) prefixed with the source name.
  std::string query(std::string_view xquery_text) const;
  std::string schema_text() const;
  ProvenanceRecord provenance(const std::string& endpoint) const;

 private:
  ServiceDescriptor descriptor_;
  SourceSchema schema_;
  xml::Node data_;
};

struct ServiceAnswer {
  std::string raw;  // result document exactly as produced by the service
  xml::Node result;
  ProvenanceRecord provenance;
};

/// Mediator-side handle on a data service.
class SourceClient {
 public:
  virtual ~SourceClient() = default;
  virtual const std::string& name() const = 0;
  virtual const std::string& endpoint() const = 0;
  virtual ServiceAnswer query(std::string_view xquery) const = 0;
  virtual std::string schema_text() const = 0;
  virtual ProvenanceRecord provenance() const = 0;

  SourceSchema schema() const { return SourceSchema::parse(schema_text()); }
};

std::shared_ptr<SourceClient> make_inprocess_client(std::shared_ptr<const DataService> service, std::string endpoint);
/// `url` like `http://127.0.0.1:8101`.
std::shared_ptr<SourceClient> make_http_client(std::string name, std::string url);

/// Wraps another client and counts calls per XQuery text; used to observe fan-out.
class CountingClient : public SourceClient {
 public:
  explicit CountingClient(std::shared_ptr<SourceClient> inner) : inner_(std::move(inner)) {}

  const std::string& name() const override { return inner_->name(); }
  const std::string& endpoint() const override { return inner_->endpoint(); }
  ServiceAnswer query(std::string_view xquery) const override;
  std::string schema_text() const override { return inner_->schema_text(); }
  ProvenanceRecord provenance() const override { return inner_->provenance(); }

  std::size_t calls() const noexcept { return calls_.load(); }
  std::map<std::string, std::size_t> queries() const;
  void reset();

 private:
  std::shared_ptr<SourceClient> inner_;
  mutable std::atomic<std::size_t> calls_{0};
  mutable std::mutex mu_;
  mutable std::map<std::string, std::size_t> queries_;
};

/// HTTP daemon exposing one DataService:
///   POST /query (application/xquery) -> 200 application/xml | 400 text/plain
///   GET  /schema, GET /provenance    -> application/xml
class SourceHttpServer {
 public:
  SourceHttpServer(std::shared_ptr<const DataService> service, std::string public_endpoint = {});
  ~SourceHttpServer();
  SourceHttpServer(const SourceHttpServer&) = delete;
  SourceHttpServer& operator=(const SourceHttpServer&) = delete;

  /// Binds (port 0 picks a free port) and serves on a background thread.
  int start(const std::string& host, int port);
  /// Binds and serves on the calling thread until stop().
  bool listen(const std::string& host, int port);
  void stop();
  int port() const noexcept { return port_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int port_ = 0;
};

}  // namespace medley
