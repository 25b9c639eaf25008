// The controller: configuration, request pipeline and read-only views used by
// the CLI and the HTTP API.
//
// Config file (key = value, `#` comments; paths relative to the file):
//   ontology = yeastmed.onto
//   registry = registry.txt
//   listen = 127.0.0.1
//   port = 8080
//   format = xml                 # rdf | xml | html | json
//   sources = sgd,yeastract      # optional allow-list
//   searchable = hasName,hasSystematicName,hasDescription
//   min_correspondence = 0
#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "medley/answers.hpp"
#include "medley/error.hpp"
#include "medley/executor.hpp"
#include "medley/planner.hpp"

namespace medley {

struct MediatorConfig {
  std::filesystem::path ontology;
  std::filesystem::path registry;
  std::string listen = "127.0.0.1";
  int port = 8080;
  OutputFormat format = OutputFormat::Xml;
  std::vector<std::string> sources;
  std::vector<std::string> searchable{"hasName", "hasSystematicName", "hasDescription"};
  int min_correspondence = 0;

  static MediatorConfig parse(std::string_view text, const std::filesystem::path& base_dir);
  static MediatorConfig load(const std::filesystem::path& file);
};

struct QueryRequest {
  std::string query;                    // conjunctive query text
  std::optional<std::string> keyword;   // quick search instead of a query
  std::vector<std::string> sources;     // empty = all allowed sources
  std::optional<OutputFormat> format;   // default from config
  bool explain = false;
};

struct Diagnostics {
  std::vector<std::string> warnings;
  std::string canonical_query;
  std::string groups;  // group listing
  std::string plan;    // full explain text
  std::map<std::string, std::size_t> calls_per_source;
  std::vector<CallRecord> calls;
  std::map<std::string, std::vector<std::string>> initial;   // variable -> keys
  std::map<std::string, std::vector<std::string>> bindings;  // variable -> keys
  std::size_t type_check_drops = 0;
  std::size_t filter_drops = 0;
  std::size_t skipped_instances = 0;
  double elapsed_ms = 0;

  nlohmann::json to_json() const;
  std::string to_text() const;
};

struct StageError {
  std::string stage;  // request | parse | validate | plan | execute | integrate | serialize
  ErrorKind kind = ErrorKind::Internal;
  std::string message;
  std::optional<SourcePosition> position;

  nlohmann::json to_json() const;
  /// 400 for client errors, 502 for transport failures, 500 otherwise.
  int http_status() const;
  /// CLI exit code per error class.
  int exit_code() const;
};

struct QueryResponse {
  std::optional<StageError> error;
  OutputFormat format = OutputFormat::Xml;
  std::string body;
  ResultSet result;
  Diagnostics diagnostics;

  bool ok() const { return !error.has_value(); }
};

class Mediator {
 public:
  Mediator(MediatorConfig config, std::shared_ptr<const Ontology> ontology, SemanticDirectory directory, ClientMap clients);

  /// Loads the ontology and registry, connects to every source and reads its
  /// exported schema.
  static std::shared_ptr<Mediator> load(const MediatorConfig& config);

  QueryResponse handle_query(const QueryRequest& request) const;

  const MediatorConfig& config() const noexcept { return config_; }
  const Ontology& ontology() const noexcept { return *ontology_; }
  const SemanticDirectory& directory() const noexcept { return directory_; }
  const ClientMap& clients() const noexcept { return clients_; }
  /// Replaces the service handles (e.g. with counting wrappers).
  void set_clients(ClientMap clients) { clients_ = std::move(clients); }

  nlohmann::json ontology_json() const;
  nlohmann::json sources_json() const;

 private:
  MediatorConfig config_;
  std::shared_ptr<const Ontology> ontology_;
  SemanticDirectory directory_;
  ClientMap clients_;
  std::map<std::string, ProvenanceRecord> provenance_;
};

/// HTTP API over a mediator:
///   GET /api/ontology, GET /api/sources, GET /api/health, POST /api/query
/// Static files under `static_dir` are served from `/` when given.
class MediatorHttpServer {
 public:
  explicit MediatorHttpServer(std::shared_ptr<const Mediator> mediator, std::optional<std::filesystem::path> static_dir = {});
  ~MediatorHttpServer();
  MediatorHttpServer(const MediatorHttpServer&) = delete;
  MediatorHttpServer& operator=(const MediatorHttpServer&) = delete;

  int start(const std::string& host, int port);
  bool listen(const std::string& host, int port);
  void stop();
  int port() const noexcept { return port_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int port_ = 0;
};

/// Parses the JSON body of POST /api/query.
QueryRequest parse_query_request(std::string_view json_text);

}  // namespace medley
