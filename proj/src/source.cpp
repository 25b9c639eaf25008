#include "medley/source.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "medley/error.hpp"
#include "medley/xquery.hpp"

namespace medley {

xml::Node ProvenanceRecord::to_xml() const {
  xml::Node n = xml::Node::element("Provenance");
  n.add_leaf("Source", source);
  n.add_leaf("Endpoint", endpoint);
  n.add_leaf("Schema", schema_id);
  n.add_leaf("Description", description);
  n.add_leaf("RetrievedAt", retrieved_at);
  return n;
}

ProvenanceRecord ProvenanceRecord::from_xml(const xml::Node& node) {
  if (node.name != "Provenance") throw Error(ErrorKind::Syntax, "expected <Provenance> document");
  auto field = [&](const char* name) {
    const xml::Node* c = node.child(name);
    return c ? c->string_value() : std::string();
  };
  return {field("Source"), field("Endpoint"), field("Schema"), field("Description"), field("RetrievedAt")};
}

ServiceDescriptor ServiceDescriptor::parse_json(std::string_view text) {
  try {
    auto j = nlohmann::json::parse(text);
    ServiceDescriptor d;
    d.name = j.at("name").get<std::string>();
    d.description = j.value("description", "");
    d.schema_id = j.at("schema").get<std::string>();
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Config, std::string("bad service descriptor: ") + e.what());
  }
}

std::string utc_timestamp() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

namespace {
std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorKind::Config, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}
}  // namespace

DataService::DataService(ServiceDescriptor descriptor, SourceSchema schema, xml::Node data)
    : descriptor_(std::move(descriptor)), schema_(std::move(schema)), data_(std::move(data)) {
  if (schema_.id() != descriptor_.schema_id)
    throw Error(ErrorKind::Config, "source " + descriptor_.name + ": descriptor names schema '" + descriptor_.schema_id +
                                       "' but schema.xml declares '" + schema_.id() + "'");
  try {
    schema_.validate_document(data_);
  } catch (const Error& e) {
    throw Error(ErrorKind::Schema, "source " + descriptor_.name + ": " + e.detail());
  }
}

std::shared_ptr<const DataService> DataService::load(const std::filesystem::path& dir) {
  auto descriptor = ServiceDescriptor::parse_json(read_file(dir / "service.json"));
  auto schema = SourceSchema::parse(read_file(dir / "schema.xml"));
  auto data = xml::parse(read_file(dir / "data.xml"));
  return std::make_shared<const DataService>(std::move(descriptor), std::move(schema), std::move(data));
}

std::string DataService::query(std::string_view xquery_text) const {
  xquery::Query q;
  try {
    q = xquery::Query::parse(xquery_text);
  } catch (const Error& e) {
    throw Error(ErrorKind::Syntax, "source " + name() + ": " + e.detail(), e.position());
  }
  xml::Node result = xml::Node::element("Result");
  xquery::visit_results(data_, q, [&](const xml::Node& item, const std::vector<std::string>& names) {
    xpath::Path at;
    at.absolute = true;
    at.steps = names;
    try {
      schema_.validate(item, at);
    } catch (const Error& e) {
      throw Error(ErrorKind::Internal, "source " + name() + " produced a non-conforming answer: " + e.detail());
    }
    result.children.push_back(item);
  });
  return xml::serialize(result);
}

std::string DataService::schema_text() const { return xml::serialize(schema_.document(), {.declaration = true, .indent = true}); }

ProvenanceRecord DataService::provenance(const std::string& endpoint) const {
  return {descriptor_.name, endpoint, schema_.id(), descriptor_.description, utc_timestamp()};
}

namespace {

class InProcessClient : public SourceClient {
 public:
  InProcessClient(std::shared_ptr<const DataService> service, std::string endpoint)
      : service_(std::move(service)), endpoint_(std::move(endpoint)) {}

  const std::string& name() const override { return service_->name(); }
  const std::string& endpoint() const override { return endpoint_; }

  ServiceAnswer query(std::string_view xquery) const override {
    ServiceAnswer a;
    a.raw = service_->query(xquery);
    a.result = xml::parse(a.raw);
    a.provenance = service_->provenance(endpoint_);
    return a;
  }
  std::string schema_text() const override { return service_->schema_text(); }
  ProvenanceRecord provenance() const override { return service_->provenance(endpoint_); }

 private:
  std::shared_ptr<const DataService> service_;
  std::string endpoint_;
};

}  // namespace

std::shared_ptr<SourceClient> make_inprocess_client(std::shared_ptr<const DataService> service, std::string endpoint) {
  return std::make_shared<InProcessClient>(std::move(service), std::move(endpoint));
}

ServiceAnswer CountingClient::query(std::string_view xquery) const {
  ++calls_;
  {
    std::lock_guard lock(mu_);
    ++queries_[std::string(xquery)];
  }
  return inner_->query(xquery);
}

std::map<std::string, std::size_t> CountingClient::queries() const {
  std::lock_guard lock(mu_);
  return queries_;
}

void CountingClient::reset() {
  std::lock_guard lock(mu_);
  queries_.clear();
  calls_ = 0;
}

}  // namespace medley
