#include "medley/mediator.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#include "medley/text.hpp"

using namespace medley::text;

namespace medley {

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorKind::Config, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split_list(std::string_view v) {
  std::vector<std::string> out;
  for (const auto& part : split(v, ',')) {
    auto t = std::string(trim(part));
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

int parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    int n = std::stoi(v, &used);
    if (used == v.size()) return n;
  } catch (const std::exception&) {
  }
  throw Error(ErrorKind::Config, "config key '" + key + "' expects an integer, got '" + v + "'");
}

bool client_stage(const std::string& stage) {
  return stage == "request" || stage == "parse" || stage == "validate" || stage == "plan";
}

StageError stage_error(std::string stage, const Error& e) {
  return {std::move(stage), e.kind(), e.detail(), e.position()};
}

std::string display_key(const IndividualId& folded, const Facts& facts) {
  // smallest source spelling with this folded key
  std::string best;
  auto consider = [&](const IndividualId& id) {
    if (id.root == folded.root && fold_key(id.key) == folded.key && (best.empty() || id.key < best)) best = id.key;
  };
  for (const auto& m : facts.members) consider(m.ind);
  for (const auto& l : facts.literals) consider(l.ind);
  for (const auto& e : facts.edges) {
    consider(e.domain);
    consider(e.range);
  }
  return best.empty() ? folded.key : best;
}

std::map<std::string, std::vector<std::string>> key_sets(const std::map<std::string, std::set<IndividualId>>& sets,
                                                         const Facts& facts) {
  std::map<std::string, std::vector<std::string>> out;
  for (const auto& [var, ids] : sets) {
    std::set<std::string> keys;
    for (const auto& id : ids) keys.insert(display_key(id, facts));
    out[var].assign(keys.begin(), keys.end());
  }
  return out;
}

void merge_slice(ResultSet& into, const ResultSet& from) {
  for (const auto& [id, ind] : from.graph.individuals) into.graph.individuals.emplace(id, ind);
  into.graph.edges.insert(from.graph.edges.begin(), from.graph.edges.end());
}

// One planned sub-query of a request.
struct Planned {
  PlanTree plan;
  ExecutionReport report;
};

}  // namespace

MediatorConfig MediatorConfig::parse(std::string_view text, const std::filesystem::path& base_dir) {
  MediatorConfig c;
  bool have_ontology = false, have_registry = false;
  std::size_t line_no = 0;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw Error(ErrorKind::Config, "config line " + std::to_string(line_no) + ": expected key = value");
    std::string key(trim(line.substr(0, eq)));
    std::string value(trim(line.substr(eq + 1)));
    if (key == "ontology") {
      c.ontology = base_dir / value;
      have_ontology = true;
    } else if (key == "registry") {
      c.registry = base_dir / value;
      have_registry = true;
    } else if (key == "listen") {
      c.listen = value;
    } else if (key == "port") {
      c.port = parse_int(key, value);
    } else if (key == "format") {
      try {
        c.format = parse_format(value);
      } catch (const Error& e) {
        throw Error(ErrorKind::Config, e.detail());
      }
    } else if (key == "sources") {
      c.sources = split_list(value);
    } else if (key == "searchable") {
      c.searchable = split_list(value);
    } else if (key == "min_correspondence") {
      c.min_correspondence = parse_int(key, value);
    } else {
      throw Error(ErrorKind::Config, "config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  if (!have_ontology) throw Error(ErrorKind::Config, "config is missing 'ontology'");
  if (!have_registry) throw Error(ErrorKind::Config, "config is missing 'registry'");
  return c;
}

MediatorConfig MediatorConfig::load(const std::filesystem::path& file) {
  return parse(read_file(file), file.parent_path());
}

nlohmann::json StageError::to_json() const {
  nlohmann::json j{{"stage", stage}, {"kind", std::string(to_string(kind))}, {"message", message}};
  if (position) {
    j["line"] = position->line;
    j["column"] = position->column;
  }
  return j;
}

int StageError::http_status() const {
  if (kind == ErrorKind::Transport) return 502;
  return client_stage(stage) ? 400 : 500;
}

int StageError::exit_code() const {
  if (kind == ErrorKind::Transport) return 4;
  if (kind == ErrorKind::Config) return 5;
  if (stage == "request" || stage == "parse" || stage == "validate") return 2;
  if (stage == "plan") return 3;
  return 1;
}

nlohmann::json Diagnostics::to_json() const {
  nlohmann::json calls_j = nlohmann::json::array();
  for (const auto& c : calls) calls_j.push_back({{"source", c.source}, {"xquery", c.xquery}, {"items", c.items}});
  return {{"warnings", warnings},
          {"canonical_query", canonical_query},
          {"groups", groups},
          {"plan", plan},
          {"calls_per_source", calls_per_source},
          {"calls", calls_j},
          {"initial", initial},
          {"bindings", bindings},
          {"type_check_drops", type_check_drops},
          {"filter_drops", filter_drops},
          {"skipped_instances", skipped_instances},
          {"elapsed_ms", elapsed_ms}};
}

std::string Diagnostics::to_text() const {
  std::ostringstream out;
  for (const auto& w : warnings) out << "warning: " << w << "\n";
  out << plan;
  out << "Calls:\n";
  for (const auto& [s, n] : calls_per_source) out << "  " << s << " " << n << "\n";
  auto sets = [&](const char* title, const std::map<std::string, std::vector<std::string>>& m) {
    out << title << ":\n";
    for (const auto& [var, keys] : m) out << "  " << var << " = {" << join(keys, ", ") << "}\n";
  };
  sets("Candidates", initial);
  sets("Bindings", bindings);
  out << "Dropped by type checks: " << type_check_drops << "\n";
  out << "Dropped by filters: " << filter_drops << "\n";
  if (skipped_instances) out << "Instances without key: " << skipped_instances << "\n";
  out << "Elapsed: " << elapsed_ms << " ms\n";
  return out.str();
}

Mediator::Mediator(MediatorConfig config, std::shared_ptr<const Ontology> ontology, SemanticDirectory directory, ClientMap clients)
    : config_(std::move(config)), ontology_(std::move(ontology)), directory_(std::move(directory)), clients_(std::move(clients)) {
  for (const auto& s : config_.sources)
    if (!directory_.has_source(s)) throw Error(ErrorKind::Config, "allow-listed source '" + s + "' is not registered");
  for (const auto& p : config_.searchable) {
    auto r = ontology_->resolve_predicate(p);
    if (r.kind != PredicateKind::DatatypeProperty)
      throw Error(ErrorKind::Config, "searchable property '" + p + "' is not a datatype property");
  }
  for (const auto& name : directory_.source_names()) {
    auto it = clients_.find(name);
    if (it == clients_.end()) throw Error(ErrorKind::Config, "no client for source '" + name + "'");
    try {
      provenance_[name] = it->second->provenance();
    } catch (const Error& e) {
      throw Error(ErrorKind::Config, "source " + name + ": " + e.detail());
    }
  }
}

std::shared_ptr<Mediator> Mediator::load(const MediatorConfig& config) {
  std::shared_ptr<const Ontology> ontology;
  try {
    ontology = std::make_shared<const Ontology>(Ontology::load(read_file(config.ontology)));
  } catch (const Error& e) {
    throw Error(ErrorKind::Config, config.ontology.string() + ": " + e.what());
  }
  std::vector<SourceRegistration> regs;
  try {
    regs = parse_registry(read_file(config.registry));
  } catch (const Error& e) {
    throw Error(ErrorKind::Config, config.registry.string() + ": " + e.what());
  }
  auto base = config.registry.parent_path();
  SemanticDirectory dir(ontology, config.min_correspondence);
  ClientMap clients;
  for (auto& reg : regs) {
    try {
      std::shared_ptr<SourceClient> client;
      if (reg.endpoint.starts_with("inproc:")) {
        auto service = DataService::load(base / reg.endpoint.substr(7));
        if (service->name() != reg.name)
          throw Error(ErrorKind::Config, "service directory describes '" + service->name() + "'");
        client = make_inprocess_client(service, reg.endpoint);
      } else if (reg.endpoint.starts_with("http://")) {
        client = make_http_client(reg.name, reg.endpoint);
      } else {
        throw Error(ErrorKind::Config, "unsupported endpoint '" + reg.endpoint + "'");
      }
      auto schema = SourceSchema::parse(client->schema_text());
      auto mappings = parse_mapping_file(reg.name, read_file(base / reg.map_path), *ontology);
      std::string name = reg.name;
      dir.register_source(std::move(reg), std::move(schema), std::move(mappings));
      clients[name] = std::move(client);
    } catch (const Error& e) {
      throw Error(ErrorKind::Config, "source " + reg.name + ": " + e.what());
    }
  }
  return std::make_shared<Mediator>(config, ontology, std::move(dir), std::move(clients));
}

QueryResponse Mediator::handle_query(const QueryRequest& req) const {
  auto started = std::chrono::steady_clock::now();
  QueryResponse resp;
  resp.format = req.format.value_or(config_.format);
  std::string stage = "request";
  try {
    // Source selection: request list, else allow-list, else everything.
    std::vector<std::string> selected = req.sources;
    if (selected.empty()) selected = config_.sources;
    if (selected.empty()) selected = directory_.source_names();
    for (const auto& s : selected) {
      if (!directory_.has_source(s)) throw Error(ErrorKind::UnknownName, "unknown source '" + s + "'");
      if (!config_.sources.empty() && std::find(config_.sources.begin(), config_.sources.end(), s) == config_.sources.end())
        throw Error(ErrorKind::UnknownName, "source '" + s + "' is not enabled");
    }
    SemanticDirectory dir = directory_.restrict(selected);

    std::vector<ConjunctiveQuery> queries;
    bool keyword = req.keyword.has_value();
    if (keyword) {
      auto k = normalize_value(*req.keyword);
      if (k.empty()) throw Error(ErrorKind::InvalidQuery, "empty keyword");
      stage = "parse";
      for (const auto& p : config_.searchable) {
        auto q = parse_query("Ans(X) :- " + p + "(X, " + quote_constant(k) + ");");
        queries.push_back(q);
      }
    } else {
      stage = "parse";
      queries.push_back(parse_query(req.query));
    }

    stage = "validate";
    for (auto& q : queries) q = validate(q, *ontology_);
    for (const auto& q : queries) resp.diagnostics.warnings.insert(resp.diagnostics.warnings.end(), q.warnings.begin(), q.warnings.end());

    // Plan everything before any source is contacted.
    stage = "plan";
    std::vector<Planned> planned;
    for (const auto& q : queries) {
      try {
        planned.push_back({plan_query(q, dir), {}});
      } catch (const Error& e) {
        if (!keyword || e.kind() != ErrorKind::Plan) throw;
        resp.diagnostics.warnings.push_back("skipped " + canonicalize(q) + ": " + e.detail());
      }
    }
    if (planned.empty()) throw Error(ErrorKind::Plan, "no searchable property is mapped by the selected sources");
    for (const auto& p : planned) {
      if (!resp.diagnostics.canonical_query.empty()) resp.diagnostics.canonical_query += "\n";
      resp.diagnostics.canonical_query += canonicalize(p.plan.query);
      resp.diagnostics.groups += explain_groups(p.plan.groups, p.plan.query);
      resp.diagnostics.plan += explain(p.plan, dir);
    }

    stage = "execute";
    for (auto& p : planned) p.report = execute_plan(p.plan, dir, clients_);

    stage = "integrate";
    ExecutionReport all;
    for (const auto& p : planned) {
      all.facts.merge(p.report.facts);
      for (const auto& [v, ids] : p.report.initial) all.initial[v].insert(ids.begin(), ids.end());
      for (const auto& [v, ids] : p.report.bindings) all.bindings[v].insert(ids.begin(), ids.end());
      all.calls.insert(all.calls.end(), p.report.calls.begin(), p.report.calls.end());
      for (const auto& [s, n] : p.report.calls_per_source) all.calls_per_source[s] += n;
      all.type_check_drops += p.report.type_check_drops;
      all.filter_drops += p.report.filter_drops;
      for (const auto& pr : p.report.provenance) {
        bool seen = false;
        for (const auto& q : all.provenance) seen = seen || q.source == pr.source;
        if (!seen) all.provenance.push_back(pr);
      }
    }
    if (planned.size() == 1) {
      resp.result = integrate(planned.front().report, planned.front().plan, *ontology_);
    } else {
      std::set<IndividualId> keep;
      for (const auto& p : planned) {
        auto k = kept_individuals(p.report, p.plan.query);
        keep.insert(k.begin(), k.end());
      }
      InstanceGraph g = reconcile(link(all.facts, &keep));
      std::set<std::vector<Value>> rows;
      for (const auto& p : planned) {
        ResultSet part = filter_answers(g, p.plan.query, *ontology_);
        if (resp.result.answer_vars.empty()) resp.result.answer_vars = part.answer_vars;
        rows.insert(part.rows.begin(), part.rows.end());
        merge_slice(resp.result, part);
      }
      resp.result.rows.assign(rows.begin(), rows.end());
      std::set<std::string> used;
      for (const auto& [_, ind] : resp.result.graph.individuals)
        for (const auto& s : ind.sources()) used.insert(s);
      for (const auto& e : resp.result.graph.edges) used.insert(e.source);
      std::vector<std::string> order = directory_.source_names();
      for (const auto& name : order)
        for (const auto& pr : all.provenance)
          if (pr.source == name && used.count(name)) resp.result.sources.push_back(pr);
    }

    auto& d = resp.diagnostics;
    d.calls = all.calls;
    d.calls_per_source = all.calls_per_source;
    for (const auto& s : selected) d.calls_per_source.try_emplace(s, 0);
    d.initial = key_sets(all.initial, all.facts);
    d.bindings = key_sets(all.bindings, all.facts);
    d.type_check_drops = all.type_check_drops;
    d.filter_drops = all.filter_drops;
    d.skipped_instances = all.facts.skipped;

    stage = "serialize";
    resp.body = serialize(resp.result, resp.format, *ontology_);
    d.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
    if (req.explain && resp.format == OutputFormat::Json) {
      auto j = nlohmann::json::parse(resp.body);
      j["diagnostics"] = d.to_json();
      resp.body = j.dump(2) + "\n";
    }
  } catch (const Error& e) {
    resp.error = stage_error(stage, e);
    resp.diagnostics.elapsed_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  } catch (const std::exception& e) {
    resp.error = StageError{stage, ErrorKind::Internal, e.what(), std::nullopt};
  }
  return resp;
}

nlohmann::json Mediator::ontology_json() const {
  nlohmann::json classes = nlohmann::json::array();
  for (const auto& c : ontology_->classes()) {
    nlohmann::json j{{"name", c.name}, {"depth", ontology_->depth(c.name)}};
    j["parent"] = c.parent ? nlohmann::json(*c.parent) : nlohmann::json(nullptr);
    classes.push_back(j);
  }
  nlohmann::json dps = nlohmann::json::array();
  for (const auto& p : ontology_->datatype_properties()) dps.push_back({{"name", p.name}, {"domain", p.domain}});
  nlohmann::json ops = nlohmann::json::array();
  for (const auto& p : ontology_->object_properties())
    ops.push_back({{"name", p.name}, {"domain", p.domain}, {"range", p.range}});
  return {{"base", ontology_->base_iri()}, {"classes", classes}, {"datatype_properties", dps}, {"object_properties", ops}};
}

nlohmann::json Mediator::sources_json() const {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& name : directory_.source_names()) {
    const auto& reg = directory_.registration(name);
    const auto& prov = provenance_.at(name);
    nlohmann::json maps = nlohmann::json::array();
    for (const auto& m : directory_.mappings(name)) maps.push_back(serialize_mapping(m));
    bool enabled = config_.sources.empty() ||
                   std::find(config_.sources.begin(), config_.sources.end(), name) != config_.sources.end();
    out.push_back({{"name", name},
                   {"endpoint", reg.endpoint},
                   {"schema_id", reg.schema_id},
                   {"description", prov.description},
                   {"retrieved_at", prov.retrieved_at},
                   {"enabled", enabled},
                   {"mappings", maps}});
  }
  return out;
}

}  // namespace medley
