// medley: command-line front end of the mediator.
//   medley query   --config medley.conf --file q.cq [--sources a,b] [--format rdf] [--explain]
//   medley plan    --config medley.conf --file q.cq [--sources a,b]
//   medley sources --config medley.conf
//   medley serve   --config medley.conf [--port 8080] [--static dir]
// Exit codes: 0 ok, 1 other failure, 2 parse/validate, 3 plan, 4 source transport, 5 config.
#include <CLI11.hpp>

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include "medley/mediator.hpp"
#include "medley/text.hpp"

using namespace medley::text;

using namespace medley;

namespace {

struct Options {
  std::string config = "medley.conf";
  std::string file;
  std::string query;
  std::string keyword;
  std::string sources;
  std::string format;
  bool explain = false;
  int port = -1;
  std::string static_dir;
};

std::string read_query(const Options& o) {
  if (!o.query.empty()) return o.query;
  if (o.file.empty() || o.file == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream in(o.file, std::ios::binary);
  if (!in) throw Error(ErrorKind::Config, "cannot read " + o.file);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

QueryRequest make_request(const Options& o) {
  QueryRequest r;
  if (!o.keyword.empty()) r.keyword = o.keyword;
  else r.query = read_query(o);
  for (const auto& s : split(o.sources, ','))
    if (!trim(s).empty()) r.sources.emplace_back(trim(s));
  if (!o.format.empty()) r.format = parse_format(o.format);
  r.explain = o.explain;
  return r;
}

int report(const StageError& e) {
  std::cerr << "medley: " << e.stage << " error (" << to_string(e.kind) << "): " << e.message;
  if (e.position) std::cerr << " at line " << e.position->line << ", column " << e.position->column;
  std::cerr << "\n";
  return e.exit_code();
}

int run_query(const Mediator& m, const Options& o) {
  QueryResponse r = m.handle_query(make_request(o));
  if (o.explain && r.format != OutputFormat::Json) std::cerr << r.diagnostics.to_text();
  if (!r.ok()) return report(*r.error);
  std::cout << r.body;
  return 0;
}

int run_plan(const Mediator& m, const Options& o) {
  QueryRequest req = make_request(o);
  std::string stage = "parse";
  try {
    if (req.keyword) throw Error(ErrorKind::InvalidQuery, "plan needs a conjunctive query, not a keyword");
    auto q = parse_query(req.query);
    stage = "validate";
    q = validate(q, m.ontology());
    for (const auto& w : q.warnings) std::cerr << "warning: " << w << "\n";
    stage = "plan";
    std::vector<std::string> selected = req.sources.empty() ? m.config().sources : req.sources;
    const SemanticDirectory dir = selected.empty() ? m.directory() : m.directory().restrict(selected);
    PlanTree plan = plan_query(q, dir);
    std::cout << explain(plan, dir);
  } catch (const Error& e) {
    return report(StageError{stage, e.kind(), e.detail(), e.position()});
  }
  return 0;
}

int run_sources(const Mediator& m) {
  for (const auto& s : m.sources_json()) {
    std::cout << s["name"].get<std::string>() << "  " << s["endpoint"].get<std::string>() << "  "
              << s["schema_id"].get<std::string>() << (s["enabled"].get<bool>() ? "" : "  (disabled)") << "\n";
    std::cout << "  " << s["description"].get<std::string>() << "\n";
    for (const auto& line : s["mappings"]) std::cout << "    " << line.get<std::string>() << "\n";
  }
  return 0;
}

int run_serve(std::shared_ptr<Mediator> m, const Options& o) {
  sigset_t stop_signals;
  sigemptyset(&stop_signals);
  sigaddset(&stop_signals, SIGINT);
  sigaddset(&stop_signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);
  std::optional<std::filesystem::path> static_dir;
  if (!o.static_dir.empty()) static_dir = o.static_dir;
  MediatorHttpServer server(m, static_dir);
  int port = o.port >= 0 ? o.port : m->config().port;
  int bound = server.start(m->config().listen, port);
  std::cout << "medley listening on http://" << m->config().listen << ":" << bound << std::endl;
  int sig = 0;
  sigwait(&stop_signals, &sig);
  server.stop();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"medley: ontology-based query mediator"};
  app.require_subcommand(1);
  Options o;
  auto add_common = [&](CLI::App* sub) { sub->add_option("--config", o.config, "mediator config file"); };
  auto add_query = [&](CLI::App* sub) {
    add_common(sub);
    sub->add_option("--file", o.file, "query file ('-' for stdin)");
    sub->add_option("--query", o.query, "query text");
    sub->add_option("--sources", o.sources, "comma-separated source selection");
  };
  auto* query = app.add_subcommand("query", "run a query");
  add_query(query);
  query->add_option("--keyword", o.keyword, "quick keyword search");
  query->add_option("--format", o.format, "rdf | xml | html | json");
  query->add_flag("--explain", o.explain, "print diagnostics");
  auto* plan = app.add_subcommand("plan", "show groups and the plan tree");
  add_query(plan);
  plan->add_flag("--explain", o.explain, "accepted for symmetry; plans are always explained");
  auto* sources = app.add_subcommand("sources", "list registered sources");
  add_common(sources);
  auto* serve = app.add_subcommand("serve", "run the HTTP API");
  add_common(serve);
  serve->add_option("--port", o.port, "listen port (overrides config)");
  serve->add_option("--static", o.static_dir, "directory of static UI assets");
  CLI11_PARSE(app, argc, argv);

  std::shared_ptr<Mediator> m;
  try {
    m = Mediator::load(MediatorConfig::load(o.config));
  } catch (const Error& e) {
    std::cerr << "medley: " << e.what() << "\n";
    return 5;
  }
  try {
    if (*query) return run_query(*m, o);
    if (*plan) return run_plan(*m, o);
    if (*sources) return run_sources(*m);
    if (*serve) return run_serve(m, o);
  } catch (const Error& e) {
    return report(StageError{"request", e.kind(), e.detail(), e.position()});
  }
  return 1;
}
