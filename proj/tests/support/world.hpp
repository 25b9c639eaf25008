// Test worlds: an ontology, registered sources and their documents, held in
// memory so that data can be regenerated and mediators built without files.
#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "medley/mediator.hpp"

namespace medley::testing {

std::filesystem::path fixtures_dir();
std::filesystem::path golden_dir();
std::string read_text(const std::filesystem::path& p);
std::string yeast_case_query();

struct SourceData {
  SourceRegistration reg;
  ServiceDescriptor descriptor;
  SourceSchema schema;
  std::vector<Mapping> mappings;
  xml::Node doc;
};

struct World {
  std::shared_ptr<const Ontology> ontology;
  std::vector<SourceData> sources;  // registry order

  std::vector<std::string> source_names() const;
  SemanticDirectory directory(const std::vector<std::string>& only = {}) const;
  /// In-process clients; with `counting`, every client is wrapped in a CountingClient.
  ClientMap clients(bool counting = false) const;
  std::shared_ptr<Mediator> mediator(bool counting = false) const;
};

/// The fixture world exactly as shipped under fixtures/.
const World& fixture_world();
std::shared_ptr<Mediator> fixture_mediator();

/// Same ontology, schemas and mappings with freshly generated documents. Values
/// come from small shared pools (with case, whitespace and normalization
/// variants) so that keys meet across sources.
World random_world(std::mt19937& rng);

/// Random connected conjunctive query text over the world's ontology. Constants
/// are drawn from values present in `world` most of the time.
std::string random_query(const World& world, std::mt19937& rng);

}  // namespace medley::testing
