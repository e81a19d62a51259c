#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "etlinks/embedding_store.hpp"
#include "etlinks/matrix.hpp"

namespace etlinks {

enum class EntityKind { technology, company };

std::string_view kind_name(EntityKind kind);

/// A Scoreboard row. The company's entity id is its wiki_title.
struct Company {
  int rank = 0;
  std::string name;
  std::string wiki_title;
  double rnd_meur = 0.0;
  std::string country;
  std::string industry;

  const std::string& id() const { return wiki_title; }
};

struct Technology {
  std::string tech_id;
  std::string name;
  std::string wiki_title;
  std::string theme;  // may be empty

  const std::string& id() const { return tech_id; }
};

inline const std::vector<std::string> kCompanyColumns = {"rank",     "name",    "wiki_title",
                                                         "rnd_meur", "country", "industry"};
inline const std::vector<std::string> kTechnologyColumns = {"tech_id", "name", "wiki_title",
                                                            "theme"};

/// Roster loaders. Errors are TableError with the offending line.
std::vector<Company> load_companies(std::string_view csv_text);
std::vector<Company> load_companies(std::istream& source);
std::vector<Technology> load_technologies(std::string_view csv_text);
std::vector<Technology> load_technologies(std::istream& source);

void write_companies(std::ostream& out, std::span<const Company> companies);
void write_technologies(std::ostream& out, std::span<const Technology> technologies);

inline constexpr std::string_view kDefaultEntityPrefix = "ENTITY/";

/// `prefix` + title with spaces replaced by underscores; case untouched.
std::string mangle_title(std::string_view title, std::string_view prefix = kDefaultEntityPrefix);

struct ResolvedEntity {
  std::size_t roster_index = 0;
  std::string id;
  std::string key;
  std::vector<double> vector;
};

struct UnresolvedEntity {
  std::size_t roster_index = 0;
  std::string id;
  std::string reason;
};

struct ResolvedEntitySet {
  EntityKind kind = EntityKind::technology;
  std::vector<ResolvedEntity> resolved;
  std::vector<UnresolvedEntity> unresolved;
};

/// Looks every roster entry up by its mangled wiki_title. Misses are data:
/// they land in `unresolved` with reason "missing key".
ResolvedEntitySet resolve_entities(std::span<const Company> roster, const EmbeddingStore& store,
                                   std::string_view prefix = kDefaultEntityPrefix);
ResolvedEntitySet resolve_entities(std::span<const Technology> roster, const EmbeddingStore& store,
                                   std::string_view prefix = kDefaultEntityPrefix);

/// Ordered ids with one vector per row; the common currency of the numeric
/// modules.
struct EntityVectors {
  std::vector<std::string> ids;
  Matrix vectors;

  std::size_t size() const { return ids.size(); }
};

EntityVectors to_entity_vectors(const ResolvedEntitySet& set);

}  // namespace etlinks
