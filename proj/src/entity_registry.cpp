#include "etlinks/entity_registry.hpp"

#include <cmath>
#include <istream>
#include <map>
#include <ostream>

#include "etlinks/csv.hpp"
#include "etlinks/error.hpp"
#include "etlinks/numfmt.hpp"

namespace etlinks {

std::string_view kind_name(EntityKind kind) {
  return kind == EntityKind::technology ? "technology" : "company";
}

namespace {

std::string at_line(std::string_view table, std::size_t line) {
  return std::string(table) + " line " + std::to_string(line);
}

std::vector<csv::Record> data_records(std::string_view text, const std::vector<std::string>& columns,
                                      std::string_view table) {
  auto records = csv::parse(text);
  if (records.empty()) {
    throw TableError(TableErrorKind::missing_column, 1, std::string(table) + ": missing header row");
  }
  csv::require_header(records.front(), columns, table);
  records.erase(records.begin());
  for (const auto& r : records) {
    if (r.fields.size() != columns.size()) {
      throw TableError(TableErrorKind::malformed_row, r.line,
                       at_line(table, r.line) + ": expected " + std::to_string(columns.size()) +
                           " fields, found " + std::to_string(r.fields.size()));
    }
  }
  return records;
}

void require_unique(std::map<std::string, std::size_t>& seen, const std::string& value,
                    std::size_t line, std::string_view column, std::string_view table) {
  const auto [it, inserted] = seen.emplace(value, line);
  if (!inserted) {
    throw TableError(TableErrorKind::duplicate, line,
                     std::string(table) + ": duplicate " + std::string(column) + " '" + value +
                         "' on lines " + std::to_string(it->second) + " and " +
                         std::to_string(line));
  }
}

void require_non_empty(const std::string& value, std::size_t line, std::string_view column,
                       std::string_view table) {
  if (value.empty()) {
    throw TableError(TableErrorKind::empty_field, line,
                     at_line(table, line) + ": empty " + std::string(column));
  }
}

template <typename Entity>
ResolvedEntitySet resolve(std::span<const Entity> roster, const EmbeddingStore& store,
                          std::string_view prefix, EntityKind kind) {
  ResolvedEntitySet set;
  set.kind = kind;
  for (std::size_t i = 0; i < roster.size(); ++i) {
    std::string key = mangle_title(roster[i].wiki_title, prefix);
    if (const auto v = store.get_vector(key)) {
      set.resolved.push_back({i, roster[i].id(), std::move(key), {v->begin(), v->end()}});
    } else {
      set.unresolved.push_back({i, roster[i].id(), "missing key"});
    }
  }
  return set;
}

}  // namespace

std::vector<Company> load_companies(std::string_view text) {
  constexpr std::string_view table = "companies.csv";
  std::vector<Company> out;
  std::map<std::string, std::size_t> titles;
  for (const auto& r : data_records(text, kCompanyColumns, table)) {
    const auto& f = r.fields;
    Company c;
    const auto rank = parse_int(f[0]);
    if (!rank || *rank <= 0) {
      throw TableError(TableErrorKind::bad_number, r.line,
                       at_line(table, r.line) + ": rank '" + f[0] + "' is not a positive integer");
    }
    c.rank = static_cast<int>(*rank);
    c.name = f[1];
    c.wiki_title = f[2];
    require_non_empty(c.wiki_title, r.line, "wiki_title", table);
    const auto spend = parse_double(f[3]);
    if (!spend || !std::isfinite(*spend)) {
      throw TableError(TableErrorKind::bad_number, r.line,
                       at_line(table, r.line) + ": rnd_meur '" + f[3] + "' is not a number");
    }
    if (*spend < 0.0) {
      throw TableError(TableErrorKind::negative_value, r.line,
                       at_line(table, r.line) + ": rnd_meur is negative");
    }
    c.rnd_meur = *spend;
    c.country = f[4];
    c.industry = f[5];
    require_unique(titles, c.wiki_title, r.line, "wiki_title", table);
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<Company> load_companies(std::istream& source) {
  return load_companies(csv::read_stream(source));
}

std::vector<Technology> load_technologies(std::string_view text) {
  constexpr std::string_view table = "technologies.csv";
  std::vector<Technology> out;
  std::map<std::string, std::size_t> ids;
  std::map<std::string, std::size_t> titles;
  for (const auto& r : data_records(text, kTechnologyColumns, table)) {
    Technology t{r.fields[0], r.fields[1], r.fields[2], r.fields[3]};
    require_non_empty(t.tech_id, r.line, "tech_id", table);
    require_non_empty(t.wiki_title, r.line, "wiki_title", table);
    require_unique(ids, t.tech_id, r.line, "tech_id", table);
    require_unique(titles, t.wiki_title, r.line, "wiki_title", table);
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<Technology> load_technologies(std::istream& source) {
  return load_technologies(csv::read_stream(source));
}

void write_companies(std::ostream& out, std::span<const Company> companies) {
  csv::write_row(out, kCompanyColumns);
  for (const auto& c : companies) {
    csv::write_row(out, {std::to_string(c.rank), c.name, c.wiki_title,
                         format_shortest(c.rnd_meur), c.country, c.industry});
  }
}

void write_technologies(std::ostream& out, std::span<const Technology> technologies) {
  csv::write_row(out, kTechnologyColumns);
  for (const auto& t : technologies) csv::write_row(out, {t.tech_id, t.name, t.wiki_title, t.theme});
}

std::string mangle_title(std::string_view title, std::string_view prefix) {
  std::string key(prefix);
  for (char ch : title) key.push_back(ch == ' ' ? '_' : ch);
  return key;
}

ResolvedEntitySet resolve_entities(std::span<const Company> roster, const EmbeddingStore& store,
                                   std::string_view prefix) {
  return resolve(roster, store, prefix, EntityKind::company);
}

ResolvedEntitySet resolve_entities(std::span<const Technology> roster, const EmbeddingStore& store,
                                   std::string_view prefix) {
  return resolve(roster, store, prefix, EntityKind::technology);
}

EntityVectors to_entity_vectors(const ResolvedEntitySet& set) {
  EntityVectors out;
  for (const auto& e : set.resolved) {
    out.ids.push_back(e.id);
    out.vectors.append_row(e.vector);
  }
  return out;
}

}  // namespace etlinks
