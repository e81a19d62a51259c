#include "etlinks/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "etlinks/csv.hpp"
#include "etlinks/error.hpp"
#include "etlinks/kernels.hpp"
#include "etlinks/numfmt.hpp"

namespace etlinks {

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    throw DimensionError("cosine of vectors with lengths " + std::to_string(u.size()) + " and " +
                         std::to_string(v.size()));
  }
  const double uu = kernels::dot(u, u);
  const double vv = kernels::dot(v, v);
  if (uu == 0.0 || vv == 0.0) throw InputError("cosine similarity of a zero vector");
  const double c = kernels::dot(u, v) / (std::sqrt(uu) * std::sqrt(vv));
  return std::clamp(c, -1.0, 1.0);
}

namespace {

std::size_t index_of(const std::vector<std::string>& ids, std::string_view id,
                     std::string_view axis) {
  const auto it = std::find(ids.begin(), ids.end(), id);
  if (it == ids.end()) throw InputError("unknown " + std::string(axis) + " '" + std::string(id) + "'");
  return static_cast<std::size_t>(it - ids.begin());
}

}  // namespace

std::size_t SimilarityMatrix::row_index(std::string_view id) const {
  return index_of(rows, id, "technology");
}

std::size_t SimilarityMatrix::col_index(std::string_view id) const {
  return index_of(cols, id, "company");
}

SimilarityMatrix cross_similarity(const EntityVectors& technologies,
                                  const EntityVectors& companies) {
  if (technologies.size() == 0 || companies.size() == 0) {
    throw InputError("cross similarity needs at least one technology and one company");
  }
  if (technologies.vectors.cols() != companies.vectors.cols()) {
    throw DimensionError("technology and company vectors differ in dimension");
  }
  SimilarityMatrix m{technologies.ids, companies.ids,
                     Matrix(technologies.size(), companies.size())};
  for (std::size_t i = 0; i < technologies.size(); ++i) {
    for (std::size_t j = 0; j < companies.size(); ++j) {
      m.values(i, j) = cosine_similarity(technologies.vectors.row(i), companies.vectors.row(j));
    }
  }
  return m;
}

NeighborList top_k(const SimilarityMatrix& matrix, std::string_view query, Direction direction,
                   std::size_t k) {
  if (k == 0) throw InputError("top_k needs k >= 1");
  const bool by_tech = direction == Direction::tech_to_companies;
  const std::size_t q = by_tech ? matrix.row_index(query) : matrix.col_index(query);
  const auto& others = by_tech ? matrix.cols : matrix.rows;

  std::vector<Neighbor> all;
  all.reserve(others.size());
  for (std::size_t i = 0; i < others.size(); ++i) {
    all.push_back({others[i], by_tech ? matrix.values(q, i) : matrix.values(i, q)});
  }
  const auto before = [](const Neighbor& a, const Neighbor& b) {
    return a.similarity != b.similarity ? a.similarity > b.similarity : a.id < b.id;
  };
  const std::size_t take = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(take), all.end(), before);
  all.resize(take);
  return NeighborList{std::string(query), std::move(all)};
}

void write_similarity_csv(std::ostream& out, const SimilarityMatrix& matrix) {
  std::vector<std::string> header{"tech_id"};
  header.insert(header.end(), matrix.cols.begin(), matrix.cols.end());
  csv::write_row(out, header);
  for (std::size_t i = 0; i < matrix.rows.size(); ++i) {
    std::vector<std::string> row{matrix.rows[i]};
    for (double v : matrix.values.row(i)) row.push_back(format_significant(v, 9));
    csv::write_row(out, row);
  }
}

SimilarityMatrix read_similarity_csv(std::string_view csv_text) {
  const auto records = csv::parse(csv_text);
  if (records.empty() || records.front().fields.empty() || records.front().fields[0] != "tech_id") {
    throw TableError(TableErrorKind::missing_column, 1, "similarity.csv: expected 'tech_id' header");
  }
  SimilarityMatrix m;
  m.cols.assign(records.front().fields.begin() + 1, records.front().fields.end());
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& f = records[r].fields;
    if (f.size() != m.cols.size() + 1) {
      throw TableError(TableErrorKind::malformed_row, records[r].line,
                       "similarity.csv line " + std::to_string(records[r].line) +
                           ": wrong number of fields");
    }
    m.rows.push_back(f[0]);
    std::vector<double> values;
    for (std::size_t c = 1; c < f.size(); ++c) {
      const auto v = parse_double(f[c]);
      if (!v) {
        throw TableError(TableErrorKind::bad_number, records[r].line,
                         "similarity.csv line " + std::to_string(records[r].line) +
                             ": bad value '" + f[c] + "'");
      }
      values.push_back(*v);
    }
    m.values.append_row(values);
  }
  if (m.rows.empty()) m.values = Matrix(0, m.cols.size());
  return m;
}

}  // namespace etlinks
