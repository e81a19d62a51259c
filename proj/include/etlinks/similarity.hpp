#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "etlinks/entity_registry.hpp"
#include "etlinks/matrix.hpp"

namespace etlinks {

/// ⟨u, v⟩ / (‖u‖‖v‖) clamped to [−1, 1]. Throws DimensionError on length
/// mismatch and InputError on a zero vector.
double cosine_similarity(std::span<const double> u, std::span<const double> v);

/// Technologies (rows) against companies (columns).
struct SimilarityMatrix {
  std::vector<std::string> rows;  // technology ids
  std::vector<std::string> cols;  // company ids
  Matrix values;

  std::size_t row_index(std::string_view id) const;  // throws InputError if absent
  std::size_t col_index(std::string_view id) const;
};

/// values[i][j] = cosine(row_i, col_j), in input order. Throws InputError
/// if either side is empty.
SimilarityMatrix cross_similarity(const EntityVectors& technologies,
                                  const EntityVectors& companies);

enum class Direction { tech_to_companies, company_to_techs };

struct Neighbor {
  std::string id;
  double similarity = 0.0;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

struct NeighborList {
  std::string query;
  std::vector<Neighbor> neighbors;  // descending similarity, ties by ascending id
};

/// The min(k, axis size) best matches for `query`. Throws InputError on an
/// unknown query or k == 0.
NeighborList top_k(const SimilarityMatrix& matrix, std::string_view query, Direction direction,
                   std::size_t k);

/// CSV: header `tech_id,<company ids...>`, one row per technology, values at
/// 9 significant digits.
void write_similarity_csv(std::ostream& out, const SimilarityMatrix& matrix);
SimilarityMatrix read_similarity_csv(std::string_view csv_text);

}  // namespace etlinks
