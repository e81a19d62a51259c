#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "etlinks/entity_registry.hpp"
#include "etlinks/matrix.hpp"

namespace etlinks {

/// Leaves are 0..n-1; the cluster created by merge i has id n + i.
struct Merge {
  std::size_t a = 0;  // smaller cluster id
  std::size_t b = 0;  // larger cluster id
  double height = 0.0;
  std::size_t id = 0;

  friend bool operator==(const Merge&, const Merge&) = default;
};

struct Dendrogram {
  std::size_t leaf_count = 0;
  std::vector<Merge> merges;  // exactly leaf_count - 1
};

/// Cosine distance matrix (1 − cosine) between the rows.
Matrix cosine_distance_matrix(const Matrix& vectors);

/// Average-linkage agglomeration under cosine distance. At each step the
/// pair with the smallest linkage merges; equal linkages go to the smallest
/// (min id, max id) pair. Throws InputError when fewer than two rows.
Dendrogram agglomerate(const Matrix& vectors);

/// Same, from a precomputed symmetric distance matrix.
Dendrogram agglomerate_distances(const Matrix& distances);

/// One entity of the joint technology + company set.
struct JointEntity {
  EntityKind kind = EntityKind::technology;
  std::string id;
  std::string name;
  double rnd_meur = 0.0;  // 0 for technologies
};

struct JointSet {
  std::vector<JointEntity> entities;
  Matrix vectors;  // row i belongs to entities[i]

  std::size_t size() const { return entities.size(); }
};

struct ClusterProfile {
  std::size_t members = 0;
  std::size_t technologies = 0;
  std::size_t companies = 0;
  double total_rnd_meur = 0.0;
  std::vector<std::string> label_candidates;
};

struct ClusterAssignment {
  std::size_t k = 0;
  std::vector<std::size_t> labels;  // per leaf, in [0, k)
  std::vector<ClusterProfile> profiles;
};

/// Undo the last k − 1 merges. Cluster indices follow the smallest leaf
/// index in each cluster. Throws InputError unless 1 <= k <= n.
ClusterAssignment cut(const Dendrogram& dendrogram, std::size_t k);

/// Member counts, spend totals and up to `label_count` names of the members
/// closest to each cluster centroid.
void profile_clusters(ClusterAssignment& assignment, const JointSet& joint,
                      std::size_t label_count = 3);

void write_dendrogram_csv(std::ostream& out, const Dendrogram& dendrogram);
void write_assignment_csv(std::ostream& out, const ClusterAssignment& assignment,
                          const JointSet& joint);

struct AssignmentRow {
  std::string entity_id;
  EntityKind kind = EntityKind::technology;
  std::size_t cluster = 0;
};

std::vector<AssignmentRow> read_assignment_csv(std::string_view csv_text);

}  // namespace etlinks
