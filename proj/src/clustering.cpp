#include "etlinks/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "etlinks/csv.hpp"
#include "etlinks/error.hpp"
#include "etlinks/kernels.hpp"
#include "etlinks/numfmt.hpp"
#include "etlinks/similarity.hpp"

namespace etlinks {

Matrix cosine_distance_matrix(const Matrix& vectors) {
  const std::size_t n = vectors.rows();
  Matrix d(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = 1.0 - cosine_similarity(vectors.row(i), vectors.row(j));
      d(i, j) = v;
      d(j, i) = v;
    }
  }
  return d;
}

Dendrogram agglomerate(const Matrix& vectors) {
  if (vectors.rows() < 2) throw InputError("clustering needs at least two entities");
  return agglomerate_distances(cosine_distance_matrix(vectors));
}

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

// Slot-based agglomeration with a cached nearest neighbour per slot.
class Agglomerator {
 public:
  explicit Agglomerator(Matrix distances)
      : n_(distances.rows()),
        dist_(std::move(distances)),
        cluster_id_(n_),
        size_(n_, 1),
        active_(n_, true),
        nn_(n_, kNone),
        nn_dist_(n_, std::numeric_limits<double>::infinity()) {
    std::iota(cluster_id_.begin(), cluster_id_.end(), 0);
    for (std::size_t s = 0; s < n_; ++s) recompute(s);
  }

  Dendrogram run() {
    Dendrogram out;
    out.leaf_count = n_;
    for (std::size_t step = 0; step + 1 < n_; ++step) {
      std::size_t best = kNone;
      for (std::size_t s = 0; s < n_; ++s) {
        if (!active_[s] || nn_[s] == kNone) continue;
        if (best == kNone || better(nn_dist_[s], s, nn_[s], nn_dist_[best], best, nn_[best])) {
          best = s;
        }
      }
      const std::size_t keep = std::min(best, nn_[best]);
      const std::size_t drop = std::max(best, nn_[best]);
      const double height = dist_(keep, drop);
      const std::size_t new_id = n_ + step;
      out.merges.push_back({std::min(cluster_id_[keep], cluster_id_[drop]),
                            std::max(cluster_id_[keep], cluster_id_[drop]), height, new_id});
      merge(keep, drop, new_id);
    }
    return out;
  }

 private:
  std::pair<std::size_t, std::size_t> key(std::size_t s, std::size_t t) const {
    return std::minmax(cluster_id_[s], cluster_id_[t]);
  }

  bool better(double d1, std::size_t s1, std::size_t t1, double d2, std::size_t s2,
              std::size_t t2) const {
    if (d1 != d2) return d1 < d2;
    return key(s1, t1) < key(s2, t2);
  }

  void recompute(std::size_t s) {
    nn_[s] = kNone;
    nn_dist_[s] = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n_; ++t) {
      if (t == s || !active_[t]) continue;
      if (nn_[s] == kNone || better(dist_(s, t), s, t, nn_dist_[s], s, nn_[s])) {
        nn_[s] = t;
        nn_dist_[s] = dist_(s, t);
      }
    }
  }

  void merge(std::size_t keep, std::size_t drop, std::size_t new_id) {
    const double nk = static_cast<double>(size_[keep]);
    const double nd = static_cast<double>(size_[drop]);
    for (std::size_t t = 0; t < n_; ++t) {
      if (!active_[t] || t == keep || t == drop) continue;
      // Weighted mean written as low + (high − low)·w so rounding can never
      // take it below the smaller input; keeps merge heights monotone.
      const double a = dist_(keep, t);
      const double b = dist_(drop, t);
      const double merged = a <= b ? a + (b - a) * (nd / (nk + nd)) : b + (a - b) * (nk / (nk + nd));
      dist_(keep, t) = merged;
      dist_(t, keep) = merged;
    }
    active_[drop] = false;
    size_[keep] += size_[drop];
    cluster_id_[keep] = new_id;

    recompute(keep);
    for (std::size_t t = 0; t < n_; ++t) {
      if (!active_[t] || t == keep) continue;
      if (nn_[t] == keep || nn_[t] == drop) {
        recompute(t);
      } else if (better(dist_(t, keep), t, keep, nn_dist_[t], t, nn_[t])) {
        nn_[t] = keep;
        nn_dist_[t] = dist_(t, keep);
      }
    }
  }

  std::size_t n_;
  Matrix dist_;
  std::vector<std::size_t> cluster_id_;
  std::vector<std::size_t> size_;
  std::vector<bool> active_;
  std::vector<std::size_t> nn_;
  std::vector<double> nn_dist_;
};

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

}  // namespace

Dendrogram agglomerate_distances(const Matrix& distances) {
  if (distances.rows() != distances.cols()) throw DimensionError("distance matrix must be square");
  if (distances.rows() < 2) throw InputError("clustering needs at least two entities");
  return Agglomerator(distances).run();
}

ClusterAssignment cut(const Dendrogram& dendrogram, std::size_t k) {
  const std::size_t n = dendrogram.leaf_count;
  if (k < 1 || k > n) {
    throw InputError("cluster count " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
  }
  std::vector<std::size_t> parent(2 * n);
  std::iota(parent.begin(), parent.end(), 0);
  for (std::size_t i = 0; i < n - k; ++i) {
    const Merge& m = dendrogram.merges[i];
    parent[find_root(parent, m.a)] = m.id;
    parent[find_root(parent, m.b)] = m.id;
  }
  ClusterAssignment out;
  out.k = k;
  out.labels.resize(n);
  std::vector<std::size_t> index_of_root(2 * n, kNone);
  std::size_t next = 0;
  for (std::size_t leaf = 0; leaf < n; ++leaf) {
    const std::size_t root = find_root(parent, leaf);
    if (index_of_root[root] == kNone) index_of_root[root] = next++;
    out.labels[leaf] = index_of_root[root];
  }
  out.profiles.resize(k);
  return out;
}

void profile_clusters(ClusterAssignment& assignment, const JointSet& joint,
                      std::size_t label_count) {
  if (assignment.labels.size() != joint.size()) {
    throw DimensionError("assignment and joint set differ in size");
  }
  const std::size_t dim = joint.vectors.cols();
  assignment.profiles.assign(assignment.k, ClusterProfile{});
  std::vector<std::vector<double>> centroid(assignment.k, std::vector<double>(dim, 0.0));
  std::vector<std::vector<std::size_t>> members(assignment.k);

  for (std::size_t i = 0; i < joint.size(); ++i) {
    const std::size_t c = assignment.labels[i];
    auto& p = assignment.profiles[c];
    ++p.members;
    if (joint.entities[i].kind == EntityKind::technology) {
      ++p.technologies;
    } else {
      ++p.companies;
      p.total_rnd_meur += joint.entities[i].rnd_meur;
    }
    members[c].push_back(i);
    const auto row = joint.vectors.row(i);
    for (std::size_t j = 0; j < dim; ++j) centroid[c][j] += row[j];
  }

  for (std::size_t c = 0; c < assignment.k; ++c) {
    auto& m = members[c];
    std::vector<double> score(joint.size(), 0.0);
    for (std::size_t i : m) score[i] = kernels::dot(joint.vectors.row(i), centroid[c]);
    std::stable_sort(m.begin(), m.end(), [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
    for (std::size_t r = 0; r < std::min(label_count, m.size()); ++r) {
      assignment.profiles[c].label_candidates.push_back(joint.entities[m[r]].name);
    }
  }
}

void write_dendrogram_csv(std::ostream& out, const Dendrogram& dendrogram) {
  csv::write_row(out, {"cluster_a", "cluster_b", "height", "new_id"});
  for (const auto& m : dendrogram.merges) {
    csv::write_row(out, {std::to_string(m.a), std::to_string(m.b), format_significant(m.height, 9),
                         std::to_string(m.id)});
  }
}

void write_assignment_csv(std::ostream& out, const ClusterAssignment& assignment,
                          const JointSet& joint) {
  csv::write_row(out, {"entity_id", "kind", "cluster"});
  for (std::size_t i = 0; i < joint.size(); ++i) {
    csv::write_row(out, {joint.entities[i].id, std::string(kind_name(joint.entities[i].kind)),
                         std::to_string(assignment.labels[i])});
  }
}

std::vector<AssignmentRow> read_assignment_csv(std::string_view csv_text) {
  auto records = csv::parse(csv_text);
  if (records.empty()) throw TableError(TableErrorKind::missing_column, 1, "clusters.csv: empty");
  csv::require_header(records.front(), {"entity_id", "kind", "cluster"}, "clusters.csv");
  std::vector<AssignmentRow> rows;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& f = records[i].fields;
    const auto cluster = f.size() == 3 ? parse_int(f[2]) : std::nullopt;
    if (!cluster || *cluster < 0 || (f[1] != "technology" && f[1] != "company")) {
      throw TableError(TableErrorKind::malformed_row, records[i].line,
                       "clusters.csv line " + std::to_string(records[i].line) + ": malformed row");
    }
    rows.push_back({f[0], f[1] == "technology" ? EntityKind::technology : EntityKind::company,
                    static_cast<std::size_t>(*cluster)});
  }
  return rows;
}

}  // namespace etlinks
