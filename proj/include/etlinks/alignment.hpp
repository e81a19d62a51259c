#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "etlinks/entity_registry.hpp"
#include "etlinks/matrix.hpp"

namespace etlinks {

enum class AnchorSource { user_supplied, mutual_nn_refined };

std::string_view anchor_source_name(AnchorSource source);

struct AnchorPair {
  std::string company;     // company-side id or key
  std::string technology;  // technology-side id or key

  friend bool operator==(const AnchorPair&, const AnchorPair&) = default;
  friend auto operator<=>(const AnchorPair&, const AnchorPair&) = default;
};

struct AnchorSet {
  std::vector<AnchorPair> pairs;
  AnchorSource source = AnchorSource::user_supplied;
};

/// Orthogonal d x d map W carrying company vectors (rows, x -> xW) onto the
/// technology space.
struct OrthogonalMap {
  Matrix matrix;
  double residual = 0.0;  // ‖XW − Y‖_F / √n on the anchors it was fit to
  std::size_t anchor_count = 0;
  std::size_t rank = 0;  // numerical rank of XᵀY

  /// True when fewer anchors than dimensions or XᵀY is rank deficient. The
  /// map is still a valid minimiser but not unique.
  bool degenerate() const { return anchor_count < matrix.rows() || rank < matrix.rows(); }
};

OrthogonalMap identity_map(std::size_t dimension);

/// Orthogonal Procrustes: W = U Vᵀ from the SVD XᵀY = U Σ Vᵀ, minimising
/// ‖XW − Y‖_F over the full orthogonal group (reflections allowed).
/// Rows of X and Y correspond pairwise. Throws DimensionError on shape
/// mismatch and InputError when there are no anchors.
OrthogonalMap fit_procrustes(const Matrix& x, const Matrix& y);

/// Rows x replaced by xW.
Matrix apply_alignment(const Matrix& vectors, const OrthogonalMap& map);

/// ‖XW − Y‖_F / √n.
double alignment_residual(const Matrix& x, const Matrix& y, const OrthogonalMap& map);

struct RefinementResult {
  AnchorSet anchors;
  OrthogonalMap map;
  int rounds_run = 0;
  bool converged = false;  // stopped because the anchor set repeated
};

/// Mutual nearest neighbours by cosine between the rows of `companies`
/// (already in technology space) and `technologies`. Ties go to the
/// lexicographically smaller id. Pairs are (company id, technology id),
/// sorted.
std::vector<AnchorPair> mutual_nearest_neighbors(const EntityVectors& companies,
                                                 const EntityVectors& technologies);

/// Iterative Procrustes. `companies` are the unaligned company vectors; each
/// round maps them with the current W, takes mutual nearest neighbours as
/// anchors, and refits W on them. Stops after `rounds` or when the anchor set
/// repeats. With rounds == 0 the input map is returned unchanged alongside
/// its mutual-NN set. Throws RefinementError when a round finds no anchors.
RefinementResult refine_anchors(const EntityVectors& companies, const EntityVectors& technologies,
                                const OrthogonalMap& map, int rounds);

/// anchors.csv: `company_wiki_title,technology_wiki_title`.
std::vector<AnchorPair> load_anchor_titles(std::string_view csv_text);

}  // namespace etlinks
