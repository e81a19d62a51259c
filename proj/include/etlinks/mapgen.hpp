#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "etlinks/alignment.hpp"
#include "etlinks/clustering.hpp"
#include "etlinks/entity_registry.hpp"
#include "etlinks/projection.hpp"
#include "etlinks/similarity.hpp"
#include "etlinks/validation.hpp"

namespace etlinks {

struct AlignmentSummary {
  std::string anchor_mode;  // "supplied" or "mutual-nn"
  std::size_t anchor_count = 0;
  std::size_t rank = 0;
  double residual = 0.0;
  int refinement_rounds = 0;
  std::vector<AnchorPair> anchors;  // embedding keys
};

/// Everything the renderers need. `entities`, `clusters.labels` and
/// `layout.points` share one order: resolved technologies then resolved
/// companies, each in roster order.
struct LandscapeModel {
  std::string embedding_digest;
  std::size_t dimension = 0;
  std::map<std::string, std::string> decisions;
  std::string aligned_vectors_file;
  std::string aligned_vectors_digest;

  std::vector<Technology> technologies;
  std::vector<Company> companies;
  std::map<std::string, std::string> technology_keys;  // resolved id -> embedding key
  std::map<std::string, std::string> company_keys;
  std::vector<UnresolvedEntity> unresolved_technologies;
  std::vector<UnresolvedEntity> unresolved_companies;

  AlignmentSummary alignment;
  SimilarityMatrix similarity;
  std::vector<JointEntity> entities;
  ClusterAssignment clusters;
  MapLayout layout;
  std::array<double, 2> explained_variance{};
  std::optional<std::vector<CorrelationResult>> validation;
  SignificanceBasis significance_basis = SignificanceBasis::pearson;
  std::size_t top_k = 5;
};

struct SvgOptions {
  double width = 1400.0;
  double height = 1000.0;
  double margin = 70.0;
  double min_radius = 3.0;
  double max_radius = 34.0;
  double marker_size = 6.0;
  std::size_t labelled_spenders = 15;
};

/// Fixed cluster palette; index wraps.
const std::vector<std::string>& cluster_palette();

/// min_radius + s·√spend with s chosen so the largest spend gets max_radius.
double bubble_radius(double rnd_meur, double max_rnd_meur, const SvgOptions& options);

/// SVG 1.1 landscape: one circle per company (area ∝ spend), one diamond
/// path per technology, fill by cluster. Technologies and the top spenders
/// are labelled.
std::string render_svg(const LandscapeModel& model, const SvgOptions& options = {});

/// Canonical JSON: sorted keys, roster-ordered arrays, reals at 9
/// significant digits, two-space indent.
std::string export_model_json(const LandscapeModel& model);

/// Re-serialises JSON text in the canonical layout.
std::string canonical_json(const std::string& json_text);

/// CommonMark report: decisions, resolution, alignment, cluster profiles,
/// per-company and per-technology top-k tables, themed matches, validation.
std::string report_markdown(const LandscapeModel& model);

}  // namespace etlinks
