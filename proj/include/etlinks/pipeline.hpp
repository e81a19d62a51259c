#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "etlinks/embedding_store.hpp"
#include "etlinks/mapgen.hpp"
#include "etlinks/validation.hpp"

namespace etlinks {

inline constexpr std::string_view kVersion = "0.1.0";

enum class Stage { harvest, resolve, align, link, cluster, project, validate, render, report, all };

std::optional<Stage> parse_stage(std::string_view name);
std::string_view stage_name(Stage stage);

enum class AnchorMode { supplied, mutual_nn };

std::optional<AnchorMode> parse_anchor_mode(std::string_view name);
std::string_view anchor_mode_name(AnchorMode mode);

/// Paths are used as given (the CLI resolves config-relative paths first).
struct PipelineConfig {
  std::filesystem::path embeddings;
  std::filesystem::path companies;
  std::filesystem::path technologies;  // empty: use the harvested roster
  std::filesystem::path patents;       // empty: no validation
  std::filesystem::path anchors;
  std::filesystem::path out_dir = "etlinks-out";

  EmbeddingFormat format = EmbeddingFormat::text;
  std::string entity_prefix = "ENTITY/";
  AnchorMode anchor_mode = AnchorMode::supplied;
  int refine_rounds = 5;

  std::size_t clusters = 9;
  std::size_t top_k = 5;

  double alpha = 0.05;
  std::uint64_t seed = 42;
  bool exclude_zero = false;
  CountTransform count_transform = CountTransform::log1p;
  SignificanceBasis significance_basis = SignificanceBasis::pearson;
  std::size_t permutations = 0;

  std::string harvest_endpoint;  // empty: harvest skipped by `all`
  std::string harvest_root = "Emerging technologies";
  int harvest_max_depth = 1;
  std::filesystem::path harvest_cache;
  int harvest_interval_ms = 1000;

  std::size_t label_top = 15;  // labelled top spenders on the map
};

/// Output file names inside `out_dir`.
namespace artifact {
inline constexpr const char* harvested = "harvested_technologies.csv";
inline constexpr const char* resolution = "resolution.json";
inline constexpr const char* technology_vectors = "technology_vectors.txt";
inline constexpr const char* company_vectors = "company_vectors.txt";
inline constexpr const char* anchor_vectors = "anchor_vectors.txt";
inline constexpr const char* alignment = "alignment.json";
inline constexpr const char* aligned_company_vectors = "aligned_company_vectors.txt";
inline constexpr const char* similarity = "similarity.csv";
inline constexpr const char* links = "links.csv";
inline constexpr const char* dendrogram = "dendrogram.csv";
inline constexpr const char* clusters = "clusters.csv";
inline constexpr const char* cluster_profiles = "cluster_profiles.json";
inline constexpr const char* layout = "layout.csv";
inline constexpr const char* projection = "projection.json";
inline constexpr const char* validation = "validation.csv";
inline constexpr const char* map = "map.svg";
inline constexpr const char* model = "model.json";
inline constexpr const char* report = "report.md";
inline constexpr const char* manifest = "manifest.json";
}  // namespace artifact

/// Effective value of every decision flag, as recorded in the manifest and
/// the report header.
std::map<std::string, std::string> decisions_in_force(const PipelineConfig& config);

/// Throws InputError when `config` cannot drive `stage` (missing input
/// file, k < 1, α outside (0, 1), ...).
void check_config(const PipelineConfig& config, Stage stage);

struct RunReport {
  std::vector<std::string> notes;  // warnings worth showing the user
  std::vector<std::filesystem::path> written;
};

/// Runs one stage (or every stage for Stage::all) reading earlier stages'
/// artifacts from `out_dir`. On any exception the files written by this
/// call are removed and the manifest restored before rethrowing.
RunReport run_pipeline(Stage stage, const PipelineConfig& config);

/// Assembles the landscape model from the artifacts in `out_dir`.
LandscapeModel load_model(const PipelineConfig& config);

}  // namespace etlinks
