// etlinks: technology / R&D-company landscape pipeline.
//
//   etlinks <subcommand> --config <path> [--embeddings <path>] [--format text|binary]
//           [--clusters 9] [--top-k 5] [--alpha 0.05] [--seed 42] [--out <dir>]
//           [--exclude-zero] [--anchor-mode supplied|mutual-nn] ...
//
// Every option can also be set in the config file (`key = value`, same names
// as the long flags); the command line wins. Relative paths read from the
// config file are taken relative to the file's directory.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "etlinks/error.hpp"
#include "etlinks/pipeline.hpp"

namespace fs = std::filesystem;
using namespace etlinks;

namespace {

const char* const kPathOptions[] = {"embeddings", "companies", "technologies", "patents",
                                    "anchors",    "out",       "harvest-cache"};

// Long options spelled out on the command line (as opposed to the config file).
std::set<std::string> command_line_options(int argc, char** argv) {
  std::set<std::string> seen;
  for (int i = 1; i < argc; ++i) {
    std::string_view a = argv[i];
    if (a == "--") break;
    if (a.rfind("--", 0) != 0) continue;
    a.remove_prefix(2);
    seen.emplace(a.substr(0, a.find('=')));
  }
  return seen;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Map emerging technologies and R&D-spending companies into one embedding space."};
  app.set_version_flag("--version", std::string(kVersion));
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1, 1);

  PipelineConfig cfg;
  std::string embeddings, companies, technologies, patents, anchors, out = cfg.out_dir.string(), cache;
  std::string format = "text", anchor_mode = "supplied", transform = "log1p", basis = "pearson";
  CLI::Option* config_opt = app.set_config("--config", "", "key = value config file");

  app.add_option("--embeddings", embeddings, "entity embedding file");
  app.add_option("--format", format, "embedding file format")->check(CLI::IsMember({"text", "binary"}));
  app.add_option("--companies", companies, "company roster CSV");
  app.add_option("--technologies", technologies, "technology roster CSV (default: harvested roster)");
  app.add_option("--patents", patents, "patent count CSV (enables validation)");
  app.add_option("--anchors", anchors, "anchor pair CSV for --anchor-mode supplied");
  app.add_option("--out", out, "output directory");
  app.add_option("--entity-prefix", cfg.entity_prefix, "prefix of entity keys in the embedding file");
  app.add_option("--anchor-mode", anchor_mode, "alignment anchors")->check(CLI::IsMember({"supplied", "mutual-nn"}));
  app.add_option("--refine-rounds", cfg.refine_rounds, "mutual-NN refinement rounds")->check(CLI::NonNegativeNumber);
  app.add_option("--clusters", cfg.clusters, "number of clusters k");
  app.add_option("--top-k", cfg.top_k, "neighbours listed per entity");
  app.add_option("--alpha", cfg.alpha, "significance level");
  app.add_option("--seed", cfg.seed, "seed for randomised options");
  app.add_flag("--exclude-zero", cfg.exclude_zero, "drop zero patent counts before correlating");
  app.add_option("--count-transform", transform, "patent count transform for Pearson")
      ->check(CLI::IsMember({"log1p", "raw"}));
  app.add_option("--significance-basis", basis, "coefficient that decides significance")
      ->check(CLI::IsMember({"pearson", "spearman"}));
  app.add_option("--permutations", cfg.permutations, "permutation test shuffles (0 = off)");
  app.add_option("--label-top", cfg.label_top, "top spenders labelled on the map");
  app.add_option("--harvest-endpoint", cfg.harvest_endpoint, "MediaWiki api.php URL");
  app.add_option("--harvest-root", cfg.harvest_root, "root category (without the Category: prefix)");
  app.add_option("--harvest-max-depth", cfg.harvest_max_depth, "subcategory depth limit")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--harvest-cache", cache, "directory caching raw API responses");
  app.add_option("--harvest-interval-ms", cfg.harvest_interval_ms, "minimum gap between requests")
      ->check(CLI::NonNegativeNumber);

  const char* const stages[][2] = {
      {"harvest", "walk a MediaWiki category tree into a technology roster"},
      {"resolve", "look roster entries up in the embedding file"},
      {"align", "fit the orthogonal map from company to technology space"},
      {"link", "cosine similarity matrix and top-k links"},
      {"cluster", "average-linkage clustering of the joint set"},
      {"project", "2-D PCA layout"},
      {"validate", "correlate similarity with patent counts"},
      {"render", "SVG landscape map"},
      {"report", "model JSON and Markdown report"},
      {"all", "every stage in order"},
  };
  for (const auto& [name, help] : stages) app.add_subcommand(name, help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "etlinks: error: " << e.what() << '\n';
    return 1;
  }

  const std::string config_path = config_opt->count() ? config_opt->as<std::string>() : std::string{};
  const auto on_command_line = command_line_options(argc, argv);
  const fs::path config_dir = config_path.empty() ? fs::path{} : fs::path(config_path).parent_path();
  const auto resolve_path = [&](const char* name, const std::string& value) -> fs::path {
    if (value.empty()) return {};
    fs::path p(value);
    if (p.is_relative() && !on_command_line.contains(name) && !config_path.empty()) p = config_dir / p;
    return p;
  };
  const std::string values[] = {embeddings, companies, technologies, patents, anchors, out, cache};
  fs::path* targets[] = {&cfg.embeddings, &cfg.companies, &cfg.technologies, &cfg.patents,
                         &cfg.anchors,    &cfg.out_dir,   &cfg.harvest_cache};
  for (std::size_t i = 0; i < std::size(kPathOptions); ++i) *targets[i] = resolve_path(kPathOptions[i], values[i]);

  cfg.format = *parse_format(format);
  cfg.anchor_mode = *parse_anchor_mode(anchor_mode);
  cfg.count_transform = transform == "raw" ? CountTransform::raw : CountTransform::log1p;
  cfg.significance_basis = basis == "spearman" ? SignificanceBasis::spearman : SignificanceBasis::pearson;

  const Stage stage = *parse_stage(app.get_subcommands().front()->get_name());
  try {
    const RunReport report = run_pipeline(stage, cfg);
    for (const auto& n : report.notes) std::cerr << "etlinks: note: " << n << '\n';
    for (const auto& p : report.written) std::cout << p.string() << '\n';
    return 0;
  } catch (const InputError& e) {
    std::cerr << "etlinks: error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "etlinks: internal error: " << e.what() << '\n';
    return 2;
  } catch (...) {
    std::cerr << "etlinks: internal error\n";
    return 2;
  }
}
