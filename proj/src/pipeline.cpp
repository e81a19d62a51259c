#include "etlinks/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "etlinks/alignment.hpp"
#include "etlinks/clustering.hpp"
#include "etlinks/csv.hpp"
#include "etlinks/digest.hpp"
#include "etlinks/entity_registry.hpp"
#include "etlinks/error.hpp"
#include "etlinks/harvest.hpp"
#include "etlinks/kernels.hpp"
#include "etlinks/numfmt.hpp"
#include "etlinks/projection.hpp"
#include "etlinks/similarity.hpp"
#include "json.hpp"

namespace etlinks {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::pair<Stage, std::string_view> kStageNames[] = {
    {Stage::harvest, "harvest"}, {Stage::resolve, "resolve"},   {Stage::align, "align"},
    {Stage::link, "link"},       {Stage::cluster, "cluster"},   {Stage::project, "project"},
    {Stage::validate, "validate"}, {Stage::render, "render"},   {Stage::report, "report"},
    {Stage::all, "all"},
};

}  // namespace

std::optional<Stage> parse_stage(std::string_view name) {
  for (const auto& [stage, text] : kStageNames) {
    if (text == name) return stage;
  }
  return std::nullopt;
}

std::string_view stage_name(Stage stage) {
  for (const auto& [s, text] : kStageNames) {
    if (s == stage) return text;
  }
  return "?";
}

std::optional<AnchorMode> parse_anchor_mode(std::string_view name) {
  if (name == "supplied") return AnchorMode::supplied;
  if (name == "mutual-nn") return AnchorMode::mutual_nn;
  return std::nullopt;
}

std::string_view anchor_mode_name(AnchorMode mode) {
  return mode == AnchorMode::supplied ? "supplied" : "mutual-nn";
}

std::map<std::string, std::string> decisions_in_force(const PipelineConfig& c) {
  std::map<std::string, std::string> d;
  d["format"] = c.format == EmbeddingFormat::text ? "text" : "binary";
  d["entity-prefix"] = c.entity_prefix;
  d["normalization"] = "unit L2 before alignment";
  d["anchor-mode"] = std::string(anchor_mode_name(c.anchor_mode));
  d["refine-rounds"] = std::to_string(c.refine_rounds);
  d["alignment"] = "orthogonal Procrustes via SVD (reflections allowed)";
  d["similarity"] = "cosine";
  d["top-k"] = std::to_string(c.top_k);
  d["tie-break"] = "ascending id";
  d["clusters"] = std::to_string(c.clusters);
  d["linkage"] = "average, cosine distance, full dimension";
  d["projection"] = "PCA, sample covariance (n-1), cyclic Jacobi";
  d["alpha"] = format_significant(c.alpha, 9);
  d["seed"] = std::to_string(c.seed);
  d["exclude-zero"] = c.exclude_zero ? "true" : "false";
  d["count-transform"] = c.count_transform == CountTransform::log1p ? "log1p" : "raw";
  d["significance-basis"] = c.significance_basis == SignificanceBasis::pearson ? "pearson" : "spearman";
  d["significance-test"] = "one-sided positive, Student t on n-2 df";
  d["permutations"] = std::to_string(c.permutations);
  d["label-top"] = std::to_string(c.label_top);
  d["harvest-endpoint"] = c.harvest_endpoint;
  d["harvest-root"] = c.harvest_root;
  d["harvest-max-depth"] = std::to_string(c.harvest_max_depth);
  return d;
}

namespace {

fs::path technologies_path(const PipelineConfig& c) {
  return c.technologies.empty() ? c.out_dir / artifact::harvested : c.technologies;
}

void require_file(const fs::path& path, std::string_view what) {
  if (path.empty()) throw InputError(std::string(what) + " path is not set");
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw InputError(std::string(what) + " file not found: " + path.string());
}

bool runs_harvest(const PipelineConfig& c) { return !c.harvest_endpoint.empty(); }

}  // namespace

void check_config(const PipelineConfig& c, Stage stage) {
  if (c.clusters < 1) throw InputError("clusters must be >= 1");
  if (c.top_k < 1) throw InputError("top-k must be >= 1");
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw InputError("alpha must lie in (0, 1)");
  if (c.refine_rounds < 0) throw InputError("refine-rounds must be >= 0");
  if (c.out_dir.empty()) throw InputError("out path is not set");

  const auto needs_resolve_inputs = [&](bool harvest_first) {
    require_file(c.embeddings, "embeddings");
    require_file(c.companies, "companies");
    if (!(harvest_first && c.technologies.empty())) require_file(technologies_path(c), "technologies");
    if (c.anchor_mode == AnchorMode::supplied) require_file(c.anchors, "anchors");
  };
  const auto needs_harvest = [&] {
    if (c.harvest_endpoint.empty()) throw InputError("harvest-endpoint is not set");
    if (c.harvest_root.empty()) throw InputError("harvest-root is not set");
    if (c.harvest_max_depth < 0) throw InputError("harvest-max-depth must be >= 0");
  };

  switch (stage) {
    case Stage::harvest:
      needs_harvest();
      break;
    case Stage::resolve:
      needs_resolve_inputs(false);
      break;
    case Stage::validate:
      require_file(c.patents, "patents");
      break;
    case Stage::all:
      if (runs_harvest(c)) needs_harvest();
      needs_resolve_inputs(runs_harvest(c));
      if (!c.patents.empty()) require_file(c.patents, "patents");
      break;
    case Stage::cluster:
    case Stage::project:
    case Stage::render:
    case Stage::report:
      require_file(c.companies, "companies");
      require_file(technologies_path(c), "technologies");
      if (!c.patents.empty()) require_file(c.patents, "patents");
      break;
    default:
      break;
  }
}

namespace {

/// Read access to the artifacts in out_dir.
class Reader {
 public:
  explicit Reader(const PipelineConfig& config) : config_(config) {}

  const PipelineConfig& config() const { return config_; }
  fs::path path(const char* name) const { return config_.out_dir / name; }

  std::string read(const char* name, std::string_view stage_hint) const {
    const fs::path p = path(name);
    if (!fs::is_regular_file(p)) {
      throw InputError("missing artifact " + p.string() + "; run `" + std::string(stage_hint) + "` first");
    }
    record(name, p);
    return csv::read_file(p);
  }

  /// A user-supplied input file; the caller has checked it exists.
  std::string read_input(const std::string& label, const fs::path& p) const {
    record(label, p);
    return csv::read_file(p);
  }

  EmbeddingStore read_vectors(const char* name, std::string_view stage_hint) const {
    const std::string bytes = read(name, stage_hint);
    return parse_embeddings(std::string_view(bytes), EmbeddingFormat::text);
  }

 protected:
  virtual void record(const std::string&, const fs::path&) const {}

  const PipelineConfig& config_;
};

/// Files written by one run_pipeline call, removed again if it fails.
class Run : public Reader {
 public:
  explicit Run(const PipelineConfig& config) : Reader(config) {
    const fs::path manifest = config.out_dir / artifact::manifest;
    created_dir_ = !fs::exists(config.out_dir);
    fs::create_directories(config.out_dir);
    if (fs::exists(manifest)) previous_manifest_ = csv::read_file(manifest);
  }

  void write(const char* name, const std::string& bytes) {
    const fs::path target = path(name);
    const fs::path tmp = target.string() + ".partial";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw Error("cannot write " + tmp.string());
      out << bytes;
      if (!out) throw Error("write failed: " + tmp.string());
    }
    fs::rename(tmp, target);
    if (std::find(written_.begin(), written_.end(), target) == written_.end()) written_.push_back(target);
    outputs_[name] = sha256_hex(bytes);
  }

  void input(const std::string& label, const fs::path& p) { inputs_[label] = p; }

 protected:
  void record(const std::string& label, const fs::path& p) const override { inputs_[label] = p; }

 public:

  void note(std::string message) { report_.notes.push_back(std::move(message)); }

  /// Records the stage in the manifest; inputs/outputs accumulated since
  /// the previous call belong to it.
  void finish_stage(Stage stage) {
    json manifest;
    const fs::path mpath = path(artifact::manifest);
    if (fs::exists(mpath)) {
      try {
        manifest = json::parse(csv::read_file(mpath));
      } catch (const json::exception&) {
        manifest = json::object();
      }
    }
    if (!manifest.is_object()) manifest = json::object();
    manifest["tool"] = "etlinks";
    manifest["version"] = std::string(kVersion);
    manifest["kernel_isa"] = std::string(kernels::isa_name(kernels::active_isa()));
    manifest["decisions"] = decisions_in_force(config_);
    json inputs = json::object();
    for (const auto& [label, p] : inputs_) inputs[label] = {{"path", p.string()}, {"sha256", sha256_file(p)}};
    manifest["stages"][std::string(stage_name(stage))] = {{"inputs", inputs}, {"outputs", outputs_}};
    inputs_.clear();
    outputs_.clear();

    const std::string bytes = manifest.dump(2, ' ', false, json::error_handler_t::replace) + "\n";
    const fs::path tmp = mpath.string() + ".partial";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out << bytes;
    }
    fs::rename(tmp, mpath);
    manifest_touched_ = true;
  }

  void rollback() noexcept {
    std::error_code ec;
    for (const auto& p : written_) {
      fs::remove(p, ec);
      fs::remove(p.string() + ".partial", ec);
    }
    const fs::path mpath = path(artifact::manifest);
    if (manifest_touched_) {
      if (previous_manifest_) {
        std::ofstream out(mpath, std::ios::binary | std::ios::trunc);
        out << *previous_manifest_;
      } else {
        fs::remove(mpath, ec);
      }
    }
    fs::remove(mpath.string() + ".partial", ec);
    if (created_dir_ && fs::is_empty(config_.out_dir, ec)) fs::remove(config_.out_dir, ec);
  }

  RunReport take_report() {
    report_.written = written_;
    return std::move(report_);
  }

 private:
  bool created_dir_ = false;
  bool manifest_touched_ = false;
  std::optional<std::string> previous_manifest_;
  std::vector<fs::path> written_;
  mutable std::map<std::string, fs::path> inputs_;
  std::map<std::string, std::string> outputs_;
  RunReport report_;
};

std::string dump(const json& j) { return j.dump(2, ' ', false, json::error_handler_t::replace) + "\n"; }

std::string write_store(const EmbeddingStore& store) {
  std::ostringstream out;
  write_embeddings(out, store, EmbeddingFormat::text);
  return out.str();
}

std::vector<Company> read_companies(const Reader& run) {
  const PipelineConfig& c = run.config();
  require_file(c.companies, "companies");
  return load_companies(std::string_view(run.read_input("companies", c.companies)));
}

std::vector<Technology> read_technologies(const Reader& run) {
  const fs::path p = technologies_path(run.config());
  require_file(p, "technologies");
  return load_technologies(std::string_view(run.read_input("technologies", p)));
}

json parse_json(const std::string& text, const std::string& name) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw InputError("malformed " + name + ": " + e.what());
  }
}

// ---- harvest ---------------------------------------------------------------

void stage_harvest(Run& run) {
  const auto& c = run.config();
  HarvestOptions options;
  options.min_interval = std::chrono::milliseconds(c.harvest_interval_ms);
  if (!c.harvest_cache.empty()) options.cache_dir = c.harvest_cache;
  auto result = fetch_category_tree(c.harvest_endpoint, c.harvest_root, c.harvest_max_depth, options);
  for (auto& w : result.warnings) run.note("harvest: " + w);
  run.write(artifact::harvested, export_roster(result.pages));
  run.finish_stage(Stage::harvest);
}

// ---- resolve ---------------------------------------------------------------

json resolved_json(const ResolvedEntitySet& set) {
  json resolved = json::array();
  for (const auto& r : set.resolved) resolved.push_back({{"id", r.id}, {"key", r.key}});
  json unresolved = json::array();
  for (const auto& u : set.unresolved) unresolved.push_back({{"id", u.id}, {"reason", u.reason}});
  return {{"resolved", resolved}, {"unresolved", unresolved}};
}

std::vector<std::string> unique_keys(const ResolvedEntitySet& set) {
  std::vector<std::string> keys;
  std::unordered_set<std::string> seen;
  for (const auto& r : set.resolved) {
    if (seen.insert(r.key).second) keys.push_back(r.key);
  }
  return keys;
}

void stage_resolve(Run& run) {
  const auto& c = run.config();
  require_file(c.embeddings, "embeddings");
  const auto technologies = read_technologies(run);
  const auto companies = read_companies(run);
  const EmbeddingStore store = load_embeddings(c.embeddings, c.format);
  run.input("embeddings", c.embeddings);

  const auto techs = resolve_entities(std::span<const Technology>(technologies), store, c.entity_prefix);
  const auto comps = resolve_entities(std::span<const Company>(companies), store, c.entity_prefix);
  if (!techs.unresolved.empty()) {
    run.note(std::to_string(techs.unresolved.size()) + " of " + std::to_string(technologies.size()) +
             " technologies unresolved");
  }
  if (!comps.unresolved.empty()) {
    run.note(std::to_string(comps.unresolved.size()) + " of " + std::to_string(companies.size()) +
             " companies unresolved");
  }

  json anchors = {{"pairs", json::array()}, {"skipped", json::array()}};
  std::vector<std::string> anchor_keys;
  if (c.anchor_mode == AnchorMode::supplied) {
    require_file(c.anchors, "anchors");
    std::unordered_set<std::string> seen;
    for (const auto& pair : load_anchor_titles(std::string_view(run.read_input("anchors", c.anchors)))) {
      const std::string ck = mangle_title(pair.company, c.entity_prefix);
      const std::string tk = mangle_title(pair.technology, c.entity_prefix);
      const bool have_c = store.contains(ck);
      const bool have_t = store.contains(tk);
      if (!have_c || !have_t) {
        anchors["skipped"].push_back({{"company", pair.company},
                                      {"technology", pair.technology},
                                      {"reason", !have_c ? "missing company key" : "missing technology key"}});
        continue;
      }
      anchors["pairs"].push_back({ck, tk});
      for (const auto& k : {ck, tk}) {
        if (seen.insert(k).second) anchor_keys.push_back(k);
      }
    }
    if (!anchors["skipped"].empty()) {
      run.note(std::to_string(anchors["skipped"].size()) + " anchor pairs skipped (missing keys)");
    }
  }

  const json resolution = {
      {"embeddings",
       {{"path", c.embeddings.string()},
        {"sha256", sha256_file(c.embeddings)},
        {"dimension", store.dimension()},
        {"entries", store.size()}}},
      {"entity_prefix", c.entity_prefix},
      {"technologies", resolved_json(techs)},
      {"companies", resolved_json(comps)},
      {"anchors", anchors},
  };
  run.write(artifact::resolution, dump(resolution));
  run.write(artifact::technology_vectors, write_store(unit_normalize(store.subset(unique_keys(techs)))));
  run.write(artifact::company_vectors, write_store(unit_normalize(store.subset(unique_keys(comps)))));
  if (c.anchor_mode == AnchorMode::supplied) {
    run.write(artifact::anchor_vectors, write_store(unit_normalize(store.subset(anchor_keys))));
  }
  run.finish_stage(Stage::resolve);
}

// ---- shared readers --------------------------------------------------------

struct Resolution {
  json doc;
  std::vector<std::pair<std::string, std::string>> technologies;  // (id, key)
  std::vector<std::pair<std::string, std::string>> companies;
};

Resolution read_resolution(const Reader& run) {
  Resolution r;
  r.doc = parse_json(run.read(artifact::resolution, "resolve"), artifact::resolution);
  try {
    for (const auto& e : r.doc.at("technologies").at("resolved")) {
      r.technologies.emplace_back(e.at("id").get<std::string>(), e.at("key").get<std::string>());
    }
    for (const auto& e : r.doc.at("companies").at("resolved")) {
      r.companies.emplace_back(e.at("id").get<std::string>(), e.at("key").get<std::string>());
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed ") + artifact::resolution + ": " + e.what());
  }
  return r;
}

EntityVectors gather(const std::vector<std::pair<std::string, std::string>>& entries, const EmbeddingStore& store,
                     const char* file) {
  EntityVectors out;
  out.vectors = Matrix(entries.size(), store.dimension());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto v = store.get_vector(entries[i].second);
    if (!v) throw InputError(std::string(file) + " lacks key " + entries[i].second + "; rerun `resolve`");
    out.ids.push_back(entries[i].first);
    std::copy(v->begin(), v->end(), out.vectors.row(i).begin());
  }
  return out;
}

// ---- align -----------------------------------------------------------------

void stage_align(Run& run) {
  const auto& c = run.config();
  const Resolution res = read_resolution(run);
  const EmbeddingStore tech_store = run.read_vectors(artifact::technology_vectors, "resolve");
  const EmbeddingStore company_store = run.read_vectors(artifact::company_vectors, "resolve");
  const EntityVectors techs = gather(res.technologies, tech_store, artifact::technology_vectors);
  const EntityVectors comps = gather(res.companies, company_store, artifact::company_vectors);
  if (comps.size() == 0) throw InputError("no company resolved; nothing to align");
  const std::size_t d = company_store.dimension();

  OrthogonalMap map;
  std::vector<AnchorPair> anchors;  // embedding keys
  int rounds = 0;
  bool converged = false;
  if (c.anchor_mode == AnchorMode::supplied) {
    const EmbeddingStore anchor_store = run.read_vectors(artifact::anchor_vectors, "resolve");
    const json& pairs = res.doc.at("anchors").at("pairs");
    if (pairs.empty()) throw InputError("no anchor pair resolved to embedding keys");
    Matrix x(pairs.size(), d), y(pairs.size(), d);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const std::string ck = pairs[i].at(0).get<std::string>();
      const std::string tk = pairs[i].at(1).get<std::string>();
      const auto cv = anchor_store.get_vector(ck);
      const auto tv = anchor_store.get_vector(tk);
      if (!cv || !tv) throw InputError(std::string(artifact::anchor_vectors) + " is stale; rerun `resolve`");
      std::copy(cv->begin(), cv->end(), x.row(i).begin());
      std::copy(tv->begin(), tv->end(), y.row(i).begin());
      anchors.push_back({ck, tk});
    }
    map = fit_procrustes(x, y);
  } else {
    if (techs.size() == 0) throw InputError("no technology resolved; mutual-nn anchors need both sides");
    const auto refined = refine_anchors(comps, techs, identity_map(d), c.refine_rounds);
    map = refined.map;
    rounds = refined.rounds_run;
    converged = refined.converged;
    std::map<std::string, std::string> ckey(res.companies.begin(), res.companies.end());
    std::map<std::string, std::string> tkey(res.technologies.begin(), res.technologies.end());
    for (const auto& p : refined.anchors.pairs) anchors.push_back({ckey.at(p.company), tkey.at(p.technology)});
  }
  if (map.degenerate()) {
    run.note("alignment is not unique: " + std::to_string(map.anchor_count) + " anchors, rank " +
             std::to_string(map.rank) + " of " + std::to_string(d));
  }

  json matrix = json::array();
  for (std::size_t i = 0; i < map.matrix.rows(); ++i) {
    json row = json::array();
    for (double v : map.matrix.row(i)) row.push_back(v);
    matrix.push_back(std::move(row));
  }
  json anchor_json = json::array();
  for (const auto& a : anchors) anchor_json.push_back({a.company, a.technology});
  const json doc = {{"anchor_mode", std::string(anchor_mode_name(c.anchor_mode))},
                    {"anchor_count", map.anchor_count},
                    {"rank", map.rank},
                    {"residual", map.residual},
                    {"refinement_rounds", rounds},
                    {"converged", converged},
                    {"degenerate", map.degenerate()},
                    {"matrix", matrix},
                    {"anchors", anchor_json}};
  run.write(artifact::alignment, dump(doc));

  const Matrix aligned = apply_alignment(comps.vectors, map);
  std::vector<std::string> keys;
  std::vector<double> values;
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < res.companies.size(); ++i) {
    if (!seen.insert(res.companies[i].second).second) continue;
    keys.push_back(res.companies[i].second);
    const auto row = aligned.row(i);
    values.insert(values.end(), row.begin(), row.end());
  }
  run.write(artifact::aligned_company_vectors, write_store(EmbeddingStore(d, keys, values)));
  run.finish_stage(Stage::align);
}

// ---- link ------------------------------------------------------------------

struct LinkedVectors {
  EntityVectors technologies;
  EntityVectors companies;  // aligned
};

LinkedVectors read_linked(const Reader& run, const Resolution& res) {
  const EmbeddingStore tech_store = run.read_vectors(artifact::technology_vectors, "resolve");
  const EmbeddingStore aligned = run.read_vectors(artifact::aligned_company_vectors, "align");
  return {gather(res.technologies, tech_store, artifact::technology_vectors),
          gather(res.companies, aligned, artifact::aligned_company_vectors)};
}

void stage_link(Run& run) {
  const auto& c = run.config();
  const Resolution res = read_resolution(run);
  const LinkedVectors lv = read_linked(run, res);
  const SimilarityMatrix exact = cross_similarity(lv.technologies, lv.companies);
  std::ostringstream matrix_csv;
  write_similarity_csv(matrix_csv, exact);
  const std::string bytes = matrix_csv.str();
  // Downstream consumers see the rounded matrix; derive the links from it too.
  const SimilarityMatrix s = read_similarity_csv(bytes);
  run.write(artifact::similarity, bytes);

  std::ostringstream links;
  csv::write_row(links, {"direction", "query", "rank", "neighbor", "similarity"});
  const auto emit = [&](const std::vector<std::string>& queries, Direction dir, const char* label) {
    for (const auto& q : queries) {
      const auto list = top_k(s, q, dir, c.top_k);
      for (std::size_t r = 0; r < list.neighbors.size(); ++r) {
        csv::write_row(links, {label, q, std::to_string(r + 1), list.neighbors[r].id,
                               format_significant(list.neighbors[r].similarity, 9)});
      }
    }
  };
  emit(s.rows, Direction::tech_to_companies, "technology");
  emit(s.cols, Direction::company_to_techs, "company");
  run.write(artifact::links, links.str());
  run.finish_stage(Stage::link);
}

// ---- cluster / project -----------------------------------------------------

std::vector<JointEntity> joint_entities(const Reader& run, const Resolution& res) {
  const auto technologies = read_technologies(run);
  const auto companies = read_companies(run);
  std::map<std::string, const Technology*> tech_by_id;
  for (const auto& t : technologies) tech_by_id[t.tech_id] = &t;
  std::map<std::string, const Company*> company_by_id;
  for (const auto& co : companies) company_by_id[co.wiki_title] = &co;

  std::vector<JointEntity> out;
  for (const auto& [id, key] : res.technologies) {
    const auto it = tech_by_id.find(id);
    if (it == tech_by_id.end()) throw InputError("technology " + id + " is not in the roster; rerun `resolve`");
    out.push_back({EntityKind::technology, id, it->second->name, 0.0});
  }
  for (const auto& [id, key] : res.companies) {
    const auto it = company_by_id.find(id);
    if (it == company_by_id.end()) throw InputError("company " + id + " is not in the roster; rerun `resolve`");
    out.push_back({EntityKind::company, id, it->second->name, it->second->rnd_meur});
  }
  return out;
}

JointSet read_joint(const Reader& run, const Resolution& res) {
  const LinkedVectors lv = read_linked(run, res);
  JointSet joint;
  joint.entities = joint_entities(run, res);
  const std::size_t d = lv.technologies.vectors.cols() ? lv.technologies.vectors.cols() : lv.companies.vectors.cols();
  joint.vectors = Matrix(joint.entities.size(), d);
  std::size_t r = 0;
  for (const auto* ev : {&lv.technologies, &lv.companies}) {
    for (std::size_t i = 0; i < ev->size(); ++i, ++r) {
      const auto row = ev->vectors.row(i);
      std::copy(row.begin(), row.end(), joint.vectors.row(r).begin());
    }
  }
  return joint;
}

void stage_cluster(Run& run) {
  const auto& c = run.config();
  const Resolution res = read_resolution(run);
  const JointSet joint = read_joint(run, res);
  if (c.clusters > joint.size()) {
    throw InputError("clusters = " + std::to_string(c.clusters) + " exceeds the " +
                     std::to_string(joint.size()) + " resolved entities");
  }
  const Dendrogram tree = agglomerate(joint.vectors);
  ClusterAssignment assignment = cut(tree, c.clusters);
  profile_clusters(assignment, joint);

  std::ostringstream dendro, clusters;
  write_dendrogram_csv(dendro, tree);
  write_assignment_csv(clusters, assignment, joint);
  json profiles = json::array();
  for (const auto& p : assignment.profiles) {
    profiles.push_back({{"members", p.members},
                        {"technologies", p.technologies},
                        {"companies", p.companies},
                        {"total_rnd_meur", p.total_rnd_meur},
                        {"label_candidates", p.label_candidates}});
  }
  run.write(artifact::dendrogram, dendro.str());
  run.write(artifact::clusters, clusters.str());
  run.write(artifact::cluster_profiles, dump({{"k", assignment.k}, {"profiles", profiles}}));
  run.finish_stage(Stage::cluster);
}

void stage_project(Run& run) {
  const Resolution res = read_resolution(run);
  const JointSet joint = read_joint(run, res);
  const Projection2D pca = fit_pca(joint.vectors);
  const MapLayout layout = transform(pca, joint.vectors);

  std::ostringstream csv_out;
  csv::write_row(csv_out, {"entity_id", "kind", "x", "y"});
  for (std::size_t i = 0; i < joint.size(); ++i) {
    csv::write_row(csv_out, {joint.entities[i].id, std::string(kind_name(joint.entities[i].kind)),
                             format_shortest(layout.points[i].x), format_shortest(layout.points[i].y)});
  }
  json components = json::array();
  for (std::size_t r = 0; r < pca.components.rows(); ++r) {
    json row = json::array();
    for (double v : pca.components.row(r)) row.push_back(v);
    components.push_back(std::move(row));
  }
  run.write(artifact::layout, csv_out.str());
  run.write(artifact::projection,
            dump({{"mean", pca.mean},
                  {"components", components},
                  {"explained_variance", {pca.explained_variance[0], pca.explained_variance[1]}}}));
  run.finish_stage(Stage::project);
}

// ---- validate --------------------------------------------------------------

ValidationOptions validation_options(const PipelineConfig& c) {
  ValidationOptions o;
  o.alpha = c.alpha;
  o.exclude_zero = c.exclude_zero;
  o.transform = c.count_transform;
  o.basis = c.significance_basis;
  o.permutations = c.permutations;
  o.seed = c.seed;
  return o;
}

void stage_validate(Run& run) {
  const auto& c = run.config();
  require_file(c.patents, "patents");
  const SimilarityMatrix s = read_similarity_csv(run.read(artifact::similarity, "link"));
  std::set<std::string> companies(s.cols.begin(), s.cols.end());
  std::set<std::string> techs(s.rows.begin(), s.rows.end());
  const PatentTable patents = load_patents(run.read_input("patents", c.patents), &companies, &techs);
  for (const auto& w : patents.warnings) run.note("patents: " + w);
  const auto results = validate_all(s, patents, validation_options(c));
  std::ostringstream out;
  write_validation_csv(out, results);
  run.write(artifact::validation, out.str());
  run.finish_stage(Stage::validate);
}

// ---- render / report -------------------------------------------------------

LandscapeModel assemble_model(const Reader& run);

void stage_render(Run& run) {
  const LandscapeModel model = assemble_model(run);
  SvgOptions options;
  options.labelled_spenders = run.config().label_top;
  run.write(artifact::map, render_svg(model, options));
  run.finish_stage(Stage::render);
}

void stage_report(Run& run) {
  const LandscapeModel model = assemble_model(run);
  run.write(artifact::model, export_model_json(model));
  run.write(artifact::report, report_markdown(model));
  run.finish_stage(Stage::report);
}

void dispatch(Run& run, Stage stage) {
  switch (stage) {
    case Stage::harvest: stage_harvest(run); break;
    case Stage::resolve: stage_resolve(run); break;
    case Stage::align: stage_align(run); break;
    case Stage::link: stage_link(run); break;
    case Stage::cluster: stage_cluster(run); break;
    case Stage::project: stage_project(run); break;
    case Stage::validate: stage_validate(run); break;
    case Stage::render: stage_render(run); break;
    case Stage::report: stage_report(run); break;
    case Stage::all:
      if (runs_harvest(run.config())) stage_harvest(run);
      stage_resolve(run);
      stage_align(run);
      stage_link(run);
      stage_cluster(run);
      stage_project(run);
      if (!run.config().patents.empty()) stage_validate(run);
      stage_render(run);
      stage_report(run);
      break;
  }
}

}  // namespace

RunReport run_pipeline(Stage stage, const PipelineConfig& config) {
  check_config(config, stage);
  Run run(config);
  try {
    dispatch(run, stage);
  } catch (...) {
    run.rollback();
    throw;
  }
  return run.take_report();
}

namespace {

LandscapeModel assemble_model(const Reader& run) {
  const PipelineConfig& c = run.config();
  LandscapeModel m;
  const Resolution res = read_resolution(run);
  try {
    m.embedding_digest = res.doc.at("embeddings").at("sha256").get<std::string>();
    m.dimension = res.doc.at("embeddings").at("dimension").get<std::size_t>();
    for (const auto* kind : {"technologies", "companies"}) {
      auto& list = std::string_view(kind) == "technologies" ? m.unresolved_technologies : m.unresolved_companies;
      for (const auto& u : res.doc.at(kind).at("unresolved")) {
        list.push_back({0, u.at("id").get<std::string>(), u.at("reason").get<std::string>()});
      }
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed ") + artifact::resolution + ": " + e.what());
  }
  m.decisions = decisions_in_force(c);
  m.technologies = read_technologies(run);
  m.companies = read_companies(run);
  for (const auto& [id, key] : res.technologies) m.technology_keys[id] = key;
  for (const auto& [id, key] : res.companies) m.company_keys[id] = key;
  // roster_index is informational only in the model; recover it for the report.
  for (auto& u : m.unresolved_technologies) {
    for (std::size_t i = 0; i < m.technologies.size(); ++i) {
      if (m.technologies[i].tech_id == u.id) u.roster_index = i;
    }
  }
  for (auto& u : m.unresolved_companies) {
    for (std::size_t i = 0; i < m.companies.size(); ++i) {
      if (m.companies[i].wiki_title == u.id) u.roster_index = i;
    }
  }

  const std::string aligned_bytes = run.read(artifact::aligned_company_vectors, "align");
  m.aligned_vectors_file = artifact::aligned_company_vectors;
  m.aligned_vectors_digest = sha256_hex(aligned_bytes);

  const json al = parse_json(run.read(artifact::alignment, "align"), artifact::alignment);
  try {
    m.alignment.anchor_mode = al.at("anchor_mode").get<std::string>();
    m.alignment.anchor_count = al.at("anchor_count").get<std::size_t>();
    m.alignment.rank = al.at("rank").get<std::size_t>();
    m.alignment.residual = al.at("residual").get<double>();
    m.alignment.refinement_rounds = al.at("refinement_rounds").get<int>();
    for (const auto& a : al.at("anchors")) {
      m.alignment.anchors.push_back({a.at(0).get<std::string>(), a.at(1).get<std::string>()});
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed ") + artifact::alignment + ": " + e.what());
  }

  m.similarity = read_similarity_csv(run.read(artifact::similarity, "link"));
  m.entities = joint_entities(run, res);

  const auto rows = read_assignment_csv(run.read(artifact::clusters, "cluster"));
  if (rows.size() != m.entities.size()) {
    throw InputError(std::string(artifact::clusters) + " does not match the resolved entities; rerun `cluster`");
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].entity_id != m.entities[i].id || rows[i].kind != m.entities[i].kind) {
      throw InputError(std::string(artifact::clusters) + " does not match the resolved entities; rerun `cluster`");
    }
    m.clusters.labels.push_back(rows[i].cluster);
  }
  const json prof = parse_json(run.read(artifact::cluster_profiles, "cluster"), artifact::cluster_profiles);
  try {
    m.clusters.k = prof.at("k").get<std::size_t>();
    for (const auto& p : prof.at("profiles")) {
      ClusterProfile cp;
      cp.members = p.at("members").get<std::size_t>();
      cp.technologies = p.at("technologies").get<std::size_t>();
      cp.companies = p.at("companies").get<std::size_t>();
      cp.total_rnd_meur = p.at("total_rnd_meur").get<double>();
      cp.label_candidates = p.at("label_candidates").get<std::vector<std::string>>();
      m.clusters.profiles.push_back(std::move(cp));
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed ") + artifact::cluster_profiles + ": " + e.what());
  }

  const auto layout = csv::parse(run.read(artifact::layout, "project"));
  if (layout.empty()) throw InputError(std::string(artifact::layout) + " is empty");
  csv::require_header(layout.front(), {"entity_id", "kind", "x", "y"}, artifact::layout);
  if (layout.size() - 1 != m.entities.size()) {
    throw InputError(std::string(artifact::layout) + " does not match the resolved entities; rerun `project`");
  }
  for (std::size_t i = 1; i < layout.size(); ++i) {
    const auto& f = layout[i].fields;
    const auto x = f.size() == 4 ? parse_double(f[2]) : std::nullopt;
    const auto y = f.size() == 4 ? parse_double(f[3]) : std::nullopt;
    if (!x || !y || f[0] != m.entities[i - 1].id) {
      throw InputError(std::string(artifact::layout) + " line " + std::to_string(layout[i].line) +
                       " is malformed or stale");
    }
    m.layout.points.push_back({*x, *y});
  }
  m.layout.extents = extents_of(m.layout.points);

  const json proj = parse_json(run.read(artifact::projection, "project"), artifact::projection);
  try {
    m.explained_variance = {proj.at("explained_variance").at(0).get<double>(),
                            proj.at("explained_variance").at(1).get<double>()};
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed ") + artifact::projection + ": " + e.what());
  }

  if (!c.patents.empty()) m.validation = read_validation_csv(run.read(artifact::validation, "validate"));
  m.significance_basis = c.significance_basis;
  m.top_k = c.top_k;
  return m;
}

}  // namespace

LandscapeModel load_model(const PipelineConfig& config) { return assemble_model(Reader(config)); }

}  // namespace etlinks
