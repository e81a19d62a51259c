#include "etlinks/mapgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "etlinks/numfmt.hpp"
#include "json.hpp"

namespace etlinks {

using nlohmann::json;

const std::vector<std::string>& cluster_palette() {
  static const std::vector<std::string> palette = {
      "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
      "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#393b79", "#637939"};
  return palette;
}

double bubble_radius(double rnd_meur, double max_rnd_meur, const SvgOptions& options) {
  if (!(max_rnd_meur > 0.0)) return options.min_radius;
  const double scale = (options.max_radius - options.min_radius) / std::sqrt(max_rnd_meur);
  return options.min_radius + scale * std::sqrt(std::max(0.0, rnd_meur));
}

namespace {

std::string xml_escape(std::string_view text) {
  std::string out;
  for (char ch : text) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out.push_back(ch);
    }
  }
  return out;
}

std::string fixed(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.2f", v);
  return buffer;
}

const std::string& color_for(std::size_t cluster) {
  const auto& p = cluster_palette();
  return p[cluster % p.size()];
}

}  // namespace

std::string render_svg(const LandscapeModel& model, const SvgOptions& options) {
  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << fixed(options.width)
      << "\" height=\"" << fixed(options.height) << "\" viewBox=\"0 0 " << fixed(options.width) << ' '
      << fixed(options.height) << "\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << fixed(options.width) << "\" height=\""
      << fixed(options.height) << "\" fill=\"#ffffff\"/>\n"
      << "<text x=\"" << fixed(options.margin) << "\" y=\"" << fixed(options.margin / 2)
      << "\" font-family=\"sans-serif\" font-size=\"16\">Emerging technologies and R&amp;D "
         "spending companies</text>\n";

  const auto& points = model.layout.points;
  const std::size_t n = std::min(points.size(), model.entities.size());
  const Extents e = model.layout.extents;
  const double span_x = e.max_x - e.min_x;
  const double span_y = e.max_y - e.min_y;
  const double inner_w = options.width - 2 * options.margin;
  const double inner_h = options.height - 2 * options.margin;
  double scale = 1.0;
  if (span_x > 0 && span_y > 0) scale = std::min(inner_w / span_x, inner_h / span_y);
  else if (span_x > 0) scale = inner_w / span_x;
  else if (span_y > 0) scale = inner_h / span_y;
  const double off_x = options.margin + (inner_w - span_x * scale) / 2;
  const double off_y = options.margin + (inner_h - span_y * scale) / 2;
  const auto to_canvas = [&](const Point2& p) {
    // SVG y grows downwards.
    return Point2{off_x + (p.x - e.min_x) * scale, off_y + (e.max_y - p.y) * scale};
  };
  const auto cluster_of = [&](std::size_t i) {
    return i < model.clusters.labels.size() ? model.clusters.labels[i] : 0;
  };

  double max_spend = 0.0;
  std::vector<std::size_t> company_rows;
  for (std::size_t i = 0; i < n; ++i) {
    if (model.entities[i].kind == EntityKind::company) {
      max_spend = std::max(max_spend, model.entities[i].rnd_meur);
      company_rows.push_back(i);
    }
  }
  // Larger bubbles first so smaller ones stay visible.
  std::stable_sort(company_rows.begin(), company_rows.end(), [&](std::size_t a, std::size_t b) {
    return model.entities[a].rnd_meur > model.entities[b].rnd_meur;
  });
  std::set<std::size_t> labelled(company_rows.begin(),
                                 company_rows.begin() + static_cast<std::ptrdiff_t>(std::min(
                                                            options.labelled_spenders, company_rows.size())));

  svg << "<g id=\"companies\">\n";
  for (std::size_t i : company_rows) {
    const auto& ent = model.entities[i];
    const Point2 c = to_canvas(points[i]);
    svg << "<circle class=\"company\" cx=\"" << fixed(c.x) << "\" cy=\"" << fixed(c.y) << "\" r=\""
        << fixed(bubble_radius(ent.rnd_meur, max_spend, options)) << "\" fill=\""
        << color_for(cluster_of(i)) << "\" fill-opacity=\"0.45\" stroke=\"#333333\" stroke-width=\"0.5\">"
        << "<title>" << xml_escape(ent.name) << " (" << fixed(ent.rnd_meur) << " MEUR)</title></circle>\n";
  }
  svg << "</g>\n<g id=\"technologies\">\n";
  const double m = options.marker_size;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& ent = model.entities[i];
    if (ent.kind != EntityKind::technology) continue;
    const Point2 c = to_canvas(points[i]);
    svg << "<path class=\"technology\" d=\"M " << fixed(c.x) << ' ' << fixed(c.y - m) << " L "
        << fixed(c.x + m) << ' ' << fixed(c.y) << " L " << fixed(c.x) << ' ' << fixed(c.y + m)
        << " L " << fixed(c.x - m) << ' ' << fixed(c.y) << " Z\" fill=\"" << color_for(cluster_of(i))
        << "\" stroke=\"#000000\" stroke-width=\"0.8\"><title>" << xml_escape(ent.name)
        << "</title></path>\n";
  }
  svg << "</g>\n<g id=\"labels\" font-family=\"sans-serif\">\n";
  for (std::size_t i = 0; i < n; ++i) {
    const auto& ent = model.entities[i];
    const bool tech = ent.kind == EntityKind::technology;
    if (!tech && !labelled.contains(i)) continue;
    const Point2 c = to_canvas(points[i]);
    svg << "<text x=\"" << fixed(c.x + m + 2) << "\" y=\"" << fixed(c.y + 3) << "\" font-size=\""
        << (tech ? "9" : "10") << "\"" << (tech ? " font-style=\"italic\"" : " font-weight=\"bold\"")
        << ">" << xml_escape(ent.name) << "</text>\n";
  }
  svg << "</g>\n<g id=\"legend\" font-family=\"sans-serif\" font-size=\"10\">\n";
  for (std::size_t c = 0; c < model.clusters.profiles.size(); ++c) {
    const double y = options.height - options.margin / 2 - 14.0 * static_cast<double>(model.clusters.profiles.size() - c);
    std::string label = "cluster " + std::to_string(c);
    const auto& cand = model.clusters.profiles[c].label_candidates;
    if (!cand.empty()) {
      label += ": ";
      for (std::size_t j = 0; j < cand.size(); ++j) label += (j ? ", " : "") + cand[j];
    }
    svg << "<rect x=\"" << fixed(options.width - 360) << "\" y=\"" << fixed(y - 8) << "\" width=\"10\" height=\"10\" fill=\""
        << color_for(c) << "\"/><text x=\"" << fixed(options.width - 345) << "\" y=\"" << fixed(y)
        << "\">" << xml_escape(label) << "</text>\n";
  }
  svg << "</g>\n</svg>\n";
  return svg.str();
}

namespace {

json real(double v) {
  if (!std::isfinite(v)) return nullptr;
  return round_significant(v, 9);
}

json neighbors_json(const NeighborList& list) {
  json arr = json::array();
  for (const auto& nb : list.neighbors) arr.push_back({{"id", nb.id}, {"similarity", real(nb.similarity)}});
  return arr;
}

json correlation_json(const CorrelationResult& r) {
  json j = {{"tech_id", r.tech_id},
            {"n", r.n},
            {"pearson_r", real(r.pearson_r)},
            {"pearson_p", real(r.pearson_p)},
            {"spearman_rho", real(r.spearman_rho)},
            {"spearman_p", real(r.spearman_p)},
            {"significant", r.significant},
            {"degenerate", r.degenerate}};
  j["permutation_p"] = r.permutation_p ? real(*r.permutation_p) : json(nullptr);
  return j;
}

}  // namespace

std::string canonical_json(const std::string& json_text) {
  return json::parse(json_text).dump(2, ' ', false, json::error_handler_t::replace) + "\n";
}

std::string export_model_json(const LandscapeModel& model) {
  std::map<std::string, std::size_t> row_of;
  for (std::size_t i = 0; i < model.entities.size(); ++i) {
    row_of[std::string(kind_name(model.entities[i].kind)) + "/" + model.entities[i].id] = i;
  }
  const auto placement = [&](EntityKind kind, const std::string& id, json& obj) {
    const auto it = row_of.find(std::string(kind_name(kind)) + "/" + id);
    if (it == row_of.end() || it->second >= model.layout.points.size()) {
      obj["cluster"] = nullptr;
      obj["x"] = nullptr;
      obj["y"] = nullptr;
      return;
    }
    const std::size_t i = it->second;
    obj["cluster"] = i < model.clusters.labels.size() ? json(model.clusters.labels[i]) : json(nullptr);
    obj["x"] = real(model.layout.points[i].x);
    obj["y"] = real(model.layout.points[i].y);
  };

  json technologies = json::array();
  for (const auto& t : model.technologies) {
    json obj = {{"id", t.tech_id}, {"name", t.name}, {"wiki_title", t.wiki_title}, {"theme", t.theme}};
    const auto key = model.technology_keys.find(t.tech_id);
    obj["resolved"] = key != model.technology_keys.end();
    obj["key"] = obj["resolved"] ? json(key->second) : json(nullptr);
    placement(EntityKind::technology, t.tech_id, obj);
    obj["top_companies"] = obj["resolved"] ? neighbors_json(top_k(model.similarity, t.tech_id,
                                                                  Direction::tech_to_companies, model.top_k))
                                           : json::array();
    technologies.push_back(std::move(obj));
  }

  json companies = json::array();
  for (const auto& c : model.companies) {
    json obj = {{"id", c.wiki_title}, {"name", c.name},       {"rank", c.rank},
                {"rnd_meur", real(c.rnd_meur)}, {"country", c.country}, {"industry", c.industry}};
    const auto key = model.company_keys.find(c.wiki_title);
    obj["resolved"] = key != model.company_keys.end();
    obj["key"] = obj["resolved"] ? json(key->second) : json(nullptr);
    placement(EntityKind::company, c.wiki_title, obj);
    obj["top_technologies"] = obj["resolved"] ? neighbors_json(top_k(model.similarity, c.wiki_title,
                                                                     Direction::company_to_techs, model.top_k))
                                              : json::array();
    companies.push_back(std::move(obj));
  }

  const auto unresolved_json = [](const std::vector<UnresolvedEntity>& list) {
    json arr = json::array();
    for (const auto& u : list) arr.push_back({{"id", u.id}, {"reason", u.reason}});
    return arr;
  };

  json anchors = json::array();
  for (const auto& a : model.alignment.anchors) anchors.push_back({a.company, a.technology});

  json values = json::array();
  for (std::size_t i = 0; i < model.similarity.values.rows(); ++i) {
    json row = json::array();
    for (double v : model.similarity.values.row(i)) row.push_back(real(v));
    values.push_back(std::move(row));
  }

  json profiles = json::array();
  for (std::size_t c = 0; c < model.clusters.profiles.size(); ++c) {
    const auto& p = model.clusters.profiles[c];
    profiles.push_back({{"index", c},
                        {"members", p.members},
                        {"technologies", p.technologies},
                        {"companies", p.companies},
                        {"total_rnd_meur", real(p.total_rnd_meur)},
                        {"label_candidates", p.label_candidates}});
  }

  json validation = nullptr;
  if (model.validation) {
    const auto summary = validation_summary(*model.validation, model.significance_basis);
    json results = json::array();
    for (const auto& r : *model.validation) results.push_back(correlation_json(r));
    validation = {{"results", results},
                  {"summary",
                   {{"significant", summary.significant},
                    {"not_significant", summary.not_significant},
                    {"degenerate", summary.degenerate}}}};
  }

  json doc = {
      {"format", "etlinks-model/1"},
      {"metadata",
       {{"embedding_sha256", model.embedding_digest},
        {"dimension", model.dimension},
        {"decisions", model.decisions},
        {"aligned_vectors", {{"file", model.aligned_vectors_file}, {"sha256", model.aligned_vectors_digest}}}}},
      {"technologies", technologies},
      {"companies", companies},
      {"unresolved",
       {{"technologies", unresolved_json(model.unresolved_technologies)},
        {"companies", unresolved_json(model.unresolved_companies)}}},
      {"alignment",
       {{"anchor_mode", model.alignment.anchor_mode},
        {"anchor_count", model.alignment.anchor_count},
        {"rank", model.alignment.rank},
        {"residual", real(model.alignment.residual)},
        {"refinement_rounds", model.alignment.refinement_rounds},
        {"anchors", anchors}}},
      {"similarity", {{"rows", model.similarity.rows}, {"cols", model.similarity.cols}, {"values", values}}},
      {"clusters", {{"k", model.clusters.k}, {"profiles", profiles}}},
      {"projection",
       {{"method", "pca"},
        {"explained_variance", {real(model.explained_variance[0]), real(model.explained_variance[1])}}}},
      {"validation", validation},
  };
  return doc.dump(2, ' ', false, json::error_handler_t::replace) + "\n";
}

namespace {

std::string md_cell(std::string_view text) {
  std::string out;
  for (char ch : text) {
    if (ch == '|') out += "\\|";
    else if (ch == '\n') out += ' ';
    else out.push_back(ch);
  }
  return out;
}

std::string sim(double v) { return std::isnan(v) ? "n/a" : format_significant(v, 9); }

}  // namespace

std::string report_markdown(const LandscapeModel& model) {
  std::map<std::string, const Technology*> tech_by_id;
  for (const auto& t : model.technologies) tech_by_id[t.tech_id] = &t;
  std::map<std::string, const Company*> company_by_id;
  for (const auto& c : model.companies) company_by_id[c.wiki_title] = &c;
  const auto tech_name = [&](const std::string& id) {
    const auto it = tech_by_id.find(id);
    return it == tech_by_id.end() ? id : it->second->name;
  };
  const auto company_name = [&](const std::string& id) {
    const auto it = company_by_id.find(id);
    return it == company_by_id.end() ? id : it->second->name;
  };

  std::ostringstream md;
  md << "# Technology and R&D company landscape report\n\n";

  md << "## Decisions in force\n\n| Setting | Value |\n|---|---|\n";
  for (const auto& [k, v] : model.decisions) md << "| " << md_cell(k) << " | " << md_cell(v) << " |\n";
  md << "| embedding_sha256 | " << model.embedding_digest << " |\n";
  md << "| dimension | " << model.dimension << " |\n\n";

  md << "## Resolution\n\n";
  md << "- Technologies: " << model.technology_keys.size() << " of " << model.technologies.size()
     << " resolved\n";
  md << "- Companies: " << model.company_keys.size() << " of " << model.companies.size() << " resolved\n\n";
  if (model.unresolved_technologies.empty() && model.unresolved_companies.empty()) {
    md << "All roster entries resolved.\n\n";
  } else {
    md << "| Kind | Id | Name | Reason |\n|---|---|---|---|\n";
    for (const auto& u : model.unresolved_technologies) {
      md << "| technology | " << md_cell(u.id) << " | " << md_cell(tech_name(u.id)) << " | " << u.reason << " |\n";
    }
    for (const auto& u : model.unresolved_companies) {
      md << "| company | " << md_cell(u.id) << " | " << md_cell(company_name(u.id)) << " | " << u.reason << " |\n";
    }
    md << '\n';
  }

  md << "## Alignment\n\n";
  md << "- Anchor mode: " << model.alignment.anchor_mode << "\n";
  md << "- Anchors: " << model.alignment.anchor_count << "\n";
  md << "- Rank of cross-covariance: " << model.alignment.rank << " of " << model.dimension << "\n";
  md << "- RMS anchor residual: " << format_significant(model.alignment.residual, 9) << "\n";
  if (model.alignment.anchor_mode == "mutual-nn") {
    md << "- Refinement rounds run: " << model.alignment.refinement_rounds << "\n";
  }
  md << '\n';

  md << "## Cluster profiles\n\n";
  md << "k = " << model.clusters.k << " (average linkage, cosine distance, full dimension).\n\n";
  md << "| Cluster | Members | Technologies | Companies | Total R&D (MEUR) | Label candidates |\n"
     << "|---|---|---|---|---|---|\n";
  for (std::size_t c = 0; c < model.clusters.profiles.size(); ++c) {
    const auto& p = model.clusters.profiles[c];
    std::string labels;
    for (std::size_t j = 0; j < p.label_candidates.size(); ++j) labels += (j ? "; " : "") + p.label_candidates[j];
    md << "| " << c << " | " << p.members << " | " << p.technologies << " | " << p.companies << " | "
       << format_significant(p.total_rnd_meur, 9) << " | " << md_cell(labels) << " |\n";
  }
  md << '\n';

  md << "## Closest technologies per company (top " << model.top_k << ")\n\n";
  md << "| Company | Company id | Rank | Technology | tech_id | Similarity |\n|---|---|---|---|---|---|\n";
  for (const auto& company_id : model.similarity.cols) {
    const auto list = top_k(model.similarity, company_id, Direction::company_to_techs, model.top_k);
    for (std::size_t r = 0; r < list.neighbors.size(); ++r) {
      md << "| " << md_cell(company_name(company_id)) << " | " << md_cell(company_id) << " | " << r + 1
         << " | " << md_cell(tech_name(list.neighbors[r].id)) << " | " << md_cell(list.neighbors[r].id)
         << " | " << sim(list.neighbors[r].similarity) << " |\n";
    }
  }
  md << '\n';

  md << "## Closest companies per technology (top " << model.top_k << ")\n\n";
  md << "| Technology | tech_id | Rank | Company | Company id | Similarity |\n|---|---|---|---|---|---|\n";
  for (const auto& tech_id : model.similarity.rows) {
    const auto list = top_k(model.similarity, tech_id, Direction::tech_to_companies, model.top_k);
    for (std::size_t r = 0; r < list.neighbors.size(); ++r) {
      md << "| " << md_cell(tech_name(tech_id)) << " | " << md_cell(tech_id) << " | " << r + 1 << " | "
         << md_cell(company_name(list.neighbors[r].id)) << " | " << md_cell(list.neighbors[r].id) << " | "
         << sim(list.neighbors[r].similarity) << " |\n";
    }
  }
  md << '\n';

  md << "## Themed technologies matched to their closest company\n\n";
  std::map<std::string, std::vector<std::string>> by_theme;
  for (const auto& tech_id : model.similarity.rows) {
    const auto it = tech_by_id.find(tech_id);
    if (it != tech_by_id.end() && !it->second->theme.empty()) by_theme[it->second->theme].push_back(tech_id);
  }
  if (by_theme.empty()) {
    md << "No themed technologies.\n\n";
  } else {
    for (const auto& [theme, ids] : by_theme) {
      md << "### " << md_cell(theme) << "\n\n| Technology | tech_id | Closest company | Company id | Similarity |\n"
         << "|---|---|---|---|---|\n";
      for (const auto& id : ids) {
        const auto best = top_k(model.similarity, id, Direction::tech_to_companies, 1);
        const auto& nb = best.neighbors.front();
        md << "| " << md_cell(tech_name(id)) << " | " << md_cell(id) << " | " << md_cell(company_name(nb.id))
           << " | " << md_cell(nb.id) << " | " << sim(nb.similarity) << " |\n";
      }
      md << '\n';
    }
  }

  md << "## Patent validation\n\n";
  if (!model.validation) {
    md << "No patent data supplied.\n";
  } else {
    const auto summary = validation_summary(*model.validation, model.significance_basis);
    md << "- Significant positive correlation: " << summary.significant << "\n";
    md << "- Not significant: " << summary.not_significant << "\n";
    md << "- Degenerate (too few companies or zero variance): " << summary.degenerate << "\n\n";
    md << "| Technology | tech_id | n | Pearson r | Pearson p | Spearman rho | Spearman p | Significant |\n"
       << "|---|---|---|---|---|---|---|---|\n";
    for (const auto& r : summary.ranked) {
      md << "| " << md_cell(tech_name(r.tech_id)) << " | " << md_cell(r.tech_id) << " | " << r.n << " | "
         << sim(r.pearson_r) << " | " << sim(r.pearson_p) << " | " << sim(r.spearman_rho) << " | "
         << sim(r.spearman_p) << " | " << (r.degenerate ? "degenerate" : r.significant ? "yes" : "no")
         << " |\n";
    }
  }
  return md.str();
}

}  // namespace etlinks
