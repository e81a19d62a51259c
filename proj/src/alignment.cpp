#include "etlinks/alignment.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "etlinks/csv.hpp"
#include "etlinks/error.hpp"
#include "etlinks/kernels.hpp"
#include "etlinks/linalg.hpp"

namespace etlinks {

std::string_view anchor_source_name(AnchorSource source) {
  return source == AnchorSource::user_supplied ? "user_supplied" : "mutual_nn_refined";
}

OrthogonalMap identity_map(std::size_t dimension) {
  OrthogonalMap map;
  map.matrix = Matrix::identity(dimension);
  map.rank = dimension;
  return map;
}

namespace {

void require_same_shape(const Matrix& x, const Matrix& y) {
  if (x.rows() != y.rows() || x.cols() != y.cols()) {
    throw DimensionError("anchor matrices differ in shape: " + std::to_string(x.rows()) + "x" +
                         std::to_string(x.cols()) + " vs " + std::to_string(y.rows()) + "x" +
                         std::to_string(y.cols()));
  }
}

}  // namespace

OrthogonalMap fit_procrustes(const Matrix& x, const Matrix& y) {
  require_same_shape(x, y);
  if (x.rows() == 0) throw InputError("Procrustes fit needs at least one anchor pair");

  const SvdResult svd = jacobi_svd(transpose_multiply(x, y));
  OrthogonalMap map;
  map.matrix = multiply(svd.u, svd.v.transposed());
  map.anchor_count = x.rows();
  map.rank = svd.rank;
  map.residual = alignment_residual(x, y, map);
  return map;
}

Matrix apply_alignment(const Matrix& vectors, const OrthogonalMap& map) {
  if (vectors.cols() != map.matrix.rows()) {
    throw DimensionError("vectors of dimension " + std::to_string(vectors.cols()) +
                         " cannot be mapped by a " + std::to_string(map.matrix.rows()) + "x" +
                         std::to_string(map.matrix.cols()) + " matrix");
  }
  return multiply(vectors, map.matrix);
}

double alignment_residual(const Matrix& x, const Matrix& y, const OrthogonalMap& map) {
  require_same_shape(x, y);
  if (x.rows() == 0) return 0.0;
  const Matrix mapped = apply_alignment(x, map);
  double total = 0.0;
  for (std::size_t r = 0; r < x.rows(); ++r) total += kernels::squared_distance(mapped.row(r), y.row(r));
  return std::sqrt(total / static_cast<double>(x.rows()));
}

std::vector<AnchorPair> mutual_nearest_neighbors(const EntityVectors& companies,
                                                 const EntityVectors& technologies) {
  if (companies.vectors.cols() != technologies.vectors.cols()) {
    throw DimensionError("company and technology vectors differ in dimension");
  }
  const std::size_t nc = companies.size();
  const std::size_t nt = technologies.size();
  std::vector<double> company_norm(nc), tech_norm(nt);
  for (std::size_t i = 0; i < nc; ++i) {
    company_norm[i] = std::sqrt(kernels::dot(companies.vectors.row(i), companies.vectors.row(i)));
  }
  for (std::size_t j = 0; j < nt; ++j) {
    tech_norm[j] = std::sqrt(kernels::dot(technologies.vectors.row(j), technologies.vectors.row(j)));
  }

  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> best_tech(nc, kNone), best_company(nt, kNone);
  std::vector<double> best_tech_sim(nc, -2.0), best_company_sim(nt, -2.0);
  const auto better = [](double sim, const std::string& id, double best_sim,
                         const std::string* best_id) {
    return sim > best_sim || (sim == best_sim && best_id && id < *best_id);
  };

  for (std::size_t i = 0; i < nc; ++i) {
    for (std::size_t j = 0; j < nt; ++j) {
      const double denom = company_norm[i] * tech_norm[j];
      const double sim =
          denom > 0.0 ? kernels::dot(companies.vectors.row(i), technologies.vectors.row(j)) / denom
                      : 0.0;
      if (best_tech[i] == kNone ||
          better(sim, technologies.ids[j], best_tech_sim[i], &technologies.ids[best_tech[i]])) {
        best_tech[i] = j;
        best_tech_sim[i] = sim;
      }
      if (best_company[j] == kNone ||
          better(sim, companies.ids[i], best_company_sim[j], &companies.ids[best_company[j]])) {
        best_company[j] = i;
        best_company_sim[j] = sim;
      }
    }
  }

  std::vector<AnchorPair> pairs;
  for (std::size_t i = 0; i < nc; ++i) {
    const std::size_t j = best_tech[i];
    if (j != kNone && best_company[j] == i) pairs.push_back({companies.ids[i], technologies.ids[j]});
  }
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

RefinementResult refine_anchors(const EntityVectors& companies, const EntityVectors& technologies,
                                const OrthogonalMap& map, int rounds) {
  std::map<std::string, std::size_t> company_row, tech_row;
  for (std::size_t i = 0; i < companies.size(); ++i) company_row.emplace(companies.ids[i], i);
  for (std::size_t j = 0; j < technologies.size(); ++j) tech_row.emplace(technologies.ids[j], j);

  RefinementResult result;
  result.map = map;
  result.anchors.source = AnchorSource::mutual_nn_refined;

  const auto anchors_under = [&](const OrthogonalMap& current, int round) {
    EntityVectors mapped{companies.ids, apply_alignment(companies.vectors, current)};
    auto pairs = mutual_nearest_neighbors(mapped, technologies);
    if (pairs.empty()) {
      throw RefinementError(round, "mutual nearest-neighbour refinement found no anchors in round " +
                                       std::to_string(round));
    }
    return pairs;
  };

  if (rounds <= 0) {
    result.anchors.pairs = anchors_under(map, 0);
    return result;
  }

  std::set<std::vector<AnchorPair>> history;
  for (int round = 1; round <= rounds; ++round) {
    auto pairs = anchors_under(result.map, round);
    if (!history.insert(pairs).second) {
      result.converged = true;
      break;
    }
    Matrix x, y;
    for (const auto& p : pairs) {
      x.append_row(companies.vectors.row(company_row.at(p.company)));
      y.append_row(technologies.vectors.row(tech_row.at(p.technology)));
    }
    result.map = fit_procrustes(x, y);
    result.anchors.pairs = std::move(pairs);
    result.rounds_run = round;
  }
  return result;
}

std::vector<AnchorPair> load_anchor_titles(std::string_view csv_text) {
  constexpr std::string_view table = "anchors.csv";
  auto records = csv::parse(csv_text);
  if (records.empty()) throw TableError(TableErrorKind::missing_column, 1, "anchors.csv: missing header row");
  csv::require_header(records.front(), {"company_wiki_title", "technology_wiki_title"}, table);
  std::vector<AnchorPair> out;
  std::set<AnchorPair> seen;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.fields.size() != 2 || r.fields[0].empty() || r.fields[1].empty()) {
      throw TableError(TableErrorKind::malformed_row, r.line,
                       "anchors.csv line " + std::to_string(r.line) + ": expected two non-empty titles");
    }
    AnchorPair pair{r.fields[0], r.fields[1]};
    if (!seen.insert(pair).second) {
      throw TableError(TableErrorKind::duplicate, r.line,
                       "anchors.csv line " + std::to_string(r.line) + ": duplicate pair");
    }
    out.push_back(std::move(pair));
  }
  return out;
}

}  // namespace etlinks
