#include "etlinks/validation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>

#include <boost/math/distributions/students_t.hpp>

#include "etlinks/csv.hpp"
#include "etlinks/error.hpp"
#include "etlinks/numfmt.hpp"

namespace etlinks {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t fnv1a(std::string_view text, std::uint64_t seed) {
  std::uint64_t h = 1469598103934665603ULL ^ seed;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

// Unbiased integer in [0, bound) by rejection; portable across standard
// libraries, unlike uniform_int_distribution.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t v;
  do {
    v = rng();
  } while (v >= limit);
  return v % bound;
}

double basis_coefficient(const CorrelationResult& r, SignificanceBasis basis) {
  return basis == SignificanceBasis::pearson ? r.pearson_r : r.spearman_rho;
}

}  // namespace

std::int64_t PatentTable::count(const std::string& company, const std::string& tech_id) const {
  const auto it = counts.find({company, tech_id});
  return it == counts.end() ? 0 : it->second;
}

PatentTable load_patents(std::string_view csv_text, const std::set<std::string>* known_companies,
                         const std::set<std::string>* known_technologies) {
  constexpr std::string_view table = "patents.csv";
  PatentTable out;
  const auto records = csv::parse(csv_text);
  if (records.empty()) return out;
  csv::require_header(records.front(), {"company_wiki_title", "tech_id", "patent_count"}, table);
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& r = records[i];
    const std::string where = "patents.csv line " + std::to_string(r.line);
    if (r.fields.size() != 3 || r.fields[0].empty() || r.fields[1].empty()) {
      throw TableError(TableErrorKind::malformed_row, r.line, where + ": malformed row");
    }
    const auto count = parse_int(r.fields[2]);
    if (!count) {
      throw TableError(TableErrorKind::bad_number, r.line,
                       where + ": patent_count '" + r.fields[2] + "' is not an integer");
    }
    if (*count < 0) {
      throw TableError(TableErrorKind::negative_value, r.line, where + ": negative patent_count");
    }
    const auto& company = r.fields[0];
    const auto& tech = r.fields[1];
    if (!out.counts.emplace(std::make_pair(company, tech), *count).second) {
      throw TableError(TableErrorKind::duplicate, r.line,
                       where + ": duplicate row for (" + company + ", " + tech + ")");
    }
    out.coverage.insert(company);
    if (known_companies && !known_companies->contains(company)) {
      out.warnings.push_back(where + ": unknown company '" + company + "'");
    }
    if (known_technologies && !known_technologies->contains(tech)) {
      out.warnings.push_back(where + ": unknown technology '" + tech + "'");
    }
  }
  return out;
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DimensionError("correlation of samples with different sizes");
  const std::size_t n = x.size();
  if (n < 2) return std::nullopt;
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return std::clamp(sxy / (std::sqrt(sxx) * std::sqrt(syy)), -1.0, 1.0);
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double mean_rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = mean_rank;
    i = j + 1;
  }
  return ranks;
}

std::optional<double> spearman(std::span<const double> x, std::span<const double> y) {
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

double correlation_p_value(double r, std::size_t n) {
  if (n < 3) throw InputError("significance test needs n >= 3");
  if (std::abs(r) >= 1.0) return 0.0;
  const double df = static_cast<double>(n - 2);
  const double t = std::abs(r) * std::sqrt(df / (1.0 - r * r));
  const boost::math::students_t dist(df);
  return std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, t)), 0.0, 1.0);
}

double permutation_p_value(std::span<const double> x, std::span<const double> y,
                           std::size_t shuffles, std::uint64_t seed) {
  const auto observed = pearson(x, y);
  if (!observed) return 1.0;
  const double threshold = std::abs(*observed) - 1e-12;
  std::mt19937_64 rng(seed);
  std::vector<double> shuffled(y.begin(), y.end());
  std::size_t hits = 0;
  for (std::size_t s = 0; s < shuffles; ++s) {
    for (std::size_t i = shuffled.size(); i > 1; --i) {
      std::swap(shuffled[i - 1], shuffled[bounded(rng, i)]);
    }
    const auto r = pearson(x, shuffled);
    if (r && std::abs(*r) >= threshold) ++hits;
  }
  return static_cast<double>(hits + 1) / static_cast<double>(shuffles + 1);
}

CorrelationResult correlate_technology(const std::string& tech_id, const SimilarityMatrix& matrix,
                                       const PatentTable& patents,
                                       std::span<const std::string> companies,
                                       const ValidationOptions& options) {
  const std::size_t row = matrix.row_index(tech_id);
  std::vector<double> similarity, counts;
  for (const auto& company : companies) {
    const auto c = patents.count(company, tech_id);
    if (options.exclude_zero && c == 0) continue;
    similarity.push_back(matrix.values(row, matrix.col_index(company)));
    counts.push_back(static_cast<double>(c));
  }
  CorrelationResult result;
  result.tech_id = tech_id;
  result.n = similarity.size();
  if (result.n < 3) {
    throw InputError("technology '" + tech_id + "' has " + std::to_string(result.n) +
                     " companies in scope; correlation needs at least 3");
  }

  std::vector<double> transformed = counts;
  if (options.transform == CountTransform::log1p) {
    for (double& c : transformed) c = std::log1p(c);
  }
  const auto r = pearson(similarity, transformed);
  const auto rho = spearman(similarity, counts);
  if (!r || !rho) {
    result.degenerate = true;
    result.pearson_r = result.pearson_p = result.spearman_rho = result.spearman_p = kNaN;
    return result;
  }
  result.pearson_r = *r;
  result.pearson_p = correlation_p_value(*r, result.n);
  result.spearman_rho = *rho;
  result.spearman_p = correlation_p_value(*rho, result.n);
  if (options.permutations > 0) {
    result.permutation_p =
        permutation_p_value(similarity, transformed, options.permutations, fnv1a(tech_id, options.seed));
  }
  const bool use_pearson = options.basis == SignificanceBasis::pearson;
  const double coefficient = use_pearson ? result.pearson_r : result.spearman_rho;
  const double two_sided = use_pearson ? result.pearson_p : result.spearman_p;
  result.significant = coefficient > 0.0 && two_sided / 2.0 < options.alpha;
  return result;
}

std::vector<CorrelationResult> validate_all(const SimilarityMatrix& matrix,
                                            const PatentTable& patents,
                                            const ValidationOptions& options) {
  std::vector<std::string> scope;
  for (const auto& company : matrix.cols) {
    if (patents.coverage.contains(company)) scope.push_back(company);
  }
  std::vector<CorrelationResult> results;
  for (const auto& tech : matrix.rows) {
    std::size_t in_scope = 0;
    for (const auto& company : scope) {
      if (!options.exclude_zero || patents.count(company, tech) > 0) ++in_scope;
    }
    if (in_scope < 3) {
      CorrelationResult r;
      r.tech_id = tech;
      r.n = in_scope;
      r.degenerate = true;
      r.pearson_r = r.pearson_p = r.spearman_rho = r.spearman_p = kNaN;
      results.push_back(std::move(r));
      continue;
    }
    results.push_back(correlate_technology(tech, matrix, patents, scope, options));
  }
  return results;
}

ValidationSummary validation_summary(std::span<const CorrelationResult> results,
                                     SignificanceBasis basis) {
  ValidationSummary s;
  for (const auto& r : results) {
    if (r.degenerate) ++s.degenerate;
    else if (r.significant) ++s.significant;
    else ++s.not_significant;
  }
  s.ranked.assign(results.begin(), results.end());
  std::stable_sort(s.ranked.begin(), s.ranked.end(), [&](const auto& a, const auto& b) {
    if (a.degenerate != b.degenerate) return !a.degenerate;
    if (!a.degenerate) {
      const double ca = basis_coefficient(a, basis);
      const double cb = basis_coefficient(b, basis);
      if (ca != cb) return ca > cb;
    }
    return a.tech_id < b.tech_id;
  });
  return s;
}

namespace {

std::string number_or_empty(double v) { return std::isnan(v) ? "" : format_significant(v, 9); }

}  // namespace

void write_validation_csv(std::ostream& out, std::span<const CorrelationResult> results) {
  csv::write_row(out, {"tech_id", "n", "pearson_r", "pearson_p", "spearman_rho", "spearman_p",
                       "significant", "degenerate"});
  for (const auto& r : results) {
    csv::write_row(out, {r.tech_id, std::to_string(r.n), number_or_empty(r.pearson_r),
                         number_or_empty(r.pearson_p), number_or_empty(r.spearman_rho),
                         number_or_empty(r.spearman_p), r.significant ? "true" : "false",
                         r.degenerate ? "true" : "false"});
  }
}

std::vector<CorrelationResult> read_validation_csv(std::string_view csv_text) {
  const auto records = csv::parse(csv_text);
  if (records.empty()) throw TableError(TableErrorKind::missing_column, 1, "validation.csv: empty");
  csv::require_header(records.front(),
                      {"tech_id", "n", "pearson_r", "pearson_p", "spearman_rho", "spearman_p",
                       "significant", "degenerate"},
                      "validation.csv");
  std::vector<CorrelationResult> out;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& f = records[i].fields;
    const auto bad = [&] {
      return TableError(TableErrorKind::malformed_row, records[i].line,
                        "validation.csv line " + std::to_string(records[i].line) + ": malformed row");
    };
    if (f.size() != 8) throw bad();
    CorrelationResult r;
    r.tech_id = f[0];
    const auto n = parse_int(f[1]);
    if (!n || *n < 0) throw bad();
    r.n = static_cast<std::size_t>(*n);
    double* fields[] = {&r.pearson_r, &r.pearson_p, &r.spearman_rho, &r.spearman_p};
    for (int k = 0; k < 4; ++k) {
      if (f[2 + k].empty()) {
        *fields[k] = kNaN;
      } else if (const auto v = parse_double(f[2 + k])) {
        *fields[k] = *v;
      } else {
        throw bad();
      }
    }
    r.significant = f[6] == "true";
    r.degenerate = f[7] == "true";
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace etlinks
