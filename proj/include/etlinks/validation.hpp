#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "etlinks/similarity.hpp"

namespace etlinks {

struct PatentTable {
  std::map<std::pair<std::string, std::string>, std::int64_t> counts;  // (company, tech_id)
  std::set<std::string> coverage;  // companies with at least one row
  std::vector<std::string> warnings;

  /// Absent pairs count as zero.
  std::int64_t count(const std::string& company, const std::string& tech_id) const;
};

/// patents.csv: `company_wiki_title,tech_id,patent_count`. Rows naming ids
/// outside the given sets are kept and reported in `warnings`.
PatentTable load_patents(std::string_view csv_text, const std::set<std::string>* known_companies = nullptr,
                         const std::set<std::string>* known_technologies = nullptr);

/// Pearson r; nullopt when either variable has zero variance.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

/// Ranks starting at 1; tied values share their mean rank.
std::vector<double> average_ranks(std::span<const double> values);

/// Pearson r of the average ranks.
std::optional<double> spearman(std::span<const double> x, std::span<const double> y);

/// Two-sided p of t = r √((n−2)/(1−r²)) on n − 2 degrees of freedom.
double correlation_p_value(double r, std::size_t n);

/// Two-sided permutation p for Pearson r: share of `shuffles` seeded
/// permutations of y with |r| at least the observed |r|, as (hits+1)/(shuffles+1).
double permutation_p_value(std::span<const double> x, std::span<const double> y,
                           std::size_t shuffles, std::uint64_t seed);

enum class CountTransform { log1p, raw };
enum class SignificanceBasis { pearson, spearman };

struct ValidationOptions {
  double alpha = 0.05;
  bool exclude_zero = false;
  CountTransform transform = CountTransform::log1p;
  SignificanceBasis basis = SignificanceBasis::pearson;
  std::size_t permutations = 0;  // 0 disables the permutation test
  std::uint64_t seed = 42;
};

struct CorrelationResult {
  std::string tech_id;
  std::size_t n = 0;
  double pearson_r = 0.0;     // NaN when degenerate
  double pearson_p = 1.0;     // NaN when degenerate
  double spearman_rho = 0.0;  // NaN when degenerate
  double spearman_p = 1.0;    // NaN when degenerate
  std::optional<double> permutation_p;
  bool significant = false;  // coefficient > 0 and one-sided p < alpha
  bool degenerate = false;   // zero variance in either variable, or n < 3 in a batch run
};

/// Correlates one technology's similarity column against patent counts over
/// the `companies` in scope (zero-count companies dropped when
/// `exclude_zero`). Counts are log1p-transformed for Pearson unless the
/// transform is raw. Throws InputError if fewer than three companies remain.
CorrelationResult correlate_technology(const std::string& tech_id, const SimilarityMatrix& matrix,
                                       const PatentTable& patents,
                                       std::span<const std::string> companies,
                                       const ValidationOptions& options);

/// Every technology of the matrix, scoped to companies in the matrix that
/// the patent table covers. Technologies with fewer than three companies in
/// scope are returned as degenerate.
std::vector<CorrelationResult> validate_all(const SimilarityMatrix& matrix,
                                            const PatentTable& patents,
                                            const ValidationOptions& options);

struct ValidationSummary {
  std::size_t significant = 0;
  std::size_t not_significant = 0;
  std::size_t degenerate = 0;
  std::vector<CorrelationResult> ranked;  // by basis coefficient, degenerate last
};

ValidationSummary validation_summary(std::span<const CorrelationResult> results,
                                     SignificanceBasis basis = SignificanceBasis::pearson);

void write_validation_csv(std::ostream& out, std::span<const CorrelationResult> results);
std::vector<CorrelationResult> read_validation_csv(std::string_view csv_text);

}  // namespace etlinks
