#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "etlinks/error.hpp"
#include "etlinks/validation.hpp"
#include "support.hpp"

using namespace etlinks;
using testing_support::Rng;

namespace {

// Plain two-pass Pearson from the textbook formula, for comparison.
double naive_pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

SimilarityMatrix one_tech(const std::vector<double>& sims) {
  SimilarityMatrix m;
  m.rows = {"t1"};
  m.values = Matrix(1, sims.size());
  for (std::size_t j = 0; j < sims.size(); ++j) {
    m.cols.push_back("c" + std::to_string(j));
    m.values(0, j) = sims[j];
  }
  return m;
}

std::string patents_csv(const std::vector<int>& counts) {
  std::string s = "company_wiki_title,tech_id,patent_count\n";
  for (std::size_t j = 0; j < counts.size(); ++j) s += "c" + std::to_string(j) + ",t1," + std::to_string(counts[j]) + "\n";
  return s;
}

}  // namespace

TEST(Statistics, ClosedForms) {
  const std::vector<double> x{1, 2, 3, 4}, y{1, 3, 2, 4};
  EXPECT_NEAR(*pearson(x, y), 0.8, 1e-12);
  const std::vector<double> a{1, 2, 3}, b{2, 4, 6};
  EXPECT_NEAR(*pearson(a, b), 1.0, 1e-12);
  EXPECT_NEAR(*spearman(a, b), 1.0, 1e-12);
  const std::vector<double> c{3, 1, 2};
  EXPECT_NEAR(*spearman(a, c), -0.5, 1e-12);
}

TEST(Statistics, AverageRanksShareTies) {
  const std::vector<double> v{10, 20, 20, 5, 20};
  EXPECT_EQ(average_ranks(v), (std::vector<double>{2, 4, 4, 1, 4}));
}

TEST(Statistics, DegenerateInputs) {
  const std::vector<double> flat{2, 2, 2}, x{1, 2, 3};
  EXPECT_FALSE(pearson(flat, x));
  EXPECT_FALSE(spearman(x, flat));
  EXPECT_THROW(pearson(x, std::vector<double>{1, 2}), DimensionError);
}

TEST(Statistics, SpearmanInvariantUnderCube) {
  Rng rng(71);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x(30), y(30), x3(30);
    for (std::size_t i = 0; i < 30; ++i) {
      x[i] = rng.uniform(0.1, 5);
      y[i] = x[i] + rng.normal();
      x3[i] = x[i] * x[i] * x[i];
    }
    EXPECT_EQ(*spearman(x, y), *spearman(x3, y));
  }
}

TEST(Statistics, PearsonAffineInvarianceAndRange) {
  Rng rng(72);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x(25), y(25), ax(25);
    for (std::size_t i = 0; i < 25; ++i) {
      x[i] = rng.normal();
      y[i] = 0.3 * x[i] + rng.normal();
      ax[i] = 7.5 * x[i] - 3.0;
    }
    const double r = *pearson(x, y);
    EXPECT_NEAR(r, *pearson(ax, y), 1e-12);
    EXPECT_NEAR(r, naive_pearson(x, y), 1e-12);
    EXPECT_LE(std::abs(r), 1.0 + 1e-12);
  }
}

TEST(Statistics, TwoSidedPValue) {
  // r = 0.8, n = 4: t = 0.8·√(2/0.36) = 1.8856; two-sided p on 2 df = 0.2.
  EXPECT_NEAR(correlation_p_value(0.8, 4), 0.2, 1e-12);
  EXPECT_EQ(correlation_p_value(1.0, 10), 0.0);
  EXPECT_NEAR(correlation_p_value(0.0, 10), 1.0, 1e-15);
  EXPECT_EQ(correlation_p_value(0.4, 30), correlation_p_value(-0.4, 30));
  EXPECT_THROW(correlation_p_value(0.5, 2), InputError);
}

TEST(Statistics, PermutationAgreesWithTTest) {
  Rng rng(73);
  for (double slope : {0.0, 0.15, 0.3, 0.5}) {
    std::vector<double> x(50), y(50);
    for (std::size_t i = 0; i < 50; ++i) {
      x[i] = rng.normal();
      y[i] = slope * x[i] + rng.normal();
    }
    const double t_p = correlation_p_value(*pearson(x, y), 50);
    const double perm_p = permutation_p_value(x, y, 10000, 9);
    EXPECT_NEAR(perm_p, t_p, 0.02) << "slope " << slope;
    EXPECT_EQ(perm_p, permutation_p_value(x, y, 10000, 9));
  }
}

TEST(Patents, LoadAndCoverage) {
  const std::set<std::string> companies{"Nokia"};
  const auto t = load_patents("company_wiki_title,tech_id,patent_count\nNokia,t005,1200\nAcme,t001,0\n", &companies);
  EXPECT_EQ(t.count("Nokia", "t005"), 1200);
  EXPECT_EQ(t.count("Nokia", "t999"), 0);
  EXPECT_EQ(t.coverage, (std::set<std::string>{"Acme", "Nokia"}));
  ASSERT_EQ(t.warnings.size(), 1u);
  EXPECT_NE(t.warnings[0].find("Acme"), std::string::npos);
  EXPECT_TRUE(load_patents("").counts.empty());
}

TEST(Patents, Errors) {
  try {
    load_patents("company_wiki_title,tech_id,patent_count\nNokia,t005,1\nNokia,t001,-3\n");
    FAIL();
  } catch (const TableError& e) {
    EXPECT_EQ(e.kind(), TableErrorKind::negative_value);
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(load_patents("company_wiki_title,tech_id,patent_count\nA,t1,x\n"), TableError);
  EXPECT_THROW(load_patents("company_wiki_title,tech_id,patent_count\nA,t1,1\nA,t1,2\n"), TableError);
  EXPECT_THROW(load_patents("company,tech,count\n"), TableError);
}

TEST(Correlate, Log1pDefaultAndSignificance) {
  const std::vector<double> sims{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
  const std::vector<int> counts{0, 1, 3, 2, 9, 20, 40, 150};
  const auto matrix = one_tech(sims);
  const auto table = load_patents(patents_csv(counts));
  const auto r = correlate_technology("t1", matrix, table, matrix.cols, {});
  std::vector<double> logged;
  for (int c : counts) logged.push_back(std::log1p(c));
  EXPECT_NEAR(r.pearson_r, naive_pearson(sims, logged), 1e-12);
  EXPECT_NEAR(r.spearman_rho, *spearman(sims, std::vector<double>(counts.begin(), counts.end())), 1e-15);
  EXPECT_EQ(r.n, 8u);
  EXPECT_TRUE(r.significant);
  EXPECT_FALSE(r.permutation_p);

  ValidationOptions raw;
  raw.transform = CountTransform::raw;
  raw.permutations = 200;
  const auto rr = correlate_technology("t1", matrix, table, matrix.cols, raw);
  EXPECT_NEAR(rr.pearson_r, naive_pearson(sims, std::vector<double>(counts.begin(), counts.end())), 1e-12);
  ASSERT_TRUE(rr.permutation_p);
}

TEST(Correlate, NegativeCorrelationNeverSignificant) {
  const auto matrix = one_tech({0.9, 0.8, 0.7, 0.6, 0.5, 0.4});
  const auto table = load_patents(patents_csv({0, 1, 2, 4, 8, 16}));
  const auto r = correlate_technology("t1", matrix, table, matrix.cols, {});
  EXPECT_LT(r.pearson_r, -0.9);
  EXPECT_FALSE(r.significant);
}

TEST(Correlate, ExcludeZeroAndDegenerate) {
  const auto matrix = one_tech({0.1, 0.2, 0.3, 0.4, 0.5});
  const auto table = load_patents(patents_csv({0, 0, 2, 3, 5}));
  ValidationOptions opts;
  opts.exclude_zero = true;
  EXPECT_EQ(correlate_technology("t1", matrix, table, matrix.cols, opts).n, 3u);
  const auto flat = load_patents(patents_csv({4, 4, 4, 4, 4}));
  const auto d = correlate_technology("t1", matrix, flat, matrix.cols, {});
  EXPECT_TRUE(d.degenerate);
  EXPECT_TRUE(std::isnan(d.pearson_r));
  EXPECT_FALSE(d.significant);
  const auto sparse = load_patents(patents_csv({0, 0, 0, 1, 5}));
  EXPECT_THROW(correlate_technology("t1", matrix, sparse, matrix.cols, opts), InputError);
}

TEST(ValidateAll, ScopeIsCoveredCompanies) {
  auto matrix = one_tech({0.1, 0.2, 0.3, 0.4, 0.5, 0.6});
  // c5 has no patent rows at all, so it is outside the sample.
  const auto table = load_patents("company_wiki_title,tech_id,patent_count\nc0,t1,0\nc1,t1,1\nc2,t1,1\nc3,t1,3\nc4,t1,0\n");
  const auto results = validate_all(matrix, table, {});
  ASSERT_EQ(results.size(), 1u);
  EXPECT_EQ(results[0].n, 5u);
  const auto none = validate_all(matrix, load_patents("company_wiki_title,tech_id,patent_count\nc0,t1,2\nc1,t1,1\n"), {});
  EXPECT_TRUE(none[0].degenerate);
  EXPECT_EQ(none[0].n, 2u);
}

TEST(Summary, CountsAndOrder) {
  std::vector<CorrelationResult> results(5);
  const double coefs[] = {0.2, 0.9, -0.1, 0.5, 0.0};
  for (int i = 0; i < 5; ++i) {
    results[i].tech_id = "t" + std::to_string(i);
    results[i].pearson_r = coefs[i];
    results[i].significant = coefs[i] > 0.3;
  }
  results[4].degenerate = true;
  results[4].pearson_r = std::nan("");
  const auto s = validation_summary(results);
  EXPECT_EQ(s.significant, 2u);
  EXPECT_EQ(s.not_significant, 2u);
  EXPECT_EQ(s.degenerate, 1u);
  std::vector<std::string> order;
  for (const auto& r : s.ranked) order.push_back(r.tech_id);
  EXPECT_EQ(order, (std::vector<std::string>{"t1", "t3", "t0", "t2", "t4"}));
  EXPECT_EQ(validation_summary({}).ranked.size(), 0u);
}

TEST(ValidationCsv, RoundTrip) {
  std::vector<CorrelationResult> results(2);
  results[0] = {"t1", 10, 0.5, 0.14, 0.45, 0.19, std::nullopt, false, false};
  results[1].tech_id = "t2";
  results[1].degenerate = true;
  results[1].pearson_r = results[1].pearson_p = results[1].spearman_rho = results[1].spearman_p = std::nan("");
  std::ostringstream out;
  write_validation_csv(out, results);
  const auto back = read_validation_csv(out.str());
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].pearson_r, 0.5);
  EXPECT_EQ(back[0].n, 10u);
  EXPECT_TRUE(back[1].degenerate);
  EXPECT_TRUE(std::isnan(back[1].spearman_p));
}
