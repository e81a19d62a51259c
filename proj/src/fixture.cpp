#include "etlinks/fixture.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "etlinks/csv.hpp"
#include "etlinks/embedding_store.hpp"
#include "etlinks/entity_registry.hpp"
#include "etlinks/error.hpp"
#include "etlinks/kernels.hpp"
#include "etlinks/matrix.hpp"
#include "etlinks/numfmt.hpp"

namespace etlinks {

namespace {

// Box-Muller over raw 53-bit uniforms so the output does not depend on the
// standard library's distribution implementations.
class Gaussian {
 public:
  explicit Gaussian(std::uint64_t seed) : rng_(seed) {}

  double uniform() { return static_cast<double>((rng_() >> 11) + 1) * 0x1.0p-53; }

  double normal() {
    if (spare_) {
      spare_ = false;
      return cached_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double theta = 2.0 * std::numbers::pi * uniform();
    cached_ = r * std::sin(theta);
    spare_ = true;
    return r * std::cos(theta);
  }

  std::int64_t poisson(double lambda) {
    if (lambda > 30.0) {
      return std::max<std::int64_t>(0, std::llround(lambda + std::sqrt(lambda) * normal()));
    }
    const double limit = std::exp(-lambda);
    std::int64_t k = 0;
    double p = uniform();
    while (p > limit) {
      ++k;
      p *= uniform();
    }
    return k;
  }

 private:
  std::mt19937_64 rng_;
  bool spare_ = false;
  double cached_ = 0.0;
};

std::vector<double> unit(std::vector<double> v) {
  const double norm = std::sqrt(kernels::dot(v, v));
  for (double& x : v) x /= norm;
  return v;
}

std::vector<double> random_unit(Gaussian& g, std::size_t d) {
  std::vector<double> v(d);
  for (double& x : v) x = g.normal();
  return unit(std::move(v));
}

std::vector<double> scatter(Gaussian& g, const std::vector<double>& centre, double spread) {
  std::vector<double> v(centre);
  const double s = spread / std::sqrt(static_cast<double>(centre.size()));
  for (double& x : v) x += s * g.normal();
  return unit(std::move(v));
}

Matrix random_orthogonal(Gaussian& g, std::size_t d) {
  Matrix q(d, d);
  for (std::size_t r = 0; r < d; ++r) {
    std::vector<double> v(d);
    for (double& x : v) x = g.normal();
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t p = 0; p < r; ++p) {
        const double proj = kernels::dot(v, q.row(p));
        for (std::size_t j = 0; j < d; ++j) v[j] -= proj * q(p, j);
      }
    }
    v = unit(std::move(v));
    std::copy(v.begin(), v.end(), q.row(r).begin());
  }
  return q;
}

std::vector<double> times(const std::vector<double>& x, const Matrix& m) {
  std::vector<double> out(m.cols(), 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) out[j] += x[i] * m(i, j);
  }
  return out;
}

const char* const kTechNames[4][5] = {
    {"5G", "Internet of things", "Unified communications", "Local positioning system", "Cloud computing"},
    {"Biocatalysis", "Whole genome sequencing", "CRISPR gene editing", "Synthetic biology", "MRNA vaccine"},
    {"Electric vehicle", "Fuel cell", "Carbon capture and storage", "Perovskite solar cell",
     "Biodegradable plastic"},
    {"Speech recognition", "Quantum computing", "Autonomous car", "Distributed acoustic sensing",
     "Small satellite"},
};
const char* const kGroupPrefix[4] = {"Telco", "Bio", "Energy", "Compute"};
const char* const kIndustry[4] = {"Telecommunications", "Pharmaceuticals & Biotechnology",
                                  "Automobiles & Energy", "Software & Computer Services"};
const char* const kCountry[4] = {"Finland", "Denmark", "Germany", "United States"};
const char* const kGreek[] = {"Alpha", "Beta", "Gamma", "Delta", "Epsilon", "Zeta", "Eta", "Theta",
                              "Iota", "Kappa", "Lambda", "Mu", "Nu", "Xi", "Omicron", "Pi"};

std::string padded(std::size_t v, std::size_t width) {
  std::string s = std::to_string(v);
  return std::string(width > s.size() ? width - s.size() : 0, '0') + s;
}

void write_text(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << body;
}

}  // namespace

FixtureInfo write_synthetic_fixture(const std::filesystem::path& dir, const FixtureOptions& options) {
  const std::size_t d = options.dimension;
  const std::size_t groups = std::min<std::size_t>(options.groups, 4);
  if (groups == 0 || options.technologies < 2 || options.companies < 3 || d < 2) {
    throw InputError("fixture needs >= 1 group, >= 2 technologies, >= 3 companies, d >= 2");
  }
  std::filesystem::create_directories(dir);
  Gaussian g(options.seed);

  std::vector<std::vector<double>> centres;
  for (std::size_t c = 0; c < groups; ++c) centres.push_back(random_unit(g, d));
  const Matrix rotation = random_orthogonal(g, d);

  FixtureInfo info;
  std::vector<std::string> keys;
  std::vector<double> values;
  const auto add = [&](const std::string& key, const std::vector<double>& v) {
    keys.push_back(key);
    values.insert(values.end(), v.begin(), v.end());
  };

  std::vector<Technology> technologies;
  std::vector<std::vector<double>> tech_vectors;
  const std::size_t id_width = std::max<std::size_t>(3, std::to_string(options.technologies).size());
  for (std::size_t i = 0; i < options.technologies; ++i) {
    const std::size_t group = i % groups;
    const std::size_t slot = i / groups;
    std::string name = slot < 5 ? kTechNames[group][slot]
                                : std::string(kTechNames[group][slot % 5]) + " " + std::to_string(slot / 5 + 1);
    const bool circular = name == "Biocatalysis" || name == "Carbon capture and storage" ||
                          name == "Biodegradable plastic" || name == "Electric vehicle" ||
                          name == "Fuel cell";
    technologies.push_back({"t" + padded(i + 1, id_width), name, name, circular ? "circular-economy" : ""});
    tech_vectors.push_back(scatter(g, centres[group], options.spread));
    info.technology_group.push_back(group);
    add(mangle_title(name), tech_vectors.back());
  }
  info.correlated_tech_id = technologies.front().tech_id;
  info.noise_tech_id = technologies.back().tech_id;

  std::vector<Company> companies;
  std::vector<std::vector<double>> company_raw;
  for (std::size_t i = 0; i < options.companies; ++i) {
    const std::size_t group = i % groups;
    const std::size_t slot = i / groups;
    std::string name = std::string(kGroupPrefix[group]) + " " + kGreek[slot % 16];
    if (slot >= 16) name += " " + std::to_string(slot / 16 + 1);
    const double spend = round_significant(std::exp(6.0 + 1.2 * g.normal()), 6);
    companies.push_back({0, name, name, spend, kCountry[group], kIndustry[group]});
    company_raw.push_back(scatter(g, centres[group], options.spread));
    info.company_group.push_back(group);
    add(mangle_title(name), times(company_raw.back(), rotation));
  }
  // Scoreboard rank by descending spend.
  {
    std::vector<std::size_t> order(companies.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return companies[a].rnd_meur > companies[b].rnd_meur; });
    for (std::size_t r = 0; r < order.size(); ++r) companies[order[r]].rank = static_cast<int>(r + 1);
  }

  std::ostringstream anchors_csv;
  anchors_csv << "company_wiki_title,technology_wiki_title\n";
  const std::size_t anchor_width = std::max<std::size_t>(2, std::to_string(options.anchors).size());
  for (std::size_t i = 0; i < options.anchors; ++i) {
    const std::string suffix = padded(i + 1, anchor_width);
    const auto a = random_unit(g, d);
    std::vector<double> noisy(a);
    for (double& x : noisy) x += 0.01 * g.normal() / std::sqrt(static_cast<double>(d));
    add(mangle_title("Anchor technology " + suffix), a);
    add(mangle_title("Anchor company " + suffix), times(unit(noisy), rotation));
    anchors_csv << "Anchor company " << suffix << ",Anchor technology " << suffix << '\n';
  }
  for (std::size_t i = 0; i < options.distractors; ++i) {
    add(mangle_title("Distractor " + padded(i + 1, 2)), random_unit(g, d));
    add("word_" + padded(i + 1, 2), random_unit(g, d));
  }

  std::ostringstream patents_csv;
  patents_csv << "company_wiki_title,tech_id,patent_count\n";
  std::vector<double> slope(technologies.size());
  for (std::size_t t = 0; t < technologies.size(); ++t) slope[t] = 3.0 * g.uniform();
  for (std::size_t c = 0; c < companies.size(); ++c) {
    for (std::size_t t = 0; t < technologies.size(); ++t) {
      const double sim = kernels::dot(company_raw[c], tech_vectors[t]);
      double lambda;
      if (technologies[t].tech_id == info.correlated_tech_id) lambda = std::exp(0.5 + 3.5 * sim);
      else if (technologies[t].tech_id == info.noise_tech_id) lambda = 4.0;
      else lambda = std::exp(0.5 + slope[t] * sim);
      const auto count = g.poisson(lambda);
      if (count > 0) patents_csv << csv::escape(companies[c].wiki_title) << ',' << technologies[t].tech_id << ',' << count << '\n';
    }
  }

  {
    std::ofstream out(dir / "embeddings.txt", std::ios::binary);
    write_embeddings(out, EmbeddingStore(d, keys, values), EmbeddingFormat::text);
  }
  {
    std::ofstream out(dir / "technologies.csv", std::ios::binary);
    write_technologies(out, technologies);
  }
  {
    std::ofstream out(dir / "companies.csv", std::ios::binary);
    write_companies(out, companies);
  }
  write_text(dir / "anchors.csv", anchors_csv.str());
  write_text(dir / "patents.csv", patents_csv.str());
  write_text(dir / "etlinks.toml",
             "# Synthetic fixture: " + std::to_string(options.technologies) + " technologies, " +
                 std::to_string(options.companies) + " companies, " + std::to_string(groups) +
                 " planted groups (seed " + std::to_string(options.seed) + ").\n"
                 "# Planted patent signal: " + info.correlated_tech_id + " correlated, " +
                 info.noise_tech_id + " noise.\n"
                 "embeddings = \"embeddings.txt\"\n"
                 "format = \"text\"\n"
                 "companies = \"companies.csv\"\n"
                 "technologies = \"technologies.csv\"\n"
                 "anchors = \"anchors.csv\"\n"
                 "patents = \"patents.csv\"\n"
                 "anchor-mode = \"supplied\"\n"
                 "clusters = " + std::to_string(groups) + "\n"
                 "top-k = 5\n"
                 "alpha = 0.05\n"
                 "seed = 42\n"
                 "out = \"out\"\n");
  return info;
}

}  // namespace etlinks
