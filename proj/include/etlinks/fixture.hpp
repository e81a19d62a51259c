#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace etlinks {

/// Synthetic landscape with planted structure: `groups` random centres in
/// R^d, technologies and companies scattered around them, companies stored
/// in a rotated space, anchor entity pairs that pin the rotation, and patent
/// counts that follow similarity for one technology and pure noise for
/// another.
struct FixtureOptions {
  std::uint64_t seed = 42;
  std::size_t dimension = 16;
  std::size_t technologies = 20;
  std::size_t companies = 30;
  std::size_t groups = 4;
  std::size_t anchors = 24;
  std::size_t distractors = 12;
  double spread = 0.45;
};

struct FixtureInfo {
  std::string correlated_tech_id;
  std::string noise_tech_id;
  std::vector<std::size_t> technology_group;  // roster order
  std::vector<std::size_t> company_group;
};

/// Writes embeddings.txt, technologies.csv, companies.csv, anchors.csv,
/// patents.csv and etlinks.toml (paths relative to `dir`) into `dir`.
FixtureInfo write_synthetic_fixture(const std::filesystem::path& dir, const FixtureOptions& options = {});

}  // namespace etlinks
