#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace etlinks {

enum class MemberKind { page, subcategory };

struct CategoryPage {
  std::string title;
  MemberKind kind = MemberKind::page;
  int depth = 0;  // 0 = direct member of the root category

  friend bool operator==(const CategoryPage&, const CategoryPage&) = default;
};

struct HarvestOptions {
  std::string user_agent =
      "etlinks-harvest/0.1 (technology landscape mapping; sequential crawler, 1 req/s)";
  std::chrono::milliseconds min_interval{1000};
  int max_retries = 3;
  std::chrono::milliseconds backoff_base{1000};
  std::chrono::seconds timeout{30};
  std::optional<std::filesystem::path> cache_dir;
};

struct HarvestResult {
  std::vector<CategoryPage> pages;
  std::vector<std::string> warnings;
  std::size_t network_requests = 0;
  std::size_t cache_hits = 0;
};

/// Request URL for one page of category members.
std::string category_members_url(std::string_view endpoint, std::string_view category,
                                 std::string_view continue_token = {});

/// Breadth-first walk of a MediaWiki category tree through the
/// `list=categorymembers` API. Subcategories are descended while their depth
/// is below `max_depth`; each category is requested once; a title seen again
/// is dropped (first depth wins) and a revisited category is skipped with a
/// warning. Throws HarvestError after retries are exhausted or on a body that
/// is not a categorymembers response.
HarvestResult fetch_category_tree(std::string_view endpoint, std::string_view root_category,
                                  int max_depth, const HarvestOptions& options = {});

/// technologies.csv with one row per page (subcategories are not emitted).
std::string export_roster(std::span<const CategoryPage> pages);

}  // namespace etlinks
