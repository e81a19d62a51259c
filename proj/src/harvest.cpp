#include "etlinks/harvest.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "etlinks/digest.hpp"
#include "etlinks/entity_registry.hpp"
#include "etlinks/error.hpp"
#include "httplib.h"
#include "json.hpp"

namespace etlinks {

namespace {

constexpr std::string_view kCategoryPrefix = "Category:";
constexpr int kPageNamespace = 0;
constexpr int kCategoryNamespace = 14;

std::string percent_encode(std::string_view text) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char ch : text) {
    if (std::isalnum(ch) || ch == '-' || ch == '_' || ch == '.' || ch == '~') {
      out.push_back(static_cast<char>(ch));
    } else {
      out.push_back('%');
      out.push_back(kHex[ch >> 4]);
      out.push_back(kHex[ch & 0xF]);
    }
  }
  return out;
}

std::string strip_category_prefix(std::string_view title) {
  if (title.starts_with(kCategoryPrefix)) title.remove_prefix(kCategoryPrefix.size());
  return std::string(title);
}

class Fetcher {
 public:
  Fetcher(std::string_view endpoint, const HarvestOptions& options, HarvestResult& stats)
      : options_(options), stats_(stats) {
    const auto scheme = endpoint.find("://");
    if (scheme == std::string_view::npos) {
      throw HarvestError("endpoint '" + std::string(endpoint) + "' is not an http(s) URL");
    }
    const auto path = endpoint.find('/', scheme + 3);
    origin_ = std::string(endpoint.substr(0, path));
    if (path != std::string_view::npos) prefix_len_ = path;
    else prefix_len_ = endpoint.size();
  }

  std::string get(const std::string& url) {
    std::optional<std::filesystem::path> cached;
    if (options_.cache_dir) {
      cached = *options_.cache_dir / sha256_hex(url);
      std::ifstream in(*cached, std::ios::binary);
      if (in) {
        std::ostringstream body;
        body << in.rdbuf();
        ++stats_.cache_hits;
        return body.str();
      }
    }
    std::string body = fetch(url);
    if (cached) {
      std::filesystem::create_directories(*options_.cache_dir);
      const auto tmp = cached->string() + ".part";
      {
        std::ofstream out(tmp, std::ios::binary);
        out << body;
      }
      std::filesystem::rename(tmp, *cached);
    }
    return body;
  }

 private:
  std::string fetch(const std::string& url) {
    std::string target = url.substr(prefix_len_);
    if (target.empty() || target.front() != '/') target.insert(target.begin(), '/');

    httplib::Client client(origin_);
    client.set_connection_timeout(options_.timeout);
    client.set_read_timeout(options_.timeout);
    client.set_default_headers({{"User-Agent", options_.user_agent}});

    std::string last_failure;
    for (int attempt = 0;; ++attempt) {
      pace();
      ++stats_.network_requests;
      const auto response = client.Get(target);
      if (response && response->status == 200) return response->body;
      const bool retryable = !response || response->status == 429 || response->status >= 500;
      last_failure = response ? "HTTP " + std::to_string(response->status)
                              : "connection error: " + httplib::to_string(response.error());
      if (!retryable) break;
      if (attempt >= options_.max_retries) break;
      std::this_thread::sleep_for(options_.backoff_base * (1 << attempt));
    }
    throw HarvestError("request failed for " + url + " (" + last_failure + ")");
  }

  void pace() {
    const auto now = std::chrono::steady_clock::now();
    if (last_request_ && now - *last_request_ < options_.min_interval) {
      std::this_thread::sleep_for(options_.min_interval - (now - *last_request_));
    }
    last_request_ = std::chrono::steady_clock::now();
  }

  const HarvestOptions& options_;
  HarvestResult& stats_;
  std::string origin_;
  std::size_t prefix_len_ = 0;
  std::optional<std::chrono::steady_clock::time_point> last_request_;
};

struct MembersPage {
  std::vector<std::pair<int, std::string>> members;  // (namespace, title)
  std::string continue_token;
};

MembersPage parse_members(const std::string& body, const std::string& url) {
  const auto fail = [&](const std::string& why) {
    return HarvestError("malformed response from " + url + ": " + why);
  };
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw fail(e.what());
  }
  if (doc.contains("error")) throw fail("API error " + doc["error"].dump());
  const auto query = doc.find("query");
  if (query == doc.end() || !query->is_object()) throw fail("no 'query' object");
  const auto list = query->find("categorymembers");
  if (list == query->end() || !list->is_array()) throw fail("no 'categorymembers' array");

  MembersPage page;
  for (const auto& m : *list) {
    if (!m.is_object() || !m.contains("ns") || !m["ns"].is_number_integer() ||
        !m.contains("title") || !m["title"].is_string()) {
      throw fail("member without integer 'ns' and string 'title'");
    }
    page.members.emplace_back(m["ns"].get<int>(), m["title"].get<std::string>());
  }
  if (const auto cont = doc.find("continue"); cont != doc.end()) {
    const auto token = cont->find("cmcontinue");
    if (token == cont->end() || !token->is_string()) throw fail("'continue' without 'cmcontinue'");
    page.continue_token = token->get<std::string>();
  }
  return page;
}

}  // namespace

std::string category_members_url(std::string_view endpoint, std::string_view category,
                                 std::string_view continue_token) {
  std::string url(endpoint);
  url += "?action=query&list=categorymembers&cmtitle=Category:";
  url += percent_encode(strip_category_prefix(category));
  url += "&cmlimit=500&format=json";
  if (!continue_token.empty()) {
    url += "&cmcontinue=";
    url += percent_encode(continue_token);
  }
  return url;
}

HarvestResult fetch_category_tree(std::string_view endpoint, std::string_view root_category,
                                  int max_depth, const HarvestOptions& options) {
  if (max_depth < 0) throw InputError("max_depth must be non-negative");
  HarvestResult result;
  Fetcher fetcher(endpoint, options, result);

  const std::string root = strip_category_prefix(root_category);
  std::set<std::string> visited_categories{root};
  std::set<std::string> seen_titles{std::string(kCategoryPrefix) + root};
  std::deque<std::pair<std::string, int>> queue{{root, 0}};

  while (!queue.empty()) {
    const auto [category, depth] = queue.front();
    queue.pop_front();
    std::string token;
    do {
      const std::string url = category_members_url(endpoint, category, token);
      const MembersPage page = parse_members(fetcher.get(url), url);
      for (const auto& [ns, title] : page.members) {
        if (ns == kCategoryNamespace) {
          const std::string name = strip_category_prefix(title);
          if (visited_categories.contains(name)) {
            result.warnings.push_back("skipping already visited category '" + title +
                                      "' reached from '" + category + "' (cycle)");
            continue;
          }
          if (!seen_titles.insert(title).second) continue;
          result.pages.push_back({title, MemberKind::subcategory, depth});
          if (depth < max_depth) {
            visited_categories.insert(name);
            queue.emplace_back(name, depth + 1);
          }
        } else if (ns == kPageNamespace) {
          if (!seen_titles.insert(title).second) continue;
          result.pages.push_back({title, MemberKind::page, depth});
        }
      }
      token = page.continue_token;
    } while (!token.empty());
  }
  return result;
}

std::string export_roster(std::span<const CategoryPage> pages) {
  std::vector<Technology> rows;
  for (const auto& p : pages) {
    if (p.kind == MemberKind::page) rows.push_back({"", p.title, p.title, ""});
  }
  const std::size_t width = std::max<std::size_t>(3, std::to_string(rows.size()).size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::string ordinal = std::to_string(i + 1);
    rows[i].tech_id = "t" + std::string(width - ordinal.size(), '0') + ordinal;
  }
  std::ostringstream out;
  write_technologies(out, rows);
  return out.str();
}

}  // namespace etlinks
