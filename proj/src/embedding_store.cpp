#include "etlinks/embedding_store.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "etlinks/csv.hpp"
#include "etlinks/error.hpp"
#include "etlinks/kernels.hpp"
#include "etlinks/numfmt.hpp"

namespace etlinks {

EmbeddingStore::EmbeddingStore(std::size_t dimension, std::vector<std::string> keys,
                               std::vector<double> values, bool normalized)
    : dimension_(dimension),
      keys_(std::move(keys)),
      values_(std::move(values)),
      normalized_(normalized) {
  if (values_.size() != keys_.size() * dimension_) {
    throw DimensionError("embedding store: " + std::to_string(values_.size()) +
                         " coordinates for " + std::to_string(keys_.size()) + " keys of dimension " +
                         std::to_string(dimension_));
  }
  index_.reserve(keys_.size());
  for (std::size_t i = 0; i < keys_.size(); ++i) {
    if (!index_.emplace(keys_[i], i).second) {
      throw ParseError(ParseErrorKind::duplicate_key, i + 2, "duplicate key '" + keys_[i] + "'");
    }
  }
}

std::optional<std::span<const double>> EmbeddingStore::get_vector(const std::string& key) const {
  const auto it = index_.find(key);
  if (it == index_.end()) return std::nullopt;
  return vector_at(it->second);
}

EmbeddingStore EmbeddingStore::subset(const std::vector<std::string>& keys) const {
  std::vector<std::string> kept;
  std::vector<double> values;
  std::unordered_map<std::string, bool> seen;
  for (const auto& key : keys) {
    if (!seen.emplace(key, true).second) continue;
    const auto v = get_vector(key);
    if (!v) throw InputError("key '" + key + "' is not in the embedding store");
    kept.push_back(key);
    values.insert(values.end(), v->begin(), v->end());
  }
  return EmbeddingStore(dimension_, std::move(kept), std::move(values), normalized_);
}

namespace {

struct Header {
  std::size_t count = 0;
  std::size_t dimension = 0;
  std::size_t length = 0;  // bytes consumed including '\n'
};

Header parse_header(std::string_view bytes) {
  const auto eol = bytes.find('\n');
  std::string_view line = bytes.substr(0, eol);
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  if (!line.empty() && line.back() == ' ') line.remove_suffix(1);
  const auto space = line.find(' ');
  const auto bad = [&](const std::string& why) {
    return ParseError(ParseErrorKind::malformed_header, 1,
                      "line 1: malformed header '" + std::string(line.substr(0, 64)) + "': " + why);
  };
  if (eol == std::string_view::npos) throw bad("missing newline");
  if (space == std::string_view::npos) throw bad("expected 'N D'");
  const std::string_view n_text = line.substr(0, space);
  const std::string_view d_text = line.substr(space + 1);
  const auto digits_only = [](std::string_view s) {
    return !s.empty() && s.find_first_not_of("0123456789") == std::string_view::npos;
  };
  if (!digits_only(n_text) || !digits_only(d_text)) throw bad("expected two base-10 integers");
  const auto n = parse_int(n_text);
  const auto d = parse_int(d_text);
  if (!n || !d) throw bad("integer out of range");
  if (*d == 0) throw bad("dimension must be positive");
  return Header{static_cast<std::size_t>(*n), static_cast<std::size_t>(*d), eol + 1};
}

EmbeddingStore parse_text(std::string_view bytes) {
  const Header header = parse_header(bytes);
  std::vector<std::string> keys;
  std::vector<double> values;
  keys.reserve(header.count);
  values.reserve(header.count * header.dimension);

  std::unordered_set<std::string_view> seen;
  std::size_t pos = header.length;
  std::size_t line_no = 1;
  while (pos < bytes.size()) {
    ++line_no;
    auto eol = bytes.find('\n', pos);
    if (eol == std::string_view::npos) eol = bytes.size();
    std::string_view line = bytes.substr(pos, eol - pos);
    pos = eol + 1;
    // word2vec's own writer leaves a space before the newline; some exports use CRLF.
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty() && line.back() == ' ') line.remove_suffix(1);
    const std::string where = "line " + std::to_string(line_no);

    if (keys.size() == header.count) {
      throw ParseError(ParseErrorKind::entry_count_mismatch, line_no,
                       where + ": header declares " + std::to_string(header.count) +
                           " entries but more follow");
    }

    const auto token_end = line.find(' ');
    const std::string_view token = line.substr(0, token_end);
    if (token.empty()) {
      throw ParseError(ParseErrorKind::empty_token, line_no, where + ": empty token");
    }
    std::size_t fields = 0;
    std::size_t cursor = token_end == std::string_view::npos ? line.size() : token_end + 1;
    if (token_end == std::string_view::npos) cursor = line.size() + 1;
    while (cursor <= line.size()) {
      auto next = line.find(' ', cursor);
      if (next == std::string_view::npos) next = line.size();
      const std::string_view field = line.substr(cursor, next - cursor);
      ++fields;
      if (fields <= header.dimension) {
        const auto value = parse_double(field);
        if (!value) {
          throw ParseError(ParseErrorKind::malformed_coordinate, line_no,
                           where + ": malformed coordinate '" + std::string(field) + "'");
        }
        if (!std::isfinite(*value)) {
          throw ParseError(ParseErrorKind::non_finite_coordinate, line_no,
                           where + ": non-finite coordinate '" + std::string(field) + "'");
        }
        values.push_back(*value);
      }
      cursor = next + 1;
    }
    if (fields != header.dimension) {
      throw ParseError(ParseErrorKind::wrong_coordinate_count, line_no,
                       where + ": expected " + std::to_string(header.dimension) +
                           " coordinates, found " + std::to_string(fields));
    }
    if (!seen.insert(token).second) {
      throw ParseError(ParseErrorKind::duplicate_key, line_no,
                       where + ": duplicate key '" + std::string(token) + "'");
    }
    keys.emplace_back(token);
  }
  if (keys.size() != header.count) {
    throw ParseError(ParseErrorKind::entry_count_mismatch, line_no,
                     "header declares " + std::to_string(header.count) + " entries, found " +
                         std::to_string(keys.size()));
  }
  return EmbeddingStore(header.dimension, std::move(keys), std::move(values));
}

EmbeddingStore parse_binary(std::string_view bytes) {
  const Header header = parse_header(bytes);
  std::vector<std::string> keys;
  std::vector<double> values;
  keys.reserve(header.count);
  values.reserve(header.count * header.dimension);

  std::unordered_set<std::string_view> seen;
  std::size_t pos = header.length;
  const std::size_t payload = header.dimension * 4;
  for (std::size_t record = 0; record < header.count; ++record) {
    const std::size_t start = pos;
    const std::string at = "offset " + std::to_string(start);
    if (pos >= bytes.size()) {
      throw ParseError(ParseErrorKind::entry_count_mismatch, start,
                       at + ": header declares " + std::to_string(header.count) +
                           " entries, found " + std::to_string(record));
    }
    const auto space = bytes.find(' ', pos);
    if (space == std::string_view::npos) {
      throw ParseError(ParseErrorKind::truncated_record, start, at + ": token without separator");
    }
    const std::string_view token = bytes.substr(pos, space - pos);
    if (token.empty() || token.find('\n') != std::string_view::npos) {
      throw ParseError(ParseErrorKind::empty_token, start, at + ": empty or malformed token");
    }
    pos = space + 1;
    if (bytes.size() - pos < payload + 1) {
      throw ParseError(ParseErrorKind::truncated_record, start,
                       at + ": record for '" + std::string(token) + "' is truncated");
    }
    for (std::size_t j = 0; j < header.dimension; ++j) {
      const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + pos + 4 * j);
      const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) |
                                 (static_cast<std::uint32_t>(p[1]) << 8) |
                                 (static_cast<std::uint32_t>(p[2]) << 16) |
                                 (static_cast<std::uint32_t>(p[3]) << 24);
      const float value = std::bit_cast<float>(bits);
      if (!std::isfinite(value)) {
        throw ParseError(ParseErrorKind::non_finite_coordinate, pos + 4 * j,
                         "offset " + std::to_string(pos + 4 * j) + ": non-finite coordinate for '" +
                             std::string(token) + "'");
      }
      values.push_back(static_cast<double>(value));
    }
    pos += payload;
    if (bytes[pos] != '\n') {
      throw ParseError(ParseErrorKind::wrong_coordinate_count, pos,
                       "offset " + std::to_string(pos) + ": record for '" + std::string(token) +
                           "' not terminated after " + std::to_string(header.dimension) +
                           " coordinates");
    }
    ++pos;
    if (!seen.insert(token).second) {
      throw ParseError(ParseErrorKind::duplicate_key, start,
                       at + ": duplicate key '" + std::string(token) + "'");
    }
    keys.emplace_back(token);
  }
  if (pos != bytes.size()) {
    throw ParseError(ParseErrorKind::entry_count_mismatch, pos,
                     "offset " + std::to_string(pos) + ": data after the " +
                         std::to_string(header.count) + " declared entries");
  }
  return EmbeddingStore(header.dimension, std::move(keys), std::move(values));
}

}  // namespace

EmbeddingStore parse_embeddings(std::string_view bytes, EmbeddingFormat format) {
  return format == EmbeddingFormat::text ? parse_text(bytes) : parse_binary(bytes);
}

EmbeddingStore parse_embeddings(std::istream& source, EmbeddingFormat format) {
  const std::string bytes = csv::read_stream(source);
  return parse_embeddings(bytes, format);
}

EmbeddingStore load_embeddings(const std::filesystem::path& path, EmbeddingFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open embeddings file " + path.string());
  return parse_embeddings(in, format);
}

void write_embeddings(std::ostream& out, const EmbeddingStore& store, EmbeddingFormat format) {
  out << store.size() << ' ' << store.dimension() << '\n';
  for (std::size_t i = 0; i < store.size(); ++i) {
    out << store.keys()[i];
    const auto v = store.vector_at(i);
    if (format == EmbeddingFormat::text) {
      for (double x : v) out << ' ' << format_shortest(x);
    } else {
      out << ' ';
      for (double x : v) {
        const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(x));
        const char le[4] = {static_cast<char>(bits & 0xFF), static_cast<char>((bits >> 8) & 0xFF),
                            static_cast<char>((bits >> 16) & 0xFF),
                            static_cast<char>((bits >> 24) & 0xFF)};
        out.write(le, 4);
      }
    }
    out << '\n';
  }
}

EmbeddingStore unit_normalize(const EmbeddingStore& store) {
  std::vector<double> values;
  values.reserve(store.size() * store.dimension());
  for (std::size_t i = 0; i < store.size(); ++i) {
    const auto v = store.vector_at(i);
    const double norm = std::sqrt(kernels::dot(v, v));
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw NormalizationError(store.keys()[i],
                               "cannot normalise zero vector for key '" + store.keys()[i] + "'");
    }
    for (double x : v) values.push_back(x / norm);
  }
  return EmbeddingStore(store.dimension(), store.keys(), std::move(values), true);
}

std::optional<EmbeddingFormat> parse_format(std::string_view name) {
  if (name == "text") return EmbeddingFormat::text;
  if (name == "binary") return EmbeddingFormat::binary;
  return std::nullopt;
}

}  // namespace etlinks
