#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace etlinks {

enum class EmbeddingFormat { text, binary };

/// Immutable map from exact entity key to a d-dimensional vector.
///
/// Coordinates are held as doubles whatever the file precision. Keys are
/// opaque, case-sensitive strings; name mangling belongs to the registry.
class EmbeddingStore {
 public:
  EmbeddingStore() = default;

  /// Throws DimensionError if `values.size() != keys.size() * dimension` and
  /// ParseError(duplicate_key) on a repeated key.
  EmbeddingStore(std::size_t dimension, std::vector<std::string> keys, std::vector<double> values,
                 bool normalized = false);

  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t size() const noexcept { return keys_.size(); }
  bool normalized() const noexcept { return normalized_; }

  /// Keys in insertion (file) order.
  const std::vector<std::string>& keys() const noexcept { return keys_; }

  std::span<const double> vector_at(std::size_t index) const {
    return {values_.data() + index * dimension_, dimension_};
  }

  /// Exact lookup; nullopt when absent.
  std::optional<std::span<const double>> get_vector(const std::string& key) const;
  bool contains(const std::string& key) const { return index_.contains(key); }

  /// Store holding only `keys` (first occurrence wins, order preserved).
  /// Throws InputError naming the first absent key.
  EmbeddingStore subset(const std::vector<std::string>& keys) const;

 private:
  std::size_t dimension_ = 0;
  std::vector<std::string> keys_;
  std::vector<double> values_;
  std::unordered_map<std::string, std::size_t> index_;
  bool normalized_ = false;
};

/// Parses the `N D` header format described in the README (text or binary
/// records). Only a trailing newline is tolerated after the last record.
EmbeddingStore parse_embeddings(std::string_view bytes, EmbeddingFormat format);
EmbeddingStore parse_embeddings(std::istream& source, EmbeddingFormat format);
EmbeddingStore load_embeddings(const std::filesystem::path& path, EmbeddingFormat format);

/// Text output uses 17 significant digits so doubles survive a round trip;
/// binary output narrows to IEEE-754 binary32.
void write_embeddings(std::ostream& out, const EmbeddingStore& store, EmbeddingFormat format);

/// Copy with every vector scaled to unit Euclidean norm. Throws
/// NormalizationError naming the first zero (or non-finite norm) vector.
EmbeddingStore unit_normalize(const EmbeddingStore& store);

std::optional<EmbeddingFormat> parse_format(std::string_view name);

}  // namespace etlinks
