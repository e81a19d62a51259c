#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace etlinks::csv {

struct Record {
  std::size_t line = 0;  // 1-based line where the record starts
  std::vector<std::string> fields;
};

/// RFC-4180 parse. Accepts LF or CRLF, strips a UTF-8 BOM, skips blank lines.
/// Throws TableError(malformed_row) on an unterminated or misplaced quote.
std::vector<Record> parse(std::string_view text);

std::string escape(std::string_view field);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

/// Checks that `header` equals `expected` exactly; names the first mismatch.
void require_header(const Record& header, const std::vector<std::string>& expected,
                    std::string_view table_name);

std::string read_stream(std::istream& in);
std::string read_file(const std::filesystem::path& path);

}  // namespace etlinks::csv
