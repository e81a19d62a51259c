#include "etlinks/csv.hpp"

#include <fstream>
#include <iterator>
#include <ostream>
#include <sstream>

#include "etlinks/error.hpp"

namespace etlinks::csv {

std::vector<Record> parse(std::string_view text) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);

  std::vector<Record> records;
  Record current;
  std::string field;
  std::size_t line = 1;
  std::size_t i = 0;
  bool in_record = false;
  bool field_quoted = false;

  auto end_field = [&] {
    current.fields.push_back(std::move(field));
    field.clear();
    field_quoted = false;
  };
  auto end_record = [&] {
    end_field();
    const bool blank = current.fields.size() == 1 && current.fields[0].empty();
    if (!blank) records.push_back(std::move(current));
    current = Record{};
    in_record = false;
  };

  while (i < text.size()) {
    const char ch = text[i];
    if (!in_record) {
      current.line = line;
      in_record = true;
    }
    if (ch == '"') {
      if (!field.empty() || field_quoted) {
        throw TableError(TableErrorKind::malformed_row, line, "line " + std::to_string(line) +
                                                                  ": unexpected quote inside field");
      }
      field_quoted = true;
      const std::size_t start_line = line;
      ++i;
      for (;;) {
        if (i >= text.size()) {
          throw TableError(TableErrorKind::malformed_row, start_line,
                           "line " + std::to_string(start_line) + ": unterminated quoted field");
        }
        if (text[i] == '"') {
          if (i + 1 < text.size() && text[i + 1] == '"') {
            field.push_back('"');
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        if (text[i] == '\n') ++line;
        field.push_back(text[i++]);
      }
      if (i < text.size() && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
        throw TableError(TableErrorKind::malformed_row, line,
                         "line " + std::to_string(line) + ": text after closing quote");
      }
      continue;
    }
    if (ch == ',') {
      end_field();
      ++i;
    } else if (ch == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
      end_record();
      i += 2;
      ++line;
    } else if (ch == '\n') {
      end_record();
      ++i;
      ++line;
    } else {
      if (field_quoted) {
        throw TableError(TableErrorKind::malformed_row, line,
                         "line " + std::to_string(line) + ": text after closing quote");
      }
      field.push_back(ch);
      ++i;
    }
  }
  if (in_record) end_record();
  return records;
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << escape(fields[i]);
  }
  out << '\n';
}

void require_header(const Record& header, const std::vector<std::string>& expected,
                    std::string_view table_name) {
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (i >= header.fields.size() || header.fields[i] != expected[i]) {
      const std::string found = i < header.fields.size() ? "'" + header.fields[i] + "'" : "nothing";
      throw TableError(TableErrorKind::missing_column, header.line,
                       std::string(table_name) + " line " + std::to_string(header.line) +
                           ": expected column '" + expected[i] + "' at position " +
                           std::to_string(i + 1) + ", found " + found);
    }
  }
  if (header.fields.size() != expected.size()) {
    throw TableError(TableErrorKind::missing_column, header.line,
                     std::string(table_name) + " line " + std::to_string(header.line) +
                         ": unexpected extra column '" + header.fields[expected.size()] + "'");
  }
}

std::string read_stream(std::istream& in) {
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace etlinks::csv
