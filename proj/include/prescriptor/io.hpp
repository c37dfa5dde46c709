// SPDX-License-Identifier: Apache-2.0

#ifndef PRESCRIPTOR_IO_HPP
#define PRESCRIPTOR_IO_HPP

#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace prescriptor
{

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

struct CsvRow
{
  int line = 0;
  std::vector<std::string> fields;

  double number(std::size_t i) const;  // ParseError with location on failure
  const std::string &text(std::size_t i) const { return fields.at(i); }
};

struct CsvTable
{
  std::vector<std::string> header;
  std::vector<CsvRow> rows;
};

/// Comma-separated, '#' comment lines and blank lines ignored. The first
/// non-comment line must equal one of `accepted_headers` exactly.
CsvTable read_csv(std::istream &in, const std::vector<std::vector<std::string>> &accepted_headers);
CsvTable read_csv(const std::filesystem::path &path,
                  const std::vector<std::vector<std::string>> &accepted_headers);

std::string read_file(const std::filesystem::path &path);
void write_file(const std::filesystem::path &path, std::string_view contents);

// ---------------------------------------------------------------------------
// Sectioned key/value text:
//
//   # comment
//   [section]
//   key = value      # trailing comments are not stripped from values
// ---------------------------------------------------------------------------

struct Diagnostic
{
  int line = 0;
  int column = 0;
  std::string message;

  std::string str() const;
};

struct TextEntry
{
  std::string key;
  std::string value;
  int line = 0;
  int key_column = 0;
  int value_column = 0;
};

struct TextSection
{
  std::string name;
  int line = 0;
  std::vector<TextEntry> entries;

  const TextEntry *find(std::string_view key) const;
};

struct SectionedText
{
  std::vector<TextSection> sections;
  std::vector<Diagnostic> diagnostics;

  const TextSection *find(std::string_view name) const;
};

/// Tolerant: syntax problems are collected as diagnostics, never thrown.
SectionedText parse_sectioned(std::string_view text);

/// Throws ParseError for the first diagnostic, if any.
SectionedText parse_sectioned_strict(std::string_view text);

std::string_view trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

}  // namespace prescriptor

#endif  // PRESCRIPTOR_IO_HPP
