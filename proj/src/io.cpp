// SPDX-License-Identifier: Apache-2.0

#include "prescriptor/io.hpp"

#include "prescriptor/error.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <fstream>
#include <sstream>

namespace prescriptor
{

std::string_view trim(std::string_view s)
{
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string> split(std::string_view s, char sep)
{
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true)
  {
    const auto pos = s.find(sep, start);
    out.emplace_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos)
      break;
    start = pos + 1;
  }
  return out;
}

double CsvRow::number(std::size_t i) const
{
  const std::string &s = fields.at(i);
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size())
    throw ParseError("not a number: '" + s + "'", line, static_cast<int>(i) + 1);
  return v;
}

CsvTable read_csv(std::istream &in, const std::vector<std::vector<std::string>> &accepted_headers)
{
  CsvTable table;
  std::string raw;
  int line = 0;
  bool have_header = false;
  while (std::getline(in, raw))
  {
    ++line;
    const std::string_view sv = trim(raw);
    if (sv.empty() || sv.front() == '#')
      continue;
    auto fields = split(sv, ',');
    if (!have_header)
    {
      bool ok = false;
      for (const auto &h : accepted_headers)
        ok = ok || h == fields;
      if (!ok)
      {
        std::string expected;
        for (std::size_t i = 0; i < accepted_headers.front().size(); ++i)
          expected += (i ? "," : "") + accepted_headers.front()[i];
        throw ParseError("unexpected CSV header '" + std::string(sv) + "', expected '" +
                             expected + "'",
                         line, 1);
      }
      table.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size())
      throw ParseError("expected " + std::to_string(table.header.size()) + " fields, found " +
                           std::to_string(fields.size()),
                       line, 1);
    table.rows.push_back({line, std::move(fields)});
  }
  if (!have_header)
    throw ParseError("empty CSV input");
  return table;
}

CsvTable read_csv(const std::filesystem::path &path,
                  const std::vector<std::vector<std::string>> &accepted_headers)
{
  std::ifstream in(path);
  if (!in)
    throw DomainError("cannot open " + path.string());
  try
  {
    return read_csv(in, accepted_headers);
  }
  catch (const ParseError &e)
  {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::string read_file(const std::filesystem::path &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw DomainError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path &path, std::string_view contents)
{
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw DomainError("cannot write " + path.string());
  out << contents;
}

std::string Diagnostic::str() const
{
  return std::to_string(line) + ":" + std::to_string(column) + ": " + message;
}

const TextEntry *TextSection::find(std::string_view key) const
{
  for (const auto &e : entries)
    if (e.key == key)
      return &e;
  return nullptr;
}

const TextSection *SectionedText::find(std::string_view name) const
{
  for (const auto &s : sections)
    if (s.name == name)
      return &s;
  return nullptr;
}

SectionedText parse_sectioned(std::string_view text)
{
  SectionedText out;
  int line = 0;
  std::size_t pos = 0;
  while (pos <= text.size())
  {
    const auto nl = text.find('\n', pos);
    const std::string_view raw =
        text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    ++line;
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;

    std::string_view sv = trim(raw);
    if (sv.empty() || sv.front() == '#')
      continue;
    if (const auto hash = sv.find_first_of('#'); hash != std::string_view::npos && hash > 0 &&
                                                 (sv[hash - 1] == ' ' || sv[hash - 1] == '\t'))
      sv = trim(sv.substr(0, hash));
    const int indent = static_cast<int>(raw.find_first_not_of(" \t")) + 1;
    if (sv.front() == '[')
    {
      if (sv.back() != ']' || sv.size() < 3)
      {
        out.diagnostics.push_back({line, indent, "malformed section header"});
        continue;
      }
      out.sections.push_back({std::string(trim(sv.substr(1, sv.size() - 2))), line, {}});
      continue;
    }
    const auto eq = sv.find('=');
    if (eq == std::string_view::npos)
    {
      out.diagnostics.push_back({line, indent, "expected 'key = value'"});
      continue;
    }
    if (out.sections.empty())
    {
      out.diagnostics.push_back({line, indent, "entry outside of any [section]"});
      continue;
    }
    const std::string_view key = trim(sv.substr(0, eq));
    const std::string_view value = trim(sv.substr(eq + 1));
    if (key.empty())
    {
      out.diagnostics.push_back({line, indent, "empty key"});
      continue;
    }
    const auto value_offset = raw.find(value.empty() ? "=" : value, raw.find('='));
    out.sections.back().entries.push_back({std::string(key), std::string(value), line, indent,
                                           static_cast<int>(value_offset) + 1});
  }
  return out;
}

SectionedText parse_sectioned_strict(std::string_view text)
{
  SectionedText st = parse_sectioned(text);
  if (!st.diagnostics.empty())
  {
    const auto &d = st.diagnostics.front();
    throw ParseError(d.message, d.line, d.column);
  }
  return st;
}

std::string sha256_hex(std::string_view data)
{
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 digest failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i)
  {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xf];
  }
  return out;
}

}  // namespace prescriptor
