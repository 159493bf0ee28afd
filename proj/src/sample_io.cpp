#include <fmt/format.h>
#include <fmt/ostream.h>

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

#include "dmnlife/cli.hpp"

namespace dmnlife::cli {

namespace {

constexpr std::array<double, 40> kLeukemia = {
    115,  181,  255,  418,  441,  461,  516,  739,  743,  789,  807,  865,  924,  983,
    1024, 1062, 1063, 1165, 1191, 1222, 1222, 1251, 1277, 1290, 1357, 1369, 1408, 1455,
    1478, 1549, 1578, 1578, 1599, 1603, 1605, 1696, 1735, 1799, 1815, 1852};

bool is_separator(char c) { return c == ',' || c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v'; }

}  // namespace

std::span<const double> leukemia_lifetimes() noexcept { return kLeukemia; }

ustat::Sample parse_sample(std::string_view text) {
  std::vector<double> values;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    const std::string_view line = text.substr(pos, eol - pos);
    ++line_no;
    pos = eol + 1;

    const std::size_t first = line.find_first_not_of(" \t\r\f\v");
    if (first == std::string_view::npos || line[first] == '#') continue;

    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && is_separator(line[i])) ++i;
      if (i >= line.size()) break;
      std::size_t j = i;
      while (j < line.size() && !is_separator(line[j])) ++j;
      const std::string_view token = line.substr(i, j - i);

      double v = 0.0;
      const char* begin = token.data();
      const char* end = token.data() + token.size();
      if (!token.empty() && *begin == '+') ++begin;
      const auto [ptr, ec] = std::from_chars(begin, end, v);
      if (ec != std::errc() || ptr != end || !std::isfinite(v))
        throw SampleParseError(ParseErrorKind::non_numeric,
                               fmt::format("non-numeric token '{}' at line {}, column {}", token,
                                           line_no, i + 1));
      if (!(v > 0.0))
        throw SampleParseError(ParseErrorKind::non_positive,
                               fmt::format("non-positive value {} at position {} (line {}, column {})",
                                           token, values.size() + 1, line_no, i + 1));
      values.push_back(v);
      i = j;
    }
  }
  if (values.size() < 2)
    throw SampleParseError(ParseErrorKind::too_few,
                           fmt::format("sample needs at least 2 values, got {}", values.size()));
  return ustat::Sample(std::move(values));
}

ustat::Sample read_sample_file(const std::string& path) {
  if (path == "-") {
    std::string text((std::istreambuf_iterator<char>(std::cin)), std::istreambuf_iterator<char>());
    return parse_sample(text);
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open input file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_sample(buf.str());
}

void write_sample_tsv(std::ostream& os, const ustat::Sample& s) {
  os << "# value\n";
  for (double v : s.values()) fmt::print(os, "{}\n", v);
}

Format format_from_string(const std::string& s) {
  if (s == "text") return Format::text;
  if (s == "json") return Format::json;
  if (s == "tsv") return Format::tsv;
  throw std::invalid_argument("unknown format '" + s + "' (expected text, json, tsv)");
}

}  // namespace dmnlife::cli
