#pragma once

// Command-line front end and its data plumbing: sample ingestion, the
// bundled leukemia dataset, and report emitters.

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dmnlife/ustat.hpp"

namespace dmnlife::cli {

enum class ParseErrorKind { non_numeric, non_positive, too_few };

class SampleParseError : public ustat::InvalidSample {
 public:
  SampleParseError(ParseErrorKind kind, const std::string& what)
      : ustat::InvalidSample(what), kind_(kind) {}
  ParseErrorKind kind() const noexcept { return kind_; }

 private:
  ParseErrorKind kind_;
};

// Whitespace-, newline- or comma-separated positive numbers. Lines whose
// first non-blank character is '#' are ignored. Input order is preserved.
ustat::Sample parse_sample(std::string_view text);
ustat::Sample read_sample_file(const std::string& path);  // "-" reads stdin

// One value per line, shortest round-trip formatting, preceded by a
// "# value" comment header. Re-parses to an identical Sample.
void write_sample_tsv(std::ostream& os, const ustat::Sample& s);

// Survival times in days of 40 leukemia patients, ascending.
std::span<const double> leukemia_lifetimes() noexcept;
inline constexpr double kLeukemiaPublishedDeltaCap = -0.871605;
inline constexpr double kLeukemiaPublishedZ = -3.615245;

enum class Format { text, json, tsv };
Format format_from_string(const std::string& s);

// Exit codes: 0 completed, 1 runtime failure, 2 usage or input error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

// Runs the tool on args (without the program name). The statistical
// decision never affects the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dmnlife::cli
