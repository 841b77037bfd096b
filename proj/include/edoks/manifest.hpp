#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace edoks {

// Minimal RFC 4180 reader: comma separated, double-quoted fields may hold
// commas, quotes ("") and newlines. Lines starting with '#' before the header
// are skipped. Blank lines are ignored.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line of each row
};

CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::filesystem::path& path);

std::string csv_escape(std::string_view field);
/// Shortest decimal text that round-trips to the same double.
std::string format_double(double value);

// Pair manifest for `batch`: columns ref_path, dist_path (extra columns are
// ignored, so JND manifests work too). Bad rows are kept with `error` set.
struct PairEntry {
  std::size_t line = 0;
  std::string ref_text;
  std::string dist_text;
  std::filesystem::path ref;
  std::filesystem::path dist;
  std::string error;
};

struct ExternalScore {
  std::string name;
  double value = 0.0;
};

// JND manifest: ref_path, dist_path, votes_same, judges, then optional
// numeric columns holding externally computed metric scores.
struct JndEntry {
  std::size_t line = 0;
  std::string ref_text;
  std::string dist_text;
  std::filesystem::path ref;
  std::filesystem::path dist;
  int votes_same = 0;
  int judges = 0;
  std::vector<ExternalScore> external;
};

struct ExternalPairScore {
  std::string name;
  double p0 = 0.0;
  double p1 = 0.0;
};

// 2AFC manifest: ref_path, p0_path, p1_path, judge (fraction preferring p1),
// then optional "<name>:p0" / "<name>:p1" column pairs of external
// similarity scores.
struct TwoAfcEntry {
  std::size_t line = 0;
  std::string ref_text;
  std::string p0_text;
  std::string p1_text;
  std::filesystem::path ref;
  std::filesystem::path p0;
  std::filesystem::path p1;
  double judge = 0.5;
  std::vector<ExternalPairScore> external;
};

/// Relative paths resolve against the manifest's directory.
std::vector<PairEntry> read_pair_manifest(const std::filesystem::path& manifest);
/// Throw InvalidInput naming the offending line on any malformed row.
std::vector<JndEntry> read_jnd_manifest(const std::filesystem::path& manifest);
std::vector<TwoAfcEntry> read_2afc_manifest(const std::filesystem::path& manifest);

}  // namespace edoks
