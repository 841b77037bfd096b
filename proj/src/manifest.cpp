#include "edoks/manifest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>

#include "edoks/errors.hpp"

namespace edoks {
namespace {

std::optional<std::size_t> column(const CsvTable& t, std::string_view name) {
  const auto it = std::find(t.header.begin(), t.header.end(), name);
  if (it == t.header.end()) return std::nullopt;
  return static_cast<std::size_t>(it - t.header.begin());
}

std::size_t require_column(const CsvTable& t, std::string_view name,
                           const std::filesystem::path& manifest) {
  if (auto c = column(t, name)) return *c;
  throw InvalidInput(manifest.string() + ": missing column '" + std::string(name) + "'");
}

std::filesystem::path resolve(const std::filesystem::path& manifest, const std::string& text) {
  const std::filesystem::path p(text);
  return p.is_absolute() ? p : manifest.parent_path() / p;
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

template <typename T>
std::optional<T> parse_number(const std::string& raw) {
  const std::string s = trim(raw);
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return value;
}

std::string row_error(const std::filesystem::path& manifest, std::size_t line, const std::string& what) {
  return manifest.string() + ":" + std::to_string(line) + ": " + what;
}

}  // namespace

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t line = 1;
  std::size_t record_line = 1;

  // UTF-8 byte order mark.
  if (in.peek() == 0xEF) {
    char bom[3] = {};
    in.read(bom, 3);
    if (in.gcount() != 3 || std::string_view(bom, 3) != "\xEF\xBB\xBF") {
      throw InvalidInput("CSV: invalid leading bytes");
    }
  }

  auto end_record = [&] {
    if (field_started || !field.empty() || !record.empty()) {
      record.push_back(field);
    }
    field.clear();
    field_started = false;
    const bool blank = record.empty() || (record.size() == 1 && trim(record[0]).empty());
    const bool comment = table.header.empty() && !record.empty() && !record[0].empty() &&
                         record[0][0] == '#';
    if (!blank && !comment) {
      if (table.header.empty()) {
        for (auto& h : record) h = trim(h);
        table.header = std::move(record);
      } else {
        table.rows.push_back(std::move(record));
        table.line_numbers.push_back(record_line);
      }
    }
    record.clear();
  };

  char ch = 0;
  while (in.get(ch)) {
    if (in_quotes) {
      if (ch == '"') {
        if (in.peek() == '"') {
          in.get(ch);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        if (ch == '\n') ++line;
        field.push_back(ch);
      }
      continue;
    }
    switch (ch) {
      case '"':
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        record.push_back(field);
        field.clear();
        field_started = true;
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        ++line;
        record_line = line;
        break;
      default:
        field.push_back(ch);
    }
  }
  if (in_quotes) throw InvalidInput("CSV: unterminated quoted field");
  end_record();
  return table;
}

CsvTable read_csv_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput(path.string() + ": cannot open manifest");
  return read_csv(in);
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::vector<PairEntry> read_pair_manifest(const std::filesystem::path& manifest) {
  const CsvTable t = read_csv_file(manifest);
  const std::size_t ref = require_column(t, "ref_path", manifest);
  const std::size_t dist = require_column(t, "dist_path", manifest);
  std::vector<PairEntry> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    PairEntry e;
    e.line = t.line_numbers[r];
    if (row.size() != t.header.size()) {
      e.error = row_error(manifest, e.line, "expected " + std::to_string(t.header.size()) +
                                                " fields, found " + std::to_string(row.size()));
      if (row.size() > ref) e.ref_text = row[ref];
      if (row.size() > dist) e.dist_text = row[dist];
    } else {
      e.ref_text = trim(row[ref]);
      e.dist_text = trim(row[dist]);
      if (e.ref_text.empty() || e.dist_text.empty()) {
        e.error = row_error(manifest, e.line, "empty path");
      } else {
        e.ref = resolve(manifest, e.ref_text);
        e.dist = resolve(manifest, e.dist_text);
      }
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<JndEntry> read_jnd_manifest(const std::filesystem::path& manifest) {
  const CsvTable t = read_csv_file(manifest);
  const std::size_t ref = require_column(t, "ref_path", manifest);
  const std::size_t dist = require_column(t, "dist_path", manifest);
  const std::size_t votes = require_column(t, "votes_same", manifest);
  const std::size_t judges = require_column(t, "judges", manifest);
  std::vector<std::size_t> extra;
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    if (c != ref && c != dist && c != votes && c != judges) extra.push_back(c);
  }

  std::vector<JndEntry> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    JndEntry e;
    e.line = t.line_numbers[r];
    if (row.size() != t.header.size()) {
      throw InvalidInput(row_error(manifest, e.line, "wrong field count"));
    }
    e.ref_text = trim(row[ref]);
    e.dist_text = trim(row[dist]);
    e.ref = resolve(manifest, e.ref_text);
    e.dist = resolve(manifest, e.dist_text);
    const auto v = parse_number<int>(row[votes]);
    const auto j = parse_number<int>(row[judges]);
    if (!v || !j || *j < 1 || *v < 0 || *v > *j) {
      throw InvalidInput(row_error(manifest, e.line, "votes_same/judges must be integers with 0 <= votes_same <= judges"));
    }
    e.votes_same = *v;
    e.judges = *j;
    for (std::size_t c : extra) {
      const auto value = parse_number<double>(row[c]);
      if (!value) {
        throw InvalidInput(row_error(manifest, e.line, "column '" + t.header[c] + "' is not numeric"));
      }
      e.external.push_back({t.header[c], *value});
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<TwoAfcEntry> read_2afc_manifest(const std::filesystem::path& manifest) {
  const CsvTable t = read_csv_file(manifest);
  const std::size_t ref = require_column(t, "ref_path", manifest);
  const std::size_t p0 = require_column(t, "p0_path", manifest);
  const std::size_t p1 = require_column(t, "p1_path", manifest);
  const std::size_t judge = require_column(t, "judge", manifest);

  struct ExternalColumns {
    std::string name;
    std::size_t p0, p1;
  };
  std::vector<ExternalColumns> extra;
  for (const auto& h : t.header) {
    if (h.size() > 3 && h.compare(h.size() - 3, 3, ":p0") == 0) {
      const std::string name = h.substr(0, h.size() - 3);
      const auto partner = column(t, name + ":p1");
      if (!partner) throw InvalidInput(manifest.string() + ": column '" + h + "' has no ':p1' partner");
      extra.push_back({name, *column(t, h), *partner});
    }
  }

  std::vector<TwoAfcEntry> out;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    TwoAfcEntry e;
    e.line = t.line_numbers[r];
    if (row.size() != t.header.size()) {
      throw InvalidInput(row_error(manifest, e.line, "wrong field count"));
    }
    e.ref_text = trim(row[ref]);
    e.p0_text = trim(row[p0]);
    e.p1_text = trim(row[p1]);
    e.ref = resolve(manifest, e.ref_text);
    e.p0 = resolve(manifest, e.p0_text);
    e.p1 = resolve(manifest, e.p1_text);
    const auto h = parse_number<double>(row[judge]);
    if (!h || !(*h >= 0.0 && *h <= 1.0)) {
      throw InvalidInput(row_error(manifest, e.line, "judge must be a fraction in [0, 1]"));
    }
    e.judge = *h;
    for (const auto& x : extra) {
      const auto a = parse_number<double>(row[x.p0]);
      const auto b = parse_number<double>(row[x.p1]);
      if (!a || !b) throw InvalidInput(row_error(manifest, e.line, "external score '" + x.name + "' is not numeric"));
      e.external.push_back({x.name, *a, *b});
    }
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace edoks
