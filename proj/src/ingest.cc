#include "aspectmine/ingest.h"

#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <utility>

#include "aspectmine/errors.h"
#include "json.hpp"

namespace aspectmine {
namespace {

bool IsSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' ||
         c == '\f';
}

constexpr std::array<std::string_view, 4> kFields = {
    "query", "product_type", "impressions", "clicks"};

// Parses a nonnegative base-10 integer, whole field, no sign.
std::optional<std::int64_t> ParseCount(std::string_view s) {
  while (!s.empty() && IsSpace(s.front())) s.remove_prefix(1);
  while (!s.empty() && IsSpace(s.back())) s.remove_suffix(1);
  if (s.empty()) return std::nullopt;
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || value < 0) {
    return std::nullopt;
  }
  return value;
}

// Reads one RFC 4180 record. Returns false at end of input. `line` is
// advanced by the number of physical lines consumed.
bool ReadCsvRecord(std::istream& in, std::vector<std::string>& fields,
                   std::size_t& line, bool& unterminated) {
  fields.clear();
  unterminated = false;
  if (in.peek() == std::char_traits<char>::eof()) return false;
  std::string field;
  bool quoted = false;
  bool at_field_start = true;
  ++line;
  for (;;) {
    int ch = in.get();
    if (ch == std::char_traits<char>::eof()) {
      if (quoted) unterminated = true;
      fields.push_back(std::move(field));
      return true;
    }
    char c = static_cast<char>(ch);
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get();
          field.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && at_field_start) {
      quoted = true;
      at_field_start = false;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      at_field_start = true;
    } else if (c == '\n') {
      if (!field.empty() && field.back() == '\r') field.pop_back();
      fields.push_back(std::move(field));
      return true;
    } else {
      field.push_back(c);
      at_field_start = false;
    }
  }
}

class RowSink {
 public:
  RowSink(const EventFilter& filter, const LoadOptions& options)
      : filter_(filter), options_(options) {}

  void Malformed(std::size_t row, std::string reason) {
    if (options_.strict) throw ValidationError(row, reason);
    result_.report.malformed.push_back({row, std::move(reason)});
  }

  void Accept(std::size_t row, std::string_view query,
              std::string product_type, std::int64_t impressions,
              std::int64_t clicks) {
    ++result_.report.rows_read;
    if (clicks > impressions) {
      Malformed(row, "clicks (" + std::to_string(clicks) +
                         ") exceed impressions (" +
                         std::to_string(impressions) + ")");
      return;
    }
    if (product_type.empty()) {
      Malformed(row, "empty product_type");
      return;
    }
    std::string normalized = NormalizeQuery(query);
    if (!filter_.Matches(normalized)) return;
    ++result_.report.rows_matched;
    result_.rows.push_back(
        {std::move(normalized), std::move(product_type), impressions, clicks});
  }

  void CountRead() { ++result_.report.rows_read; }

  LoadResult Take() { return std::move(result_); }

 private:
  const EventFilter& filter_;
  const LoadOptions& options_;
  LoadResult result_;
};

void LoadCsv(std::istream& in, RowSink& sink) {
  std::vector<std::string> fields;
  std::size_t line = 0;
  bool unterminated = false;
  if (!ReadCsvRecord(in, fields, line, unterminated)) return;
  std::array<int, 4> column{-1, -1, -1, -1};
  for (std::size_t i = 0; i < fields.size(); ++i) {
    std::string name = NormalizeQuery(fields[i]);
    for (std::size_t f = 0; f < kFields.size(); ++f) {
      if (name == kFields[f]) column[f] = static_cast<int>(i);
    }
  }
  for (std::size_t f = 0; f < kFields.size(); ++f) {
    if (column[f] < 0) {
      throw DataError("CSV header is missing column '" +
                      std::string(kFields[f]) + "'");
    }
  }
  std::size_t width = fields.size();
  while (true) {
    std::size_t start = line + 1;
    if (!ReadCsvRecord(in, fields, line, unterminated)) break;
    if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
    if (unterminated) {
      sink.CountRead();
      sink.Malformed(start, "unterminated quoted field");
      continue;
    }
    if (fields.size() != width) {
      sink.CountRead();
      sink.Malformed(start, "expected " + std::to_string(width) +
                                " fields, got " +
                                std::to_string(fields.size()));
      continue;
    }
    auto imp = ParseCount(fields[column[2]]);
    auto clk = ParseCount(fields[column[3]]);
    if (!imp || !clk) {
      sink.CountRead();
      sink.Malformed(start, "impressions and clicks must be nonnegative "
                            "integers");
      continue;
    }
    sink.Accept(start, fields[column[0]], std::move(fields[column[1]]), *imp,
                *clk);
  }
}

std::optional<std::int64_t> JsonCount(const nlohmann::json& v) {
  if (v.is_number_unsigned()) {
    auto u = v.get<std::uint64_t>();
    if (u > static_cast<std::uint64_t>(INT64_MAX)) return std::nullopt;
    return static_cast<std::int64_t>(u);
  }
  if (v.is_number_integer()) {
    auto i = v.get<std::int64_t>();
    if (i < 0) return std::nullopt;
    return i;
  }
  if (v.is_string()) return ParseCount(v.get<std::string>());
  return std::nullopt;
}

void LoadJsonl(std::istream& in, RowSink& sink) {
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    std::string_view view = text;
    while (!view.empty() && IsSpace(view.back())) view.remove_suffix(1);
    if (view.empty()) continue;
    nlohmann::json obj = nlohmann::json::parse(view, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) {
      sink.CountRead();
      sink.Malformed(line, "not a JSON object");
      continue;
    }
    std::string missing;
    for (auto f : kFields) {
      if (!obj.contains(f)) missing = std::string(f);
    }
    if (!missing.empty()) {
      sink.CountRead();
      sink.Malformed(line, "missing field '" + missing + "'");
      continue;
    }
    if (!obj["query"].is_string() || !obj["product_type"].is_string()) {
      sink.CountRead();
      sink.Malformed(line, "query and product_type must be strings");
      continue;
    }
    auto imp = JsonCount(obj["impressions"]);
    auto clk = JsonCount(obj["clicks"]);
    if (!imp || !clk) {
      sink.CountRead();
      sink.Malformed(line, "impressions and clicks must be nonnegative "
                           "integers");
      continue;
    }
    sink.Accept(line, obj["query"].get<std::string>(),
                obj["product_type"].get<std::string>(), *imp, *clk);
  }
}

void WriteCsvField(std::ostream& out, std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) {
    out << s;
    return;
  }
  out << '"';
  for (char c : s) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

}  // namespace

std::string NormalizeQuery(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (char c : raw) {
    if (IsSpace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    out.push_back(c);
  }
  return out;
}

EventFilter::EventFilter(std::string event_name,
                         std::vector<std::string> patterns)
    : event_name_(std::move(event_name)), patterns_(std::move(patterns)) {
  if (patterns_.empty()) {
    throw ConfigError("event filter needs at least one pattern");
  }
  compiled_.reserve(patterns_.size());
  for (const auto& p : patterns_) {
    try {
      compiled_.emplace_back(p, std::regex::ECMAScript | std::regex::optimize);
    } catch (const std::regex_error& e) {
      throw ConfigError("invalid event pattern '" + p + "': " + e.what());
    }
  }
}

bool EventFilter::Matches(std::string_view normalized_query) const {
  for (const auto& re : compiled_) {
    if (std::regex_search(normalized_query.begin(), normalized_query.end(),
                          re)) {
      return true;
    }
  }
  return false;
}

std::vector<std::string> ReadPatternFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open pattern file " + path.string());
  std::vector<std::string> patterns;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    patterns.push_back(line);
  }
  return patterns;
}

LogFormat GuessLogFormat(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  return (ext == ".jsonl" || ext == ".json" || ext == ".ndjson")
             ? LogFormat::kJsonl
             : LogFormat::kCsv;
}

LoadResult LoadAndFilter(std::istream& in, LogFormat format,
                         const EventFilter& filter,
                         const LoadOptions& options) {
  RowSink sink(filter, options);
  if (format == LogFormat::kCsv) {
    LoadCsv(in, sink);
  } else {
    LoadJsonl(in, sink);
  }
  if (in.bad()) throw IoError("read error while loading log");
  return sink.Take();
}

LoadResult LoadAndFilterFile(const std::filesystem::path& path,
                             const EventFilter& filter,
                             const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open log file " + path.string());
  return LoadAndFilter(in, GuessLogFormat(path), filter, options);
}

void WriteLogCsv(std::ostream& out, std::span<const RawLogRow> rows) {
  out << "query,product_type,impressions,clicks\n";
  for (const auto& r : rows) {
    WriteCsvField(out, r.query);
    out << ',';
    WriteCsvField(out, r.product_type);
    out << ',' << r.impressions << ',' << r.clicks << '\n';
  }
}

void WriteLogJsonl(std::ostream& out, std::span<const RawLogRow> rows) {
  for (const auto& r : rows) {
    nlohmann::ordered_json obj;
    obj["query"] = r.query;
    obj["product_type"] = r.product_type;
    obj["impressions"] = r.impressions;
    obj["clicks"] = r.clicks;
    out << obj.dump() << '\n';
  }
}

}  // namespace aspectmine
