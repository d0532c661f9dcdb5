#ifndef ASPECTMINE_INGEST_H_
#define ASPECTMINE_INGEST_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <regex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace aspectmine {

// One aggregated (query, product-type) log row.
struct RawLogRow {
  std::string query;
  std::string product_type;
  std::int64_t impressions = 0;
  std::int64_t clicks = 0;

  bool operator==(const RawLogRow&) const = default;
};

// Lowercases ASCII letters, trims ASCII whitespace at both ends and collapses
// internal whitespace runs to a single space. Non-ASCII bytes pass through.
std::string NormalizeQuery(std::string_view raw);

// A set of event keyword patterns (ECMAScript regex, search semantics).
// Construction throws ConfigError if the list is empty or a pattern does not
// compile; matching never throws.
class EventFilter {
 public:
  EventFilter(std::string event_name, std::vector<std::string> patterns);

  bool Matches(std::string_view normalized_query) const;

  const std::string& event_name() const { return event_name_; }
  const std::vector<std::string>& patterns() const { return patterns_; }

 private:
  std::string event_name_;
  std::vector<std::string> patterns_;
  std::vector<std::regex> compiled_;
};

inline bool MatchesEvent(std::string_view query, const EventFilter& filter) {
  return filter.Matches(query);
}

// Reads one pattern per line; blank lines and lines starting with '#' are
// skipped.
std::vector<std::string> ReadPatternFile(const std::filesystem::path& path);

enum class LogFormat { kCsv, kJsonl };

// Picks the format from the file extension (.jsonl/.json -> JSONL, else CSV).
LogFormat GuessLogFormat(const std::filesystem::path& path);

struct LoadOptions {
  // Strict: the first malformed row throws ValidationError.
  // Lenient: malformed rows are skipped and listed in the report.
  bool strict = true;
};

struct RowIssue {
  std::size_t row = 0;  // 1-based source line
  std::string reason;
};

struct LoadReport {
  std::size_t rows_read = 0;
  std::size_t rows_matched = 0;
  std::vector<RowIssue> malformed;
};

struct LoadResult {
  std::vector<RawLogRow> rows;  // queries normalized, source order kept
  LoadReport report;
};

LoadResult LoadAndFilter(std::istream& in, LogFormat format,
                         const EventFilter& filter,
                         const LoadOptions& options = {});

// Throws IoError if the file cannot be opened.
LoadResult LoadAndFilterFile(const std::filesystem::path& path,
                             const EventFilter& filter,
                             const LoadOptions& options = {});

void WriteLogCsv(std::ostream& out, std::span<const RawLogRow> rows);
void WriteLogJsonl(std::ostream& out, std::span<const RawLogRow> rows);

}  // namespace aspectmine

#endif  // ASPECTMINE_INGEST_H_
