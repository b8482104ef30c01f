#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hadithscope/civil_time.hpp"
#include "hadithscope/corpus.hpp"
#include "hadithscope/minhash_index.hpp"

namespace hadithscope {

/// Mentions needed before a hadith enters the seasonality ranking.
inline constexpr std::uint64_t kDefaultMinCount = 100;

/// One row of matches.csv: a post, when it was posted, and its match.
struct MatchRecord {
  std::string post_id;
  Timestamp timestamp{};
  std::optional<RecordId> hadith_id;
  std::optional<GroupId> variant_group;
  double jaccard = 0.0;
  bool matched = false;

  friend bool operator==(const MatchRecord&, const MatchRecord&) = default;
};

MatchRecord make_match_record(const MatchResult& result, Timestamp timestamp);

/// Header: post_id,ts_utc,hadith_id,variant_group,jaccard,matched,threshold.
void write_matches_header(std::ostream& out);
void write_match_row(std::ostream& out, const MatchResult& result, Timestamp timestamp);
std::vector<MatchRecord> read_matches_csv(std::istream& in);

struct DistributionRow {
  std::string key;
  std::uint64_t count = 0;
  double percent = 0.0;
};

/// Per-key counts with an explicit denominator. Single-label reports sum to
/// the denominator; multi-label ones (topics) may exceed it.
struct DistributionReport {
  std::string name;
  std::uint64_t denominator = 0;
  std::vector<DistributionRow> rows;
  /// Inclusive day range covered, for temporal reports.
  std::optional<DayWindow> window;

  const DistributionRow* find(std::string_view key) const;
};

struct TopicalReport {
  /// Matched posts with at least one category; a post counts once for each
  /// category of its hadith.
  DistributionReport posts;
  /// Same over the reference records that carry a category.
  DistributionReport corpus;
};

TopicalReport topical_distribution(std::span<const MatchRecord> matches,
                                   const ReferenceCorpus& corpus);

/// Five grade buckets plus "unmatched", over all posts.
DistributionReport authenticity_distribution(std::span<const MatchRecord> matches,
                                             const ReferenceCorpus& corpus);

struct TopHadith {
  GroupId group = 0;
  std::uint64_t count = 0;
  /// Matn of the group's most-matched variant (smallest id on ties).
  std::string matn;
  TopicSet topics;
};

/// Groups ranked by matched posts whose variant has `level`; ties by group id.
std::vector<TopHadith> top_hadiths(std::span<const MatchRecord> matches, const ReferenceCorpus& corpus,
                                   AuthenticityLevel level, std::size_t n);

enum class Granularity { day, weekday, month };
std::optional<Granularity> parse_granularity(std::string_view name);
std::string_view to_string(Granularity g);

/// First to last UTC day over all posts. Throws ParameterError when empty.
DayWindow observation_window(std::span<const MatchRecord> matches);

/// Trims the end of the window so that every weekday (or calendar month)
/// occurs the same number of times. Day granularity returns it unchanged.
DayWindow equalize_window(DayWindow window, Granularity granularity);

/// Matched posts per weekday (Sunday first) or calendar month (January
/// first), restricted to the window (default: observation window, trimmed
/// when equalize is set).
DistributionReport temporal_histogram(std::span<const MatchRecord> matches, Granularity granularity,
                                      bool equalize, std::optional<DayWindow> window = std::nullopt);

/// G = sum_i sum_j |x_i - x_j| / (2 n^2 mean), evaluated via the sorted
/// form in exact integer arithmetic. Throws ParameterError on an empty or
/// all-zero vector.
double gini(std::span<const std::uint64_t> counts);

struct DailyCountSeries {
  GroupId group = 0;
  DayWindow window{};
  std::vector<std::uint64_t> counts;
};

DailyCountSeries daily_counts(std::span<const MatchRecord> matches, GroupId group, DayWindow window);

/// Folds a daily series into 7 weekday slots or 12 month slots (aggregated
/// across years). Day granularity returns the series unchanged.
std::vector<std::uint64_t> bucket_counts(const DailyCountSeries& series, Granularity granularity);

/// Global: one window for every hadith. Active: each hadith's own first to
/// last mention.
enum class WindowMode { global, active };
std::optional<WindowMode> parse_window_mode(std::string_view name);
std::string_view to_string(WindowMode mode);

struct GiniRow {
  GroupId group = 0;
  std::uint64_t total = 0;
  double gini = 0.0;
};

struct GiniReport {
  Granularity granularity = Granularity::day;
  std::vector<GiniRow> rows;
};

/// Gini per variant group with at least min_count matched posts in the
/// window, ranked by Gini descending, ties by group id.
GiniReport seasonality_report(std::span<const MatchRecord> matches, Granularity granularity,
                              std::uint64_t min_count = kDefaultMinCount,
                              WindowMode mode = WindowMode::global,
                              std::optional<DayWindow> window = std::nullopt);

// Report writers. CSV layouts:
//   distribution: key,count,percent,denominator
//   topics:       series,key,count,percent,denominator
//   top:          level,rank,variant_group,count,topics,matn
//   seasonality:  variant_group,total,gini,granularity
void write_distribution_csv(std::ostream& out, const DistributionReport& report);
void write_topics_csv(std::ostream& out, const TopicalReport& report);
void write_top_csv(std::ostream& out, AuthenticityLevel level, std::span<const TopHadith> rows);
void write_gini_csv(std::ostream& out, const GiniReport& report);

std::string distribution_json(const DistributionReport& report);
std::string topics_json(const TopicalReport& report);
std::string top_json(AuthenticityLevel level, std::span<const TopHadith> rows);
std::string gini_json(const GiniReport& report);

}  // namespace hadithscope
