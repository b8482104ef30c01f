#include "hadithscope/analyze.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <istream>
#include <map>
#include <ostream>

#include <nlohmann/json.hpp>

#include "hadithscope/csv.hpp"
#include "hadithscope/errors.hpp"

namespace hadithscope {
namespace {

using namespace std::chrono;

constexpr std::array<std::string_view, 7> kWeekdayNames = {
    "Sunday", "Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday"};
constexpr std::array<std::string_view, 12> kMonthNames = {
    "January", "February", "March",     "April",   "May",      "June",
    "July",    "August",   "September", "October", "November", "December"};

double percent_of(std::uint64_t count, std::uint64_t denominator) {
  return denominator == 0 ? 0.0
                          : static_cast<double>(count) * 100.0 / static_cast<double>(denominator);
}

void finish_percentages(DistributionReport& report) {
  for (auto& row : report.rows) row.percent = percent_of(row.count, report.denominator);
}

const HadithRecord& record_for(const ReferenceCorpus& corpus, RecordId id) {
  const HadithRecord* record = corpus.find(id);
  if (!record) {
    throw InputError("match references hadith id " + std::to_string(id) +
                     " which is not in the corpus");
  }
  return *record;
}

GroupId group_of(const MatchRecord& m) { return m.variant_group.value_or(*m.hadith_id); }

std::size_t weekday_slot(Day d) { return weekday{d}.c_encoding(); }

std::size_t month_slot(Day d) {
  return static_cast<unsigned>(year_month_day{d}.month()) - 1;
}

template <class T>
std::optional<T> parse_number(std::string_view s) {
  T v{};
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || r.ec != std::errc{} || r.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

nlohmann::ordered_json distribution_object(const DistributionReport& report) {
  nlohmann::ordered_json j;
  j["name"] = report.name;
  j["denominator"] = report.denominator;
  if (report.window) {
    j["window"] = {{"first", format_date(report.window->first)},
                   {"last", format_date(report.window->last)}};
  }
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : report.rows) {
    j["rows"].push_back({{"key", row.key}, {"count", row.count}, {"percent", row.percent}});
  }
  return j;
}

}  // namespace

MatchRecord make_match_record(const MatchResult& result, Timestamp timestamp) {
  return MatchRecord{result.post_id, timestamp, result.hadith_id, result.variant_group,
                     result.jaccard, result.matched};
}

void write_matches_header(std::ostream& out) {
  csv::write(out, "post_id", "ts_utc", "hadith_id", "variant_group", "jaccard", "matched",
             "threshold");
}

void write_match_row(std::ostream& out, const MatchResult& r, Timestamp timestamp) {
  csv::write(out, r.post_id, format_rfc3339(timestamp),
             r.hadith_id ? std::to_string(*r.hadith_id) : std::string(),
             r.variant_group ? std::to_string(*r.variant_group) : std::string(),
             csv::number(r.jaccard), r.matched ? "1" : "0", csv::number(r.threshold));
}

std::vector<MatchRecord> read_matches_csv(std::istream& in) {
  csv::Reader reader(in);
  csv::Row row;
  if (!reader.next(row)) throw InputError("empty matches file");
  const csv::Header header(row);
  const auto col = [&](const char* name) {
    const auto c = header.find(name);
    if (!c) throw InputError(std::string("missing column ") + name);
    return *c;
  };
  const auto post_col = col("post_id");
  const auto ts_col = col("ts_utc");
  const auto hadith_col = col("hadith_id");
  const auto group_col = col("variant_group");
  const auto jaccard_col = col("jaccard");
  const auto matched_col = col("matched");

  std::vector<MatchRecord> out;
  while (reader.next(row)) {
    if (row.size() == 1 && row[0].empty()) continue;
    const auto where = [&] { return "matches line " + std::to_string(reader.line()) + ": "; };
    if (row.size() != header.size()) throw InputError(where() + "wrong field count");
    MatchRecord m;
    m.post_id = row[post_col];
    const auto ts = parse_timestamp(row[ts_col]);
    if (!ts) throw InputError(where() + "bad timestamp '" + row[ts_col] + "'");
    m.timestamp = *ts;
    if (!row[hadith_col].empty()) {
      m.hadith_id = parse_number<std::int64_t>(row[hadith_col]);
      if (!m.hadith_id) throw InputError(where() + "bad hadith_id");
    }
    if (!row[group_col].empty()) {
      m.variant_group = parse_number<std::int64_t>(row[group_col]);
      if (!m.variant_group) throw InputError(where() + "bad variant_group");
    }
    const auto jaccard = parse_number<double>(row[jaccard_col]);
    if (!jaccard) throw InputError(where() + "bad jaccard");
    m.jaccard = *jaccard;
    const std::string& matched = row[matched_col];
    m.matched = matched == "1" || matched == "true";
    if (m.matched && !m.hadith_id) throw InputError(where() + "matched row without hadith_id");
    out.push_back(std::move(m));
  }
  return out;
}

const DistributionRow* DistributionReport::find(std::string_view key) const {
  for (const auto& row : rows) {
    if (row.key == key) return &row;
  }
  return nullptr;
}

TopicalReport topical_distribution(std::span<const MatchRecord> matches,
                                   const ReferenceCorpus& corpus) {
  TopicalReport report;
  report.posts.name = "topics_posts";
  report.corpus.name = "topics_corpus";
  std::array<std::uint64_t, kTopicCount> post_counts{};
  std::array<std::uint64_t, kTopicCount> corpus_counts{};

  for (const auto& m : matches) {
    if (!m.matched) continue;
    const TopicSet topics = record_for(corpus, *m.hadith_id).topics;
    if (topics.empty()) continue;
    ++report.posts.denominator;
    for (std::size_t i = 0; i < kTopicCount; ++i) post_counts[i] += topics.contains(kTopics[i]) ? 1 : 0;
  }
  for (const auto& r : corpus.records()) {
    if (r.topics.empty()) continue;
    ++report.corpus.denominator;
    for (std::size_t i = 0; i < kTopicCount; ++i) corpus_counts[i] += r.topics.contains(kTopics[i]) ? 1 : 0;
  }
  for (std::size_t i = 0; i < kTopicCount; ++i) {
    const std::string key(to_string(kTopics[i]));
    report.posts.rows.push_back({key, post_counts[i], 0.0});
    report.corpus.rows.push_back({key, corpus_counts[i], 0.0});
  }
  finish_percentages(report.posts);
  finish_percentages(report.corpus);
  return report;
}

DistributionReport authenticity_distribution(std::span<const MatchRecord> matches,
                                             const ReferenceCorpus& corpus) {
  std::array<std::uint64_t, kAuthenticityLevels.size()> counts{};
  std::uint64_t unmatched = 0;
  for (const auto& m : matches) {
    if (!m.matched) {
      ++unmatched;
      continue;
    }
    ++counts[static_cast<std::size_t>(record_for(corpus, *m.hadith_id).grade)];
  }
  DistributionReport report;
  report.name = "authenticity";
  report.denominator = matches.size();
  for (std::size_t i = 0; i < kAuthenticityLevels.size(); ++i) {
    report.rows.push_back({std::string(to_string(kAuthenticityLevels[i])), counts[i], 0.0});
  }
  report.rows.push_back({"unmatched", unmatched, 0.0});
  finish_percentages(report);
  return report;
}

std::vector<TopHadith> top_hadiths(std::span<const MatchRecord> matches, const ReferenceCorpus& corpus,
                                   AuthenticityLevel level, std::size_t n) {
  std::map<GroupId, std::uint64_t> per_group;
  std::map<GroupId, std::map<RecordId, std::uint64_t>> per_variant;
  for (const auto& m : matches) {
    if (!m.matched) continue;
    if (record_for(corpus, *m.hadith_id).grade != level) continue;
    const GroupId g = group_of(m);
    ++per_group[g];
    ++per_variant[g][*m.hadith_id];
  }
  std::vector<TopHadith> rows;
  for (const auto& [group, count] : per_group) {
    RecordId representative = 0;
    std::uint64_t best = 0;
    for (const auto& [id, c] : per_variant[group]) {
      if (c > best) {
        best = c;
        representative = id;
      }
    }
    const HadithRecord& record = record_for(corpus, representative);
    rows.push_back({group, count, record.matn_raw, record.topics});
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const TopHadith& a, const TopHadith& b) { return a.count > b.count; });
  if (rows.size() > n) rows.resize(n);
  return rows;
}

std::optional<Granularity> parse_granularity(std::string_view name) {
  if (name == "day") return Granularity::day;
  if (name == "weekday") return Granularity::weekday;
  if (name == "month") return Granularity::month;
  return std::nullopt;
}

std::string_view to_string(Granularity g) {
  switch (g) {
    case Granularity::day:
      return "day";
    case Granularity::weekday:
      return "weekday";
    case Granularity::month:
      return "month";
  }
  return "day";
}

DayWindow observation_window(std::span<const MatchRecord> matches) {
  if (matches.empty()) throw ParameterError("no posts to derive an observation window from");
  Day first = utc_day(matches.front().timestamp);
  Day last = first;
  for (const auto& m : matches) {
    const Day d = utc_day(m.timestamp);
    first = std::min(first, d);
    last = std::max(last, d);
  }
  return {first, last};
}

DayWindow equalize_window(DayWindow window, Granularity granularity) {
  switch (granularity) {
    case Granularity::day:
      return window;
    case Granularity::weekday: {
      const std::size_t keep = window.days() / 7 * 7;
      if (keep == 0) return window;
      return {window.first, window.first + days{static_cast<int>(keep) - 1}};
    }
    case Granularity::month: {
      const year_month first_month{year_month_day{window.first}.year(),
                                   year_month_day{window.first}.month()};
      const year_month last_month{year_month_day{window.last}.year(),
                                  year_month_day{window.last}.month()};
      const int touched = (last_month - first_month).count() + 1;
      const int keep = touched / 12 * 12;
      if (keep == 0) return window;
      const year_month end_month = first_month + months{keep - 1};
      return {window.first, Day{end_month / last}};
    }
  }
  return window;
}

DistributionReport temporal_histogram(std::span<const MatchRecord> matches, Granularity granularity,
                                      bool equalize, std::optional<DayWindow> window) {
  if (granularity == Granularity::day) {
    throw ParameterError("temporal histograms are by weekday or month");
  }
  DistributionReport report;
  report.name = std::string("temporal_") + std::string(to_string(granularity));
  const bool weekly = granularity == Granularity::weekday;
  const std::size_t slots = weekly ? 7 : 12;
  std::vector<std::uint64_t> counts(slots, 0);
  if (!matches.empty() || window) {
    DayWindow w = window ? *window : observation_window(matches);
    if (equalize) w = equalize_window(w, granularity);
    report.window = w;
    for (const auto& m : matches) {
      if (!m.matched) continue;
      const Day d = utc_day(m.timestamp);
      if (!w.contains(d)) continue;
      ++counts[weekly ? weekday_slot(d) : month_slot(d)];
      ++report.denominator;
    }
  }
  for (std::size_t i = 0; i < slots; ++i) {
    report.rows.push_back({std::string(weekly ? kWeekdayNames[i] : kMonthNames[i]), counts[i], 0.0});
  }
  finish_percentages(report);
  return report;
}

double gini(std::span<const std::uint64_t> counts) {
  if (counts.empty()) throw ParameterError("gini of an empty vector is undefined");
  std::vector<std::uint64_t> sorted(counts.begin(), counts.end());
  std::sort(sorted.begin(), sorted.end());
  uint128 total = 0;
  uint128 weighted = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    total += sorted[i];
    weighted += static_cast<uint128>(i + 1) * sorted[i];
  }
  if (total == 0) throw ParameterError("gini of an all-zero vector is undefined");
  const uint128 n = sorted.size();
  // sum_ij |x_i - x_j| = 2 * (2 * sum_i i x_(i) - (n + 1) * sum x); always >= 0.
  const uint128 numerator = 2 * weighted - (n + 1) * total;
  const uint128 denominator = n * total;
  return static_cast<double>(numerator) / static_cast<double>(denominator);
}

DailyCountSeries daily_counts(std::span<const MatchRecord> matches, GroupId group, DayWindow window) {
  DailyCountSeries series{group, window, std::vector<std::uint64_t>(window.days(), 0)};
  for (const auto& m : matches) {
    if (!m.matched || group_of(m) != group) continue;
    const Day d = utc_day(m.timestamp);
    if (window.contains(d)) ++series.counts[static_cast<std::size_t>((d - window.first).count())];
  }
  return series;
}

std::vector<std::uint64_t> bucket_counts(const DailyCountSeries& series, Granularity granularity) {
  if (granularity == Granularity::day) return series.counts;
  const bool weekly = granularity == Granularity::weekday;
  std::vector<std::uint64_t> slots(weekly ? 7 : 12, 0);
  for (std::size_t i = 0; i < series.counts.size(); ++i) {
    if (series.counts[i] == 0) continue;
    const Day d = series.window.first + days{static_cast<int>(i)};
    slots[weekly ? weekday_slot(d) : month_slot(d)] += series.counts[i];
  }
  return slots;
}

std::optional<WindowMode> parse_window_mode(std::string_view name) {
  if (name == "global") return WindowMode::global;
  if (name == "active") return WindowMode::active;
  return std::nullopt;
}

std::string_view to_string(WindowMode mode) { return mode == WindowMode::global ? "global" : "active"; }

GiniReport seasonality_report(std::span<const MatchRecord> matches, Granularity granularity,
                              std::uint64_t min_count, WindowMode mode,
                              std::optional<DayWindow> window) {
  GiniReport report;
  report.granularity = granularity;
  if (matches.empty()) return report;
  const DayWindow global = window ? *window : observation_window(matches);

  std::map<GroupId, std::vector<Day>> days_by_group;
  for (const auto& m : matches) {
    if (!m.matched) continue;
    const Day d = utc_day(m.timestamp);
    if (global.contains(d)) days_by_group[group_of(m)].push_back(d);
  }
  for (auto& [group, days_seen] : days_by_group) {
    if (days_seen.size() < min_count || days_seen.empty()) continue;
    DayWindow w = global;
    if (mode == WindowMode::active) {
      const auto [lo, hi] = std::minmax_element(days_seen.begin(), days_seen.end());
      w = {*lo, *hi};
    }
    DailyCountSeries series{group, w, std::vector<std::uint64_t>(w.days(), 0)};
    for (const Day d : days_seen) ++series.counts[static_cast<std::size_t>((d - w.first).count())];
    const auto slots = bucket_counts(series, granularity);
    report.rows.push_back({group, days_seen.size(), gini(slots)});
  }
  std::stable_sort(report.rows.begin(), report.rows.end(),
                   [](const GiniRow& a, const GiniRow& b) { return a.gini > b.gini; });
  return report;
}

void write_distribution_csv(std::ostream& out, const DistributionReport& report) {
  csv::write(out, "key", "count", "percent", "denominator");
  for (const auto& row : report.rows) {
    csv::write(out, row.key, std::to_string(row.count), csv::number(row.percent),
               std::to_string(report.denominator));
  }
}

void write_topics_csv(std::ostream& out, const TopicalReport& report) {
  csv::write(out, "series", "key", "count", "percent", "denominator");
  for (const auto* series : {&report.posts, &report.corpus}) {
    const std::string name = series == &report.posts ? "posts" : "corpus";
    for (const auto& row : series->rows) {
      csv::write(out, name, row.key, std::to_string(row.count), csv::number(row.percent),
                 std::to_string(series->denominator));
    }
  }
}

void write_top_csv(std::ostream& out, AuthenticityLevel level, std::span<const TopHadith> rows) {
  csv::write(out, "level", "rank", "variant_group", "count", "topics", "matn");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    csv::write(out, to_string(level), std::to_string(i + 1), std::to_string(rows[i].group),
               std::to_string(rows[i].count), rows[i].topics.to_string(), rows[i].matn);
  }
}

void write_gini_csv(std::ostream& out, const GiniReport& report) {
  csv::write(out, "variant_group", "total", "gini", "granularity");
  for (const auto& row : report.rows) {
    csv::write(out, std::to_string(row.group), std::to_string(row.total), csv::number(row.gini),
               to_string(report.granularity));
  }
}

std::string distribution_json(const DistributionReport& report) {
  return distribution_object(report).dump(2);
}

std::string topics_json(const TopicalReport& report) {
  nlohmann::ordered_json j;
  j["posts"] = distribution_object(report.posts);
  j["corpus"] = distribution_object(report.corpus);
  return j.dump(2);
}

std::string top_json(AuthenticityLevel level, std::span<const TopHadith> rows) {
  nlohmann::ordered_json j;
  j["level"] = std::string(to_string(level));
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : rows) {
    j["rows"].push_back({{"variant_group", row.group},
                         {"count", row.count},
                         {"topics", row.topics.to_string()},
                         {"matn", row.matn}});
  }
  return j.dump(2, ' ', false, nlohmann::json::error_handler_t::replace);
}

std::string gini_json(const GiniReport& report) {
  nlohmann::ordered_json j;
  j["granularity"] = std::string(to_string(report.granularity));
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : report.rows) {
    j["rows"].push_back({{"variant_group", row.group}, {"total", row.total}, {"gini", row.gini}});
  }
  return j.dump(2);
}

}  // namespace hadithscope
