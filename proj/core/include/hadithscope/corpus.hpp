#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hadithscope/arabic_normalize.hpp"

namespace hadithscope {

using RecordId = std::int64_t;
using GroupId = std::int64_t;

enum class AuthenticityLevel : std::uint8_t { authentic, good, weak, fabricated, unknown };

inline constexpr std::array<AuthenticityLevel, 5> kAuthenticityLevels = {
    AuthenticityLevel::authentic, AuthenticityLevel::good, AuthenticityLevel::weak,
    AuthenticityLevel::fabricated, AuthenticityLevel::unknown};

std::string_view to_string(AuthenticityLevel level);
/// Case-insensitive; accepts the names printed by to_string.
std::optional<AuthenticityLevel> parse_authenticity(std::string_view name);

enum class TopicCategory : std::uint8_t {
  knowledge,
  biography_history,
  jurisprudence,
  interpretation,
  virtues,
  asceticism,
  supplications_remembrances,
  doctrine,
  ethics_etiquette,
};

inline constexpr std::size_t kTopicCount = 9;
inline constexpr std::array<TopicCategory, kTopicCount> kTopics = {
    TopicCategory::knowledge,      TopicCategory::biography_history,
    TopicCategory::jurisprudence,  TopicCategory::interpretation,
    TopicCategory::virtues,        TopicCategory::asceticism,
    TopicCategory::supplications_remembrances, TopicCategory::doctrine,
    TopicCategory::ethics_etiquette};

/// CamelCase name, e.g. "SupplicationsRemembrances".
std::string_view to_string(TopicCategory topic);
/// Accepts the CamelCase name, the spaced English name ("Ethics and
/// Etiquette"), or the short code (K, BH, J, I, V, A, SR, D, EE), ignoring
/// case.
std::optional<TopicCategory> parse_topic(std::string_view name);

class TopicSet {
 public:
  TopicSet() = default;
  TopicSet(std::initializer_list<TopicCategory> topics) {
    for (auto t : topics) insert(t);
  }

  void insert(TopicCategory t) { bits_ |= bit(t); }
  bool contains(TopicCategory t) const { return (bits_ & bit(t)) != 0; }
  bool empty() const { return bits_ == 0; }
  std::size_t size() const;
  TopicSet& operator|=(TopicSet other) {
    bits_ |= other.bits_;
    return *this;
  }

  /// Semicolon-separated CamelCase names in category order.
  std::string to_string() const;

  friend bool operator==(TopicSet, TopicSet) = default;

 private:
  static std::uint16_t bit(TopicCategory t) {
    return static_cast<std::uint16_t>(1u << static_cast<unsigned>(t));
  }
  std::uint16_t bits_ = 0;
};

/// One reference variant.
struct HadithRecord {
  RecordId id = 0;
  GroupId variant_group = 0;
  std::string matn_raw;
  std::string matn_norm;
  TokenSet token_set;
  std::optional<std::string> isnad_raw;
  std::string source_book;
  std::string chapter;
  std::vector<std::string> grade_raw;
  AuthenticityLevel grade = AuthenticityLevel::unknown;
  TopicSet topics;

  friend bool operator==(const HadithRecord&, const HadithRecord&) = default;
};

/// Keyword lists per canonical grade. Raw grade strings are matched by
/// substring after ASCII lower-casing and Arabic letter folding.
class GradeKeywordMap {
 public:
  static GradeKeywordMap defaults();

  /// Same layout as the keyring file: `[authentic]`, `[good]`, `[weak]`,
  /// `[fabricated]` sections, one keyword per line, `#` comments.
  static GradeKeywordMap parse(std::istream& in);
  static GradeKeywordMap load(const std::filesystem::path& path);

  void add(AuthenticityLevel level, std::string_view keyword);
  const std::vector<std::string>& keywords(AuthenticityLevel level) const;

  AuthenticityLevel classify(std::span<const std::string> raw) const;

 private:
  std::array<std::vector<std::string>, 4> keywords_;
};

/// Exactly one canonical level mentioned across all strings gives that
/// level; none or several give Unknown.
AuthenticityLevel normalize_grade(std::span<const std::string> raw,
                                  const GradeKeywordMap& keywords = GradeKeywordMap::defaults());

class ReferenceCorpus {
 public:
  ReferenceCorpus() = default;

  /// Throws InputError on duplicate ids.
  explicit ReferenceCorpus(std::vector<HadithRecord> records, PhraseSet phrases = {});

  const std::vector<HadithRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  const HadithRecord* find(RecordId id) const;
  /// Record ids of a variant group, ascending. Empty for unknown groups.
  std::span<const RecordId> group_members(GroupId group) const;
  std::size_t group_count() const { return by_group_.size(); }

  /// Keyrings used to normalize the records; queries must use the same set.
  const PhraseSet& phrases() const { return phrases_; }

  friend bool operator==(const ReferenceCorpus& a, const ReferenceCorpus& b) {
    return a.records_ == b.records_ && a.phrases_ == b.phrases_;
  }

 private:
  std::vector<HadithRecord> records_;
  std::unordered_map<RecordId, std::size_t> by_id_;
  std::unordered_map<GroupId, std::vector<RecordId>> by_group_;
  PhraseSet phrases_;
};

/// Builds a record with matn_norm and token_set derived from matn_raw.
HadithRecord make_record(RecordId id, GroupId group, std::string matn_raw, const PhraseSet& phrases);

enum class CorpusFormat { csv, jsonl };
std::optional<CorpusFormat> parse_corpus_format(std::string_view name);
/// ".jsonl"/".json" map to jsonl, anything else to csv.
CorpusFormat guess_corpus_format(const std::filesystem::path& path);

struct LoadReport {
  std::size_t rows_read = 0;
  std::size_t loaded = 0;
  std::size_t dropped_empty = 0;
  std::size_t malformed = 0;
  std::size_t unknown_topics = 0;
  /// First few problems, "line N: ..." each.
  std::vector<std::string> messages;
};

struct LoadResult {
  ReferenceCorpus corpus;
  LoadReport report;
};

/// Loads a reference corpus. Required fields: `id`, `matn`. Optional:
/// `variant_group` (defaults to the id), `isnad`, `book`, `chapter`,
/// `grade_en`, `grade_ar`, `grade`, `topics` (semicolon separated).
/// A missing required CSV column is an InputError naming it; bad rows are
/// skipped and tallied.
LoadResult load_reference(std::istream& in, CorpusFormat format, const PhraseSet& phrases,
                          const GradeKeywordMap& grades = GradeKeywordMap::defaults());
LoadResult load_reference(const std::filesystem::path& path, CorpusFormat format,
                          const PhraseSet& phrases,
                          const GradeKeywordMap& grades = GradeKeywordMap::defaults());

/// Writes the corpus back in the CSV schema accepted by load_reference.
void write_corpus_csv(std::ostream& out, const ReferenceCorpus& corpus);

}  // namespace hadithscope
