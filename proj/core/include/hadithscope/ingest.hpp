#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "hadithscope/arabic_normalize.hpp"
#include "hadithscope/civil_time.hpp"

namespace hadithscope {

/// The quotative phrase used to select candidate posts.
inline constexpr std::string_view kDefaultQuotePhrase = "قال رسول الله";

struct PostRecord {
  std::string post_id;
  std::string text;
  std::string lang;
  Timestamp timestamp{};

  friend bool operator==(const PostRecord&, const PostRecord&) = default;
};

struct IngestReport {
  std::uint64_t lines_read = 0;
  std::uint64_t malformed_skipped = 0;
  std::uint64_t lang_filtered = 0;
  std::uint64_t phrase_filtered = 0;
  std::uint64_t duplicates_dropped = 0;
  std::uint64_t emitted = 0;
  // Breakdown of duplicates_dropped.
  std::uint64_t duplicate_ids = 0;
  std::uint64_t duplicate_texts = 0;

  bool conserved() const {
    return lines_read ==
           malformed_skipped + lang_filtered + phrase_filtered + duplicates_dropped + emitted;
  }
  IngestReport& operator+=(const IngestReport& other);
};

/// Parses one JSON line. Accepts Twitter archive objects (`id_str`/`id`,
/// `full_text`, `extended_tweet.full_text` or `text`, `lang`, `created_at`
/// or `timestamp_ms`) as well as the canonical output shape (`post_id`,
/// `text`, `lang`, `ts_utc`). Returns nullopt for anything unusable.
std::optional<PostRecord> parse_post(std::string_view line);

/// Canonical JSONL line (without newline): post_id, text, lang, ts_utc.
std::string to_jsonl(const PostRecord& post);

bool lang_matches(const PostRecord& post, std::string_view tag);

/// Substring test after harakat/tatweel removal and letter folding of both
/// sides; keyrings are not stripped.
class PhraseFilter {
 public:
  explicit PhraseFilter(const std::vector<std::string>& phrases);

  bool matches(std::string_view raw_text) const;
  bool empty() const { return folded_.empty(); }

 private:
  std::vector<std::string> folded_;
};

/// Reads a phrase-per-line file (blank lines and `#` comments skipped).
std::vector<std::string> load_phrase_list(const std::filesystem::path& path);

enum class DedupMode { id, text };
std::optional<DedupMode> parse_dedup_mode(std::string_view name);
std::string_view to_string(DedupMode mode);

/// Drops repeated post ids; in text mode also repeated normalized texts
/// (compared by a 64-bit hash).
class Deduplicator {
 public:
  enum class Verdict { keep, duplicate_id, duplicate_text };

  explicit Deduplicator(DedupMode mode = DedupMode::id, PhraseSet phrases = {})
      : mode_(mode), phrases_(std::move(phrases)) {}

  Verdict check(const PostRecord& post);

 private:
  DedupMode mode_;
  PhraseSet phrases_;
  std::unordered_set<std::string> ids_;
  std::unordered_set<std::uint64_t> texts_;
};

struct IngestOptions {
  /// Exact language tag to keep; nullopt keeps every language.
  std::optional<std::string> lang = "ar";
  /// Posts must contain one of these phrases; empty disables the filter.
  std::vector<std::string> phrases = {std::string(kDefaultQuotePhrase)};
  DedupMode dedup = DedupMode::id;
  /// Keyrings used when comparing texts in DedupMode::text.
  PhraseSet keyrings;
};

/// Streaming reader: parse, language filter, phrase filter, dedup, in that
/// order. Memory is bounded by the dedup sets.
class PostStream {
 public:
  PostStream(std::istream& in, const IngestOptions& options);
  PostStream(const PostStream&) = delete;
  PostStream& operator=(const PostStream&) = delete;

  /// Next surviving post, or nullopt at end of input. Throws IoError with
  /// the byte offset if the source fails mid-read.
  std::optional<PostRecord> next();

  const IngestReport& report() const { return report_; }

  /// Continue deduplicating across several inputs.
  Deduplicator& deduplicator() { return *dedup_; }
  void share_deduplicator(Deduplicator& shared) { dedup_ = &shared; }

 private:
  std::istream& in_;
  std::optional<std::string> lang_;
  PhraseFilter phrase_;
  Deduplicator own_dedup_;
  Deduplicator* dedup_;
  IngestReport report_;
  std::uint64_t offset_ = 0;
};

/// Opens a file, transparently decompressing gzip or bzip2 by magic bytes.
std::unique_ptr<std::istream> open_input(const std::filesystem::path& path);

/// Reads all posts from a stream with filters disabled.
std::vector<PostRecord> read_posts(std::istream& in, IngestReport* report = nullptr);

std::vector<PostRecord> filter_lang(std::vector<PostRecord> posts, std::string_view tag = "ar");
std::vector<PostRecord> filter_phrase(std::vector<PostRecord> posts, std::string_view phrase);
std::vector<PostRecord> dedup(std::vector<PostRecord> posts, DedupMode mode = DedupMode::id,
                              const PhraseSet& keyrings = {});

}  // namespace hadithscope
