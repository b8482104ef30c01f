#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hadithscope/errors.hpp"

#include "hadithscope/analyze.hpp"
#include "hadithscope/calibrate.hpp"
#include "hadithscope/corpus.hpp"
#include "hadithscope/ingest.hpp"
#include "hadithscope/linkage.hpp"
#include "hadithscope/minhash_index.hpp"

namespace hadithscope {

/// Everything a full run needs. Stored as an INI file; relative paths are
/// resolved against the directory of the config file when loading.
struct PipelineConfig {
  // [corpus]
  std::optional<std::filesystem::path> keyring_file;  // built-in defaults when unset
  std::filesystem::path graded_corpus;
  std::optional<std::filesystem::path> topical_corpus;
  std::optional<CorpusFormat> corpus_format;  // by file extension when unset
  std::optional<std::filesystem::path> grade_keywords;
  GradePrecedence grade_precedence = GradePrecedence::a;
  double link_threshold = kDefaultThreshold;
  // [ingest]
  std::string lang = "ar";  // "*" keeps every language
  std::optional<std::filesystem::path> quote_phrase_file;
  DedupMode dedup = DedupMode::id;
  // [minhash]
  MinHashParams minhash;
  // [match]
  double threshold = kDefaultThreshold;
  unsigned threads = 1;
  // [calibrate]
  std::string sweep_thresholds = "0.05:0.95:0.05";
  std::size_t sample_size = kDefaultSampleSize;
  std::uint64_t sample_seed = 7;
  // [analyze]
  WindowMode window = WindowMode::global;
  std::uint64_t min_count = kDefaultMinCount;
  std::size_t top_n = 5;

  /// Throws InputError on unknown keys or unparsable values.
  static PipelineConfig parse(std::istream& in, const std::filesystem::path& base_dir = {});
  static PipelineConfig load(const std::filesystem::path& path);
  void write(std::ostream& out) const;

  /// Value ranges and existence of every referenced file; throws InputError
  /// naming the offending key or path.
  void validate() const;

  friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

/// A failure inside one pipeline stage. exit_code is 2 for input/config
/// problems and 1 otherwise.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what, int exit_code)
      : Error(stage + ": " + what), stage_(std::move(stage)), exit_code_(exit_code) {}

  const std::string& stage() const { return stage_; }
  int exit_code() const { return exit_code_; }

 private:
  std::string stage_;
  int exit_code_;
};

/// Normalizes every post with the index keyrings and matches it in one
/// pass. Results are in input order; matched is set against `threshold`.
std::vector<MatchResult> match_posts(const LshIndex& index, std::span<const PostRecord> posts,
                                     double threshold, unsigned threads = 1);

struct PipelineResult {
  nlohmann::ordered_json manifest;
  std::vector<std::filesystem::path> artifacts;
};

/// ingest -> corpus -> index -> match -> calibrate -> analyze, writing
/// posts.jsonl, matches.csv, calibration.csv, label_sample.csv, the report
/// CSVs and manifest.json into out_dir. Each artifact is written as
/// `<name>.partial` and renamed once complete, so a failed run leaves the
/// partial files behind. Throws StageError.
PipelineResult run_pipeline(const PipelineConfig& config,
                            std::span<const std::filesystem::path> inputs,
                            const std::filesystem::path& out_dir);

/// CRC-32 of a file's bytes, as 8 lowercase hex digits.
std::string file_crc32(const std::filesystem::path& path);

}  // namespace hadithscope
