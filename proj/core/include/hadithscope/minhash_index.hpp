#pragma once

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
#include "hadithscope/corpus.hpp"

namespace hadithscope {

__extension__ using uint128 = unsigned __int128;

/// 64 bands of 2 rows put the LSH candidate probability at J = 0.35 at
/// 1 - (1 - 0.35^2)^64 ~= 0.9998.
struct MinHashParams {
  std::uint32_t num_hashes = 128;
  std::uint32_t bands = 64;
  std::uint32_t rows = 2;
  std::uint64_t seed = 7;

  /// Throws ParameterError unless all counts are positive and
  /// bands * rows == num_hashes.
  void validate() const;

  friend bool operator==(const MinHashParams&, const MinHashParams&) = default;
};

class MinHashSignature {
 public:
  MinHashSignature() = default;
  MinHashSignature(std::vector<std::uint64_t> values, std::uint64_t seed)
      : values_(std::move(values)), seed_(seed) {}

  const std::vector<std::uint64_t>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  std::uint64_t seed() const { return seed_; }

  friend bool operator==(const MinHashSignature&, const MinHashSignature&) = default;

 private:
  std::vector<std::uint64_t> values_;
  std::uint64_t seed_ = 0;
};

/// The hash family: slot i maps a token's stable 64-bit hash x to
/// (a_i * x + b_i) >> 64 in 128-bit arithmetic, with (a_i, b_i) drawn from a
/// mt19937_64 seeded with params.seed.
class MinHasher {
 public:
  explicit MinHasher(const MinHashParams& params);

  /// values[i] = min over tokens of hash_i(token); all slots are UINT64_MAX
  /// for an empty set.
  MinHashSignature operator()(const TokenSet& tokens) const;

  const MinHashParams& params() const { return params_; }

 private:
  MinHashParams params_;
  std::vector<uint128> mul_;
  std::vector<uint128> add_;
};

MinHashSignature signature(const TokenSet& tokens, const MinHashParams& params);

/// |a ∩ b| / |a ∪ b|, 0 when both are empty.
double exact_jaccard(const TokenSet& a, const TokenSet& b);

/// Fraction of equal slots. Throws ParameterError when the signatures come
/// from different parameters.
double estimate_jaccard(const MinHashSignature& a, const MinHashSignature& b);

struct MatchResult {
  std::string post_id;
  std::optional<RecordId> hadith_id;
  std::optional<GroupId> variant_group;
  double jaccard = 0.0;
  bool matched = false;
  double threshold = 0.0;

  friend bool operator==(const MatchResult&, const MatchResult&) = default;
};

/// Banded LSH index over a reference corpus. Immutable once built; queries
/// are const and may run concurrently.
class LshIndex {
 public:
  struct Entry {
    RecordId id = 0;
    GroupId group = 0;
    TokenSet tokens;
    MinHashSignature signature;
  };

  LshIndex() : LshIndex(MinHashParams{}) {}
  explicit LshIndex(const MinHashParams& params);

  /// Indexes every record with a nonempty token set. Signatures are computed
  /// on `threads` workers; bucket contents are sorted by record id so the
  /// result does not depend on the thread count.
  static LshIndex build(const ReferenceCorpus& corpus, const MinHashParams& params,
                        unsigned threads = 1);

  /// Entry positions (ascending, i.e. by record id) sharing at least one
  /// band bucket with the signature.
  std::vector<std::uint32_t> candidates(const MinHashSignature& sig) const;

  /// Best exact-Jaccard candidate, ties to the smallest record id. matched is
  /// decided on the exact score; without candidates the result is unmatched
  /// with no hadith and jaccard 0.
  MatchResult query(const TokenSet& tokens, double threshold, std::string post_id) const;

  const MinHashParams& params() const { return hasher_.params(); }
  const MinHasher& hasher() const { return hasher_; }
  const PhraseSet& phrases() const { return phrases_; }
  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  /// Per band: bucket key -> entry positions.
  const std::vector<std::unordered_map<std::uint64_t, std::vector<std::uint32_t>>>& buckets() const {
    return buckets_;
  }

  /// Versioned little-endian binary dump; identical indexes serialize to
  /// identical bytes.
  void save(std::ostream& out) const;
  static LshIndex load(std::istream& in);

  /// Directory form: `<dir>/index.bin`.
  void save_dir(const std::filesystem::path& dir) const;
  static LshIndex load_dir(const std::filesystem::path& dir);

 private:
  std::uint64_t band_key(const MinHashSignature& sig, std::uint32_t band) const;
  void insert_buckets();
  void assign_token_ids();

  MinHasher hasher_;
  PhraseSet phrases_;
  std::vector<Entry> entries_;
  // Exact re-verification runs on integer ids: every corpus token gets one
  // (in lexicographic order), and entry_ids_[i] lists entries_[i].tokens.
  std::unordered_map<std::string, std::uint32_t> token_ids_;
  std::vector<std::vector<std::uint32_t>> entry_ids_;
  std::vector<std::unordered_map<std::uint64_t, std::vector<std::uint32_t>>> buckets_;
};

MatchResult query(const LshIndex& index, const TokenSet& tokens, double threshold,
                  std::string_view post_id);

/// One post to match: id plus its normalized token set.
struct QueryItem {
  std::string post_id;
  TokenSet tokens;
};

/// Matches items in parallel; results are in input order.
std::vector<MatchResult> query_batch(const LshIndex& index, std::span<const QueryItem> items,
                                     double threshold, unsigned threads = 1);

}  // namespace hadithscope
