#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace hadithscope {

/// Quotative connectors removed before matching ("keyrings"). Phrases are kept
/// in normalized form as word sequences; leading phrases are ordered longest
/// first so that a phrase which prefixes another never wins.
class PhraseSet {
 public:
  PhraseSet() = default;

  /// Normalizes, deduplicates and orders the given raw phrases. Entries that
  /// normalize to nothing are dropped.
  static PhraseSet from_lists(const std::vector<std::string>& leading,
                              const std::vector<std::string>& infix);

  /// Reads the keyring file format: UTF-8, `#` comments, `[leading]` and
  /// `[infix]` section headers, one phrase per line. Lines before any header
  /// are leading phrases. Throws InputError on unreadable files or unknown
  /// sections.
  static PhraseSet parse(std::istream& in);
  static PhraseSet load(const std::filesystem::path& path);

  /// Built-in list of common prophetic quotatives (the same phrases as the
  /// shipped data/keyrings.txt).
  static PhraseSet defaults();

  std::vector<std::string> leading_phrases() const;
  std::vector<std::string> infix_fragments() const;

  const std::vector<std::vector<std::string>>& leading_words() const { return leading_; }
  const std::vector<std::vector<std::string>>& infix_words() const { return infix_; }

  bool empty() const { return leading_.empty() && infix_.empty(); }

  friend bool operator==(const PhraseSet&, const PhraseSet&) = default;

 private:
  std::vector<std::vector<std::string>> leading_;
  std::vector<std::vector<std::string>> infix_;
};

/// Unique whitespace-delimited words of a normalized text, kept sorted.
class TokenSet {
 public:
  TokenSet() = default;
  explicit TokenSet(std::vector<std::string> words);

  const std::vector<std::string>& tokens() const { return tokens_; }
  std::size_t size() const { return tokens_.size(); }
  bool empty() const { return tokens_.empty(); }
  auto begin() const { return tokens_.begin(); }
  auto end() const { return tokens_.end(); }
  bool contains(std::string_view word) const;

  friend bool operator==(const TokenSet&, const TokenSet&) = default;

 private:
  std::vector<std::string> tokens_;
};

// Pipeline stages. Each takes and returns UTF-8; invalid byte sequences are
// decoded as U+FFFD.

/// Keeps only U+0600..U+06FF characters. Whitespace and non-Arabic
/// punctuation act as word separators; every other foreign character is
/// dropped in place. The result has single spaces and no outer spaces.
std::string assert_arabic(std::string_view text);

/// Replaces every Unicode punctuation character (and the Arabic comma,
/// semicolon, question mark, percent/decimal/thousands signs, five pointed
/// star and full stop) with a space.
std::string strip_punctuation(std::string_view text);

/// Removes harakat (U+064B..U+065F, U+0670) and tatweel, then folds
/// alef variants to bare alef, alef maqsura and yeh-hamza to yeh, teh
/// marbuta to heh, and waw-hamza to waw.
std::string normalize_letters(std::string_view text);

/// Collapses whitespace runs to a single space and trims both ends.
std::string collapse_spaces(std::string_view text);

/// Removes the longest matching leading phrase and every infix fragment,
/// on word boundaries, repeating until nothing more can be removed.
std::string strip_keyrings(std::string_view normalized, const PhraseSet& phrases);

/// Full canonicalization used for both reference texts and posts.
std::string normalize(std::string_view text, const PhraseSet& phrases);

TokenSet tokenize(std::string_view normalized);

std::size_t word_count(std::string_view text);

}  // namespace hadithscope
