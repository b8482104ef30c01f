#include "hadithscope/arabic_normalize.hpp"

#include <algorithm>
#include <fstream>
#include <istream>

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include "hadithscope/errors.hpp"

namespace hadithscope {
namespace {

constexpr char32_t kTatweel = 0x0640;
constexpr char32_t kReplacement = 0xFFFD;

bool in_arabic_block(char32_t c) { return c >= 0x0600 && c <= 0x06FF; }

bool is_diacritic(char32_t c) { return (c >= 0x064B && c <= 0x065F) || c == 0x0670; }

bool is_arabic_punctuation(char32_t c) {
  return c == 0x060C || c == 0x061B || c == 0x061F || (c >= 0x066A && c <= 0x066D) ||
         c == 0x06D4;
}

bool is_space(char32_t c) { return u_isUWhiteSpace(static_cast<UChar32>(c)); }

bool is_punctuation(char32_t c) {
  return u_ispunct(static_cast<UChar32>(c)) || is_arabic_punctuation(c);
}

char32_t fold_letter(char32_t c) {
  switch (c) {
    case 0x0622:  // alef with madda
    case 0x0623:  // alef with hamza above
    case 0x0625:  // alef with hamza below
    case 0x0671:  // alef wasla
      return 0x0627;
    case 0x0649:  // alef maqsura
    case 0x0626:  // yeh with hamza
      return 0x064A;
    case 0x0629:  // teh marbuta
      return 0x0647;
    case 0x0624:  // waw with hamza
      return 0x0648;
    default:
      return c;
  }
}

template <class Fn>
void for_each_codepoint(std::string_view text, Fn&& fn) {
  const auto* bytes = reinterpret_cast<const std::uint8_t*>(text.data());
  const auto length = static_cast<std::int32_t>(text.size());
  std::int32_t i = 0;
  while (i < length) {
    UChar32 c;
    U8_NEXT(bytes, i, length, c);
    fn(c < 0 ? kReplacement : static_cast<char32_t>(c));
  }
}

void append_utf8(std::string& out, char32_t c) {
  std::uint8_t buffer[U8_MAX_LENGTH];
  std::int32_t length = 0;
  U8_APPEND_UNSAFE(buffer, length, static_cast<UChar32>(c));
  out.append(reinterpret_cast<const char*>(buffer), static_cast<std::size_t>(length));
}

// Splits on Unicode whitespace.
std::vector<std::string_view> split_words(std::string_view text) {
  std::vector<std::string_view> words;
  const auto* bytes = reinterpret_cast<const std::uint8_t*>(text.data());
  const auto length = static_cast<std::int32_t>(text.size());
  std::int32_t i = 0;
  std::int32_t word_start = -1;
  while (i < length) {
    const std::int32_t at = i;
    UChar32 c;
    U8_NEXT(bytes, i, length, c);
    const bool space = c >= 0 && is_space(static_cast<char32_t>(c));
    if (space) {
      if (word_start >= 0) {
        words.push_back(text.substr(word_start, at - word_start));
        word_start = -1;
      }
    } else if (word_start < 0) {
      word_start = at;
    }
  }
  if (word_start >= 0) words.push_back(text.substr(word_start));
  return words;
}

std::vector<std::string> to_strings(const std::vector<std::string_view>& views) {
  return {views.begin(), views.end()};
}

template <class Words>
std::string join_words(const Words& words) {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out.push_back(' ');
    out.append(w);
  }
  return out;
}

void order_phrases(std::vector<std::vector<std::string>>& phrases) {
  std::sort(phrases.begin(), phrases.end(), [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() > b.size();
    return a < b;
  });
  phrases.erase(std::unique(phrases.begin(), phrases.end()), phrases.end());
}

std::vector<std::vector<std::string>> prepare_phrases(const std::vector<std::string>& raw) {
  std::vector<std::vector<std::string>> out;
  for (const auto& phrase : raw) {
    const std::string norm = normalize(phrase, PhraseSet{});
    if (norm.empty()) continue;
    out.push_back(to_strings(split_words(norm)));
  }
  order_phrases(out);
  return out;
}

template <class Phrase>
bool matches_at(const std::vector<std::string_view>& words, std::size_t pos, const Phrase& phrase) {
  if (phrase.size() > words.size() - pos) return false;
  return std::equal(phrase.begin(), phrase.end(), words.begin() + static_cast<std::ptrdiff_t>(pos));
}

std::string_view trim_ascii(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

}  // namespace

PhraseSet PhraseSet::defaults() {
  static const PhraseSet built = from_lists(
      {"قال رسول الله", "قال النبي", "قال الرسول", "قال رسول الله صلى الله عليه وسلم",
       "سمعت رسول الله يقول", "سمعت النبي يقول", "عن رسول الله قال", "عن النبي قال",
       "أن رسول الله قال", "أن النبي قال", "يقول رسول الله", "يقول النبي", "قال المصطفى",
       "قال الحبيب"},
      {"صلى الله عليه وسلم", "صلى الله عليه وآله وسلم", "عليه الصلاة والسلام", "عليه السلام",
       "رضي الله عنه", "رضي الله عنها", "رضي الله عنهما"});
  return built;
}

PhraseSet PhraseSet::from_lists(const std::vector<std::string>& leading,
                                const std::vector<std::string>& infix) {
  PhraseSet set;
  set.leading_ = prepare_phrases(leading);
  set.infix_ = prepare_phrases(infix);
  return set;
}

PhraseSet PhraseSet::parse(std::istream& in) {
  std::vector<std::string> leading;
  std::vector<std::string> infix;
  std::vector<std::string>* section = &leading;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (line_no == 1 && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
    view = trim_ascii(view);
    if (view.empty() || view.front() == '#') continue;
    if (view.front() == '[' && view.back() == ']') {
      const auto name = view.substr(1, view.size() - 2);
      if (name == "leading") {
        section = &leading;
      } else if (name == "infix") {
        section = &infix;
      } else {
        throw InputError("keyring file line " + std::to_string(line_no) + ": unknown section [" +
                         std::string(name) + "]");
      }
      continue;
    }
    section->emplace_back(view);
  }
  return from_lists(leading, infix);
}

PhraseSet PhraseSet::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open keyring file " + path.string());
  return parse(in);
}

std::vector<std::string> PhraseSet::leading_phrases() const {
  std::vector<std::string> out;
  for (const auto& p : leading_) out.push_back(join_words(p));
  return out;
}

std::vector<std::string> PhraseSet::infix_fragments() const {
  std::vector<std::string> out;
  for (const auto& p : infix_) out.push_back(join_words(p));
  return out;
}

TokenSet::TokenSet(std::vector<std::string> words) : tokens_(std::move(words)) {
  std::erase_if(tokens_, [](const std::string& w) { return w.empty(); });
  std::sort(tokens_.begin(), tokens_.end());
  tokens_.erase(std::unique(tokens_.begin(), tokens_.end()), tokens_.end());
}

bool TokenSet::contains(std::string_view word) const {
  return std::binary_search(tokens_.begin(), tokens_.end(), word);
}

std::string assert_arabic(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_separator = false;
  for_each_codepoint(text, [&](char32_t c) {
    if (in_arabic_block(c)) {
      if (pending_separator && !out.empty()) out.push_back(' ');
      pending_separator = false;
      append_utf8(out, c);
    } else if (is_space(c) || is_punctuation(c)) {
      pending_separator = true;
    }
  });
  return out;
}

std::string strip_punctuation(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for_each_codepoint(text, [&](char32_t c) {
    if (is_punctuation(c)) {
      out.push_back(' ');
    } else {
      append_utf8(out, c);
    }
  });
  return out;
}

std::string normalize_letters(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for_each_codepoint(text, [&](char32_t c) {
    if (is_diacritic(c) || c == kTatweel) return;
    append_utf8(out, fold_letter(c));
  });
  return out;
}

std::string collapse_spaces(std::string_view text) { return join_words(split_words(text)); }

std::string strip_keyrings(std::string_view normalized, const PhraseSet& phrases) {
  if (phrases.empty()) return collapse_spaces(normalized);
  std::vector<std::string_view> words = split_words(normalized);
  bool changed = true;
  while (changed && !words.empty()) {
    changed = false;
    for (const auto& phrase : phrases.leading_words()) {
      if (matches_at(words, 0, phrase)) {
        words.erase(words.begin(), words.begin() + static_cast<std::ptrdiff_t>(phrase.size()));
        changed = true;
        break;
      }
    }
    std::vector<std::string_view> kept;
    kept.reserve(words.size());
    for (std::size_t i = 0; i < words.size();) {
      std::size_t skip = 0;
      for (const auto& fragment : phrases.infix_words()) {
        if (matches_at(words, i, fragment)) {
          skip = fragment.size();
          break;
        }
      }
      if (skip > 0) {
        i += skip;
        changed = true;
      } else {
        kept.push_back(words[i++]);
      }
    }
    words = std::move(kept);
  }
  return join_words(words);
}

std::string normalize(std::string_view text, const PhraseSet& phrases) {
  return strip_keyrings(
      collapse_spaces(normalize_letters(strip_punctuation(assert_arabic(text)))), phrases);
}

TokenSet tokenize(std::string_view normalized) {
  return TokenSet(to_strings(split_words(normalized)));
}

std::size_t word_count(std::string_view text) { return split_words(text).size(); }

}  // namespace hadithscope
