#include "synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string_view>
#include <unordered_set>

#include "hadithscope/random.hpp"

namespace hadithscope::testing {
namespace {

// Letters that survive normalize_letters unchanged.
constexpr std::array<std::string_view, 27> kLetters = {
    "ا", "ب", "ت", "ث", "ج", "ح", "خ", "د", "ذ", "ر", "ز", "س", "ش", "ص",
    "ض", "ط", "ظ", "ع", "غ", "ف", "ق", "ك", "ل", "م", "ن", "ه", "و"};

constexpr std::array<std::string_view, 6> kPrefixes = {
    "قال رسول الله صلى الله عليه وسلم:", "قال النبي ﷺ", "عن النبي صلى الله عليه وسلم قال",
    "سمعت رسول الله يقول", "قال رسول الله", "قال رسول الله عليه الصلاة والسلام"};

constexpr std::array<std::string_view, 5> kGrades = {"Sahih", "Hasan", "Da'if", "Mawdu", ""};

std::vector<std::string> split_words(const std::string& text) {
  std::vector<std::string> words;
  std::istringstream in(text);
  std::string w;
  while (in >> w) words.push_back(w);
  return words;
}

std::string join(const std::vector<std::string>& words, std::size_t begin, std::size_t end) {
  std::string out;
  for (std::size_t i = begin; i < end; ++i) {
    if (!out.empty()) out += ' ';
    out += words[i];
  }
  return out;
}

std::size_t pick_length(std::mt19937_64& gen, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(uniform_below(gen, hi - lo + 1));
}

}  // namespace

Vocabulary::Vocabulary(std::size_t size, double exponent, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  // Distinct words keep the rank-frequency law intact.
  std::unordered_set<std::string> seen;
  while (words_.size() < size) {
    const std::size_t len = 2 + static_cast<std::size_t>(uniform_below(gen, 6));
    std::string w;
    for (std::size_t i = 0; i < len; ++i) w += kLetters[uniform_below(gen, kLetters.size())];
    if (seen.insert(w).second) words_.push_back(std::move(w));
  }
  cumulative_.resize(size);
  double total = 0.0;
  for (std::size_t r = 0; r < size; ++r) {
    total += 1.0 / std::pow(static_cast<double>(r + 1), exponent);
    cumulative_[r] = total;
  }
  for (auto& c : cumulative_) c /= total;
}

const std::string& Vocabulary::sample(std::mt19937_64& gen) const {
  const double u = uniform_unit(gen);
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  if (it == cumulative_.end()) --it;
  return words_[static_cast<std::size_t>(it - cumulative_.begin())];
}

SyntheticGenerator::SyntheticGenerator(CorpusSpec spec)
    : spec_(spec), vocab_(spec.vocabulary, spec.zipf_exponent, spec.seed ^ 0x766f636162ULL) {}

std::string SyntheticGenerator::random_text(std::mt19937_64& gen) const {
  const std::size_t len = pick_length(gen, spec_.min_words, spec_.max_words);
  std::string out;
  for (std::size_t i = 0; i < len; ++i) {
    if (i) out += ' ';
    out += vocab_.sample(gen);
  }
  return out;
}

ReferenceCorpus SyntheticGenerator::corpus(const PhraseSet& phrases) const {
  std::mt19937_64 gen(spec_.seed);
  std::vector<HadithRecord> records;
  records.reserve(spec_.records);
  RecordId next_id = 1;
  while (records.size() < spec_.records) {
    const GroupId group = next_id;
    const std::string base = random_text(gen);
    const auto base_words = split_words(base);
    const std::size_t variants =
        std::min<std::size_t>(1 + uniform_below(gen, spec_.max_variants), spec_.records - records.size());

    TopicSet topics;
    const std::size_t topic_count = uniform_below(gen, 3);
    for (std::size_t t = 0; t < topic_count; ++t) topics.insert(kTopics[uniform_below(gen, kTopics.size())]);

    for (std::size_t v = 0; v < variants; ++v) {
      std::vector<std::string> words = base_words;
      if (v > 0) {
        for (auto& w : words) {
          if (uniform_unit(gen) < spec_.variant_edit_rate) w = vocab_.sample(gen);
        }
      }
      auto record = make_record(next_id++, group, join(words, 0, words.size()), phrases);
      const std::string_view grade = kGrades[uniform_below(gen, kGrades.size())];
      if (!grade.empty()) record.grade_raw.emplace_back(grade);
      record.grade = normalize_grade(record.grade_raw);
      record.topics = topics;
      record.source_book = "book" + std::to_string(1 + uniform_below(gen, 9));
      records.push_back(std::move(record));
    }
  }
  return ReferenceCorpus(std::move(records), phrases);
}

std::string add_char_noise(const std::string& text, double rate, std::mt19937_64& gen) {
  auto words = split_words(text);
  for (auto& w : words) {
    if (uniform_unit(gen) >= rate) continue;
    // Every letter used here is two bytes in UTF-8.
    const std::size_t letters = w.size() / 2;
    if (letters == 0) continue;
    const std::size_t at = uniform_below(gen, letters) * 2;
    std::string_view replacement = kLetters[uniform_below(gen, kLetters.size())];
    while (w.compare(at, 2, replacement) == 0) replacement = kLetters[uniform_below(gen, kLetters.size())];
    w.replace(at, 2, replacement);
  }
  return join(words, 0, words.size());
}

std::vector<PlantedPost> SyntheticGenerator::posts(const ReferenceCorpus& corpus, const PlantSpec& spec) const {
  std::mt19937_64 gen(spec.seed);
  std::vector<PlantedPost> out;
  out.reserve(spec.planted + spec.distractors);
  const Timestamp origin = std::chrono::sys_days{std::chrono::year{2023} / 1 / 1};
  const auto stamp = [&] {
    return origin + std::chrono::seconds(static_cast<std::int64_t>(uniform_below(gen, 365ULL * 86400)));
  };
  const auto make_id = [&](std::size_t i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "p%07zu", i);
    return std::string(buf);
  };

  for (std::size_t i = 0; i < spec.planted + spec.distractors; ++i) {
    PlantedPost planted;
    planted.post.post_id = make_id(i + 1);
    planted.post.lang = "ar";
    const std::string_view prefix = kPrefixes[uniform_below(gen, kPrefixes.size())];
    std::string body;
    if (i < spec.planted) {
      const auto& record = corpus.records()[uniform_below(gen, corpus.size())];
      const auto words = split_words(record.matn_raw);
      const double frac = spec.min_span + (spec.max_span - spec.min_span) * uniform_unit(gen);
      const std::size_t span = std::clamp<std::size_t>(
          static_cast<std::size_t>(std::lround(frac * static_cast<double>(words.size()))), 1, words.size());
      const std::size_t start = uniform_below(gen, words.size() - span + 1);
      body = add_char_noise(join(words, start, start + span), spec.char_noise, gen);
      planted.source = record.id;
      planted.group = record.variant_group;
    } else {
      body = random_text(gen);
    }
    planted.post.text = std::string(prefix) + " " + body;
    planted.post.timestamp = stamp();
    out.push_back(std::move(planted));
  }
  return out;
}

MatchResult brute_force_match(const ReferenceCorpus& corpus, const TokenSet& tokens, double threshold,
                              std::string post_id) {
  MatchResult best;
  best.post_id = std::move(post_id);
  best.threshold = threshold;
  for (const auto& r : corpus.records()) {
    if (r.token_set.empty()) continue;
    const double j = exact_jaccard(tokens, r.token_set);
    if (j <= 0.0) continue;
    if (!best.hadith_id || j > best.jaccard || (j == best.jaccard && r.id < *best.hadith_id)) {
      best.hadith_id = r.id;
      best.variant_group = r.variant_group;
      best.jaccard = j;
    }
  }
  best.matched = best.hadith_id.has_value() && best.jaccard >= threshold;
  return best;
}

std::string to_jsonl_lines(const std::vector<PlantedPost>& posts) {
  std::string out;
  for (const auto& p : posts) {
    out += to_jsonl(p.post);
    out += '\n';
  }
  return out;
}

}  // namespace hadithscope::testing
