#include "hadithscope/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "hadithscope/csv.hpp"
#include "hadithscope/errors.hpp"

namespace hadithscope {
namespace {

constexpr std::size_t kMaxMessages = 20;

struct TopicName {
  TopicCategory topic;
  std::string_view camel;
  std::string_view spaced;
  std::string_view code;
};

constexpr std::array<TopicName, kTopicCount> kTopicNames = {{
    {TopicCategory::knowledge, "Knowledge", "knowledge", "k"},
    {TopicCategory::biography_history, "BiographyHistory", "biography and history", "bh"},
    {TopicCategory::jurisprudence, "Jurisprudence", "jurisprudence", "j"},
    {TopicCategory::interpretation, "Interpretation", "interpretation", "i"},
    {TopicCategory::virtues, "Virtues", "virtues", "v"},
    {TopicCategory::asceticism, "Asceticism", "asceticism", "a"},
    {TopicCategory::supplications_remembrances, "SupplicationsRemembrances",
     "supplications and remembrances", "sr"},
    {TopicCategory::doctrine, "Doctrine", "doctrine", "d"},
    {TopicCategory::ethics_etiquette, "EthicsEtiquette", "ethics and etiquette", "ee"},
}};

constexpr std::array<std::string_view, 5> kLevelNames = {"authentic", "good", "weak", "fabricated",
                                                         "unknown"};

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_list(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto end = std::min(s.find(sep, start), s.size());
    const auto item = trim(s.substr(start, end - start));
    if (!item.empty()) out.emplace_back(item);
    start = end + 1;
  }
  return out;
}

std::string grade_key(std::string_view s) { return ascii_lower(normalize_letters(s)); }

std::optional<std::int64_t> parse_int(std::string_view s) {
  s = trim(s);
  std::int64_t value = 0;
  const auto result = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || result.ec != std::errc{} || result.ptr != s.data() + s.size()) {
    return std::nullopt;
  }
  return value;
}

// Fields of one input row before validation; shared by the CSV and JSONL
// readers.
struct RawRow {
  std::optional<std::string> id;
  std::optional<std::string> matn;
  std::optional<std::string> variant_group;
  std::optional<std::string> isnad;
  std::string book;
  std::string chapter;
  std::vector<std::string> grades;
  std::optional<std::string> grade_level;
  std::vector<std::string> topics;
};

class CorpusBuilder {
 public:
  CorpusBuilder(const PhraseSet& phrases, const GradeKeywordMap& grades)
      : phrases_(phrases), grades_(grades) {}

  void malformed(std::size_t line, const std::string& why) {
    ++report_.malformed;
    note(line, why);
  }

  void add(std::size_t line, RawRow row) {
    const auto id = row.id ? parse_int(*row.id) : std::nullopt;
    if (!id) {
      malformed(line, "invalid id '" + row.id.value_or("") + "'");
      return;
    }
    if (!seen_.insert(*id).second) {
      malformed(line, "duplicate id " + std::to_string(*id));
      return;
    }
    GroupId group = *id;
    if (row.variant_group && !trim(*row.variant_group).empty()) {
      const auto parsed = parse_int(*row.variant_group);
      if (!parsed) {
        seen_.erase(*id);
        malformed(line, "invalid variant_group '" + *row.variant_group + "'");
        return;
      }
      group = *parsed;
    }
    HadithRecord record = make_record(*id, group, row.matn.value_or(""), phrases_);
    if (record.matn_norm.empty()) {
      seen_.erase(*id);
      ++report_.dropped_empty;
      note(line, "empty normalized matn for id " + std::to_string(*id));
      return;
    }
    if (row.isnad && !row.isnad->empty()) record.isnad_raw = std::move(row.isnad);
    record.source_book = std::move(row.book);
    record.chapter = std::move(row.chapter);
    record.grade_raw = std::move(row.grades);
    std::optional<AuthenticityLevel> fixed;
    if (row.grade_level && !trim(*row.grade_level).empty()) {
      fixed = parse_authenticity(*row.grade_level);
      if (!fixed) note(line, "ignoring unknown grade_level '" + *row.grade_level + "'");
    }
    record.grade = fixed ? *fixed : grades_.classify(record.grade_raw);
    for (const auto& name : row.topics) {
      if (const auto topic = parse_topic(name)) {
        record.topics.insert(*topic);
      } else {
        ++report_.unknown_topics;
        note(line, "unknown topic '" + name + "'");
      }
    }
    records_.push_back(std::move(record));
    ++report_.loaded;
  }

  LoadResult finish() {
    return LoadResult{ReferenceCorpus(std::move(records_), phrases_), std::move(report_)};
  }

  LoadReport& report() { return report_; }

 private:
  void note(std::size_t line, const std::string& why) {
    if (report_.messages.size() < kMaxMessages) {
      report_.messages.push_back("line " + std::to_string(line) + ": " + why);
    }
  }

  const PhraseSet& phrases_;
  const GradeKeywordMap& grades_;
  LoadReport report_;
  std::vector<HadithRecord> records_;
  std::unordered_set<RecordId> seen_;
};

LoadResult load_csv(std::istream& in, CorpusBuilder builder) {
  csv::Reader reader(in);
  csv::Row row;
  if (!reader.next(row)) throw InputError("empty corpus file: missing header row");
  const csv::Header header(row);
  const auto col = [&](std::string_view name) { return header.find(name); };
  const auto id_col = col("id");
  const auto matn_col = col("matn");
  if (!id_col) throw InputError("missing column id");
  if (!matn_col) throw InputError("missing column matn");
  const auto group_col = col("variant_group");
  const auto isnad_col = col("isnad");
  const auto book_col = col("book");
  const auto chapter_col = col("chapter");
  const auto grade_en_col = col("grade_en");
  const auto grade_ar_col = col("grade_ar");
  const auto grade_col = col("grade");
  const auto level_col = col("grade_level");
  const auto topics_col = col("topics");

  while (reader.next(row)) {
    if (row.size() == 1 && row[0].empty()) continue;  // blank line
    ++builder.report().rows_read;
    if (reader.last_unterminated() || row.size() != header.size()) {
      builder.malformed(reader.line(), "expected " + std::to_string(header.size()) +
                                           " fields, found " + std::to_string(row.size()));
      continue;
    }
    const auto get = [&](std::optional<std::size_t> c) -> std::optional<std::string> {
      if (!c) return std::nullopt;
      return row[*c];
    };
    RawRow raw;
    raw.id = get(id_col);
    raw.matn = get(matn_col);
    raw.variant_group = get(group_col);
    raw.isnad = get(isnad_col);
    raw.book = get(book_col).value_or("");
    raw.chapter = get(chapter_col).value_or("");
    for (const auto& c : {grade_en_col, grade_ar_col}) {
      if (auto g = get(c); g && !trim(*g).empty()) raw.grades.emplace_back(trim(*g));
    }
    if (auto g = get(grade_col)) {
      for (auto& item : split_list(*g, ';')) raw.grades.push_back(std::move(item));
    }
    raw.grade_level = get(level_col);
    if (auto t = get(topics_col)) raw.topics = split_list(*t, ';');
    builder.add(reader.line(), std::move(raw));
  }
  return builder.finish();
}

std::optional<std::string> json_text(const nlohmann::json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number_integer()) return std::to_string(it->get<std::int64_t>());
  return it->dump();
}

std::vector<std::string> json_list(const nlohmann::json& obj, const char* key, char sep) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return {};
  if (it->is_array()) {
    std::vector<std::string> out;
    for (const auto& item : *it) {
      if (item.is_string() && !trim(item.get<std::string>()).empty()) {
        out.emplace_back(trim(item.get<std::string>()));
      }
    }
    return out;
  }
  if (it->is_string()) {
    if (sep == '\0') {
      const auto s = trim(it->get<std::string>());
      if (s.empty()) return {};
      return {std::string(s)};
    }
    return split_list(it->get<std::string>(), sep);
  }
  return {};
}

LoadResult load_jsonl(std::istream& in, CorpusBuilder builder) {
  std::string line;
  std::size_t line_no = 0;
  std::size_t objects = 0;
  std::size_t missing_matn = 0;
  std::size_t missing_id = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    ++builder.report().rows_read;
    nlohmann::json obj = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (obj.is_discarded() || !obj.is_object()) {
      builder.malformed(line_no, "invalid JSON object");
      continue;
    }
    ++objects;
    RawRow raw;
    raw.id = json_text(obj, "id");
    raw.matn = json_text(obj, "matn");
    if (!raw.id) ++missing_id;
    if (!raw.matn) ++missing_matn;
    raw.variant_group = json_text(obj, "variant_group");
    raw.isnad = json_text(obj, "isnad");
    raw.book = json_text(obj, "book").value_or("");
    raw.chapter = json_text(obj, "chapter").value_or("");
    for (const char* key : {"grade_en", "grade_ar"}) {
      for (auto& g : json_list(obj, key, '\0')) raw.grades.push_back(std::move(g));
    }
    for (auto& g : json_list(obj, "grade", ';')) raw.grades.push_back(std::move(g));
    raw.grade_level = json_text(obj, "grade_level");
    raw.topics = json_list(obj, "topics", ';');
    builder.add(line_no, std::move(raw));
  }
  if (objects > 0 && missing_id == objects) throw InputError("missing column id");
  if (objects > 0 && missing_matn == objects) throw InputError("missing column matn");
  return builder.finish();
}

}  // namespace

std::string_view to_string(AuthenticityLevel level) {
  return kLevelNames[static_cast<std::size_t>(level)];
}

std::optional<AuthenticityLevel> parse_authenticity(std::string_view name) {
  const std::string key = ascii_lower(trim(name));
  for (std::size_t i = 0; i < kLevelNames.size(); ++i) {
    if (key == kLevelNames[i]) return kAuthenticityLevels[i];
  }
  return std::nullopt;
}

std::string_view to_string(TopicCategory topic) {
  return kTopicNames[static_cast<std::size_t>(topic)].camel;
}

std::optional<TopicCategory> parse_topic(std::string_view name) {
  const std::string key = ascii_lower(trim(name));
  for (const auto& entry : kTopicNames) {
    if (key == ascii_lower(entry.camel) || key == entry.spaced || key == entry.code) {
      return entry.topic;
    }
  }
  return std::nullopt;
}

std::size_t TopicSet::size() const {
  std::size_t n = 0;
  for (auto t : kTopics) n += contains(t) ? 1 : 0;
  return n;
}

std::string TopicSet::to_string() const {
  std::string out;
  for (auto t : kTopics) {
    if (!contains(t)) continue;
    if (!out.empty()) out.push_back(';');
    out.append(hadithscope::to_string(t));
  }
  return out;
}

GradeKeywordMap GradeKeywordMap::defaults() {
  GradeKeywordMap map;
  for (auto kw : {"sahih", "saheeh", "authentic", "صحيح"}) map.add(AuthenticityLevel::authentic, kw);
  for (auto kw : {"hasan", "good", "حسن"}) map.add(AuthenticityLevel::good, kw);
  for (auto kw : {"daif", "da'if", "da\xE2\x80\x98if", "da\xE2\x80\x99if", "daeef", "dhaif",
                  "weak", "ضعيف"}) {
    map.add(AuthenticityLevel::weak, kw);
  }
  for (auto kw : {"mawdu", "maudu", "fabricated", "موضوع", "مكذوب"}) {
    map.add(AuthenticityLevel::fabricated, kw);
  }
  return map;
}

GradeKeywordMap GradeKeywordMap::parse(std::istream& in) {
  GradeKeywordMap map;
  std::optional<AuthenticityLevel> section;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = trim(line);
    if (line_no == 1 && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
    if (view.empty() || view.front() == '#') continue;
    if (view.front() == '[' && view.back() == ']') {
      section = parse_authenticity(view.substr(1, view.size() - 2));
      if (!section || *section == AuthenticityLevel::unknown) {
        throw InputError("grade keyword file line " + std::to_string(line_no) +
                         ": unknown section " + std::string(view));
      }
      continue;
    }
    if (!section) {
      throw InputError("grade keyword file line " + std::to_string(line_no) +
                       ": keyword outside a section");
    }
    map.add(*section, view);
  }
  return map;
}

GradeKeywordMap GradeKeywordMap::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open grade keyword file " + path.string());
  return parse(in);
}

void GradeKeywordMap::add(AuthenticityLevel level, std::string_view keyword) {
  if (level == AuthenticityLevel::unknown) throw ParameterError("Unknown has no keywords");
  std::string key = grade_key(keyword);
  if (key.empty()) return;
  auto& list = keywords_[static_cast<std::size_t>(level)];
  if (std::find(list.begin(), list.end(), key) == list.end()) list.push_back(std::move(key));
}

const std::vector<std::string>& GradeKeywordMap::keywords(AuthenticityLevel level) const {
  if (level == AuthenticityLevel::unknown) throw ParameterError("Unknown has no keywords");
  return keywords_[static_cast<std::size_t>(level)];
}

AuthenticityLevel GradeKeywordMap::classify(std::span<const std::string> raw) const {
  std::optional<std::size_t> found;
  for (const auto& text : raw) {
    const std::string haystack = grade_key(text);
    for (std::size_t level = 0; level < keywords_.size(); ++level) {
      const bool hit = std::any_of(keywords_[level].begin(), keywords_[level].end(),
                                   [&](const std::string& kw) {
                                     return haystack.find(kw) != std::string::npos;
                                   });
      if (!hit) continue;
      if (found && *found != level) return AuthenticityLevel::unknown;
      found = level;
    }
  }
  return found ? kAuthenticityLevels[*found] : AuthenticityLevel::unknown;
}

AuthenticityLevel normalize_grade(std::span<const std::string> raw, const GradeKeywordMap& keywords) {
  return keywords.classify(raw);
}

ReferenceCorpus::ReferenceCorpus(std::vector<HadithRecord> records, PhraseSet phrases)
    : records_(std::move(records)), phrases_(std::move(phrases)) {
  by_id_.reserve(records_.size());
  for (std::size_t i = 0; i < records_.size(); ++i) {
    if (!by_id_.emplace(records_[i].id, i).second) {
      throw InputError("duplicate record id " + std::to_string(records_[i].id));
    }
    by_group_[records_[i].variant_group].push_back(records_[i].id);
  }
  for (auto& [group, ids] : by_group_) std::sort(ids.begin(), ids.end());
}

const HadithRecord* ReferenceCorpus::find(RecordId id) const {
  const auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : &records_[it->second];
}

std::span<const RecordId> ReferenceCorpus::group_members(GroupId group) const {
  const auto it = by_group_.find(group);
  if (it == by_group_.end()) return {};
  return it->second;
}

HadithRecord make_record(RecordId id, GroupId group, std::string matn_raw, const PhraseSet& phrases) {
  HadithRecord record;
  record.id = id;
  record.variant_group = group;
  record.matn_norm = normalize(matn_raw, phrases);
  record.token_set = tokenize(record.matn_norm);
  record.matn_raw = std::move(matn_raw);
  return record;
}

std::optional<CorpusFormat> parse_corpus_format(std::string_view name) {
  const std::string key = ascii_lower(name);
  if (key == "csv") return CorpusFormat::csv;
  if (key == "jsonl" || key == "json") return CorpusFormat::jsonl;
  return std::nullopt;
}

CorpusFormat guess_corpus_format(const std::filesystem::path& path) {
  const std::string ext = ascii_lower(path.extension().string());
  return ext == ".jsonl" || ext == ".json" ? CorpusFormat::jsonl : CorpusFormat::csv;
}

LoadResult load_reference(std::istream& in, CorpusFormat format, const PhraseSet& phrases,
                          const GradeKeywordMap& grades) {
  CorpusBuilder builder(phrases, grades);
  return format == CorpusFormat::csv ? load_csv(in, std::move(builder))
                                     : load_jsonl(in, std::move(builder));
}

LoadResult load_reference(const std::filesystem::path& path, CorpusFormat format,
                          const PhraseSet& phrases, const GradeKeywordMap& grades) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open corpus file " + path.string());
  return load_reference(in, format, phrases, grades);
}

void write_corpus_csv(std::ostream& out, const ReferenceCorpus& corpus) {
  csv::write(out, "id", "variant_group", "matn", "isnad", "book", "chapter", "grade",
             "grade_level", "topics");
  for (const auto& r : corpus.records()) {
    std::string grades;
    for (const auto& g : r.grade_raw) {
      if (!grades.empty()) grades.push_back(';');
      grades += g;
    }
    csv::write(out, std::to_string(r.id), std::to_string(r.variant_group), r.matn_raw,
               r.isnad_raw.value_or(""), r.source_book, r.chapter, grades, to_string(r.grade),
               r.topics.to_string());
  }
}

}  // namespace hadithscope
