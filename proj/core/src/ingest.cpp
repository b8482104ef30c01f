#include "hadithscope/ingest.hpp"

#include <array>
#include <fstream>
#include <istream>

#include <boost/iostreams/device/file.hpp>
#include <boost/iostreams/filter/bzip2.hpp>
#include <boost/iostreams/filter/gzip.hpp>
#include <boost/iostreams/filtering_stream.hpp>
#include <nlohmann/json.hpp>

#include "hadithscope/errors.hpp"
#include "hadithscope/hashing.hpp"

namespace hadithscope {
namespace {

using nlohmann::json;

std::optional<std::string> string_field(const json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) return std::nullopt;
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number_unsigned()) return std::to_string(it->get<std::uint64_t>());
  if (it->is_number_integer()) return std::to_string(it->get<std::int64_t>());
  return std::nullopt;
}

std::optional<std::string> post_text(const json& obj) {
  if (auto full = string_field(obj, "full_text")) return full;
  if (const auto ext = obj.find("extended_tweet"); ext != obj.end() && ext->is_object()) {
    if (auto full = string_field(*ext, "full_text")) return full;
  }
  return string_field(obj, "text");
}

std::optional<Timestamp> post_time(const json& obj) {
  for (const char* key : {"ts_utc", "created_at"}) {
    if (auto text = string_field(obj, key)) return parse_timestamp(*text);
  }
  if (auto ms = string_field(obj, "timestamp_ms")) {
    try {
      std::size_t used = 0;
      const long long value = std::stoll(*ms, &used);
      if (used != ms->size()) return std::nullopt;
      return Timestamp{std::chrono::seconds{value / 1000}};
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }
  return std::nullopt;
}

std::string fold_for_phrase(std::string_view text) { return normalize_letters(text); }

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

IngestReport& IngestReport::operator+=(const IngestReport& o) {
  lines_read += o.lines_read;
  malformed_skipped += o.malformed_skipped;
  lang_filtered += o.lang_filtered;
  phrase_filtered += o.phrase_filtered;
  duplicates_dropped += o.duplicates_dropped;
  emitted += o.emitted;
  duplicate_ids += o.duplicate_ids;
  duplicate_texts += o.duplicate_texts;
  return *this;
}

std::optional<PostRecord> parse_post(std::string_view line) {
  const json obj = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (obj.is_discarded() || !obj.is_object()) return std::nullopt;

  PostRecord post;
  auto id = string_field(obj, "post_id");
  if (!id) id = string_field(obj, "id_str");
  if (!id) id = string_field(obj, "id");
  auto text = post_text(obj);
  auto lang = string_field(obj, "lang");
  const auto ts = post_time(obj);
  if (!id || id->empty() || !text || text->empty() || !lang || !ts) return std::nullopt;
  post.post_id = std::move(*id);
  post.text = std::move(*text);
  post.lang = std::move(*lang);
  post.timestamp = *ts;
  return post;
}

std::string to_jsonl(const PostRecord& post) {
  nlohmann::ordered_json obj;
  obj["post_id"] = post.post_id;
  obj["text"] = post.text;
  obj["lang"] = post.lang;
  obj["ts_utc"] = format_rfc3339(post.timestamp);
  return obj.dump(-1, ' ', false, json::error_handler_t::replace);
}

bool lang_matches(const PostRecord& post, std::string_view tag) { return post.lang == tag; }

PhraseFilter::PhraseFilter(const std::vector<std::string>& phrases) {
  for (const auto& p : phrases) {
    std::string folded = fold_for_phrase(trim(p));
    if (!folded.empty()) folded_.push_back(std::move(folded));
  }
}

bool PhraseFilter::matches(std::string_view raw_text) const {
  if (folded_.empty()) return true;
  const std::string folded = fold_for_phrase(raw_text);
  for (const auto& p : folded_) {
    if (folded.find(p) != std::string::npos) return true;
  }
  return false;
}

std::vector<std::string> load_phrase_list(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open phrase file " + path.string());
  std::vector<std::string> phrases;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    std::string_view view = line;
    if (first && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
    first = false;
    view = trim(view);
    if (view.empty() || view.front() == '#') continue;
    phrases.emplace_back(view);
  }
  return phrases;
}

std::optional<DedupMode> parse_dedup_mode(std::string_view name) {
  if (name == "id") return DedupMode::id;
  if (name == "text") return DedupMode::text;
  return std::nullopt;
}

std::string_view to_string(DedupMode mode) { return mode == DedupMode::id ? "id" : "text"; }

Deduplicator::Verdict Deduplicator::check(const PostRecord& post) {
  if (!ids_.insert(post.post_id).second) return Verdict::duplicate_id;
  if (mode_ == DedupMode::text) {
    const auto h = stable_hash(normalize(post.text, phrases_));
    if (!texts_.insert(h).second) return Verdict::duplicate_text;
  }
  return Verdict::keep;
}

PostStream::PostStream(std::istream& in, const IngestOptions& options)
    : in_(in),
      lang_(options.lang),
      phrase_(options.phrases),
      own_dedup_(options.dedup, options.keyrings),
      dedup_(&own_dedup_) {}

std::optional<PostRecord> PostStream::next() {
  std::string line;
  for (;;) {
    try {
      if (!std::getline(in_, line)) {
        if (in_.bad()) throw IoError("read failure", offset_);
        return std::nullopt;
      }
    } catch (const IoError&) {
      throw;
    } catch (const std::exception& e) {
      throw IoError(std::string("read failure: ") + e.what(), offset_);
    }
    offset_ += line.size() + 1;
    if (trim(line).empty()) continue;
    ++report_.lines_read;

    auto post = parse_post(line);
    if (!post) {
      ++report_.malformed_skipped;
      continue;
    }
    if (lang_ && !lang_matches(*post, *lang_)) {
      ++report_.lang_filtered;
      continue;
    }
    if (!phrase_.matches(post->text)) {
      ++report_.phrase_filtered;
      continue;
    }
    switch (dedup_->check(*post)) {
      case Deduplicator::Verdict::duplicate_id:
        ++report_.duplicates_dropped;
        ++report_.duplicate_ids;
        continue;
      case Deduplicator::Verdict::duplicate_text:
        ++report_.duplicates_dropped;
        ++report_.duplicate_texts;
        continue;
      case Deduplicator::Verdict::keep:
        break;
    }
    ++report_.emitted;
    return post;
  }
}

std::unique_ptr<std::istream> open_input(const std::filesystem::path& path) {
  std::array<unsigned char, 3> magic{};
  {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw InputError("cannot open " + path.string());
    probe.read(reinterpret_cast<char*>(magic.data()), magic.size());
  }
  namespace io = boost::iostreams;
  auto stream = std::make_unique<io::filtering_istream>();
  if (magic[0] == 0x1f && magic[1] == 0x8b) {
    stream->push(io::gzip_decompressor());
  } else if (magic[0] == 'B' && magic[1] == 'Z' && magic[2] == 'h') {
    stream->push(io::bzip2_decompressor());
  }
  stream->push(io::file_source(path.string(), std::ios::binary));
  return stream;
}

std::vector<PostRecord> read_posts(std::istream& in, IngestReport* report) {
  IngestOptions options;
  options.lang.reset();
  options.phrases.clear();
  PostStream stream(in, options);
  std::vector<PostRecord> posts;
  while (auto post = stream.next()) posts.push_back(std::move(*post));
  if (report) *report = stream.report();
  return posts;
}

std::vector<PostRecord> filter_lang(std::vector<PostRecord> posts, std::string_view tag) {
  std::erase_if(posts, [&](const PostRecord& p) { return !lang_matches(p, tag); });
  return posts;
}

std::vector<PostRecord> filter_phrase(std::vector<PostRecord> posts, std::string_view phrase) {
  if (trim(phrase).empty()) throw ParameterError("filter phrase must not be empty");
  const PhraseFilter filter({std::string(phrase)});
  std::erase_if(posts, [&](const PostRecord& p) { return !filter.matches(p.text); });
  return posts;
}

std::vector<PostRecord> dedup(std::vector<PostRecord> posts, DedupMode mode,
                              const PhraseSet& keyrings) {
  Deduplicator d(mode, keyrings);
  std::erase_if(posts, [&](const PostRecord& p) {
    return d.check(p) != Deduplicator::Verdict::keep;
  });
  return posts;
}

}  // namespace hadithscope
