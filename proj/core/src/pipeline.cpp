#include "hadithscope/pipeline.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <zlib.h>

#include "hadithscope/errors.hpp"
#include "hadithscope/csv.hpp"
#include "hadithscope/log.hpp"
#include "hadithscope/parallel.hpp"

namespace hadithscope {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

template <class T>
T parse_value(const std::string& key, const std::string& text) {
  T v{};
  const auto r = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || r.ec != std::errc{} || r.ptr != text.data() + text.size()) {
    throw InputError("config: invalid value '" + text + "' for " + key);
  }
  return v;
}

std::string hex32(std::uint32_t v) {
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08x", v);
  return buf;
}

std::string crc32_hex(std::string_view bytes) {
  const auto crc = crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()),
                         static_cast<uInt>(bytes.size()));
  return hex32(static_cast<std::uint32_t>(crc));
}

ordered_json to_json(const LoadReport& r) {
  return {{"rows_read", r.rows_read},       {"loaded", r.loaded},
          {"dropped_empty", r.dropped_empty}, {"malformed", r.malformed},
          {"unknown_topics", r.unknown_topics}};
}

ordered_json to_json(const IngestReport& r) {
  return {{"lines_read", r.lines_read},
          {"malformed_skipped", r.malformed_skipped},
          {"lang_filtered", r.lang_filtered},
          {"phrase_filtered", r.phrase_filtered},
          {"duplicates_dropped", r.duplicates_dropped},
          {"duplicate_ids", r.duplicate_ids},
          {"duplicate_texts", r.duplicate_texts},
          {"emitted", r.emitted}};
}

// Writes `<dir>/<name>.partial`; commit() renames it to `<dir>/<name>`.
class Artifact {
 public:
  Artifact(const fs::path& dir, const std::string& name)
      : final_(dir / name), partial_(dir / (name + ".partial")) {
    out_.open(partial_, std::ios::binary | std::ios::trunc);
    if (!out_) throw IoError("cannot write " + partial_.string(), 0);
  }

  std::ostream& stream() { return out_; }

  fs::path commit() {
    out_.close();
    if (!out_) throw IoError("failed writing " + partial_.string(), 0);
    fs::rename(partial_, final_);
    return final_;
  }

 private:
  fs::path final_;
  fs::path partial_;
  std::ofstream out_;
};

template <class Fn>
auto run_stage(const std::string& stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const InputError& e) {
    throw StageError(stage, e.what(), 2);
  } catch (const std::exception& e) {
    throw StageError(stage, e.what(), 1);
  }
}

fs::path resolve(const fs::path& base, const std::string& value) {
  fs::path p(value);
  if (!base.empty() && p.is_relative()) p = base / p;
  return p.lexically_normal();
}

void require_file(const std::string& key, const fs::path& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) {
    throw InputError("config: " + key + " file not found: " + path.string());
  }
}

}  // namespace

PipelineConfig PipelineConfig::parse(std::istream& in, const fs::path& base_dir) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  PipelineConfig c;
  using Setter = std::function<void(const std::string& key, const std::string& value)>;
  const std::map<std::string, Setter> setters = {
      {"corpus.keyrings",
       [&](auto&, auto& v) { c.keyring_file = v.empty() ? std::nullopt : std::optional(resolve(base_dir, v)); }},
      {"corpus.graded", [&](auto&, auto& v) { c.graded_corpus = v.empty() ? fs::path{} : resolve(base_dir, v); }},
      {"corpus.topical",
       [&](auto&, auto& v) { c.topical_corpus = v.empty() ? std::nullopt : std::optional(resolve(base_dir, v)); }},
      {"corpus.format",
       [&](auto& k, auto& v) {
         if (v.empty() || v == "auto") {
           c.corpus_format.reset();
         } else if (auto f = parse_corpus_format(v)) {
           c.corpus_format = f;
         } else {
           throw InputError("config: invalid value '" + v + "' for " + k);
         }
       }},
      {"corpus.grade_keywords",
       [&](auto&, auto& v) { c.grade_keywords = v.empty() ? std::nullopt : std::optional(resolve(base_dir, v)); }},
      {"corpus.grade_precedence",
       [&](auto& k, auto& v) {
         if (v == "a") c.grade_precedence = GradePrecedence::a;
         else if (v == "b") c.grade_precedence = GradePrecedence::b;
         else throw InputError("config: invalid value '" + v + "' for " + k);
       }},
      {"corpus.link_threshold", [&](auto& k, auto& v) { c.link_threshold = parse_value<double>(k, v); }},
      {"ingest.lang", [&](auto&, auto& v) { c.lang = v; }},
      {"ingest.quote_phrases",
       [&](auto&, auto& v) { c.quote_phrase_file = v.empty() ? std::nullopt : std::optional(resolve(base_dir, v)); }},
      {"ingest.dedup",
       [&](auto& k, auto& v) {
         const auto mode = parse_dedup_mode(v);
         if (!mode) throw InputError("config: invalid value '" + v + "' for " + k);
         c.dedup = *mode;
       }},
      {"minhash.num_hashes", [&](auto& k, auto& v) { c.minhash.num_hashes = parse_value<std::uint32_t>(k, v); }},
      {"minhash.bands", [&](auto& k, auto& v) { c.minhash.bands = parse_value<std::uint32_t>(k, v); }},
      {"minhash.rows", [&](auto& k, auto& v) { c.minhash.rows = parse_value<std::uint32_t>(k, v); }},
      {"minhash.seed", [&](auto& k, auto& v) { c.minhash.seed = parse_value<std::uint64_t>(k, v); }},
      {"match.threshold", [&](auto& k, auto& v) { c.threshold = parse_value<double>(k, v); }},
      {"match.threads", [&](auto& k, auto& v) { c.threads = parse_value<unsigned>(k, v); }},
      {"calibrate.thresholds", [&](auto&, auto& v) { c.sweep_thresholds = v; }},
      {"calibrate.sample_size", [&](auto& k, auto& v) { c.sample_size = parse_value<std::size_t>(k, v); }},
      {"calibrate.sample_seed", [&](auto& k, auto& v) { c.sample_seed = parse_value<std::uint64_t>(k, v); }},
      {"analyze.window",
       [&](auto& k, auto& v) {
         const auto mode = parse_window_mode(v);
         if (!mode) throw InputError("config: invalid value '" + v + "' for " + k);
         c.window = *mode;
       }},
      {"analyze.min_count", [&](auto& k, auto& v) { c.min_count = parse_value<std::uint64_t>(k, v); }},
      {"analyze.top_n", [&](auto& k, auto& v) { c.top_n = parse_value<std::size_t>(k, v); }},
  };

  for (const auto& [section, entries] : tree) {
    if (entries.empty()) throw InputError("config: key '" + section + "' outside a section");
    for (const auto& [name, node] : entries) {
      const std::string key = section + "." + name;
      const auto it = setters.find(key);
      if (it == setters.end()) throw InputError("config: unknown key " + key);
      it->second(key, node.get_value<std::string>());
    }
  }
  return c;
}

PipelineConfig PipelineConfig::load(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open config file " + path.string());
  return parse(in, path.parent_path());
}

void PipelineConfig::write(std::ostream& out) const {
  const auto opt_path = [](const std::optional<fs::path>& p) { return p ? p->string() : std::string(); };
  out << "[corpus]\n"
      << "keyrings=" << opt_path(keyring_file) << '\n'
      << "graded=" << graded_corpus.string() << '\n'
      << "topical=" << opt_path(topical_corpus) << '\n'
      << "format="
      << (corpus_format ? (*corpus_format == CorpusFormat::csv ? "csv" : "jsonl") : "auto") << '\n'
      << "grade_keywords=" << opt_path(grade_keywords) << '\n'
      << "grade_precedence=" << (grade_precedence == GradePrecedence::a ? "a" : "b") << '\n'
      << "link_threshold=" << csv::number(link_threshold) << '\n'
      << "\n[ingest]\n"
      << "lang=" << lang << '\n'
      << "quote_phrases=" << opt_path(quote_phrase_file) << '\n'
      << "dedup=" << to_string(dedup) << '\n'
      << "\n[minhash]\n"
      << "num_hashes=" << minhash.num_hashes << '\n'
      << "bands=" << minhash.bands << '\n'
      << "rows=" << minhash.rows << '\n'
      << "seed=" << minhash.seed << '\n'
      << "\n[match]\n"
      << "threshold=" << csv::number(threshold) << '\n'
      << "threads=" << threads << '\n'
      << "\n[calibrate]\n"
      << "thresholds=" << sweep_thresholds << '\n'
      << "sample_size=" << sample_size << '\n'
      << "sample_seed=" << sample_seed << '\n'
      << "\n[analyze]\n"
      << "window=" << to_string(window) << '\n'
      << "min_count=" << min_count << '\n'
      << "top_n=" << top_n << '\n';
}

void PipelineConfig::validate() const {
  if (graded_corpus.empty()) throw InputError("config: corpus.graded is required");
  require_file("corpus.graded", graded_corpus);
  if (topical_corpus) require_file("corpus.topical", *topical_corpus);
  if (keyring_file) require_file("corpus.keyrings", *keyring_file);
  if (grade_keywords) require_file("corpus.grade_keywords", *grade_keywords);
  if (quote_phrase_file) require_file("ingest.quote_phrases", *quote_phrase_file);
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw InputError("config: match.threshold must lie in [0, 1]");
  if (!(link_threshold >= 0.0 && link_threshold <= 1.0)) {
    throw InputError("config: corpus.link_threshold must lie in [0, 1]");
  }
  if (threads == 0) throw InputError("config: match.threads must be positive");
  try {
    minhash.validate();
    (void)parse_threshold_range(sweep_thresholds);
  } catch (const ParameterError& e) {
    throw InputError(std::string("config: ") + e.what());
  }
}

std::vector<MatchResult> match_posts(const LshIndex& index, std::span<const PostRecord> posts,
                                     double threshold, unsigned threads) {
  std::vector<QueryItem> items(posts.size());
  parallel_for(posts.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      items[i].post_id = posts[i].post_id;
      items[i].tokens = tokenize(normalize(posts[i].text, index.phrases()));
    }
  });
  auto results = query_batch(index, items, 0.0, threads);
  for (auto& r : results) {
    r.threshold = threshold;
    r.matched = r.hadith_id.has_value() && r.jaccard >= threshold;
  }
  return results;
}

std::string file_crc32(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  uLong crc = crc32(0L, Z_NULL, 0);
  std::vector<char> buffer(1 << 16);
  while (in) {
    in.read(buffer.data(), static_cast<std::streamsize>(buffer.size()));
    const auto got = in.gcount();
    if (got > 0) crc = crc32(crc, reinterpret_cast<const Bytef*>(buffer.data()), static_cast<uInt>(got));
  }
  return hex32(static_cast<std::uint32_t>(crc));
}

PipelineResult run_pipeline(const PipelineConfig& config, std::span<const fs::path> inputs,
                            const fs::path& out_dir) {
  PipelineResult result;
  ordered_json& manifest = result.manifest;

  run_stage("config", [&] {
    config.validate();
    if (inputs.empty()) throw InputError("no input post files given");
    for (const auto& p : inputs) {
      std::error_code ec;
      if (!fs::is_regular_file(p, ec)) throw InputError("input file not found: " + p.string());
    }
    fs::create_directories(out_dir);
  });

  std::ostringstream config_text;
  config.write(config_text);
  manifest["config_crc32"] = crc32_hex(config_text.str());
  manifest["inputs"] = ordered_json::array();
  for (const auto& p : inputs) {
    manifest["inputs"].push_back({{"path", p.string()},
                                  {"bytes", fs::file_size(p)},
                                  {"crc32", file_crc32(p)}});
  }

  // Corpus: load, optionally pull topics from a topical corpus.
  const auto corpus = run_stage("corpus", [&] {
    const PhraseSet keyrings = config.keyring_file ? PhraseSet::load(*config.keyring_file) : PhraseSet::defaults();
    const GradeKeywordMap grades =
        config.grade_keywords ? GradeKeywordMap::load(*config.grade_keywords) : GradeKeywordMap::defaults();
    const auto format_of = [&](const fs::path& p) {
      return config.corpus_format.value_or(guess_corpus_format(p));
    };
    auto graded = load_reference(config.graded_corpus, format_of(config.graded_corpus), keyrings, grades);
    ordered_json stage;
    stage["graded"] = to_json(graded.report);
    log::info("corpus.loaded", {{"path", config.graded_corpus.string()}, {"records", graded.corpus.size()}});
    ReferenceCorpus merged = std::move(graded.corpus);
    if (config.topical_corpus) {
      auto topical = load_reference(*config.topical_corpus, format_of(*config.topical_corpus), keyrings, grades);
      stage["topical"] = to_json(topical.report);
      const auto topical_index = LshIndex::build(topical.corpus, config.minhash, config.threads);
      const auto links = link_corpora(merged, topical.corpus, topical_index, config.link_threshold,
                                      config.threads);
      std::size_t linked = 0;
      for (const auto& l : links) linked += l.b_id ? 1 : 0;
      stage["linked"] = linked;
      merged = merge_linked(merged, topical.corpus, links, config.grade_precedence);
      log::info("corpus.linked", {{"records", merged.size()}, {"linked", linked}});
    }
    stage["records"] = merged.size();
    stage["variant_groups"] = merged.group_count();
    manifest["corpus"] = stage;
    return merged;
  });

  const auto index = run_stage("index", [&] {
    auto built = LshIndex::build(corpus, config.minhash, config.threads);
    manifest["index"] = {{"entries", built.size()},
                         {"num_hashes", config.minhash.num_hashes},
                         {"bands", config.minhash.bands},
                         {"rows", config.minhash.rows},
                         {"seed", config.minhash.seed}};
    log::info("index.built", {{"entries", built.size()}});
    return built;
  });

  const auto posts = run_stage("ingest", [&] {
    IngestOptions options;
    options.lang = config.lang == "*" ? std::nullopt : std::optional<std::string>(config.lang);
    options.phrases = config.quote_phrase_file ? load_phrase_list(*config.quote_phrase_file)
                                               : std::vector<std::string>{std::string(kDefaultQuotePhrase)};
    options.dedup = config.dedup;
    options.keyrings = corpus.phrases();
    Deduplicator shared(options.dedup, options.keyrings);
    IngestReport total;
    std::vector<PostRecord> kept;
    Artifact out(out_dir, "posts.jsonl");
    for (const auto& path : inputs) {
      auto in = open_input(path);
      PostStream stream(*in, options);
      stream.share_deduplicator(shared);
      while (auto post = stream.next()) {
        out.stream() << to_jsonl(*post) << '\n';
        kept.push_back(std::move(*post));
      }
      total += stream.report();
    }
    result.artifacts.push_back(out.commit());
    manifest["ingest"] = to_json(total);
    log::info("ingest.done", to_json(total));
    return kept;
  });

  const auto matches = run_stage("match", [&] {
    auto results = match_posts(index, posts, config.threshold, config.threads);
    Artifact out(out_dir, "matches.csv");
    write_matches_header(out.stream());
    std::size_t matched = 0;
    for (std::size_t i = 0; i < results.size(); ++i) {
      write_match_row(out.stream(), results[i], posts[i].timestamp);
      matched += results[i].matched ? 1 : 0;
    }
    result.artifacts.push_back(out.commit());
    manifest["match"] = {{"rows", results.size()}, {"matched", matched}, {"threshold", config.threshold}};
    log::info("match.done", {{"rows", results.size()}, {"matched", matched}});
    return results;
  });

  run_stage("calibrate", [&] {
    ordered_json stage;
    if (!matches.empty()) {
      const auto thresholds = parse_threshold_range(config.sweep_thresholds);
      const auto curve = sweep(matches, thresholds);
      Artifact curve_out(out_dir, "calibration.csv");
      write_curve_csv(curve_out.stream(), curve);
      result.artifacts.push_back(curve_out.commit());
      stage["points"] = curve.points.size();
    }
    auto sample = sample_for_labeling(matches, config.threshold, config.sample_size, config.sample_seed);
    std::unordered_map<std::string_view, std::size_t> post_index;
    for (std::size_t i = 0; i < posts.size(); ++i) post_index.emplace(posts[i].post_id, i);
    for (auto& pair : sample.pairs) {
      pair.post_text = posts[post_index.at(pair.post_id)].text;
      if (const auto* record = corpus.find(pair.hadith_id)) pair.matn = record->matn_raw;
    }
    Artifact sample_out(out_dir, "label_sample.csv");
    write_sample_csv(sample_out.stream(), sample);
    result.artifacts.push_back(sample_out.commit());
    stage["sample_rows"] = sample.pairs.size();
    stage["sample_pool"] = sample.pool_size;
    stage["sample_short"] = sample.short_pool;
    if (sample.short_pool) {
      log::warn("calibrate.short_sample", {{"requested", config.sample_size}, {"available", sample.pool_size}});
    }
    manifest["calibrate"] = stage;
  });

  run_stage("analyze", [&] {
    std::vector<MatchRecord> records;
    records.reserve(matches.size());
    for (std::size_t i = 0; i < matches.size(); ++i) {
      records.push_back(make_match_record(matches[i], posts[i].timestamp));
    }
    ordered_json stage;
    const auto emit = [&](const std::string& name, auto&& writer) {
      Artifact out(out_dir, name);
      writer(out.stream());
      result.artifacts.push_back(out.commit());
    };

    const auto topics = topical_distribution(records, corpus);
    emit("topics.csv", [&](std::ostream& o) { write_topics_csv(o, topics); });
    stage["topics_denominator"] = topics.posts.denominator;

    const auto authenticity = authenticity_distribution(records, corpus);
    emit("authenticity.csv", [&](std::ostream& o) { write_distribution_csv(o, authenticity); });
    stage["authenticity_denominator"] = authenticity.denominator;

    emit("top_hadiths.csv", [&](std::ostream& o) {
      bool header = true;
      for (auto level : {AuthenticityLevel::authentic, AuthenticityLevel::good, AuthenticityLevel::weak,
                         AuthenticityLevel::fabricated}) {
        const auto rows = top_hadiths(records, corpus, level, config.top_n);
        std::ostringstream block;
        write_top_csv(block, level, rows);
        std::string text = block.str();
        if (!header) text.erase(0, text.find('\n') + 1);
        header = false;
        o << text;
      }
    });

    for (auto g : {Granularity::weekday, Granularity::month}) {
      const auto hist = temporal_histogram(records, g, /*equalize=*/true);
      const std::string name = "temporal_" + std::string(to_string(g)) + ".csv";
      emit(name, [&](std::ostream& o) { write_distribution_csv(o, hist); });
      stage[name] = hist.denominator;
    }
    for (auto g : {Granularity::day, Granularity::weekday, Granularity::month}) {
      const auto report = seasonality_report(records, g, config.min_count, config.window);
      const std::string name = "seasonality_" + std::string(to_string(g)) + ".csv";
      emit(name, [&](std::ostream& o) { write_gini_csv(o, report); });
      stage[name] = report.rows.size();
    }
    manifest["analyze"] = stage;
  });

  run_stage("manifest", [&] {
    manifest["artifacts"] = ordered_json::array();
    for (const auto& p : result.artifacts) manifest["artifacts"].push_back(p.filename().string());
    Artifact out(out_dir, "manifest.json");
    out.stream() << manifest.dump(2) << '\n';
    result.artifacts.push_back(out.commit());
  });
  return result;
}

}  // namespace hadithscope
