// hadithscope: quotation detection and analytics over social posts.
//
// Exit codes: 0 success, 1 stage/runtime failure, 2 bad input or config.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hadithscope/analyze.hpp"
#include "hadithscope/calibrate.hpp"
#include "hadithscope/corpus.hpp"
#include "hadithscope/csv.hpp"
#include "hadithscope/errors.hpp"
#include "hadithscope/ingest.hpp"
#include "hadithscope/linkage.hpp"
#include "hadithscope/log.hpp"
#include "hadithscope/minhash_index.hpp"
#include "hadithscope/pipeline.hpp"

namespace fs = std::filesystem;
using namespace hadithscope;
using nlohmann::ordered_json;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitInput = 2;

// Writes to a file, or to stdout when the path is empty or "-".
class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty() || path == "-") return;
    if (const auto parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
    file_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
    if (!*file_) throw InputError("cannot write " + path);
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

std::ifstream open_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  return in;
}

struct CorpusOptions {
  std::string format;
  std::string keyrings;
  std::string grade_keywords;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--format", format, "Corpus format (csv|jsonl); guessed from the extension by default")
        ->check(CLI::IsMember({"csv", "jsonl"}));
    cmd->add_option("--keyrings", keyrings, "Keyring phrase file (built-in list by default)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--grade-keywords", grade_keywords, "Grade keyword map (built-in by default)")
        ->check(CLI::ExistingFile);
  }

  PhraseSet phrases() const { return keyrings.empty() ? PhraseSet::defaults() : PhraseSet::load(keyrings); }

  LoadResult load(const std::string& path, const PhraseSet& phrases) const {
    const auto grades = grade_keywords.empty() ? GradeKeywordMap::defaults() : GradeKeywordMap::load(grade_keywords);
    const auto fmt = format.empty() ? guess_corpus_format(path) : *parse_corpus_format(format);
    auto result = load_reference(fs::path(path), fmt, phrases, grades);
    for (const auto& message : result.report.messages) log::warn("corpus.row", {{"path", path}, {"detail", message}});
    return result;
  }
};

ordered_json report_json(const LoadReport& r) {
  return {{"rows_read", r.rows_read},         {"loaded", r.loaded},
          {"dropped_empty", r.dropped_empty}, {"malformed", r.malformed},
          {"unknown_topics", r.unknown_topics}, {"messages", r.messages}};
}

ordered_json report_json(const IngestReport& r) {
  return {{"lines_read", r.lines_read},
          {"malformed_skipped", r.malformed_skipped},
          {"lang_filtered", r.lang_filtered},
          {"phrase_filtered", r.phrase_filtered},
          {"duplicates_dropped", r.duplicates_dropped},
          {"duplicate_ids", r.duplicate_ids},
          {"duplicate_texts", r.duplicate_texts},
          {"emitted", r.emitted}};
}

std::vector<MatchResult> to_results(const std::vector<MatchRecord>& records, double threshold) {
  std::vector<MatchResult> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    out.push_back({r.post_id, r.hadith_id, r.variant_group, r.jaccard,
                   r.hadith_id.has_value() && r.jaccard >= threshold, threshold});
  }
  return out;
}

std::vector<MatchRecord> load_matches(const std::string& path) {
  auto in = open_file(path);
  return read_matches_csv(in);
}

std::vector<PostRecord> load_posts(const std::string& path) {
  auto in = open_input(path);
  return read_posts(*in);
}

std::optional<DayWindow> window_from(const std::string& from, const std::string& to) {
  if (from.empty() && to.empty()) return std::nullopt;
  if (from.empty() || to.empty()) throw InputError("--from and --to must be given together");
  const auto first = parse_date(from);
  const auto last = parse_date(to);
  if (!first) throw InputError("invalid date " + from);
  if (!last) throw InputError("invalid date " + to);
  if (*last < *first) throw InputError("--to precedes --from");
  return DayWindow{*first, *last};
}

// ---------------------------------------------------------------- normalize

void add_normalize(CLI::App& app) {
  struct Opts {
    std::string keyrings;
    std::string input;
    bool tokens = false;
  };
  auto opts = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("normalize", "Normalize text, one line at a time");
  cmd->add_option("input", opts->input, "Text file (stdin when omitted)");
  cmd->add_option("--phrases,--keyrings", opts->keyrings, "Keyring phrase file")->check(CLI::ExistingFile);
  cmd->add_flag("--tokens", opts->tokens, "Print the sorted token set instead of the text");
  cmd->callback([opts] {
    const auto phrases = opts->keyrings.empty() ? PhraseSet::defaults() : PhraseSet::load(opts->keyrings);
    std::ifstream file;
    if (!opts->input.empty()) file = open_file(opts->input);
    std::istream& in = opts->input.empty() ? std::cin : file;
    std::string line;
    while (std::getline(in, line)) {
      const auto norm = normalize(line, phrases);
      if (!opts->tokens) {
        std::cout << norm << '\n';
        continue;
      }
      const auto set = tokenize(norm);
      bool first = true;
      for (const auto& t : set) {
        std::cout << (first ? "" : " ") << t;
        first = false;
      }
      std::cout << '\n';
    }
  });
}

// ---------------------------------------------------------------- corpus

void add_corpus(CLI::App& app) {
  auto* corpus = app.add_subcommand("corpus", "Load and link reference corpora");
  corpus->require_subcommand(1);

  {
    struct Opts {
      CorpusOptions corpus;
      std::string file;
      std::string out;
      std::string report;
    };
    auto opts = std::make_shared<Opts>();
    auto* cmd = corpus->add_subcommand("load", "Load a corpus and report what was kept");
    cmd->add_option("file", opts->file, "Corpus file")->required()->check(CLI::ExistingFile);
    opts->corpus.add_to(cmd);
    cmd->add_option("--out", opts->out, "Write the canonicalized corpus as CSV");
    cmd->add_option("--report", opts->report, "Write the load report as JSON ('-' for stdout)");
    cmd->callback([opts] {
      const auto loaded = opts->corpus.load(opts->file, opts->corpus.phrases());
      if (!opts->out.empty()) {
        Output out(opts->out);
        write_corpus_csv(out.stream(), loaded.corpus);
      }
      auto report = report_json(loaded.report);
      report["variant_groups"] = loaded.corpus.group_count();
      if (!opts->report.empty()) {
        Output out(opts->report);
        out.stream() << report.dump(2) << '\n';
      }
      log::info("corpus.loaded", report);
    });
  }

  {
    struct Opts {
      CorpusOptions corpus;
      std::string a;
      std::string b;
      double threshold = kDefaultThreshold;
      unsigned threads = 1;
      std::string out;
      std::string merged_out;
      std::string precedence = "a";
      MinHashParams minhash;
    };
    auto opts = std::make_shared<Opts>();
    auto* cmd = corpus->add_subcommand("link", "Link each record of A to its best match in B");
    cmd->add_option("a", opts->a, "Corpus A (usually the graded one)")->required()->check(CLI::ExistingFile);
    cmd->add_option("b", opts->b, "Corpus B (usually the topical one)")->required()->check(CLI::ExistingFile);
    opts->corpus.add_to(cmd);
    cmd->add_option("--threshold", opts->threshold, "Minimum exact Jaccard")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--threads", opts->threads)->check(CLI::PositiveNumber);
    cmd->add_option("--out", opts->out, "Links CSV (a_id,b_id,jaccard)")->required();
    cmd->add_option("--merged-out", opts->merged_out, "Write A with topics copied from B as CSV");
    cmd->add_option("--grade-precedence", opts->precedence, "Which corpus wins on grade conflicts")
        ->check(CLI::IsMember({"a", "b"}));
    cmd->add_option("--seed", opts->minhash.seed, "MinHash seed");
    cmd->callback([opts] {
      const auto phrases = opts->corpus.phrases();
      const auto a = opts->corpus.load(opts->a, phrases);
      const auto b = opts->corpus.load(opts->b, phrases);
      const auto index = LshIndex::build(b.corpus, opts->minhash, opts->threads);
      const auto links = link_corpora(a.corpus, b.corpus, index, opts->threshold, opts->threads);
      Output out(opts->out);
      csv::write(out.stream(), "a_id", "b_id", "jaccard");
      std::size_t linked = 0;
      for (const auto& l : links) {
        linked += l.b_id ? 1 : 0;
        csv::write(out.stream(), std::to_string(l.a_id), l.b_id ? std::to_string(*l.b_id) : std::string(),
                   csv::number(l.jaccard));
      }
      if (!opts->merged_out.empty()) {
        const auto merged = merge_linked(a.corpus, b.corpus, links,
                                         opts->precedence == "b" ? GradePrecedence::b : GradePrecedence::a);
        Output merged_out(opts->merged_out);
        write_corpus_csv(merged_out.stream(), merged);
      }
      log::info("corpus.linked", {{"records", links.size()}, {"linked", linked}});
    });
  }
}

// ---------------------------------------------------------------- index

void add_index(CLI::App& app) {
  auto* index = app.add_subcommand("index", "Build and query the MinHash/LSH index");
  index->require_subcommand(1);

  {
    struct Opts {
      CorpusOptions corpus;
      std::string file;
      MinHashParams minhash;
      unsigned threads = 1;
      std::string out;
    };
    auto opts = std::make_shared<Opts>();
    auto* cmd = index->add_subcommand("build", "Index a reference corpus");
    cmd->add_option("--corpus", opts->file, "Corpus file")->required()->check(CLI::ExistingFile);
    opts->corpus.add_to(cmd);
    cmd->add_option("--hashes", opts->minhash.num_hashes, "Signature length");
    cmd->add_option("--bands", opts->minhash.bands, "LSH bands");
    cmd->add_option("--rows", opts->minhash.rows, "Rows per band");
    cmd->add_option("--seed", opts->minhash.seed, "Hash family seed");
    cmd->add_option("--threads", opts->threads)->check(CLI::PositiveNumber);
    cmd->add_option("--out", opts->out, "Index directory")->required();
    cmd->callback([opts] {
      // Keep bands * rows == hashes when only some of them were given.
      auto& p = opts->minhash;
      if (p.bands * p.rows != p.num_hashes && p.rows != 0 && p.num_hashes % p.rows == 0) p.bands = p.num_hashes / p.rows;
      try {
        p.validate();
      } catch (const ParameterError& e) {
        throw InputError(e.what());
      }
      const auto loaded = opts->corpus.load(opts->file, opts->corpus.phrases());
      const auto built = LshIndex::build(loaded.corpus, p, opts->threads);
      built.save_dir(opts->out);
      log::info("index.built", {{"entries", built.size()}, {"dir", opts->out}});
    });
  }

  {
    struct Opts {
      std::string index;
      std::string posts;
      double threshold = kDefaultThreshold;
      unsigned threads = 1;
      std::string out;
    };
    auto opts = std::make_shared<Opts>();
    auto* cmd = index->add_subcommand("query", "Match posts against an index");
    cmd->add_option("--index", opts->index, "Index directory")->required()->check(CLI::ExistingDirectory);
    cmd->add_option("--posts", opts->posts, "Posts JSONL (optionally compressed)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--threshold", opts->threshold)->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--threads", opts->threads)->check(CLI::PositiveNumber);
    cmd->add_option("--out", opts->out, "matches.csv ('-' for stdout)");
    cmd->callback([opts] {
      const auto loaded = LshIndex::load_dir(opts->index);
      const auto posts = load_posts(opts->posts);
      const auto results = match_posts(loaded, posts, opts->threshold, opts->threads);
      Output out(opts->out);
      write_matches_header(out.stream());
      std::size_t matched = 0;
      for (std::size_t i = 0; i < results.size(); ++i) {
        write_match_row(out.stream(), results[i], posts[i].timestamp);
        matched += results[i].matched ? 1 : 0;
      }
      log::info("match.done", {{"rows", results.size()}, {"matched", matched}});
    });
  }
}

// ---------------------------------------------------------------- ingest

void add_ingest(CLI::App& app) {
  struct Opts {
    std::vector<std::string> inputs;
    std::string lang = "ar";
    std::string phrase_file;
    bool no_phrase_filter = false;
    std::string dedup = "id";
    std::string keyrings;
    std::string out;
    std::string report;
  };
  auto opts = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("ingest", "Filter raw post archives into canonical JSONL");
  cmd->add_option("inputs", opts->inputs, "JSONL inputs (.gz/.bz2 accepted)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--lang", opts->lang, "Language tag to keep ('*' keeps all)");
  cmd->add_option("--phrase-file", opts->phrase_file, "Quotative phrases, one per line")->check(CLI::ExistingFile);
  cmd->add_flag("--no-phrase-filter", opts->no_phrase_filter, "Keep posts regardless of phrases");
  cmd->add_option("--dedup", opts->dedup, "Duplicate key")->check(CLI::IsMember({"id", "text"}));
  cmd->add_option("--keyrings", opts->keyrings, "Keyrings used for text dedup")->check(CLI::ExistingFile);
  cmd->add_option("--out", opts->out, "Output JSONL ('-' for stdout)");
  cmd->add_option("--report", opts->report, "Write the ingest report as JSON");
  cmd->callback([opts] {
    IngestOptions options;
    if (opts->lang == "*") options.lang.reset();
    else options.lang = opts->lang;
    if (opts->no_phrase_filter) options.phrases.clear();
    else if (!opts->phrase_file.empty()) options.phrases = load_phrase_list(opts->phrase_file);
    options.dedup = *parse_dedup_mode(opts->dedup);
    options.keyrings = opts->keyrings.empty() ? PhraseSet::defaults() : PhraseSet::load(opts->keyrings);

    Output out(opts->out);
    Deduplicator shared(options.dedup, options.keyrings);
    IngestReport total;
    for (const auto& path : opts->inputs) {
      auto in = open_input(path);
      PostStream stream(*in, options);
      stream.share_deduplicator(shared);
      while (auto post = stream.next()) out.stream() << to_jsonl(*post) << '\n';
      total += stream.report();
    }
    const auto report = report_json(total);
    if (!opts->report.empty()) {
      Output r(opts->report);
      r.stream() << report.dump(2) << '\n';
    }
    log::info("ingest.done", report);
  });
}

// ---------------------------------------------------------------- calibrate

void add_calibrate(CLI::App& app) {
  auto* calibrate = app.add_subcommand("calibrate", "Threshold sweep, labeling sample, precision, elbow");
  calibrate->require_subcommand(1);

  {
    struct Opts {
      std::string matches;
      std::string index;
      std::string posts;
      std::string thresholds = "0.05:0.95:0.05";
      unsigned threads = 1;
      std::string out;
    };
    auto opts = std::make_shared<Opts>();
    auto* cmd = calibrate->add_subcommand("sweep", "Coverage per threshold");
    auto* m = cmd->add_option("--matches", opts->matches, "matches.csv from a previous run")->check(CLI::ExistingFile);
    auto* i = cmd->add_option("--index", opts->index, "Index directory")->check(CLI::ExistingDirectory);
    auto* p = cmd->add_option("--posts", opts->posts, "Posts JSONL")->check(CLI::ExistingFile);
    i->needs(p);
    p->needs(i);
    m->excludes(i);
    cmd->add_option("--thresholds", opts->thresholds, "start:stop:step");
    cmd->add_option("--threads", opts->threads)->check(CLI::PositiveNumber);
    cmd->add_option("--out", opts->out, "Curve CSV ('-' for stdout)");
    cmd->callback([opts] {
      std::vector<double> thresholds;
      try {
        thresholds = parse_threshold_range(opts->thresholds);
      } catch (const ParameterError& e) {
        throw InputError(e.what());
      }
      std::vector<MatchResult> best;
      if (!opts->matches.empty()) {
        best = to_results(load_matches(opts->matches), 0.0);
      } else if (!opts->index.empty()) {
        best = match_posts(LshIndex::load_dir(opts->index), load_posts(opts->posts), 0.0, opts->threads);
      } else {
        throw InputError("either --matches or --index with --posts is required");
      }
      if (best.empty()) throw InputError("no posts to sweep");
      Output out(opts->out);
      write_curve_csv(out.stream(), sweep(best, thresholds));
    });
  }

  {
    struct Opts {
      std::string matches;
      double threshold = kDefaultThreshold;
      std::size_t n = kDefaultSampleSize;
      std::uint64_t seed = 7;
      std::string posts;
      std::string corpus_file;
      CorpusOptions corpus;
      std::string out;
    };
    auto opts = std::make_shared<Opts>();
    auto* cmd = calibrate->add_subcommand("sample", "Draw matched pairs for manual labeling");
    cmd->add_option("--matches", opts->matches)->required()->check(CLI::ExistingFile);
    cmd->add_option("--threshold", opts->threshold)->check(CLI::Range(0.0, 1.0));
    cmd->add_option("-n,--n,--size", opts->n, "Pairs to draw");
    cmd->add_option("--seed", opts->seed, "Sampling seed");
    cmd->add_option("--posts", opts->posts, "Posts JSONL, to include post texts")->check(CLI::ExistingFile);
    cmd->add_option("--corpus", opts->corpus_file, "Corpus, to include matn texts")->check(CLI::ExistingFile);
    opts->corpus.add_to(cmd);
    cmd->add_option("--out", opts->out, "Label sheet CSV ('-' for stdout)");
    cmd->callback([opts] {
      const auto best = to_results(load_matches(opts->matches), opts->threshold);
      auto sample = sample_for_labeling(best, opts->threshold, opts->n, opts->seed);
      if (!opts->posts.empty()) {
        std::unordered_map<std::string, std::string> texts;
        for (auto& post : load_posts(opts->posts)) texts.emplace(post.post_id, std::move(post.text));
        for (auto& pair : sample.pairs) {
          if (auto it = texts.find(pair.post_id); it != texts.end()) pair.post_text = it->second;
        }
      }
      if (!opts->corpus_file.empty()) {
        const auto loaded = opts->corpus.load(opts->corpus_file, opts->corpus.phrases());
        for (auto& pair : sample.pairs) {
          if (const auto* r = loaded.corpus.find(pair.hadith_id)) pair.matn = r->matn_raw;
        }
      }
      if (sample.short_pool) {
        log::warn("calibrate.short_sample", {{"requested", opts->n}, {"available", sample.pool_size}});
      }
      Output out(opts->out);
      write_sample_csv(out.stream(), sample);
    });
  }

  {
    struct Opts {
      std::string labels;
      std::string curve;
      std::string out;
    };
    auto opts = std::make_shared<Opts>();
    auto* cmd = calibrate->add_subcommand("precision", "Precision of a labeled sample");
    cmd->add_option("--labels", opts->labels, "Labeled sample CSV")->required()->check(CLI::ExistingFile);
    auto* c = cmd->add_option("--curve", opts->curve, "Curve CSV to attach the value to")->check(CLI::ExistingFile);
    cmd->add_option("--out", opts->out, "Updated curve CSV")->needs(c);
    cmd->callback([opts] {
      auto in = open_file(opts->labels);
      const auto sample = read_sample_csv(in);
      const double precision = precision_from_labels(sample);
      std::cout << csv::number(precision) << '\n';
      if (opts->curve.empty()) return;
      auto curve_in = open_file(opts->curve);
      auto curve = read_curve_csv(curve_in);
      const double threshold = sample.pairs.front().threshold;
      if (!attach_precision(curve, threshold, precision)) {
        throw InputError("curve has no point at threshold " + csv::number(threshold));
      }
      Output out(opts->out.empty() ? opts->curve : opts->out);
      write_curve_csv(out.stream(), curve);
    });
  }

  {
    auto curve_path = std::make_shared<std::string>();
    auto* cmd = calibrate->add_subcommand("elbow", "Knee of the precision/coverage curve");
    cmd->add_option("--curve", *curve_path, "Curve CSV with a precision column")->required()->check(CLI::ExistingFile);
    cmd->callback([curve_path] {
      auto in = open_file(*curve_path);
      const auto curve = read_curve_csv(in);
      try {
        std::cout << csv::number(elbow(curve)) << '\n';
      } catch (const ParameterError& e) {
        throw InputError(e.what());
      }
    });
  }
}

// ---------------------------------------------------------------- analyze

void add_analyze(CLI::App& app) {
  auto* analyze = app.add_subcommand("analyze", "Reports over matches.csv");
  analyze->require_subcommand(1);

  struct Common {
    std::string matches;
    std::string corpus_file;
    CorpusOptions corpus;
    std::string out;
    bool json = false;
  };
  const auto add_common = [](CLI::App* cmd, Common& c, bool needs_corpus) {
    cmd->add_option("--matches", c.matches, "matches.csv")->required()->check(CLI::ExistingFile);
    if (needs_corpus) {
      cmd->add_option("--corpus", c.corpus_file, "Reference corpus")->required()->check(CLI::ExistingFile);
      c.corpus.add_to(cmd);
    }
    cmd->add_option("--out", c.out, "Report file ('-' for stdout)");
    cmd->add_flag("--json", c.json, "Emit JSON instead of CSV");
  };
  // Analytics only need ids, groups, grades and topics, so skip keyrings.
  const auto load_corpus = [](const Common& c) { return c.corpus.load(c.corpus_file, PhraseSet{}).corpus; };

  {
    auto opts = std::make_shared<Common>();
    auto* cmd = analyze->add_subcommand("topics", "Topical distribution of matched posts");
    add_common(cmd, *opts, true);
    cmd->callback([opts, load_corpus] {
      const auto report = topical_distribution(load_matches(opts->matches), load_corpus(*opts));
      Output out(opts->out);
      if (opts->json) out.stream() << topics_json(report) << '\n';
      else write_topics_csv(out.stream(), report);
    });
  }

  {
    auto opts = std::make_shared<Common>();
    auto* cmd = analyze->add_subcommand("authenticity", "Posts per authenticity level");
    add_common(cmd, *opts, true);
    cmd->callback([opts, load_corpus] {
      const auto report = authenticity_distribution(load_matches(opts->matches), load_corpus(*opts));
      Output out(opts->out);
      if (opts->json) out.stream() << distribution_json(report) << '\n';
      else write_distribution_csv(out.stream(), report);
    });
  }

  {
    struct Opts : Common {
      std::string level = "authentic";
      std::size_t n = 5;
    };
    auto opts = std::make_shared<Opts>();
    auto* cmd = analyze->add_subcommand("top", "Most quoted hadiths of one authenticity level");
    add_common(cmd, *opts, true);
    cmd->add_option("--level", opts->level)->check(CLI::IsMember({"authentic", "good", "weak", "fabricated", "unknown"}));
    cmd->add_option("-n,--count", opts->n, "Rows to keep");
    cmd->callback([opts, load_corpus] {
      const auto level = *parse_authenticity(opts->level);
      const auto rows = top_hadiths(load_matches(opts->matches), load_corpus(*opts), level, opts->n);
      Output out(opts->out);
      if (opts->json) out.stream() << top_json(level, rows) << '\n';
      else write_top_csv(out.stream(), level, rows);
    });
  }

  {
    struct Opts : Common {
      std::string granularity = "weekday";
      bool equalize = false;
      std::string from, to;
    };
    auto opts = std::make_shared<Opts>();
    auto* cmd = analyze->add_subcommand("temporal", "Matched posts per weekday or month");
    add_common(cmd, *opts, false);
    cmd->add_option("--granularity", opts->granularity)->check(CLI::IsMember({"weekday", "month"}));
    cmd->add_flag("--equalize", opts->equalize, "Trim the window so every slot occurs equally often");
    cmd->add_option("--from", opts->from, "First day (YYYY-MM-DD)");
    cmd->add_option("--to", opts->to, "Last day (YYYY-MM-DD)");
    cmd->callback([opts] {
      const auto report = temporal_histogram(load_matches(opts->matches), *parse_granularity(opts->granularity),
                                             opts->equalize, window_from(opts->from, opts->to));
      Output out(opts->out);
      if (opts->json) out.stream() << distribution_json(report) << '\n';
      else write_distribution_csv(out.stream(), report);
    });
  }

  {
    struct Opts : Common {
      std::string granularity = "day";
      std::uint64_t min_count = kDefaultMinCount;
      std::string window = "global";
      std::string from, to;
    };
    auto opts = std::make_shared<Opts>();
    auto* cmd = analyze->add_subcommand("seasonality", "Gini coefficient of mentions per hadith");
    add_common(cmd, *opts, false);
    cmd->add_option("--granularity", opts->granularity)->check(CLI::IsMember({"day", "weekday", "month"}));
    cmd->add_option("--min-count", opts->min_count, "Mentions needed to be ranked");
    cmd->add_option("--window", opts->window)->check(CLI::IsMember({"global", "active"}));
    cmd->add_option("--from", opts->from, "First day (YYYY-MM-DD)");
    cmd->add_option("--to", opts->to, "Last day (YYYY-MM-DD)");
    cmd->callback([opts] {
      const auto report = seasonality_report(load_matches(opts->matches), *parse_granularity(opts->granularity),
                                             opts->min_count, *parse_window_mode(opts->window),
                                             window_from(opts->from, opts->to));
      Output out(opts->out);
      if (opts->json) out.stream() << gini_json(report) << '\n';
      else write_gini_csv(out.stream(), report);
    });
  }
}

// ---------------------------------------------------------------- run

void add_run(CLI::App& app) {
  struct Opts {
    std::string config;
    std::string out_dir;
    std::vector<std::string> inputs;
    std::optional<double> threshold;
    std::optional<unsigned> threads;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> sample_seed;
    std::optional<std::string> dedup;
    std::optional<std::string> window;
    std::optional<std::uint64_t> min_count;
    std::optional<std::string> graded;
  };
  auto opts = std::make_shared<Opts>();
  auto* cmd = app.add_subcommand("run", "Full pipeline: ingest, match, calibrate, analyze");
  cmd->add_option("--config", opts->config, "INI config file")->required();
  cmd->add_option("--out-dir", opts->out_dir, "Artifact directory")->required();
  cmd->add_option("inputs", opts->inputs, "Post archives (JSONL, .gz/.bz2 accepted)")->required();
  cmd->add_option("--threshold", opts->threshold, "Override [match] threshold");
  cmd->add_option("--threads", opts->threads, "Override [match] threads");
  cmd->add_option("--seed", opts->seed, "Override [minhash] seed");
  cmd->add_option("--sample-seed", opts->sample_seed, "Override [calibrate] sample_seed");
  cmd->add_option("--dedup", opts->dedup, "Override [ingest] dedup");
  cmd->add_option("--window", opts->window, "Override [analyze] window");
  cmd->add_option("--min-count", opts->min_count, "Override [analyze] min_count");
  cmd->add_option("--graded", opts->graded, "Override [corpus] graded");
  cmd->callback([opts] {
    PipelineConfig config;
    try {
      config = PipelineConfig::load(opts->config);
    } catch (const InputError& e) {
      throw StageError("config", e.what(), kExitInput);
    }
    if (opts->threshold) config.threshold = *opts->threshold;
    if (opts->threads) config.threads = *opts->threads;
    if (opts->seed) config.minhash.seed = *opts->seed;
    if (opts->sample_seed) config.sample_seed = *opts->sample_seed;
    if (opts->min_count) config.min_count = *opts->min_count;
    if (opts->graded) config.graded_corpus = *opts->graded;
    if (opts->dedup) {
      const auto mode = parse_dedup_mode(*opts->dedup);
      if (!mode) throw StageError("config", "invalid --dedup " + *opts->dedup, kExitInput);
      config.dedup = *mode;
    }
    if (opts->window) {
      const auto mode = parse_window_mode(*opts->window);
      if (!mode) throw StageError("config", "invalid --window " + *opts->window, kExitInput);
      config.window = *mode;
    }
    const std::vector<fs::path> inputs(opts->inputs.begin(), opts->inputs.end());
    const auto result = run_pipeline(config, inputs, opts->out_dir);
    log::info("run.done", {{"out_dir", opts->out_dir}, {"artifacts", result.artifacts.size()}});
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hadithscope: detect hadith quotations in posts and analyze them"};
  app.require_subcommand(1);
  bool log_json = false;
  bool quiet = false;
  app.add_flag("--log-json", log_json, "Structured JSON logs on stderr");
  app.add_flag("-q,--quiet", quiet, "Only warnings and errors");
  // Subcommand callbacks run during parse, so logging is configured first.
  for (int i = 1; i < argc; ++i) {
    const std::string_view arg = argv[i];
    if (arg == "--log-json") log::set_format(log::Format::json);
    if (arg == "-q" || arg == "--quiet") log::set_quiet(true);
  }

  add_normalize(app);
  add_corpus(app);
  add_index(app);
  add_ingest(app);
  add_calibrate(app);
  add_analyze(app);
  add_run(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  } catch (const StageError& e) {
    log::error("stage.failed", {{"stage", e.stage()}, {"message", e.what()}, {"exit_code", e.exit_code()}});
    return e.exit_code();
  } catch (const InputError& e) {
    log::error("input.error", {{"message", e.what()}});
    return kExitInput;
  } catch (const ParameterError& e) {
    log::error("parameter.error", {{"message", e.what()}});
    return kExitInput;
  } catch (const std::exception& e) {
    log::error("failed", {{"message", e.what()}});
    return kExitFailure;
  }
  return 0;
}
