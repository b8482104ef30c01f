#include <filesystem>
#include <fstream>
#include <sstream>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "hadithscope/errors.hpp"
#include "hadithscope/pipeline.hpp"
#include "synthetic.hpp"

using namespace hadithscope;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// A small corpus and post file in a scratch directory.
struct Workspace {
  fs::path dir;
  fs::path corpus;
  fs::path posts;

  explicit Workspace(const std::string& name) : dir(fs::temp_directory_path() / name) {
    fs::remove_all(dir);
    fs::create_directories(dir);
    testing::SyntheticGenerator gen({.records = 300, .vocabulary = 5000, .seed = 5});
    const auto c = gen.corpus();
    corpus = dir / "corpus.csv";
    posts = dir / "posts.jsonl";
    {
      std::ofstream out(corpus, std::ios::binary);
      write_corpus_csv(out, c);
    }
    std::ofstream out(posts, std::ios::binary);
    out << testing::to_jsonl_lines(gen.posts(c, {.planted = 400, .distractors = 100, .seed = 6}));
    // A duplicate id and a malformed line.
    out << testing::to_jsonl_lines(gen.posts(c, {.planted = 3, .seed = 6})) << "{oops\n";
  }
  ~Workspace() { fs::remove_all(dir); }

  PipelineConfig config() const {
    PipelineConfig c;
    c.graded_corpus = corpus;
    c.min_count = 3;
    c.sample_size = 20;
    return c;
  }
};

}  // namespace

TEST_CASE("config round trip") {
  PipelineConfig c;
  c.keyring_file = "/data/keyrings.txt";
  c.graded_corpus = "/data/graded.csv";
  c.topical_corpus = "/data/topical.jsonl";
  c.corpus_format = CorpusFormat::jsonl;
  c.grade_precedence = GradePrecedence::b;
  c.link_threshold = 0.5;
  c.lang = "*";
  c.dedup = DedupMode::text;
  c.minhash = {64, 16, 4, 99};
  c.threshold = 0.4;
  c.threads = 3;
  c.sweep_thresholds = "0.1:0.9:0.1";
  c.sample_size = 50;
  c.sample_seed = 123;
  c.window = WindowMode::active;
  c.min_count = 10;
  c.top_n = 7;
  std::stringstream buf;
  c.write(buf);
  CHECK(PipelineConfig::parse(buf) == c);

  std::stringstream defaults;
  PipelineConfig{}.write(defaults);
  CHECK(PipelineConfig::parse(defaults) == PipelineConfig{});
}

TEST_CASE("config parse errors") {
  std::istringstream unknown("[match]\nthreshhold = 0.3\n");
  CHECK_THROWS_WITH_AS(PipelineConfig::parse(unknown), "config: unknown key match.threshhold", InputError);
  std::istringstream bad_value("[match]\nthreads = many\n");
  CHECK_THROWS_AS(PipelineConfig::parse(bad_value), InputError);
  std::istringstream relative("[corpus]\ngraded = corpus/g.csv\n");
  CHECK(PipelineConfig::parse(relative, "/base").graded_corpus == fs::path("/base/corpus/g.csv"));
  CHECK_THROWS_AS(PipelineConfig::load("/nonexistent/run.cfg"), InputError);

  PipelineConfig c;
  c.graded_corpus = "/nonexistent/graded.csv";
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("/nonexistent/graded.csv"), InputError);
}

TEST_CASE("shipped example config parses") {
  const auto c = PipelineConfig::load(fs::path(HADITHSCOPE_DATA_DIR) / "example.cfg");
  CHECK(c.threshold == kDefaultThreshold);
  CHECK(c.minhash == MinHashParams{});
  REQUIRE(c.keyring_file);
  CHECK(fs::exists(*c.keyring_file));
}

TEST_CASE("a missing corpus fails the corpus stage with exit code 2") {
  Workspace ws("hadithscope_pipeline_missing");
  auto c = ws.config();
  c.graded_corpus = ws.dir / "absent.csv";
  const std::vector<fs::path> inputs = {ws.posts};
  try {
    run_pipeline(c, inputs, ws.dir / "out");
    FAIL("expected a StageError");
  } catch (const StageError& e) {
    CHECK(e.exit_code() == 2);
    CHECK(std::string(e.what()).find("absent.csv") != std::string::npos);
  }
  std::vector<fs::path> missing_input = {ws.dir / "nope.jsonl"};
  CHECK_THROWS_AS(run_pipeline(ws.config(), missing_input, ws.dir / "out"), StageError);
}

TEST_CASE("a full run writes every artifact and conserves counts") {
  Workspace ws("hadithscope_pipeline_run");
  const std::vector<fs::path> inputs = {ws.posts};
  const auto result = run_pipeline(ws.config(), inputs, ws.dir / "out");
  const auto& m = result.manifest;

  for (const char* name : {"posts.jsonl", "matches.csv", "calibration.csv", "label_sample.csv", "topics.csv",
                           "authenticity.csv", "top_hadiths.csv", "temporal_weekday.csv", "temporal_month.csv",
                           "seasonality_day.csv", "seasonality_weekday.csv", "seasonality_month.csv",
                           "manifest.json"}) {
    CAPTURE(name);
    CHECK(fs::is_regular_file(ws.dir / "out" / name));
    CHECK_FALSE(fs::exists(ws.dir / "out" / (std::string(name) + ".partial")));
  }

  const auto& ingest = m["ingest"];
  CHECK(ingest["lines_read"] == 504);
  CHECK(ingest["malformed_skipped"] == 1);
  CHECK(ingest["duplicate_ids"].get<int>() >= 1);
  CHECK(ingest["lines_read"].get<int>() ==
        ingest["malformed_skipped"].get<int>() + ingest["lang_filtered"].get<int>() +
            ingest["phrase_filtered"].get<int>() + ingest["duplicates_dropped"].get<int>() +
            ingest["emitted"].get<int>());
  CHECK(ingest["emitted"] == m["match"]["rows"]);
  CHECK(m["corpus"]["records"] == 300);
  CHECK(m["calibrate"]["sample_rows"] == 20);
  CHECK(m["inputs"][0]["crc32"] == file_crc32(ws.posts));
  CHECK(nlohmann::json::parse(slurp(ws.dir / "out" / "manifest.json")) == nlohmann::json::parse(m.dump()));

  std::ifstream matches(ws.dir / "out" / "matches.csv");
  const auto rows = read_matches_csv(matches);
  CHECK(rows.size() == m["match"]["rows"].get<std::size_t>());
  std::size_t matched = 0;
  for (const auto& r : rows) matched += r.matched ? 1 : 0;
  CHECK(matched == m["match"]["matched"].get<std::size_t>());
  CHECK(matched > rows.size() / 2);

  std::ifstream auth(ws.dir / "out" / "authenticity.csv");
  std::string header, first;
  std::getline(auth, header);
  std::getline(auth, first);
  CHECK(first.substr(first.rfind(',') + 1) == std::to_string(rows.size()));
}

TEST_CASE("runs are deterministic across thread counts") {
  Workspace ws("hadithscope_pipeline_determinism");
  const std::vector<fs::path> inputs = {ws.posts};
  auto one = ws.config();
  auto four = ws.config();
  four.threads = 4;
  run_pipeline(one, inputs, ws.dir / "a");
  run_pipeline(four, inputs, ws.dir / "b");
  for (const char* name : {"posts.jsonl", "matches.csv", "calibration.csv", "label_sample.csv", "topics.csv",
                           "authenticity.csv", "top_hadiths.csv", "seasonality_day.csv"}) {
    CAPTURE(name);
    CHECK(slurp(ws.dir / "a" / name) == slurp(ws.dir / "b" / name));
  }
}

TEST_CASE("file checksums") {
  const auto path = fs::temp_directory_path() / "hadithscope_crc.txt";
  {
    std::ofstream out(path, std::ios::binary);
    out << "123456789";
  }
  CHECK(file_crc32(path) == "cbf43926");
  fs::remove(path);
}
