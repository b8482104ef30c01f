#include <random>

#include <benchmark/benchmark.h>

#include "hadithscope/analyze.hpp"
#include "hadithscope/arabic_normalize.hpp"
#include "hadithscope/minhash_index.hpp"
#include "hadithscope/pipeline.hpp"
#include "synthetic.hpp"

using namespace hadithscope;

namespace {

const ReferenceCorpus& corpus() {
  static const ReferenceCorpus c = testing::SyntheticGenerator({.records = 5000, .seed = 17}).corpus();
  return c;
}

const std::vector<PostRecord>& posts() {
  static const std::vector<PostRecord> p = [] {
    std::vector<PostRecord> out;
    for (auto& planted : testing::SyntheticGenerator({.records = 5000, .seed = 17})
                             .posts(corpus(), {.planted = 800, .distractors = 200, .seed = 18})) {
      out.push_back(std::move(planted.post));
    }
    return out;
  }();
  return p;
}

void BM_normalize(benchmark::State& state) {
  const auto& phrases = PhraseSet::defaults();
  posts();
  std::size_t bytes = 0;
  for (auto _ : state) {
    for (const auto& p : posts()) {
      benchmark::DoNotOptimize(normalize(p.text, phrases));
      bytes += p.text.size();
    }
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(bytes));
}
BENCHMARK(BM_normalize)->Unit(benchmark::kMillisecond);

void BM_signature(benchmark::State& state) {
  const MinHasher hasher({static_cast<std::uint32_t>(state.range(0)),
                          static_cast<std::uint32_t>(state.range(0) / 2), 2, 7});
  const auto& records = corpus().records();
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(hasher(records[i++ % records.size()].token_set));
  }
}
BENCHMARK(BM_signature)->Arg(128)->Arg(512);

void BM_index_build(benchmark::State& state) {
  corpus();
  for (auto _ : state) benchmark::DoNotOptimize(LshIndex::build(corpus(), MinHashParams{}));
}
BENCHMARK(BM_index_build)->Unit(benchmark::kMillisecond);

void BM_match_posts(benchmark::State& state) {
  const auto index = LshIndex::build(corpus(), MinHashParams{});
  for (auto _ : state) {
    benchmark::DoNotOptimize(match_posts(index, posts(), kDefaultThreshold, static_cast<unsigned>(state.range(0))));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(posts().size()));
}
BENCHMARK(BM_match_posts)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_gini(benchmark::State& state) {
  std::mt19937_64 gen(3);
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(state.range(0)));
  for (auto& c : counts) c = gen() % 50;
  counts[0] += 1;
  for (auto _ : state) benchmark::DoNotOptimize(gini(counts));
}
BENCHMARK(BM_gini)->Arg(365)->Arg(3650);

}  // namespace

BENCHMARK_MAIN();
