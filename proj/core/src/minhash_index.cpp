#include "hadithscope/minhash_index.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <random>

#include "hadithscope/errors.hpp"
#include "hadithscope/hashing.hpp"
#include "hadithscope/parallel.hpp"

namespace hadithscope {
namespace {

constexpr std::array<char, 8> kMagic = {'H', 'S', 'L', 'S', 'H', 'I', 'D', 'X'};
constexpr std::uint32_t kFormatVersion = 1;
constexpr std::uint64_t kTokenHashSeed = 0x6861646974680001ULL;

class BinaryWriter {
 public:
  explicit BinaryWriter(std::ostream& out) : out_(out) {}

  void u32(std::uint32_t v) { little_endian(v, 4); }
  void u64(std::uint64_t v) { little_endian(v, 8); }
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  void strings(const std::vector<std::string>& list) {
    u32(static_cast<std::uint32_t>(list.size()));
    for (const auto& s : list) str(s);
  }

 private:
  void little_endian(std::uint64_t v, int bytes) {
    char buf[8];
    for (int i = 0; i < bytes; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out_.write(buf, bytes);
  }
  std::ostream& out_;
};

class BinaryReader {
 public:
  explicit BinaryReader(std::istream& in) : in_(in) {}

  std::uint32_t u32() { return static_cast<std::uint32_t>(little_endian(4)); }
  std::uint64_t u64() { return little_endian(8); }
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  std::string str() {
    const std::uint32_t n = u32();
    std::string s(n, '\0');
    read(s.data(), n);
    return s;
  }
  std::vector<std::string> strings() {
    std::vector<std::string> list(u32());
    for (auto& s : list) s = str();
    return list;
  }
  void read(char* dst, std::size_t n) {
    in_.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) {
      throw IoError("truncated index file", offset_);
    }
    offset_ += n;
  }
  std::uint64_t offset() const { return offset_; }

 private:
  std::uint64_t little_endian(int bytes) {
    unsigned char buf[8];
    read(reinterpret_cast<char*>(buf), static_cast<std::size_t>(bytes));
    std::uint64_t v = 0;
    for (int i = bytes - 1; i >= 0; --i) v = (v << 8) | buf[i];
    return v;
  }
  std::istream& in_;
  std::uint64_t offset_ = 0;
};

}  // namespace

void MinHashParams::validate() const {
  if (num_hashes == 0 || bands == 0 || rows == 0) {
    throw ParameterError("MinHash parameters must be positive");
  }
  if (static_cast<std::uint64_t>(bands) * rows != num_hashes) {
    throw ParameterError("bands * rows (" + std::to_string(bands) + " * " + std::to_string(rows) +
                         ") must equal num_hashes (" + std::to_string(num_hashes) + ")");
  }
}

MinHasher::MinHasher(const MinHashParams& params) : params_(params) {
  params_.validate();
  std::mt19937_64 gen(params_.seed);
  mul_.resize(params_.num_hashes);
  add_.resize(params_.num_hashes);
  for (std::uint32_t i = 0; i < params_.num_hashes; ++i) {
    const uint128 a_hi = gen();
    const uint128 a_lo = gen();
    const uint128 b_hi = gen();
    const uint128 b_lo = gen();
    mul_[i] = (a_hi << 64 | a_lo) | 1;
    add_[i] = b_hi << 64 | b_lo;
  }
}

MinHashSignature MinHasher::operator()(const TokenSet& tokens) const {
  std::vector<std::uint64_t> values(params_.num_hashes, std::numeric_limits<std::uint64_t>::max());
  for (const auto& token : tokens) {
    const uint128 x = stable_hash(token, kTokenHashSeed);
    for (std::uint32_t i = 0; i < params_.num_hashes; ++i) {
      const auto h = static_cast<std::uint64_t>((mul_[i] * x + add_[i]) >> 64);
      values[i] = std::min(values[i], h);
    }
  }
  return MinHashSignature(std::move(values), params_.seed);
}

MinHashSignature signature(const TokenSet& tokens, const MinHashParams& params) {
  return MinHasher(params)(tokens);
}

double exact_jaccard(const TokenSet& a, const TokenSet& b) {
  if (a.empty() && b.empty()) return 0.0;
  std::size_t common = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    const int cmp = i->compare(*j);
    if (cmp == 0) {
      ++common;
      ++i;
      ++j;
    } else if (cmp < 0) {
      ++i;
    } else {
      ++j;
    }
  }
  const std::size_t uni = a.size() + b.size() - common;
  return static_cast<double>(common) / static_cast<double>(uni);
}

double estimate_jaccard(const MinHashSignature& a, const MinHashSignature& b) {
  if (a.size() != b.size() || a.seed() != b.seed()) {
    throw ParameterError("signatures were computed with different MinHash parameters");
  }
  if (a.size() == 0) throw ParameterError("empty signature");
  std::size_t equal = 0;
  for (std::size_t i = 0; i < a.size(); ++i) equal += a.values()[i] == b.values()[i] ? 1 : 0;
  return static_cast<double>(equal) / static_cast<double>(a.size());
}

LshIndex::LshIndex(const MinHashParams& params) : hasher_(params), buckets_(params.bands) {}

LshIndex LshIndex::build(const ReferenceCorpus& corpus, const MinHashParams& params,
                         unsigned threads) {
  LshIndex index(params);
  index.phrases_ = corpus.phrases();
  for (const auto& record : corpus.records()) {
    if (record.token_set.empty()) continue;
    index.entries_.push_back(Entry{record.id, record.variant_group, record.token_set, {}});
  }
  std::sort(index.entries_.begin(), index.entries_.end(),
            [](const Entry& a, const Entry& b) { return a.id < b.id; });
  if (index.entries_.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw ParameterError("corpus too large for a single index");
  }
  parallel_for(index.entries_.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      index.entries_[i].signature = index.hasher_(index.entries_[i].tokens);
    }
  });
  index.insert_buckets();
  index.assign_token_ids();
  return index;
}

void LshIndex::assign_token_ids() {
  std::vector<std::string_view> vocabulary;
  for (const auto& e : entries_) vocabulary.insert(vocabulary.end(), e.tokens.begin(), e.tokens.end());
  std::sort(vocabulary.begin(), vocabulary.end());
  vocabulary.erase(std::unique(vocabulary.begin(), vocabulary.end()), vocabulary.end());
  token_ids_.clear();
  token_ids_.reserve(vocabulary.size());
  for (std::size_t i = 0; i < vocabulary.size(); ++i) {
    token_ids_.emplace(std::string(vocabulary[i]), static_cast<std::uint32_t>(i));
  }
  entry_ids_.assign(entries_.size(), {});
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    auto& ids = entry_ids_[i];
    ids.reserve(entries_[i].tokens.size());
    for (const auto& t : entries_[i].tokens) ids.push_back(token_ids_.find(t)->second);
  }
}

void LshIndex::insert_buckets() {
  buckets_.assign(params().bands, {});
  for (std::uint32_t band = 0; band < params().bands; ++band) {
    auto& table = buckets_[band];
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      table[band_key(entries_[i].signature, band)].push_back(static_cast<std::uint32_t>(i));
    }
  }
}

std::uint64_t LshIndex::band_key(const MinHashSignature& sig, std::uint32_t band) const {
  const std::uint32_t rows = params().rows;
  std::uint64_t h = mix64(params().seed ^ (static_cast<std::uint64_t>(band) << 32));
  for (std::uint32_t r = 0; r < rows; ++r) {
    h = mix64(h ^ sig.values()[band * rows + r]) + 0x9e3779b97f4a7c15ULL;
  }
  return h;
}

std::vector<std::uint32_t> LshIndex::candidates(const MinHashSignature& sig) const {
  if (sig.size() != params().num_hashes || sig.seed() != params().seed) {
    throw ParameterError("query signature does not match index parameters");
  }
  thread_local std::vector<std::uint8_t> seen;
  seen.resize(entries_.size());
  std::vector<std::uint32_t> found;
  for (std::uint32_t band = 0; band < params().bands; ++band) {
    const auto& table = buckets_[band];
    const auto it = table.find(band_key(sig, band));
    if (it == table.end()) continue;
    for (const std::uint32_t pos : it->second) {
      if (!seen[pos]) {
        seen[pos] = 1;
        found.push_back(pos);
      }
    }
  }
  if (found.size() * 8 > entries_.size()) {
    // Dense result: a scan of the marks is cheaper than sorting.
    found.clear();
    for (std::uint32_t pos = 0; pos < entries_.size(); ++pos) {
      if (seen[pos]) {
        found.push_back(pos);
        seen[pos] = 0;
      }
    }
  } else {
    std::sort(found.begin(), found.end());
    for (const std::uint32_t pos : found) seen[pos] = 0;
  }
  return found;
}

MatchResult LshIndex::query(const TokenSet& tokens, double threshold, std::string post_id) const {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw ParameterError("threshold must lie in [0, 1]");
  }
  MatchResult result;
  result.post_id = std::move(post_id);
  result.threshold = threshold;
  if (tokens.empty() || entries_.empty()) return result;

  // Tokens unknown to the corpus can only enlarge the union; the known ones
  // are marked so that each candidate costs one lookup per token.
  thread_local std::vector<std::uint8_t> marks;
  marks.resize(token_ids_.size());
  std::vector<std::uint32_t> known;
  known.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (const auto it = token_ids_.find(t); it != token_ids_.end()) {
      known.push_back(it->second);
      marks[it->second] = 1;
    }
  }
  const std::size_t size = tokens.size();

  std::optional<std::uint32_t> best;
  double best_score = -1.0;
  // Candidates come sorted by position (= record id), so a strict comparison
  // keeps the smallest id on ties.
  for (const std::uint32_t pos : candidates(hasher_(tokens))) {
    const auto& ids = entry_ids_[pos];
    // J <= min/max of the set sizes; a candidate that can at best tie loses
    // to the smaller id already held.
    const std::size_t lo = std::min(size, ids.size());
    const std::size_t hi = std::max(size, ids.size());
    if (best && static_cast<double>(lo) / static_cast<double>(hi) <= best_score) continue;
    std::size_t common = 0;
    for (const std::uint32_t id : ids) common += marks[id];
    const double score = static_cast<double>(common) / static_cast<double>(size + ids.size() - common);
    if (score > best_score) {
      best_score = score;
      best = pos;
    }
  }
  for (const std::uint32_t id : known) marks[id] = 0;
  if (!best) return result;
  result.hadith_id = entries_[*best].id;
  result.variant_group = entries_[*best].group;
  result.jaccard = best_score;
  result.matched = best_score >= threshold;
  return result;
}

void LshIndex::save(std::ostream& out) const {
  BinaryWriter w(out);
  out.write(kMagic.data(), kMagic.size());
  w.u32(kFormatVersion);
  w.u32(params().num_hashes);
  w.u32(params().bands);
  w.u32(params().rows);
  w.u64(params().seed);
  w.strings(phrases_.leading_phrases());
  w.strings(phrases_.infix_fragments());
  w.u64(entries_.size());
  for (const auto& e : entries_) {
    w.i64(e.id);
    w.i64(e.group);
    w.strings(e.tokens.tokens());
    for (auto v : e.signature.values()) w.u64(v);
  }
  for (const auto& table : buckets_) {
    std::vector<std::uint64_t> keys;
    keys.reserve(table.size());
    for (const auto& [key, ids] : table) keys.push_back(key);
    std::sort(keys.begin(), keys.end());
    w.u64(keys.size());
    for (auto key : keys) {
      const auto& ids = table.at(key);
      w.u64(key);
      w.u32(static_cast<std::uint32_t>(ids.size()));
      for (auto id : ids) w.u32(id);
    }
  }
  if (!out) throw IoError("failed writing index", 0);
}

LshIndex LshIndex::load(std::istream& in) {
  BinaryReader r(in);
  std::array<char, 8> magic{};
  r.read(magic.data(), magic.size());
  if (magic != kMagic) throw InputError("not an index file (bad magic)");
  const std::uint32_t version = r.u32();
  if (version != kFormatVersion) {
    throw InputError("unsupported index format version " + std::to_string(version));
  }
  MinHashParams params;
  params.num_hashes = r.u32();
  params.bands = r.u32();
  params.rows = r.u32();
  params.seed = r.u64();
  LshIndex index(params);
  auto leading = r.strings();
  auto infix = r.strings();
  index.phrases_ = PhraseSet::from_lists(leading, infix);
  const std::uint64_t count = r.u64();
  index.entries_.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    Entry e;
    e.id = r.i64();
    e.group = r.i64();
    e.tokens = TokenSet(r.strings());
    std::vector<std::uint64_t> values(params.num_hashes);
    for (auto& v : values) v = r.u64();
    e.signature = MinHashSignature(std::move(values), params.seed);
    index.entries_.push_back(std::move(e));
  }
  index.assign_token_ids();
  for (auto& table : index.buckets_) {
    const std::uint64_t keys = r.u64();
    for (std::uint64_t k = 0; k < keys; ++k) {
      const std::uint64_t key = r.u64();
      std::vector<std::uint32_t> ids(r.u32());
      for (auto& id : ids) {
        id = r.u32();
        if (id >= count) throw InputError("index bucket references unknown entry");
      }
      table.emplace(key, std::move(ids));
    }
  }
  return index;
}

void LshIndex::save_dir(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  const auto path = dir / "index.bin";
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string(), 0);
  save(out);
}

LshIndex LshIndex::load_dir(const std::filesystem::path& dir) {
  const auto path = std::filesystem::is_directory(dir) ? dir / "index.bin" : dir;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open index " + path.string());
  return load(in);
}

MatchResult query(const LshIndex& index, const TokenSet& tokens, double threshold,
                  std::string_view post_id) {
  return index.query(tokens, threshold, std::string(post_id));
}

std::vector<MatchResult> query_batch(const LshIndex& index, std::span<const QueryItem> items,
                                     double threshold, unsigned threads) {
  std::vector<MatchResult> results(items.size());
  parallel_for(items.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      results[i] = index.query(items[i].tokens, threshold, items[i].post_id);
    }
  });
  return results;
}

}  // namespace hadithscope
