#include "hadithscope/linkage.hpp"

#include <unordered_map>

#include "hadithscope/errors.hpp"
#include "hadithscope/parallel.hpp"

namespace hadithscope {

std::vector<CorpusLink> link_corpora(const ReferenceCorpus& a, const ReferenceCorpus& b,
                                     const LshIndex& b_index, double threshold, unsigned threads) {
  if (!(b.phrases() == b_index.phrases())) {
    throw ParameterError("index was not built with the corpus normalization settings");
  }
  std::size_t indexable = 0;
  for (const auto& r : b.records()) indexable += r.token_set.empty() ? 0 : 1;
  if (indexable != b_index.size()) {
    throw ParameterError("index does not cover the target corpus");
  }

  const auto& records = a.records();
  std::vector<CorpusLink> links(records.size());
  parallel_for(records.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto match = b_index.query(records[i].token_set, threshold, {});
      links[i].a_id = records[i].id;
      links[i].jaccard = match.jaccard;
      if (match.matched) links[i].b_id = match.hadith_id;
    }
  });
  return links;
}

ReferenceCorpus merge_linked(const ReferenceCorpus& a, const ReferenceCorpus& b,
                             const std::vector<CorpusLink>& links, GradePrecedence precedence) {
  std::unordered_map<RecordId, RecordId> partner;
  for (const auto& link : links) {
    if (link.b_id) partner.emplace(link.a_id, *link.b_id);
  }
  std::vector<HadithRecord> merged = a.records();
  for (auto& record : merged) {
    const auto it = partner.find(record.id);
    if (it == partner.end()) continue;
    const HadithRecord* other = b.find(it->second);
    if (!other) throw InputError("link references unknown record " + std::to_string(it->second));
    record.topics |= other->topics;
    if (precedence == GradePrecedence::b && other->grade != AuthenticityLevel::unknown) {
      record.grade = other->grade;
    }
  }
  return ReferenceCorpus(std::move(merged), a.phrases());
}

}  // namespace hadithscope
