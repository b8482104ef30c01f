#pragma once

#include <optional>
#include <vector>

#include "hadithscope/corpus.hpp"
#include "hadithscope/minhash_index.hpp"

namespace hadithscope {

struct CorpusLink {
  RecordId a_id = 0;
  std::optional<RecordId> b_id;
  double jaccard = 0.0;

  friend bool operator==(const CorpusLink&, const CorpusLink&) = default;
};

/// Maps each record of `a` (in record order) to its best exact-Jaccard
/// record of `b`, found through `b_index`, when that score reaches the
/// threshold. `b_index` must have been built from `b`.
std::vector<CorpusLink> link_corpora(const ReferenceCorpus& a, const ReferenceCorpus& b,
                                     const LshIndex& b_index, double threshold,
                                     unsigned threads = 1);

/// Which corpus wins when linked records carry different grades.
enum class GradePrecedence { a, b };

/// Copy of `a` where every linked record also carries the topics of its
/// partner in `b`. With GradePrecedence::b a linked record takes the
/// partner's grade unless that grade is Unknown.
ReferenceCorpus merge_linked(const ReferenceCorpus& a, const ReferenceCorpus& b,
                             const std::vector<CorpusLink>& links,
                             GradePrecedence precedence = GradePrecedence::a);

}  // namespace hadithscope
