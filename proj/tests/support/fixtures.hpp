#pragma once

#include <string>
#include <utility>
#include <vector>

#include "hadithscope/analyze.hpp"
#include "hadithscope/corpus.hpp"

namespace hadithscope::testing {

/// Short, well-known matn texts, fully vocalized where the common print is.
const std::vector<std::string>& hadith_texts();

/// (quoted form, bare matn): the same text behind quotatives, honorifics and
/// companion blessings, with the surrounding punctuation posts tend to add.
std::vector<std::pair<std::string, std::string>> keyring_pairs();

/// Fifty posts over five variant groups in the first two weeks of 2023
/// (Sunday 1 January to Saturday 14 January), with known grades, topics
/// and days.
///
///   group  records  grade       topics                          posts
///   1      11, 12   authentic   Doctrine, SupplicationsRemem.   8 on Fri 6th, 7 on Fri 13th
///   2      21       authentic   Jurisprudence                   one per day, 1st..12th
///   3      31       good        Virtues                         8 on Sat 7th
///   4      41       fabricated  (none)                          3 on Mon 2nd, 3 on Mon 9th
///   5      51       weak        EthicsEtiquette                 Tue 3rd, Wed 4th, Tue 10th, Wed 11th
///   -      -        -           -                               5 unmatched on Sat 14th
///
/// Record 61 (unknown grade, Knowledge) is never quoted. Two unmatched posts
/// carry a sub-threshold soft assignment to record 21.
struct AnalyticsFixture {
  ReferenceCorpus corpus;
  std::vector<MatchRecord> matches;
};

AnalyticsFixture analytics_fixture();

}  // namespace hadithscope::testing
