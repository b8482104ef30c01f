#include "fixtures.hpp"

#include <chrono>

namespace hadithscope::testing {

const std::vector<std::string>& hadith_texts() {
  static const std::vector<std::string> texts = {
      "إِنَّمَا الأَعْمَالُ بِالنِّيَّاتِ، وَإِنَّمَا لِكُلِّ امْرِئٍ مَا نَوَى",
      "الدِّينُ النَّصِيحَةُ",
      "مَنْ كَانَ يُؤْمِنُ بِاللَّهِ وَالْيَوْمِ الآخِرِ فَلْيَقُلْ خَيْرًا أَوْ لِيَصْمُتْ",
      "لا يُؤْمِنُ أَحَدُكُمْ حَتَّى يُحِبَّ لأَخِيهِ مَا يُحِبُّ لِنَفْسِهِ",
      "المسلم من سلم المسلمون من لسانه ويده",
      "الطُّهُورُ شَطْرُ الإِيمَانِ",
      "مِنْ حُسْنِ إِسْلامِ الْمَرْءِ تَرْكُهُ مَا لا يَعْنِيهِ",
      "لا تغضب",
      "الحياء من الإيمان",
      "خيركم من تعلم القرآن وعلمه",
      "الكلمة الطيبة صدقة",
      "تبسمك في وجه أخيك لك صدقة",
      "من سلك طريقا يلتمس فيه علما سهل الله له به طريقا إلى الجنة",
      "اتق الله حيثما كنت، وأتبع السيئة الحسنة تمحها، وخالق الناس بخلق حسن",
      "بُنِيَ الإِسْلامُ عَلَى خَمْسٍ",
  };
  return texts;
}

std::vector<std::pair<std::string, std::string>> keyring_pairs() {
  // Text placed before and after the matn.
  static const std::vector<std::pair<std::string, std::string>> wrappers = {
      {"قال رسول الله صلى الله عليه وسلم: «", "»"},
      {"قَالَ النَّبِيُّ ﷺ ", ""},
      {"عن النبي صلى الله عليه وآله وسلم قال: ", " 🌹"},
      {"سمعت رسول الله ﷺ يقول: \"", "\" 👍"},
  };
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const auto& matn : hadith_texts()) {
    for (const auto& [before, after] : wrappers) pairs.emplace_back(before + matn + after, matn);
  }
  // Other quotatives, repeated phrases, links and emoji.
  pairs.emplace_back("قال رسول الله عليه الصلاة والسلام الدين النصيحة", "الدين النصيحة");
  pairs.emplace_back("قال الرسول ﷺ: لا تغضب.. لا تغضب", "لا تغضب");
  pairs.emplace_back("أن رسول الله صلى الله عليه وسلم قال الطهور شطر الإيمان", "الطهور شطر الإيمان");
  pairs.emplace_back("يقول رسول الله: الكلمة الطيبة صدقة ❤️", "الكلمة الطيبة صدقة");
  pairs.emplace_back("قال المصطفى ﷺ خيركم من تعلم القرآن وعلمه", "خيركم من تعلم القرآن وعلمه");
  pairs.emplace_back("قال رسول الله صلى الله عليه وسلم تبسمك في وجه أخيك لك صدقة https://t.co/x",
                     "تبسمك في وجه أخيك لك صدقة");
  pairs.emplace_back("سمعت النبي يقول بني الإسلام على خمس", "بني الإسلام على خمس");
  return pairs;
}

AnalyticsFixture analytics_fixture() {
  using namespace std::chrono;
  const auto make = [](RecordId id, GroupId group, const char* matn, AuthenticityLevel grade,
                       TopicSet topics) {
    auto r = make_record(id, group, matn, PhraseSet{});
    r.grade = grade;
    r.topics = topics;
    return r;
  };
  std::vector<HadithRecord> records = {
      make(11, 1, "لا إله إلا الله", AuthenticityLevel::authentic,
           {TopicCategory::doctrine, TopicCategory::supplications_remembrances}),
      make(12, 1, "لا إله إلا الله وحده", AuthenticityLevel::authentic,
           {TopicCategory::doctrine, TopicCategory::supplications_remembrances}),
      make(21, 2, "الطهور شطر الإيمان", AuthenticityLevel::authentic, {TopicCategory::jurisprudence}),
      make(31, 3, "خيركم من تعلم القرآن وعلمه", AuthenticityLevel::good, {TopicCategory::virtues}),
      make(41, 4, "نص مكذوب للاختبار", AuthenticityLevel::fabricated, {}),
      make(51, 5, "الكلمة الطيبة صدقة", AuthenticityLevel::weak, {TopicCategory::ethics_etiquette}),
      make(61, 6, "طلب العلم فريضة", AuthenticityLevel::unknown, {TopicCategory::knowledge}),
  };

  AnalyticsFixture f{ReferenceCorpus(std::move(records)), {}};
  int serial = 0;
  const auto post = [&](int day, std::optional<RecordId> id, GroupId group, double jaccard, bool matched) {
    MatchRecord m;
    m.post_id = "f" + std::to_string(++serial);
    // Spread posts over the day; the hour never changes the UTC date.
    m.timestamp = sys_days{year{2023} / January / day} + hours(serial % 24);
    m.hadith_id = id;
    if (id) m.variant_group = group;
    m.jaccard = jaccard;
    m.matched = matched;
    f.matches.push_back(m);
  };

  for (int i = 0; i < 8; ++i) post(6, i < 5 ? 11 : 12, 1, 0.8, true);
  for (int i = 0; i < 7; ++i) post(13, i < 5 ? 11 : 12, 1, 0.6, true);
  for (int d = 1; d <= 12; ++d) post(d, 21, 2, 0.5, true);
  for (int i = 0; i < 8; ++i) post(7, 31, 3, 0.9, true);
  for (int d : {2, 9}) {
    for (int i = 0; i < 3; ++i) post(d, 41, 4, 0.4, true);
  }
  for (int d : {3, 4, 10, 11}) post(d, 51, 5, 0.35, true);
  post(14, 21, 2, 0.2, false);
  post(14, 21, 2, 0.1, false);
  for (int i = 0; i < 3; ++i) post(14, std::nullopt, 0, 0.0, false);
  return f;
}

}  // namespace hadithscope::testing
