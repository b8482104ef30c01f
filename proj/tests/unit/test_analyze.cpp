#include <chrono>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "hadithscope/analyze.hpp"
#include "hadithscope/errors.hpp"
#include "fixtures.hpp"

using namespace hadithscope;
using namespace std::chrono;

namespace {

double pairwise_gini(const std::vector<std::uint64_t>& x) {
  double diff = 0.0;
  double sum = 0.0;
  for (auto a : x) {
    sum += static_cast<double>(a);
    for (auto b : x) diff += std::abs(static_cast<double>(a) - static_cast<double>(b));
  }
  const double n = static_cast<double>(x.size());
  return diff / (2.0 * n * n * (sum / n));
}

std::vector<std::pair<GroupId, double>> ranking(const GiniReport& report) {
  std::vector<std::pair<GroupId, double>> out;
  for (const auto& r : report.rows) out.emplace_back(r.group, r.gini);
  return out;
}

Day jan(int d) { return sys_days{year{2023} / January / d}; }

}  // namespace

TEST_CASE("gini analytic cases") {
  const std::vector<std::uint64_t> uniform(30, 4);
  CHECK(gini(uniform) == 0.0);
  const std::vector<std::uint64_t> spike = {0, 0, 0, 4};
  CHECK(gini(spike) == 0.75);
  const std::vector<std::uint64_t> ramp = {1, 2, 3, 4};
  CHECK(gini(ramp) == 0.25);
  const std::vector<std::uint64_t> shuffled = {4, 1, 3, 2};
  CHECK(gini(shuffled) == 0.25);
  std::vector<std::uint64_t> one_day(365, 0);
  one_day[100] = 9;
  CHECK(gini(one_day) == doctest::Approx(364.0 / 365.0));
  CHECK_THROWS_AS(gini(std::vector<std::uint64_t>{}), ParameterError);
  CHECK_THROWS_AS(gini(std::vector<std::uint64_t>{0, 0}), ParameterError);
}

TEST_CASE("gini agrees with the pairwise definition") {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::uint64_t> x(1 + gen() % 60);
    for (auto& v : x) v = gen() % 3 == 0 ? 0 : gen() % 1000;
    x[0] += 1;
    const double g = gini(x);
    CHECK(g == doctest::Approx(pairwise_gini(x)).epsilon(1e-12));
    CHECK(g >= 0.0);
    CHECK(g < 1.0);
  }
}

TEST_CASE("topical distribution counts multi-label hadiths once per category") {
  const auto f = testing::analytics_fixture();
  const auto report = topical_distribution(f.matches, f.corpus);
  CHECK(report.posts.denominator == 39);
  CHECK(report.posts.find("Doctrine")->count == 15);
  CHECK(report.posts.find("SupplicationsRemembrances")->count == 15);
  CHECK(report.posts.find("Jurisprudence")->count == 12);
  CHECK(report.posts.find("Virtues")->count == 8);
  CHECK(report.posts.find("EthicsEtiquette")->count == 4);
  CHECK(report.posts.find("Knowledge")->count == 0);
  CHECK(report.posts.find("Doctrine")->percent == doctest::Approx(100.0 * 15 / 39));
  double total = 0.0;
  for (const auto& r : report.posts.rows) total += r.percent;
  CHECK(total > 100.0);

  CHECK(report.corpus.denominator == 6);
  CHECK(report.corpus.find("Doctrine")->count == 2);
  CHECK(report.corpus.find("Knowledge")->count == 1);
}

TEST_CASE("authenticity distribution covers every post") {
  const auto f = testing::analytics_fixture();
  const auto report = authenticity_distribution(f.matches, f.corpus);
  CHECK(report.denominator == 50);
  CHECK(report.find("authentic")->count == 27);
  CHECK(report.find("good")->count == 8);
  CHECK(report.find("weak")->count == 4);
  CHECK(report.find("fabricated")->count == 6);
  CHECK(report.find("unknown")->count == 0);
  CHECK(report.find("unmatched")->count == 5);
  std::uint64_t sum = 0;
  double pct = 0.0;
  for (const auto& r : report.rows) {
    sum += r.count;
    pct += r.percent;
  }
  CHECK(sum == 50);
  CHECK(pct == doctest::Approx(100.0));
}

TEST_CASE("top hadiths per level") {
  const auto f = testing::analytics_fixture();
  const auto top = top_hadiths(f.matches, f.corpus, AuthenticityLevel::authentic, 10);
  REQUIRE(top.size() == 2);
  CHECK(top[0].group == 1);
  CHECK(top[0].count == 15);
  CHECK(top[0].matn == "لا إله إلا الله");
  CHECK(top[0].topics.to_string() == "SupplicationsRemembrances;Doctrine");
  CHECK(top[1].group == 2);
  CHECK(top[1].count == 12);
  CHECK(top_hadiths(f.matches, f.corpus, AuthenticityLevel::authentic, 1).size() == 1);
  CHECK(top_hadiths(f.matches, f.corpus, AuthenticityLevel::unknown, 5).empty());

  std::ostringstream out;
  write_top_csv(out, AuthenticityLevel::good, top_hadiths(f.matches, f.corpus, AuthenticityLevel::good, 5));
  CHECK(out.str() == "level,rank,variant_group,count,topics,matn\ngood,1,3,8,Virtues,خيركم من تعلم القرآن وعلمه\n");
}

TEST_CASE("temporal histograms") {
  const auto f = testing::analytics_fixture();
  SUBCASE("weekday, Sunday first, matched posts only") {
    const auto report = temporal_histogram(f.matches, Granularity::weekday, true);
    std::vector<std::uint64_t> counts;
    for (const auto& r : report.rows) counts.push_back(r.count);
    CHECK(counts == std::vector<std::uint64_t>{2, 8, 4, 4, 2, 16, 9});
    CHECK(report.rows.front().key == "Sunday");
    CHECK(report.denominator == 45);
    REQUIRE(report.window);
    CHECK(*report.window == DayWindow{jan(1), jan(14)});
  }
  SUBCASE("an explicit window restricts the count") {
    const auto report = temporal_histogram(f.matches, Granularity::weekday, false, DayWindow{jan(1), jan(7)});
    CHECK(report.find("Friday")->count == 9);
    CHECK(report.find("Saturday")->count == 9);
    CHECK(report.denominator == 28);
  }
  SUBCASE("month slots") {
    const auto report = temporal_histogram(f.matches, Granularity::month, false);
    REQUIRE(report.rows.size() == 12);
    CHECK(report.rows[0].key == "January");
    CHECK(report.rows[0].count == 45);
    CHECK(report.rows[0].percent == 100.0);
  }
  CHECK_THROWS_AS(temporal_histogram(f.matches, Granularity::day, false), ParameterError);
}

TEST_CASE("equalized windows") {
  CHECK(equalize_window({jan(1), jan(14)}, Granularity::weekday) == DayWindow{jan(1), jan(14)});
  CHECK(equalize_window({jan(1), jan(17)}, Granularity::weekday) == DayWindow{jan(1), jan(14)});
  CHECK(equalize_window({jan(1), jan(5)}, Granularity::weekday) == DayWindow{jan(1), jan(5)});
  CHECK(equalize_window({jan(1), jan(17)}, Granularity::day) == DayWindow{jan(1), jan(17)});
  const Day from = sys_days{year{2017} / March / 10};
  const Day to = sys_days{year{2019} / July / 2};
  CHECK(equalize_window({from, to}, Granularity::month) ==
        DayWindow{from, sys_days{year{2019} / February / last}});
}

TEST_CASE("seasonality over the global window") {
  const auto f = testing::analytics_fixture();
  SUBCASE("daily") {
    const auto report = seasonality_report(f.matches, Granularity::day, 5);
    const auto r = ranking(report);
    REQUIRE(r.size() == 4);
    CHECK(r[0].first == 3);
    CHECK(r[0].second == doctest::Approx(13.0 / 14));
    CHECK(r[1].first == 1);
    CHECK(r[1].second == doctest::Approx(181.0 / 210));
    CHECK(r[2].first == 4);
    CHECK(r[2].second == doctest::Approx(6.0 / 7));
    CHECK(r[3].first == 2);
    CHECK(r[3].second == doctest::Approx(1.0 / 7));
    CHECK(report.rows[1].total == 15);

    const auto all = seasonality_report(f.matches, Granularity::day, 1);
    REQUIRE(all.rows.size() == 5);
    CHECK(all.rows[3].group == 5);
    CHECK(all.rows[3].gini == doctest::Approx(5.0 / 7));
  }
  SUBCASE("weekday ties rank by group id") {
    const auto r = ranking(seasonality_report(f.matches, Granularity::weekday, 1));
    REQUIRE(r.size() == 5);
    CHECK(r[0] == std::pair<GroupId, double>{1, gini(std::vector<std::uint64_t>{0, 0, 0, 0, 0, 15, 0})});
    CHECK(r[1].first == 3);
    CHECK(r[2].first == 4);
    for (int i = 0; i < 3; ++i) CHECK(r[i].second == doctest::Approx(6.0 / 7));
    CHECK(r[3].first == 5);
    CHECK(r[3].second == doctest::Approx(5.0 / 7));
    CHECK(r[4].first == 2);
    CHECK(r[4].second == doctest::Approx(10.0 / 84));
  }
  SUBCASE("month slots are aggregated into twelve") {
    const auto report = seasonality_report(f.matches, Granularity::month, 1);
    REQUIRE(report.rows.size() == 5);
    for (const auto& row : report.rows) CHECK(row.gini == doctest::Approx(11.0 / 12));
  }
  SUBCASE("the threshold excludes rare hadiths") {
    CHECK(seasonality_report(f.matches, Granularity::day, 100).rows.empty());
    CHECK(seasonality_report(f.matches, Granularity::day, 12).rows.size() == 2);
  }
}

TEST_CASE("seasonality over each hadith's active window") {
  const auto f = testing::analytics_fixture();
  const auto report = seasonality_report(f.matches, Granularity::day, 5, WindowMode::active);
  std::map<GroupId, double> g;
  for (const auto& r : report.rows) g[r.group] = r.gini;
  CHECK(g.at(3) == 0.0);
  CHECK(g.at(2) == 0.0);
  CHECK(g.at(1) == doctest::Approx(91.0 / 120));
  CHECK(g.at(4) == doctest::Approx(0.75));
  CHECK(parse_window_mode("active") == WindowMode::active);
  CHECK_FALSE(parse_window_mode("rolling"));
}

TEST_CASE("daily and bucketed series") {
  const auto f = testing::analytics_fixture();
  const auto series = daily_counts(f.matches, 4, {jan(1), jan(14)});
  CHECK(series.counts == std::vector<std::uint64_t>{0, 3, 0, 0, 0, 0, 0, 0, 3, 0, 0, 0, 0, 0});
  CHECK(bucket_counts(series, Granularity::weekday) == std::vector<std::uint64_t>{0, 6, 0, 0, 0, 0, 0});
  CHECK(bucket_counts(series, Granularity::month)[0] == 6);
  CHECK(bucket_counts(series, Granularity::day) == series.counts);
}

TEST_CASE("matches.csv round trip") {
  const auto f = testing::analytics_fixture();
  std::stringstream buf;
  write_matches_header(buf);
  for (const auto& m : f.matches) {
    MatchResult r{m.post_id, m.hadith_id, m.variant_group, m.jaccard, m.matched, 0.35};
    write_match_row(buf, r, m.timestamp);
  }
  CHECK(buf.str().rfind("post_id,ts_utc,hadith_id,variant_group,jaccard,matched,threshold\n", 0) == 0);
  const auto back = read_matches_csv(buf);
  CHECK(back == f.matches);

  std::istringstream missing("post_id,hadith_id\nx,1\n");
  CHECK_THROWS_AS(read_matches_csv(missing), InputError);
}

TEST_CASE("report writers") {
  const auto f = testing::analytics_fixture();
  const auto auth = authenticity_distribution(f.matches, f.corpus);
  std::ostringstream out;
  write_distribution_csv(out, auth);
  CHECK(out.str().rfind("key,count,percent,denominator\nauthentic,27,54,50\n", 0) == 0);

  const auto j = nlohmann::json::parse(distribution_json(auth));
  CHECK(j["denominator"] == 50);
  CHECK(j["rows"].size() == 6);

  const auto gj = nlohmann::json::parse(gini_json(seasonality_report(f.matches, Granularity::day, 5)));
  CHECK(gj["rows"][0]["variant_group"] == 3);

  std::ostringstream topics;
  write_topics_csv(topics, topical_distribution(f.matches, f.corpus));
  CHECK(topics.str().find("posts,Doctrine,15,") != std::string::npos);
  CHECK(topics.str().find("corpus,Doctrine,2,") != std::string::npos);
}
