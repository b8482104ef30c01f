#include "hadithscope/calibrate.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>

#include "hadithscope/csv.hpp"
#include "hadithscope/errors.hpp"
#include "hadithscope/random.hpp"

namespace hadithscope {
namespace {

constexpr double kGridResolution = 1e9;

double round_to_grid(double v) { return std::round(v * kGridResolution) / kGridResolution; }

double parse_double(std::string_view s, const char* what) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || r.ec != std::errc{} || r.ptr != s.data() + s.size()) {
    throw InputError(std::string("invalid ") + what + " '" + std::string(s) + "'");
  }
  return v;
}

std::int64_t parse_i64(std::string_view s, const char* what) {
  std::int64_t v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || r.ec != std::errc{} || r.ptr != s.data() + s.size()) {
    throw InputError(std::string("invalid ") + what + " '" + std::string(s) + "'");
  }
  return v;
}

void check_thresholds(std::span<const double> thresholds) {
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    const double t = thresholds[i];
    if (!(t >= 0.0 && t <= 1.0)) throw ParameterError("thresholds must lie in [0, 1]");
    if (i > 0 && !(t > thresholds[i - 1])) {
      throw ParameterError("thresholds must be strictly increasing");
    }
  }
}

bool is_match(const MatchResult& r, double threshold) {
  return r.hadith_id.has_value() && r.jaccard >= threshold;
}

}  // namespace

std::vector<double> parse_threshold_range(std::string_view spec) {
  const auto first = spec.find(':');
  const auto second = first == std::string_view::npos ? first : spec.find(':', first + 1);
  if (second == std::string_view::npos) {
    throw ParameterError("threshold range must be start:stop:step");
  }
  const double start = parse_double(spec.substr(0, first), "range start");
  const double stop = parse_double(spec.substr(first + 1, second - first - 1), "range stop");
  const double step = parse_double(spec.substr(second + 1), "range step");
  if (!(step > 0.0) || stop < start) throw ParameterError("invalid threshold range " + std::string(spec));
  std::vector<double> out;
  for (std::size_t k = 0;; ++k) {
    const double t = round_to_grid(start + static_cast<double>(k) * step);
    if (t > stop + 1e-9) break;
    out.push_back(t);
  }
  check_thresholds(out);
  return out;
}

CalibrationCurve sweep(std::span<const MatchResult> best, std::span<const double> thresholds) {
  if (best.empty()) throw ParameterError("cannot sweep an empty post set");
  check_thresholds(thresholds);
  std::vector<double> scores;
  scores.reserve(best.size());
  for (const auto& r : best) {
    if (r.hadith_id) scores.push_back(r.jaccard);
  }
  std::sort(scores.begin(), scores.end());
  CalibrationCurve curve;
  const auto total = static_cast<double>(best.size());
  for (const double t : thresholds) {
    const auto covered = static_cast<std::size_t>(
        scores.end() - std::lower_bound(scores.begin(), scores.end(), t));
    curve.points.push_back({t, static_cast<double>(covered) / total, std::nullopt});
  }
  return curve;
}

CalibrationCurve sweep(const LshIndex& index, std::span<const QueryItem> posts,
                       std::span<const double> thresholds, unsigned threads) {
  const auto best = query_batch(index, posts, 0.0, threads);
  return sweep(best, thresholds);
}

std::optional<Label> parse_label(std::string_view text) {
  std::string key(text);
  for (char& c : key) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  while (!key.empty() && std::isspace(static_cast<unsigned char>(key.back()))) key.pop_back();
  while (!key.empty() && std::isspace(static_cast<unsigned char>(key.front()))) key.erase(0, 1);
  if (key == "correct" || key == "1" || key == "true" || key == "yes") return Label::correct;
  if (key == "incorrect" || key == "0" || key == "false" || key == "no") return Label::incorrect;
  return std::nullopt;
}

std::string_view to_string(Label label) {
  return label == Label::correct ? "correct" : "incorrect";
}

LabelSample sample_for_labeling(std::span<const MatchResult> best, double threshold, std::size_t n,
                                std::uint64_t seed) {
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < best.size(); ++i) {
    if (is_match(best[i], threshold)) pool.push_back(i);
  }
  LabelSample sample;
  sample.pool_size = pool.size();
  sample.short_pool = pool.size() < n;

  // Partial Fisher-Yates over the pool, then restore input order.
  std::mt19937_64 gen(seed);
  const std::size_t take = std::min(n, pool.size());
  for (std::size_t i = 0; i < take; ++i) {
    const auto j = i + static_cast<std::size_t>(uniform_below(gen, pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(take);
  std::sort(pool.begin(), pool.end());

  for (const std::size_t i : pool) {
    const auto& r = best[i];
    LabelPair pair;
    pair.post_id = r.post_id;
    pair.hadith_id = *r.hadith_id;
    pair.variant_group = r.variant_group.value_or(*r.hadith_id);
    pair.jaccard = r.jaccard;
    pair.threshold = threshold;
    sample.pairs.push_back(std::move(pair));
  }
  return sample;
}

double precision_from_labels(const LabelSample& sample) {
  std::size_t correct = 0;
  std::size_t incorrect = 0;
  std::string unlabeled;
  for (const auto& p : sample.pairs) {
    if (!p.label) {
      if (!unlabeled.empty()) unlabeled += ", ";
      unlabeled += p.post_id;
    } else if (*p.label == Label::correct) {
      ++correct;
    } else {
      ++incorrect;
    }
  }
  if (!unlabeled.empty()) throw InputError("unlabeled pairs: " + unlabeled);
  if (correct + incorrect == 0) throw InputError("label sample is empty");
  return static_cast<double>(correct) / static_cast<double>(correct + incorrect);
}

double elbow(const CalibrationCurve& curve) {
  std::vector<const CurvePoint*> labeled;
  for (const auto& p : curve.points) {
    if (p.precision) labeled.push_back(&p);
  }
  if (labeled.size() < 3) throw ParameterError("elbow needs at least three labeled points");
  std::sort(labeled.begin(), labeled.end(),
            [](const CurvePoint* a, const CurvePoint* b) { return a->threshold < b->threshold; });

  const double x0 = labeled.front()->coverage;
  const double y0 = *labeled.front()->precision;
  const double dx = labeled.back()->coverage - x0;
  const double dy = *labeled.back()->precision - y0;
  const double chord = std::hypot(dx, dy);

  double best_distance = -1.0;
  double best_threshold = labeled.front()->threshold;
  for (const CurvePoint* p : labeled) {
    const double px = p->coverage - x0;
    const double py = *p->precision - y0;
    const double distance =
        chord > 0.0 ? std::abs(dx * py - dy * px) / chord : std::hypot(px, py);
    if (distance > best_distance + 1e-12) {
      best_distance = distance;
      best_threshold = p->threshold;
    }
  }
  return best_threshold;
}

bool attach_precision(CalibrationCurve& curve, double threshold, double precision) {
  for (auto& p : curve.points) {
    if (std::abs(p.threshold - threshold) <= 1e-9) {
      p.precision = precision;
      return true;
    }
  }
  return false;
}

void write_curve_csv(std::ostream& out, const CalibrationCurve& curve) {
  const bool with_precision = std::any_of(curve.points.begin(), curve.points.end(),
                                          [](const CurvePoint& p) { return p.precision.has_value(); });
  if (with_precision) {
    csv::write(out, "threshold", "coverage", "precision");
  } else {
    csv::write(out, "threshold", "coverage");
  }
  for (const auto& p : curve.points) {
    if (with_precision) {
      csv::write(out, csv::number(p.threshold), csv::number(p.coverage),
                 p.precision ? csv::number(*p.precision) : std::string());
    } else {
      csv::write(out, csv::number(p.threshold), csv::number(p.coverage));
    }
  }
}

CalibrationCurve read_curve_csv(std::istream& in) {
  csv::Reader reader(in);
  csv::Row row;
  if (!reader.next(row)) throw InputError("empty curve file");
  const csv::Header header(row);
  const auto t_col = header.find("threshold");
  const auto c_col = header.find("coverage");
  const auto p_col = header.find("precision");
  if (!t_col) throw InputError("missing column threshold");
  if (!c_col) throw InputError("missing column coverage");
  CalibrationCurve curve;
  while (reader.next(row)) {
    if (row.size() == 1 && row[0].empty()) continue;
    if (row.size() != header.size()) {
      throw InputError("curve file line " + std::to_string(reader.line()) + ": wrong field count");
    }
    CurvePoint p;
    p.threshold = parse_double(row[*t_col], "threshold");
    p.coverage = parse_double(row[*c_col], "coverage");
    if (p_col && !row[*p_col].empty()) p.precision = parse_double(row[*p_col], "precision");
    curve.points.push_back(p);
  }
  return curve;
}

void write_sample_csv(std::ostream& out, const LabelSample& sample) {
  csv::write(out, "post_id", "hadith_id", "variant_group", "jaccard", "threshold", "label",
             "post_text", "matn");
  for (const auto& p : sample.pairs) {
    csv::write(out, p.post_id, std::to_string(p.hadith_id), std::to_string(p.variant_group),
               csv::number(p.jaccard), csv::number(p.threshold),
               p.label ? std::string(to_string(*p.label)) : std::string(), p.post_text, p.matn);
  }
}

LabelSample read_sample_csv(std::istream& in) {
  csv::Reader reader(in);
  csv::Row row;
  if (!reader.next(row)) throw InputError("empty label file");
  const csv::Header header(row);
  const auto col = [&](const char* name) {
    const auto c = header.find(name);
    if (!c) throw InputError(std::string("missing column ") + name);
    return *c;
  };
  const auto post_col = col("post_id");
  const auto hadith_col = col("hadith_id");
  const auto jaccard_col = col("jaccard");
  const auto label_col = col("label");
  const auto group_col = header.find("variant_group");
  const auto threshold_col = header.find("threshold");
  const auto text_col = header.find("post_text");
  const auto matn_col = header.find("matn");

  LabelSample sample;
  while (reader.next(row)) {
    if (row.size() == 1 && row[0].empty()) continue;
    if (row.size() != header.size()) {
      throw InputError("label file line " + std::to_string(reader.line()) + ": wrong field count");
    }
    LabelPair p;
    p.post_id = row[post_col];
    p.hadith_id = parse_i64(row[hadith_col], "hadith_id");
    p.variant_group = group_col && !row[*group_col].empty() ? parse_i64(row[*group_col], "variant_group")
                                                           : p.hadith_id;
    p.jaccard = parse_double(row[jaccard_col], "jaccard");
    if (threshold_col && !row[*threshold_col].empty()) {
      p.threshold = parse_double(row[*threshold_col], "threshold");
    }
    const std::string& label = row[label_col];
    if (!label.empty()) {
      p.label = parse_label(label);
      if (!p.label) {
        throw InputError("label file line " + std::to_string(reader.line()) + ": unknown label '" +
                         label + "'");
      }
    }
    if (text_col) p.post_text = row[*text_col];
    if (matn_col) p.matn = row[*matn_col];
    sample.pairs.push_back(std::move(p));
  }
  sample.pool_size = sample.pairs.size();
  return sample;
}

}  // namespace hadithscope
