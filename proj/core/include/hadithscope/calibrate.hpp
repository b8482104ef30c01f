#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hadithscope/minhash_index.hpp"

namespace hadithscope {

/// Operating point used throughout the pipeline.
inline constexpr double kDefaultThreshold = 0.35;
/// Pairs per threshold handed to human reviewers.
inline constexpr std::size_t kDefaultSampleSize = 100;

struct CurvePoint {
  double threshold = 0.0;
  double coverage = 0.0;
  std::optional<double> precision;

  friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

struct CalibrationCurve {
  std::vector<CurvePoint> points;
};

/// "start:stop:step", inclusive of stop. Values are rounded to 1e-9 so that
/// e.g. 0.15 + 4 * 0.05 prints and compares as 0.35.
std::vector<double> parse_threshold_range(std::string_view spec);

/// Coverage per threshold from one matching pass: `best` holds each post's
/// best candidate (as returned by a query at threshold 0). Throws
/// ParameterError on an empty post set or thresholds that are not strictly
/// increasing within [0, 1].
CalibrationCurve sweep(std::span<const MatchResult> best, std::span<const double> thresholds);

/// Runs the matching pass itself, then sweeps.
CalibrationCurve sweep(const LshIndex& index, std::span<const QueryItem> posts,
                       std::span<const double> thresholds, unsigned threads = 1);

enum class Label { correct, incorrect };
std::optional<Label> parse_label(std::string_view text);
std::string_view to_string(Label label);

struct LabelPair {
  std::string post_id;
  RecordId hadith_id = 0;
  GroupId variant_group = 0;
  double jaccard = 0.0;
  double threshold = 0.0;
  std::optional<Label> label;
  std::string post_text;
  std::string matn;

  friend bool operator==(const LabelPair&, const LabelPair&) = default;
};

struct LabelSample {
  std::vector<LabelPair> pairs;
  std::size_t pool_size = 0;
  /// Set when fewer than the requested number of pairs were available.
  bool short_pool = false;
};

/// Uniform sample of n matched pairs (best jaccard >= threshold) without
/// replacement, reproducible for a fixed seed. Pairs are listed in input
/// order; texts are left for the caller to fill in.
LabelSample sample_for_labeling(std::span<const MatchResult> best, double threshold,
                                std::size_t n = kDefaultSampleSize, std::uint64_t seed = 7);

/// correct / (correct + incorrect). Throws InputError listing unlabeled
/// post ids.
double precision_from_labels(const LabelSample& sample);

/// Knee of the precision-vs-coverage curve: the labeled point farthest from
/// the chord joining the first and last labeled points. Ties (within 1e-12)
/// go to the lower threshold. Throws ParameterError with fewer than three
/// labeled points.
double elbow(const CalibrationCurve& curve);

/// Sets precision on the point whose threshold equals `threshold`
/// (within 1e-9). Returns false if no such point exists.
bool attach_precision(CalibrationCurve& curve, double threshold, double precision);

void write_curve_csv(std::ostream& out, const CalibrationCurve& curve);
CalibrationCurve read_curve_csv(std::istream& in);

/// Columns: post_id, hadith_id, variant_group, jaccard, threshold, label,
/// post_text, matn.
void write_sample_csv(std::ostream& out, const LabelSample& sample);
LabelSample read_sample_csv(std::istream& in);

}  // namespace hadithscope
