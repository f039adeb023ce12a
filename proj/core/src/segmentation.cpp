#include <algorithm>
#include <cmath>

#include <opencv2/imgproc.hpp>

#include "lipread/corpus.hpp"
#include "lipread/errors.hpp"
#include "lipread/frames.hpp"

namespace lipread {
namespace {

double percentile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (v[hi] - v[lo]) * (pos - static_cast<double>(lo));
}

}  // namespace

std::vector<double> motion_energy(const std::vector<cv::Mat>& frames) {
  std::vector<double> energy(frames.size(), 0.0);
  cv::Mat diff;
  for (std::size_t i = 1; i < frames.size(); ++i) {
    cv::absdiff(frames[i], frames[i - 1], diff);
    const cv::Scalar s = cv::mean(diff);
    energy[i] = (s[0] + s[1] + s[2]) / 3.0;
  }
  return energy;
}

std::vector<ClipBoundary> segment_recording(const std::vector<cv::Mat>& frames, int word_count, double gap,
                                            double fps) {
  if (word_count < 1) throw InvalidArgument("word_count must be >= 1");
  if (!(gap > 0)) throw InvalidArgument("gap must be > 0");
  if (frames.empty()) throw DecodeError("recording has no frames");
  const int n = static_cast<int>(frames.size());
  const auto energy = motion_energy(frames);

  // Per-frame activity: the larger of the differences entering and leaving it.
  std::vector<double> activity(frames.size());
  for (int i = 0; i < n; ++i) {
    const double in = i > 0 ? energy[i] : 0.0;
    const double out = i + 1 < n ? energy[i + 1] : 0.0;
    activity[i] = std::max(in, out);
  }
  const double lo = percentile(activity, 0.10);
  const double hi = percentile(activity, 0.90);
  const double threshold = 0.5 * (lo + hi);
  const int min_trough = std::max(1, static_cast<int>(std::ceil(gap * fps / 2.0)));

  // Long still runs are cut points; everything between them is a burst.
  std::vector<ClipBoundary> troughs;
  for (int i = 0; i < n;) {
    if (activity[i] < threshold) {
      int j = i;
      while (j < n && activity[j] < threshold) ++j;
      if (j - i >= min_trough) troughs.push_back({i, j});
      i = j;
    } else {
      ++i;
    }
  }
  std::vector<ClipBoundary> bursts;
  int cursor = 0;
  for (const auto& t : troughs) {
    if (t.start > cursor) bursts.push_back({cursor, t.start});
    cursor = t.end;
  }
  if (cursor < n) bursts.push_back({cursor, n});

  if (static_cast<int>(bursts.size()) < word_count)
    throw SegmentationError("found " + std::to_string(bursts.size()) + " motion bursts, expected " +
                            std::to_string(word_count));
  // Over-segmented: merge the pair separated by the shortest still run.
  while (static_cast<int>(bursts.size()) > word_count) {
    std::size_t best = 0;
    int best_gap = n + 1;
    for (std::size_t k = 0; k + 1 < bursts.size(); ++k) {
      const int g = bursts[k + 1].start - bursts[k].end;
      if (g < best_gap) best_gap = g, best = k;
    }
    bursts[best].end = bursts[best + 1].end;
    bursts.erase(bursts.begin() + static_cast<std::ptrdiff_t>(best) + 1);
  }

  // Pad each clip into the neighbouring stillness, never past the midpoint.
  const int margin = std::max(1, min_trough / 2);
  std::vector<ClipBoundary> out = bursts;
  for (std::size_t k = 0; k < bursts.size(); ++k) {
    const int left_limit = k == 0 ? 0 : (bursts[k - 1].end + bursts[k].start) / 2;
    const int right_limit = k + 1 == bursts.size() ? n : (bursts[k].end + bursts[k + 1].start + 1) / 2;
    out[k].start = std::max(left_limit, bursts[k].start - margin);
    out[k].end = std::min(right_limit, bursts[k].end + margin);
  }
  return out;
}

std::vector<ClipBoundary> segment_recording(const std::string& path, int word_count, double gap) {
  const auto frames = read_frames(path);
  return segment_recording(frames, word_count, gap, probe_fps(path));
}

}  // namespace lipread
