#include "lipread/landmarks.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <random>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <opencv2/imgproc.hpp>

#include "lipread/errors.hpp"
#include "lipread/synthetic.hpp"

namespace lipread {

std::array<int, kMouthPoints> mouth_point_indices() {
  std::array<int, kMouthPoints> idx{};
  for (int i = 0; i < kMouthPoints; ++i) idx[static_cast<std::size_t>(i)] = kFirstMouthPoint + i;
  return idx;
}

std::size_t LandmarkSequence::valid_count() const {
  std::size_t n = 0;
  for (const auto& f : frames) n += f.valid ? 1 : 0;
  return n;
}

// ---------------------------------------------------------------------------
// Detection

namespace {

struct EllipseFit {
  cv::Point2d center;
  double a = 0, b = 0;
};

std::optional<EllipseFit> fit_ellipse(const cv::Mat& mask, int min_pixels) {
  const cv::Moments m = cv::moments(mask, true);
  if (m.m00 < min_pixels) return std::nullopt;
  EllipseFit e;
  e.center = {m.m10 / m.m00, m.m01 / m.m00};
  // A filled ellipse with semi-axes (a, b) has central second moments
  // m00 * a^2 / 4 and m00 * b^2 / 4.
  e.a = 2.0 * std::sqrt(m.mu20 / m.m00);
  e.b = 2.0 * std::sqrt(m.mu02 / m.m00);
  return e;
}

cv::Mat largest_component(const cv::Mat& mask) {
  cv::Mat labels, stats, centroids;
  const int n = cv::connectedComponentsWithStats(mask, labels, stats, centroids, 8, CV_32S);
  int best = -1, best_area = 0;
  for (int i = 1; i < n; ++i) {
    const int area = stats.at<int>(i, cv::CC_STAT_AREA);
    if (area > best_area) best_area = area, best = i;
  }
  if (best < 0) return cv::Mat::zeros(mask.size(), CV_8U);
  return labels == best;
}

// FNV-1a over the pixel bytes.
std::uint64_t frame_digest(const cv::Mat& rgb) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (int y = 0; y < rgb.rows; ++y) {
    const uchar* row = rgb.ptr<uchar>(y);
    for (int i = 0; i < rgb.cols * 3; ++i) h = (h ^ row[i]) * 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::optional<FaceLandmarks68> ColorMouthDetector::detect(const cv::Mat& rgb) const {
  if (rgb.empty() || rgb.type() != CV_8UC3) return std::nullopt;
  cv::Mat mouth(rgb.size(), CV_8U), lips(rgb.size(), CV_8U);
  for (int y = 0; y < rgb.rows; ++y) {
    const auto* px = rgb.ptr<cv::Vec3b>(y);
    auto* mo = mouth.ptr<uchar>(y);
    auto* li = lips.ptr<uchar>(y);
    for (int x = 0; x < rgb.cols; ++x) {
      const int r = px[x][0], g = px[x][1], b = px[x][2];
      const bool reddish = r > 40 && g * 100 < r * 55 && b * 100 < r * 75;
      mo[x] = reddish ? 255 : 0;
      li[x] = reddish && r >= 125 ? 255 : 0;
    }
  }
  // Fill the lip ring so whatever shows through the opening counts as mouth.
  mouth = largest_component(mouth);
  std::vector<std::vector<cv::Point>> contours;
  cv::findContours(mouth.clone(), contours, cv::RETR_EXTERNAL, cv::CHAIN_APPROX_NONE);
  cv::drawContours(mouth, contours, -1, cv::Scalar(255), cv::FILLED);
  const auto outer = fit_ellipse(mouth, 12);
  if (!outer) return std::nullopt;
  cv::Mat inner = mouth & ~lips;
  auto inner_fit = fit_ellipse(inner, 3);
  double ia = 0.8 * outer->a, ib = 0.0;
  if (inner_fit) {
    // The rasterizer keeps every pixel the boundary touches, about half a
    // pixel beyond the true edge.
    ia = inner_fit->a - 0.5, ib = std::max(0.0, inner_fit->b - 0.5);
  }

  auto mouth_pts = synth::mouth_landmarks(outer->center, outer->a, outer->b, ia, ib);
  if (jitter_px_ > 0) {
    std::mt19937_64 rng(frame_digest(rgb));
    std::normal_distribution<double> err(0.0, jitter_px_);
    for (auto& p : mouth_pts) p += cv::Point2d(err(rng), err(rng));
  }
  FaceLandmarks68 all{};
  // Coarse face layout relative to the mouth (jaw, brows, nose, eyes).
  const cv::Point2d c = outer->center;
  const double s = outer->a / 30.0;
  for (int i = 0; i <= 16; ++i) {
    const double th = CV_PI * (1.0 - i / 16.0);
    all[static_cast<std::size_t>(i)] = {c.x + 95.0 * s * std::cos(th), c.y - 60.0 * s + 75.0 * s * std::sin(th)};
  }
  for (int i = 17; i < 48; ++i) {
    const double side = i < 22 || (i >= 36 && i < 42) ? -1.0 : 1.0;
    const double dy = i < 27 ? -115.0 : (i < 36 ? -60.0 : -97.0);
    all[static_cast<std::size_t>(i)] = {c.x + side * 38.0 * s, c.y + dy * s};
  }
  for (int i = 0; i < kMouthPoints; ++i)
    all[static_cast<std::size_t>(kFirstMouthPoint + i)] = mouth_pts[static_cast<std::size_t>(i)];
  return all;
}

std::unique_ptr<LandmarkDetector> make_landmark_detector(const std::string& name) {
  if (name == "synthetic") return std::make_unique<ColorMouthDetector>(kSyntheticDetectorJitterPx);
  if (name == "color") return std::make_unique<ColorMouthDetector>();
  throw InvalidArgument("unknown landmark detector '" + name + "' (available: synthetic, color)");
}

LandmarkSequence extract_landmarks(const std::vector<cv::Mat>& rgb_frames, const LandmarkDetector& detector,
                                   std::string clip_id, double fps) {
  LandmarkSequence seq;
  seq.fps = fps;
  seq.clip_id = std::move(clip_id);
  seq.frames.reserve(rgb_frames.size());
  for (const auto& frame : rgb_frames) {
    LandmarkFrame lf;
    if (const auto pts = detector.detect(frame)) {
      for (int i = 0; i < kMouthPoints; ++i)
        lf.points[static_cast<std::size_t>(i)] = (*pts)[static_cast<std::size_t>(kFirstMouthPoint + i)];
      lf.valid = std::all_of(lf.points.begin(), lf.points.end(),
                             [](const cv::Point2d& p) { return std::isfinite(p.x) && std::isfinite(p.y); });
    }
    seq.frames.push_back(lf);
  }
  if (seq.valid_count() == 0) throw AllFramesInvalid("no frame of clip '" + seq.clip_id + "' has landmarks");
  return seq;
}

LandmarkSequence extract_landmarks(const FrameSequence& clip, const LandmarkDetector& detector) {
  return extract_landmarks(to_images(clip), detector, clip.clip_id, clip.fps);
}

// ---------------------------------------------------------------------------
// Standardization and normalization

LandmarkSequence standardize_length(const LandmarkSequence& seq, std::size_t target) {
  if (seq.valid_count() == 0) throw AllFramesInvalid("cannot standardize a sequence without valid frames");
  const std::size_t n = seq.frames.size();
  std::vector<LandmarkFrame> repaired = seq.frames;
  std::vector<std::size_t> valid;
  for (std::size_t i = 0; i < n; ++i)
    if (seq.frames[i].valid) valid.push_back(i);
  for (std::size_t i = 0; i < n; ++i) {
    if (repaired[i].valid) continue;
    const auto next = std::lower_bound(valid.begin(), valid.end(), i);
    if (next == valid.begin()) {
      repaired[i].points = seq.frames[*next].points;
    } else if (next == valid.end()) {
      repaired[i].points = seq.frames[valid.back()].points;
    } else {
      const std::size_t hi = *next, lo = *(next - 1);
      const double w = static_cast<double>(i - lo) / static_cast<double>(hi - lo);
      for (std::size_t p = 0; p < kMouthPoints; ++p)
        repaired[i].points[p] = seq.frames[lo].points[p] * (1.0 - w) + seq.frames[hi].points[p] * w;
    }
    repaired[i].valid = true;
  }
  LandmarkSequence out;
  out.fps = seq.fps;
  out.clip_id = seq.clip_id;
  for (const auto idx : standard_frame_indices(n, target)) out.frames.push_back(repaired[idx]);
  return out;
}

LipTensor pack(const LandmarkSequence& seq) {
  LipTensor t;
  t.frames = static_cast<int>(seq.frames.size());
  t.data.resize(seq.frames.size() * kMouthPoints * 2);
  for (int f = 0; f < t.frames; ++f)
    for (int p = 0; p < kMouthPoints; ++p) {
      const auto& pt = seq.frames[static_cast<std::size_t>(f)].points[static_cast<std::size_t>(p)];
      t.at(f, p, 0) = pt.x;
      t.at(f, p, 1) = pt.y;
    }
  return t;
}

LandmarkSequence unpack(const LipTensor& tensor, double fps, std::string clip_id) {
  LandmarkSequence seq;
  seq.fps = fps;
  seq.clip_id = std::move(clip_id);
  seq.frames.resize(static_cast<std::size_t>(tensor.frames));
  for (int f = 0; f < tensor.frames; ++f) {
    auto& frame = seq.frames[static_cast<std::size_t>(f)];
    frame.valid = true;
    for (int p = 0; p < kMouthPoints; ++p)
      frame.points[static_cast<std::size_t>(p)] = {tensor.at(f, p, 0), tensor.at(f, p, 1)};
  }
  return seq;
}

LipTensor normalize(const LandmarkSequence& seq) {
  if (seq.frames.size() != kStandardFrames)
    throw InvalidArgument("normalize expects " + std::to_string(kStandardFrames) + " frames, got " +
                          std::to_string(seq.frames.size()));
  if (seq.valid_count() != seq.frames.size()) throw InvalidArgument("normalize expects every frame valid");

  LipTensor t = pack(seq);
  auto& norm = t.normalization;
  norm.applied = true;
  double sum_sq = 0.0;
  for (int f = 0; f < t.frames; ++f) {
    cv::Point2d c(0, 0);
    for (int p = 0; p < kMouthPoints; ++p) c += cv::Point2d(t.at(f, p, 0), t.at(f, p, 1));
    c *= 1.0 / kMouthPoints;
    norm.centroids.push_back(c);
    for (int p = 0; p < kMouthPoints; ++p) {
      t.at(f, p, 0) -= c.x;
      t.at(f, p, 1) -= c.y;
      sum_sq += t.at(f, p, 0) * t.at(f, p, 0) + t.at(f, p, 1) * t.at(f, p, 1);
    }
  }
  const double rms = std::sqrt(sum_sq / (t.frames * kMouthPoints));
  if (!(rms > 1e-12)) throw DegenerateGeometry("all mouth points coincide in clip '" + seq.clip_id + "'");
  norm.scale = rms;
  for (auto& v : t.data) v /= rms;
  return t;
}

// ---------------------------------------------------------------------------
// Cache files

void write_landmark_file(const LandmarkSequence& seq, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write landmark file " + path);
  char buf[64];
  out << "# lipread landmarks v1\n";
  out << "clip_id " << seq.clip_id << '\n';
  std::snprintf(buf, sizeof(buf), "%.6f", seq.fps);
  out << "fps " << buf << '\n';
  out << "point_indices";
  for (const int i : mouth_point_indices()) out << ' ' << i;
  out << "\nframes " << seq.frames.size() << '\n';
  for (const auto& f : seq.frames) {
    if (!f.valid) {
      out << "invalid\n";
      continue;
    }
    for (std::size_t p = 0; p < f.points.size(); ++p) {
      std::snprintf(buf, sizeof(buf), "%s%.6f %.6f", p == 0 ? "" : " ", f.points[p].x, f.points[p].y);
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing landmark file " + path);
}

LandmarkSequence read_landmark_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open landmark file " + path);
  LandmarkSequence seq;
  std::string line;
  std::size_t expected = 0;
  bool have_count = false;
  auto fail = [&](const std::string& why) { return InvalidArgument(path + ": " + why); };
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!have_count) {
      std::istringstream ls(line);
      std::string key;
      ls >> key;
      if (key == "clip_id") {
        std::getline(ls >> std::ws, seq.clip_id);
      } else if (key == "fps") {
        ls >> seq.fps;
      } else if (key == "point_indices") {
        std::vector<int> idx{std::istream_iterator<int>(ls), std::istream_iterator<int>()};
        const auto expect = mouth_point_indices();
        if (!std::equal(idx.begin(), idx.end(), expect.begin(), expect.end()))
          throw fail("unsupported point indices");
      } else if (key == "frames") {
        ls >> expected;
        have_count = true;
      } else {
        throw fail("unexpected header line '" + line + "'");
      }
      continue;
    }
    LandmarkFrame f;
    if (line != "invalid") {
      std::istringstream ls(line);
      for (auto& p : f.points)
        if (!(ls >> p.x >> p.y)) throw fail("frame line with fewer than 40 numbers");
      f.valid = true;
    }
    seq.frames.push_back(f);
  }
  if (!have_count || seq.frames.size() != expected) throw fail("frame count mismatch");
  return seq;
}

}  // namespace lipread
