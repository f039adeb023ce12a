#include <doctest.h>

#include <cmath>
#include <random>

#include "lipread/errors.hpp"
#include "lipread/landmarks.hpp"
#include "lipread/synthetic.hpp"
#include "lipread/temporal.hpp"
#include "oracles.hpp"
#include "tempdir.hpp"

using namespace lipread;

namespace {

LandmarkSequence random_sequence(std::mt19937_64& rng, int frames) {
  std::uniform_real_distribution<double> pos(50, 250), wobble(-15, 15);
  LandmarkSequence seq;
  seq.clip_id = "rand";
  const cv::Point2d center(pos(rng), pos(rng));
  for (int t = 0; t < frames; ++t) {
    LandmarkFrame f;
    f.valid = true;
    for (auto& p : f.points) p = center + cv::Point2d(wobble(rng) * 2, wobble(rng));
    seq.frames.push_back(f);
  }
  return seq;
}

// Frame t of the test sequences carries the marker x = 1000 + t on point 0.
LandmarkSequence marked_sequence(int frames) {
  LandmarkSequence seq;
  for (int t = 0; t < frames; ++t) {
    LandmarkFrame f;
    f.valid = true;
    for (int p = 0; p < kMouthPoints; ++p) f.points[static_cast<std::size_t>(p)] = {1000.0 + t, static_cast<double>(p)};
    seq.frames.push_back(f);
  }
  return seq;
}

int marker(const LandmarkFrame& f) { return static_cast<int>(std::lround(f.points[0].x - 1000.0)); }

double max_diff(const LipTensor& a, const LipTensor& b) {
  double d = 0;
  for (std::size_t i = 0; i < a.data.size(); ++i) d = std::max(d, std::abs(a.data[i] - b.data[i]));
  return d;
}

}  // namespace

TEST_SUITE("landmarks") {

TEST_CASE("mouth subset is indices 48..67") {
  const auto idx = mouth_point_indices();
  CHECK(idx.size() == 20);
  CHECK(idx.front() == 48);
  CHECK(idx.back() == 67);
}

TEST_CASE("detector recovers rendered landmarks within one pixel") {
  ColorMouthDetector det;
  std::mt19937_64 rng(8);
  for (int cls = 0; cls < 7; ++cls)
    for (double t : {0.0, 0.13, 0.37, 0.61}) {
      const auto look = synth::random_appearance(rng);
      const auto frame = synth::render_face({300, 300}, {150, 150}, look, synth::motif_shape(cls, t));
      const auto pts = det.detect(frame.rgb);
      REQUIRE(pts.has_value());
      for (int i = 0; i < kMouthPoints; ++i) {
        const auto d = (*pts)[static_cast<std::size_t>(kFirstMouthPoint + i)] - frame.landmarks[static_cast<std::size_t>(i)];
        INFO("class " << cls << " t " << t << " point " << i << " d " << d.x << "," << d.y);
        CHECK(std::hypot(d.x, d.y) <= 1.0);
      }
    }
}

TEST_CASE("teeth leave the detected landmarks unchanged") {
  ColorMouthDetector det;
  synth::Appearance look;
  for (double h : {4.0, 12.0, 24.0}) {
    const auto plain = det.detect(synth::render_face({300, 300}, {150, 150}, look, {70, h, false}).rgb);
    const auto teeth = det.detect(synth::render_face({300, 300}, {150, 150}, look, {70, h, true}).rgb);
    REQUIRE(plain);
    REQUIRE(teeth);
    for (int i = kFirstMouthPoint; i < 68; ++i) CHECK(cv::norm((*plain)[i] - (*teeth)[i]) < 1e-9);
  }
}

TEST_CASE("synthetic detector adds repeatable localization error") {
  const auto det = make_landmark_detector("synthetic");
  const ColorMouthDetector exact;
  const auto frame = synth::render_face({300, 300}, {150, 150}, synth::Appearance{}, {60, 12});
  const auto a = det->detect(frame.rgb), b = det->detect(frame.rgb), e = exact.detect(frame.rgb);
  REQUIRE(a);
  REQUIRE(e);
  double sq = 0;
  for (int i = kFirstMouthPoint; i < 68; ++i) {
    CHECK((*a)[i] == (*b)[i]);
    const auto d = (*a)[i] - (*e)[i];
    sq += d.x * d.x + d.y * d.y;
  }
  const double rms_per_axis = std::sqrt(sq / (2 * kMouthPoints));
  CHECK(rms_per_axis > 0.5 * kSyntheticDetectorJitterPx);
  CHECK(rms_per_axis < 2.0 * kSyntheticDetectorJitterPx);
  CHECK_THROWS_AS(make_landmark_detector("dlib"), InvalidArgument);
}

TEST_CASE("extract_landmarks marks failures and rejects hopeless clips") {
  ColorMouthDetector det;
  std::vector<cv::Mat> frames;
  for (int t = 0; t < 20; ++t)
    frames.push_back(synth::render_face({300, 300}, {150, 150}, synth::Appearance{}, synth::motif_shape(1, t / 20.0)).rgb);
  auto seq = extract_landmarks(frames, det, "c", 20.0);
  CHECK(seq.frames.size() == 20);
  CHECK(seq.valid_count() == 20);

  frames[3] = cv::Mat(300, 300, CV_8UC3, cv::Scalar(0, 0, 255));
  seq = extract_landmarks(frames, det, "c", 20.0);
  CHECK(seq.valid_count() == 19);
  CHECK_FALSE(seq.frames[3].valid);

  std::vector<cv::Mat> blank(5, cv::Mat(300, 300, CV_8UC3, cv::Scalar(0, 0, 255)));
  CHECK_THROWS_AS(extract_landmarks(blank, det, "b", 20.0), AllFramesInvalid);
}

TEST_CASE("standardize_length examples") {
  auto same = standardize_length(marked_sequence(20));
  for (int t = 0; t < 20; ++t) CHECK(marker(same.frames[static_cast<std::size_t>(t)]) == t);

  // 35 frames: 7 leading frames dropped, 0-based 7..26 (1-based 8..27)
  auto cropped = standardize_length(marked_sequence(35));
  REQUIRE(cropped.frames.size() == 20);
  for (int t = 0; t < 20; ++t) CHECK(marker(cropped.frames[static_cast<std::size_t>(t)]) == 7 + t);

  auto padded = standardize_length(marked_sequence(12));
  for (int t = 0; t < 20; ++t) CHECK(marker(padded.frames[static_cast<std::size_t>(t)]) == std::min(t, 11));
}

TEST_CASE("standardize_length repairs invalid frames by interpolation") {
  auto seq = marked_sequence(20);
  seq.frames[0].valid = false;
  seq.frames[5].valid = false;
  seq.frames[6].valid = false;
  seq.frames[19].valid = false;
  const auto out = standardize_length(seq);
  for (const auto& f : out.frames) CHECK(f.valid);
  CHECK(out.frames[0].points[0].x == doctest::Approx(1001.0));   // nearest valid copy
  CHECK(out.frames[5].points[0].x == doctest::Approx(1005.0));   // 4 -> 7 interpolated
  CHECK(out.frames[6].points[0].x == doctest::Approx(1006.0));
  CHECK(out.frames[19].points[0].x == doctest::Approx(1018.0));

  LandmarkSequence none;
  none.frames.resize(3);
  CHECK_THROWS_AS(standardize_length(none), AllFramesInvalid);
}

TEST_CASE("standardize_length property over lengths 1..1000") {
  std::mt19937 rng(9);
  std::uniform_int_distribution<int> len(1, 1000);
  for (int k = 0; k < 60; ++k) {
    const int n = k < 10 ? k + 1 : len(rng);
    const auto out = standardize_length(marked_sequence(n));
    REQUIRE(out.frames.size() == kStandardFrames);
    const auto expect = oracle::standard_indices(static_cast<std::size_t>(n), kStandardFrames);
    for (std::size_t t = 0; t < kStandardFrames; ++t) CHECK(marker(out.frames[t]) == static_cast<int>(expect[t]));
  }
}

TEST_CASE("normalize: hand-built unit square") {
  LandmarkSequence seq;
  LandmarkFrame f;
  f.valid = true;
  const cv::Point2d corners[4] = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  for (int p = 0; p < kMouthPoints; ++p) f.points[static_cast<std::size_t>(p)] = corners[p % 4];
  seq.frames.push_back(f);
  const auto tensor = normalize(standardize_length(seq));
  // centroid (0.5, 0.5), every point at radius sqrt(0.5): RMS sqrt(0.5)
  CHECK(tensor.normalization.scale == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
  for (int t = 0; t < 20; ++t) {
    double cx = 0, cy = 0, r2 = 0;
    for (int p = 0; p < kMouthPoints; ++p) {
      cx += tensor.at(t, p, 0);
      cy += tensor.at(t, p, 1);
      r2 += tensor.at(t, p, 0) * tensor.at(t, p, 0) + tensor.at(t, p, 1) * tensor.at(t, p, 1);
    }
    CHECK(std::abs(cx) < 1e-6);
    CHECK(std::abs(cy) < 1e-6);
    CHECK(std::sqrt(r2 / kMouthPoints) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("normalize agrees with a hand computation") {
  std::mt19937_64 rng(21);
  const auto seq = random_sequence(rng, 20);
  std::vector<std::vector<oracle::Point>> frames;
  for (const auto& f : seq.frames) {
    std::vector<oracle::Point> pts;
    for (const auto& p : f.points) pts.push_back({p.x, p.y});
    frames.push_back(pts);
  }
  const auto expect = oracle::normalize_by_hand(frames);
  const auto got = normalize(seq);
  for (int t = 0; t < 20; ++t)
    for (int p = 0; p < kMouthPoints; ++p) {
      CHECK(got.at(t, p, 0) == doctest::Approx(expect[t][p].x).epsilon(1e-12));
      CHECK(got.at(t, p, 1) == doctest::Approx(expect[t][p].y).epsilon(1e-12));
    }
}

TEST_CASE("normalize: translation, scaling, idempotence, degenerate input") {
  std::mt19937_64 rng(2);
  const auto seq = random_sequence(rng, 20);
  const auto base = normalize(seq);

  auto moved = seq;
  for (auto& f : moved.frames)
    for (auto& p : f.points) p += cv::Point2d(37, -12);
  CHECK(max_diff(normalize(moved), base) < 1e-6);

  auto scaled = seq;
  for (auto& f : scaled.frames) {
    cv::Point2d c;
    for (const auto& p : f.points) c += p;
    c /= kMouthPoints;
    for (auto& p : f.points) p = c + 2.0 * (p - c);
  }
  CHECK(max_diff(normalize(scaled), base) < 1e-6);

  CHECK(max_diff(normalize(unpack(base)), base) < 1e-6);

  LandmarkSequence flat = seq;
  for (auto& f : flat.frames) f.points.fill({5, 5});
  CHECK_THROWS_AS(normalize(flat), DegenerateGeometry);
  CHECK_THROWS_AS(normalize(random_sequence(rng, 19)), InvalidArgument);
}

TEST_CASE("pack/unpack is exact and keeps (frame, point, coord) order") {
  std::mt19937_64 rng(8);
  const auto seq = random_sequence(rng, 20);
  const auto packed = pack(seq);
  CHECK(packed.data.size() == 20u * 20u * 2u);
  CHECK(packed.data[(3 * 20 + 7) * 2 + 1] == seq.frames[3].points[7].y);
  const auto back = unpack(packed);
  for (int t = 0; t < 20; ++t)
    for (int p = 0; p < kMouthPoints; ++p) CHECK(back.frames[t].points[p] == seq.frames[t].points[p]);
}

TEST_CASE("landmark cache files round-trip to six decimals") {
  std::mt19937_64 rng(12);
  auto seq = random_sequence(rng, 7);
  seq.clip_id = "bia/p00_r03";
  seq.fps = 25.0;
  seq.frames[2].valid = false;
  oracle::TempDir tmp;
  write_landmark_file(seq, tmp / "a.lmk");
  const auto back = read_landmark_file(tmp / "a.lmk");
  CHECK(back.clip_id == seq.clip_id);
  CHECK(back.fps == 25.0);
  REQUIRE(back.frames.size() == 7);
  CHECK_FALSE(back.frames[2].valid);
  for (int t = 0; t < 7; ++t) {
    if (t == 2) continue;
    for (int p = 0; p < kMouthPoints; ++p) CHECK(std::abs(back.frames[t].points[p].x - seq.frames[t].points[p].x) <= 5e-7);
  }
  // rewriting what was read is bit-exact
  write_landmark_file(back, tmp / "b.lmk");
  const auto again = read_landmark_file(tmp / "b.lmk");
  for (int t = 0; t < 7; ++t) CHECK(again.frames[t].points == back.frames[t].points);
  CHECK_THROWS_AS(read_landmark_file(tmp / "missing.lmk"), IoError);
}

}  // TEST_SUITE
