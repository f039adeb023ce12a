#include "lipread/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <opencv2/imgproc.hpp>

namespace lipread::synth {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kShift = 4;  // fillPoly sub-pixel bits
constexpr double kShiftScale = 1 << kShift;

double frac(double x) { return x - std::floor(x); }

cv::Scalar shade(const cv::Vec3b& c, double brightness) {
  auto ch = [&](int i) { return std::clamp(c[i] * brightness, 0.0, 255.0); };
  return {ch(0), ch(1), ch(2)};
}

void fill_ellipse(cv::Mat& img, cv::Point2d center, double a, double b, double angle, const cv::Scalar& color) {
  if (a <= 0.0 || b <= 0.0) return;
  constexpr int kVertices = 96;
  std::vector<cv::Point> poly;
  poly.reserve(kVertices);
  const double ca = std::cos(angle), sa = std::sin(angle);
  for (int i = 0; i < kVertices; ++i) {
    const double th = 2.0 * kPi * i / kVertices;
    const double x = a * std::cos(th), y = b * std::sin(th);
    poly.emplace_back(static_cast<int>(std::lround((center.x + ca * x - sa * y) * kShiftScale)),
                      static_cast<int>(std::lround((center.y + sa * x + ca * y) * kShiftScale)));
  }
  cv::fillConvexPoly(img, poly, color, cv::LINE_8, kShift);
}

struct MouthGeometry {
  double outer_a, outer_b, inner_a, inner_b;
};

MouthGeometry mouth_geometry(const MouthShape& m, double scale) {
  const double lip = 5.0 * scale;
  const double w = m.width * scale;
  const double h = m.height * scale;
  return {w / 2.0, h / 2.0 + lip, 0.8 * w / 2.0, h / 2.0};
}

}  // namespace

MouthShape motif_shape(int class_id, double t, const MotifVariation& var) {
  const double u = t * var.rate + var.phase;
  const double amp = var.amplitude;
  const int base = class_id % 7;
  const double widen = 8.0 * (class_id / 7);
  MouthShape s;
  switch (base) {
    case 0:  // one slow opening per period
      s = {70.0, 10.0 + amp * 14.0 * std::abs(std::sin(kPi * u))};
      break;
    case 1:  // two openings per period, narrower
      s = {56.0, 12.0 + amp * 10.0 * std::abs(std::sin(2.0 * kPi * u))};
      break;
    case 2:  // pucker: width oscillates, opening fixed
      s = {50.0 + amp * 14.0 * std::sin(2.0 * kPi * u), 22.0};
      break;
    case 3:  // three small rapid openings
      s = {64.0, 6.0 + amp * 8.0 * std::abs(std::sin(3.0 * kPi * u))};
      break;
    case 4:  // width and opening in antiphase
      s = {62.0 + amp * 10.0 * std::sin(2.0 * kPi * u), 18.0 - amp * 8.0 * std::sin(2.0 * kPi * u)};
      break;
    case 5:  // wide, fast smile oscillation
      s = {80.0 + amp * 10.0 * std::sin(4.0 * kPi * u), 12.0};
      break;
    default:  // lip track of motif 0, told apart only by the visible teeth
      s = {70.0, 10.0 + amp * 14.0 * std::abs(std::sin(kPi * u)), true};
      break;
  }
  s.width += widen;
  return s;
}

MouthShape rest_shape() { return {60.0, 4.0}; }

Appearance random_appearance(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto jitter = [&](cv::Vec3b c, double amount) {
    for (int i = 0; i < 3; ++i)
      c[i] = cv::saturate_cast<uchar>(c[i] * (1.0 + amount * (2.0 * unit(rng) - 1.0)));
    return c;
  };
  Appearance a;
  a.skin = jitter(a.skin, 0.06);
  a.lips = jitter(a.lips, 0.05);
  a.teeth = jitter(a.teeth, 0.04);
  a.background = jitter(a.background, 0.2);
  a.face_scale = 0.9 + 0.2 * unit(rng);
  a.brightness = 0.92 + 0.16 * unit(rng);
  return a;
}

MouthLandmarks mouth_landmarks(cv::Point2d center, double outer_a, double outer_b, double inner_a,
                               double inner_b, double angle_rad) {
  // Angles measured counter-clockwise on screen (y up), so "upper" lip
  // points have positive angles and land above the center in image rows.
  static constexpr std::array<double, 12> kOuter = {180, 150, 120, 90, 60, 30, 0, -30, -60, -90, -120, -150};
  static constexpr std::array<double, 8> kInner = {180, 135, 90, 45, 0, -45, -90, -135};
  const double ca = std::cos(angle_rad), sa = std::sin(angle_rad);
  auto place = [&](double a, double b, double deg) {
    const double th = deg * kPi / 180.0;
    const double x = a * std::cos(th), y = -b * std::sin(th);
    return cv::Point2d(center.x + ca * x - sa * y, center.y + sa * x + ca * y);
  };
  MouthLandmarks pts;
  for (std::size_t i = 0; i < kOuter.size(); ++i) pts[i] = place(outer_a, outer_b, kOuter[i]);
  for (std::size_t i = 0; i < kInner.size(); ++i) pts[12 + i] = place(inner_a, inner_b, kInner[i]);
  return pts;
}

cv::Point2d canonical_face_center(cv::Size canvas) { return {canvas.width / 2.0, canvas.height / 2.0}; }

RenderedFrame render_face(cv::Size canvas, cv::Point2d face_center, const Appearance& look,
                          const MouthShape& mouth, double noise_sigma, std::mt19937_64* noise_rng) {
  const double s = look.face_scale;
  const double br = look.brightness;
  RenderedFrame out;
  out.rgb = cv::Mat(canvas, CV_8UC3, shade(look.background, br));

  const double face_a = 100.0 * s, face_b = 130.0 * s;
  fill_ellipse(out.rgb, face_center, face_a, face_b, 0.0, shade(look.skin, br));
  out.face_box = cv::Rect(cv::Point(static_cast<int>(std::floor(face_center.x - face_a)),
                                    static_cast<int>(std::floor(face_center.y - face_b))),
                          cv::Point(static_cast<int>(std::ceil(face_center.x + face_a)),
                                    static_cast<int>(std::ceil(face_center.y + face_b))));

  for (double side : {-1.0, 1.0}) {
    const cv::Point2d eye(face_center.x + side * 38.0 * s, face_center.y - 35.0 * s);
    fill_ellipse(out.rgb, eye, 12.0 * s, 7.0 * s, 0.0, shade(look.eyes, br));
    const cv::Point2d brow(eye.x, eye.y - 18.0 * s);
    fill_ellipse(out.rgb, brow, 16.0 * s, 3.0 * s, 0.0, shade(look.eyes, br * 1.4));
  }
  fill_ellipse(out.rgb, {face_center.x, face_center.y + 15.0 * s}, 7.0 * s, 16.0 * s, 0.0,
               shade(look.skin, br * 0.85));

  const cv::Point2d mouth_center(face_center.x, face_center.y + 62.0 * s);
  const auto g = mouth_geometry(mouth, s);
  fill_ellipse(out.rgb, mouth_center, g.outer_a, g.outer_b, 0.0, shade(look.lips, br));
  fill_ellipse(out.rgb, mouth_center, g.inner_a, g.inner_b, 0.0, shade(look.inner, br));
  if (mouth.teeth) {
    // upper 40% of the opening
    cv::Mat opening = cv::Mat::zeros(canvas, CV_8U);
    fill_ellipse(opening, mouth_center, g.inner_a, g.inner_b, 0.0, cv::Scalar(255));
    const int cut = static_cast<int>(std::floor(mouth_center.y - 0.2 * g.inner_b));
    if (cut < canvas.height) opening.rowRange(std::max(0, cut), canvas.height).setTo(0);
    out.rgb.setTo(shade(look.teeth, br), opening);
  }
  out.landmarks = mouth_landmarks(mouth_center, g.outer_a, g.outer_b, g.inner_a, g.inner_b);

  if (noise_sigma > 0.0 && noise_rng != nullptr) {
    cv::RNG cvrng((*noise_rng)());
    cv::Mat noise(canvas, CV_16SC3);
    cvrng.fill(noise, cv::RNG::NORMAL, 0.0, noise_sigma);
    cv::Mat wide;
    out.rgb.convertTo(wide, CV_16SC3);
    wide += noise;
    wide.convertTo(out.rgb, CV_8UC3);
  }
  return out;
}

SyntheticClip render_clip(int class_id, const Appearance& look, std::mt19937_64& rng, const ClipOptions& opts) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> length(opts.min_frames, opts.max_frames);
  MotifVariation var;
  var.phase = unit(rng);
  var.rate = 0.95 + 0.1 * unit(rng);
  var.amplitude = 0.85 + 0.3 * unit(rng);
  const int frames = length(rng);
  const cv::Point2d center = canonical_face_center(opts.canvas) +
                             cv::Point2d(opts.max_offset_px * (2.0 * unit(rng) - 1.0),
                                         opts.max_offset_px * (2.0 * unit(rng) - 1.0));
  SyntheticClip clip;
  clip.class_id = class_id;
  clip.frames.reserve(static_cast<std::size_t>(frames));
  for (int i = 0; i < frames; ++i) {
    const auto shape = motif_shape(class_id, i / opts.fps, var);
    clip.frames.push_back(render_face(opts.canvas, center, look, shape, opts.noise_sigma, &rng));
  }
  return clip;
}

Recording render_recording(int class_id, int repetitions, const Appearance& look, std::mt19937_64& rng,
                           const RecordingOptions& opts) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int gap = static_cast<int>(std::lround(opts.gap_seconds * opts.fps));
  const cv::Point2d center = canonical_face_center(opts.canvas) + cv::Point2d(40.0 * (2.0 * unit(rng) - 1.0), 0.0);
  Recording rec;
  auto emit = [&](const MouthShape& shape) {
    rec.frames.push_back(render_face(opts.canvas, center, look, shape, opts.noise_sigma, &rng).rgb);
  };
  for (int i = 0; i < gap; ++i) emit(rest_shape());
  for (int r = 0; r < repetitions; ++r) {
    MotifVariation var;
    var.phase = 0.05 + 0.2 * unit(rng);
    var.amplitude = 0.85 + 0.3 * unit(rng);
    const double seconds = opts.word_seconds_min + (opts.word_seconds_max - opts.word_seconds_min) * unit(rng);
    const int len = std::max(2, static_cast<int>(std::lround(seconds * opts.fps)));
    Burst b;
    b.start = static_cast<int>(rec.frames.size());
    for (int i = 0; i < len; ++i) emit(motif_shape(class_id, i / opts.fps, var));
    b.end = static_cast<int>(rec.frames.size());
    rec.bursts.push_back(b);
    for (int i = 0; i < gap; ++i) emit(rest_shape());
  }
  return rec;
}

}  // namespace lipread::synth
