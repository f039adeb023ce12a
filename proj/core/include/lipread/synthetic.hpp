#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include <opencv2/core.hpp>

namespace lipread::synth {

/// Mouth opening geometry in pixels: `width` is the lip-corner distance,
/// `height` the vertical extent of the dark inner opening.
struct MouthShape {
  double width = 60.0;
  double height = 4.0;
  bool teeth = false;  // upper teeth visible inside the opening
};

/// Per-clip variation of a class motif.
struct MotifVariation {
  double phase = 0.0;       // fraction of a period, [0, 1)
  double rate = 1.0;        // time scaling
  double amplitude = 1.0;   // scales the moving part only
};

/// Shape of the class-`class_id` mouth motif at time `t` seconds. Motifs 0-5
/// trace distinct periodic trajectories in (width, height) space. Motif 6
/// repeats motif 0's lip track with the teeth showing, like two visemes with
/// the same lip shape: only appearance separates them, lip landmarks cannot.
MouthShape motif_shape(int class_id, double t, const MotifVariation& var = {});

/// Closed mouth used between words in recordings.
MouthShape rest_shape();

/// Speaker-level appearance.
struct Appearance {
  cv::Vec3b background{60, 80, 110};
  cv::Vec3b skin{224, 182, 152};
  cv::Vec3b lips{182, 62, 74};
  cv::Vec3b inner{86, 20, 30};
  cv::Vec3b teeth{236, 232, 218};
  cv::Vec3b eyes{32, 30, 30};
  double face_scale = 1.0;   // multiplies face and mouth size
  double brightness = 1.0;
};

Appearance random_appearance(std::mt19937_64& rng);

/// Mouth landmarks in 68-point order, indices 48..67.
using MouthLandmarks = std::array<cv::Point2d, 20>;

/// Places the 20 mouth points on the outer lip ellipse (12 points) and the
/// inner opening ellipse (8 points), following the 68-point layout order.
MouthLandmarks mouth_landmarks(cv::Point2d center, double outer_a, double outer_b, double inner_a,
                               double inner_b, double angle_rad = 0.0);

struct RenderedFrame {
  cv::Mat rgb;                 // CV_8UC3, RGB order
  MouthLandmarks landmarks;    // ground truth
  cv::Rect face_box;           // bounding box of the face ellipse
};

/// Draws a face-like canvas with the given mouth. `face_center` is in canvas
/// pixels. `noise_sigma` adds seeded Gaussian pixel noise when > 0.
RenderedFrame render_face(cv::Size canvas, cv::Point2d face_center, const Appearance& look,
                          const MouthShape& mouth, double noise_sigma = 0.0,
                          std::mt19937_64* noise_rng = nullptr);

/// Canonical face placement for a square clip canvas.
cv::Point2d canonical_face_center(cv::Size canvas);

struct SyntheticClip {
  int class_id = 0;
  std::vector<RenderedFrame> frames;
};

struct ClipOptions {
  cv::Size canvas{300, 300};
  double fps = 20.0;
  int min_frames = 16;
  int max_frames = 26;
  double max_offset_px = 8.0;
  double noise_sigma = 0.0;
};

/// Renders one word clip of class `class_id` for speaker `look`.
SyntheticClip render_clip(int class_id, const Appearance& look, std::mt19937_64& rng,
                          const ClipOptions& opts = {});

/// A burst of mouth motion inside a recording, frame indices [start, end).
struct Burst {
  int start = 0;
  int end = 0;
};

struct Recording {
  std::vector<cv::Mat> frames;  // RGB
  std::vector<Burst> bursts;    // generator schedule, one per spoken word
};

struct RecordingOptions {
  cv::Size canvas{640, 360};
  double fps = 20.0;
  double gap_seconds = 1.0;
  double word_seconds_min = 0.8;
  double word_seconds_max = 1.0;
  double noise_sigma = 1.5;
};

/// Simulates the collection protocol: one speaker repeating one word
/// `repetitions` times with still gaps between repetitions.
Recording render_recording(int class_id, int repetitions, const Appearance& look, std::mt19937_64& rng,
                           const RecordingOptions& opts = {});

}  // namespace lipread::synth
