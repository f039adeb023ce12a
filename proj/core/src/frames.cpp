#include "lipread/frames.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>
#include <opencv2/videoio.hpp>

#include "lipread/errors.hpp"

namespace fs = std::filesystem;

namespace lipread {
namespace {

bool has_extension(const fs::path& p, std::initializer_list<const char*> exts) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return std::any_of(exts.begin(), exts.end(), [&](const char* e) { return ext == e; });
}

bool is_image_file(const fs::path& p) { return has_extension(p, {".png", ".bmp", ".jpg", ".jpeg", ".ppm", ".tif", ".tiff"}); }

std::vector<fs::path> frame_files(const std::string& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && is_image_file(entry.path())) files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  return files;
}

cv::Mat bgr_to_rgb(const cv::Mat& bgr) {
  cv::Mat rgb;
  if (bgr.channels() == 1)
    cv::cvtColor(bgr, rgb, cv::COLOR_GRAY2RGB);
  else if (bgr.channels() == 4)
    cv::cvtColor(bgr, rgb, cv::COLOR_BGRA2RGB);
  else
    cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
  return rgb;
}

}  // namespace

bool is_video_file(const std::string& path) {
  return fs::is_regular_file(path) && has_extension(path, {".avi", ".mkv", ".mp4", ".mov", ".webm", ".m4v"});
}

bool is_frame_directory(const std::string& path) {
  if (!fs::is_directory(path)) return false;
  for (const auto& entry : fs::directory_iterator(path))
    if (entry.is_regular_file() && is_image_file(entry.path())) return true;
  return false;
}

std::vector<cv::Mat> read_frames(const std::string& path) {
  std::vector<cv::Mat> frames;
  if (fs::is_directory(path)) {
    for (const auto& file : frame_files(path)) {
      cv::Mat bgr = cv::imread(file.string(), cv::IMREAD_COLOR);
      if (bgr.empty()) throw DecodeError("cannot decode frame " + file.string());
      frames.push_back(bgr_to_rgb(bgr));
    }
  } else if (fs::is_regular_file(path)) {
    cv::VideoCapture cap(path);
    if (!cap.isOpened()) throw DecodeError("cannot open video " + path);
    cv::Mat bgr;
    while (cap.read(bgr)) frames.push_back(bgr_to_rgb(bgr));
  } else {
    throw DecodeError("no such clip " + path);
  }
  if (frames.empty()) throw DecodeError("no frames decoded from " + path);
  return frames;
}

int probe_frame_count(const std::string& path) {
  if (fs::is_directory(path)) {
    const auto n = static_cast<int>(frame_files(path).size());
    if (n == 0) throw DecodeError("frame directory " + path + " has no images");
    return n;
  }
  cv::VideoCapture cap(path);
  if (!cap.isOpened()) throw DecodeError("cannot open video " + path);
  const int n = static_cast<int>(cap.get(cv::CAP_PROP_FRAME_COUNT));
  if (n > 0) return n;
  int count = 0;
  cv::Mat frame;
  while (cap.grab()) ++count;
  if (count == 0) throw DecodeError("no frames in " + path);
  return count;
}

double probe_fps(const std::string& path, double fallback) {
  if (fs::is_directory(path)) return fallback;
  cv::VideoCapture cap(path);
  if (!cap.isOpened()) throw DecodeError("cannot open video " + path);
  const double fps = cap.get(cv::CAP_PROP_FPS);
  return fps > 0 ? fps : fallback;
}

cv::Mat letterbox(const cv::Mat& rgb, int size, cv::Rect* content) {
  if (rgb.empty()) throw DecodeError("empty frame");
  cv::Mat canvas(size, size, CV_8UC3, cv::Scalar::all(0));
  cv::Rect box;
  if (rgb.cols == size && rgb.rows == size) {
    rgb.copyTo(canvas);
    box = {0, 0, size, size};
  } else {
    const double scale = std::min(static_cast<double>(size) / rgb.cols, static_cast<double>(size) / rgb.rows);
    const int w = std::clamp(static_cast<int>(std::lround(rgb.cols * scale)), 1, size);
    const int h = std::clamp(static_cast<int>(std::lround(rgb.rows * scale)), 1, size);
    box = {(size - w) / 2, (size - h) / 2, w, h};
    cv::Mat resized;
    cv::resize(rgb, resized, box.size(), 0, 0, scale < 1.0 ? cv::INTER_AREA : cv::INTER_LINEAR);
    resized.copyTo(canvas(box));
  }
  if (content) *content = box;
  return canvas;
}

FrameSequence to_frame_sequence(const std::vector<cv::Mat>& rgb, double fps, std::string clip_id) {
  FrameSequence seq;
  seq.frames = static_cast<int>(rgb.size());
  seq.fps = fps;
  seq.clip_id = std::move(clip_id);
  seq.data.resize(seq.frame_stride() * rgb.size());
  for (std::size_t t = 0; t < rgb.size(); ++t) {
    const cv::Mat boxed = letterbox(rgb[t], kFrameSize);
    float* dst = seq.frame(static_cast<int>(t));
    for (int y = 0; y < kFrameSize; ++y) {
      const auto* row = boxed.ptr<uchar>(y);
      for (int i = 0; i < kFrameSize * 3; ++i) *dst++ = row[i] / 255.0f;
    }
  }
  return seq;
}

std::vector<cv::Mat> to_images(const FrameSequence& seq) {
  std::vector<cv::Mat> out;
  out.reserve(static_cast<std::size_t>(seq.frames));
  for (int t = 0; t < seq.frames; ++t) {
    cv::Mat img(seq.height, seq.width, CV_8UC3);
    const float* src = seq.frame(t);
    for (int y = 0; y < seq.height; ++y) {
      auto* row = img.ptr<uchar>(y);
      for (int i = 0; i < seq.width * 3; ++i) row[i] = cv::saturate_cast<uchar>(std::lround(*src++ * 255.0f));
    }
    out.push_back(std::move(img));
  }
  return out;
}

FrameSequence decode_clip(const std::string& path) {
  const auto frames = read_frames(path);
  auto id = fs::path(path).filename().string();
  return to_frame_sequence(frames, probe_fps(path), id);
}

FrameSequence standardize_frames(const FrameSequence& seq, std::size_t target) {
  const auto indices = standard_frame_indices(static_cast<std::size_t>(seq.frames), target);
  FrameSequence out;
  out.frames = static_cast<int>(target);
  out.height = seq.height;
  out.width = seq.width;
  out.fps = seq.fps;
  out.clip_id = seq.clip_id;
  out.data.resize(seq.frame_stride() * target);
  for (std::size_t t = 0; t < target; ++t)
    std::copy_n(seq.frame(static_cast<int>(indices[t])), seq.frame_stride(), out.frame(static_cast<int>(t)));
  return out;
}

void write_frame_directory(const std::vector<cv::Mat>& rgb, const std::string& dir) {
  fs::create_directories(dir);
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && is_image_file(entry.path())) fs::remove(entry.path());
  const std::vector<int> params = {cv::IMWRITE_PNG_COMPRESSION, 1};
  char name[16];
  for (std::size_t i = 0; i < rgb.size(); ++i) {
    std::snprintf(name, sizeof(name), "%05zu.png", i);
    cv::Mat bgr;
    cv::cvtColor(rgb[i], bgr, cv::COLOR_RGB2BGR);
    if (!cv::imwrite((fs::path(dir) / name).string(), bgr, params))
      throw IoError("cannot write frame " + (fs::path(dir) / name).string());
  }
}

void write_frame_directory(const FrameSequence& seq, const std::string& dir) {
  write_frame_directory(to_images(seq), dir);
}

void write_video(const std::vector<cv::Mat>& rgb, const std::string& path, double fps) {
  if (rgb.empty()) throw InvalidArgument("no frames to write");
  if (const auto parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
  cv::VideoWriter writer(path, cv::VideoWriter::fourcc('F', 'F', 'V', '1'), fps, rgb.front().size());
  if (!writer.isOpened()) throw IoError("cannot open video writer for " + path);
  cv::Mat bgr;
  for (const auto& frame : rgb) {
    cv::cvtColor(frame, bgr, cv::COLOR_RGB2BGR);
    writer.write(bgr);
  }
}

}  // namespace lipread
