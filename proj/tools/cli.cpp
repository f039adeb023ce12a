#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "lipread/checkpoint.hpp"
#include "lipread/corpus.hpp"
#include "lipread/curves.hpp"
#include "lipread/errors.hpp"
#include "lipread/evaluation.hpp"
#include "lipread/face.hpp"
#include "lipread/frames.hpp"
#include "lipread/landmarks.hpp"
#include "lipread/manifest.hpp"
#include "lipread/pipeline.hpp"
#include "lipread/realtime.hpp"
#include "lipread/training.hpp"

namespace fs = std::filesystem;

namespace lipread::cli {
namespace {

constexpr const char* kDataRootEnv = "LIPREAD_DATA_ROOT";

/// Relative input paths are taken from LIPREAD_DATA_ROOT when it is set.
std::string input_path(const std::string& path) {
  if (path.empty() || fs::path(path).is_absolute()) return path;
  if (const char* root = std::getenv(kDataRootEnv); root && *root) return (fs::path(root) / path).string();
  return path;
}

WordVocabulary load_words(const std::string& file) {
  return file.empty() ? WordVocabulary::default_wordset() : WordVocabulary::load(input_path(file));
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  out << text;
  if (!out) throw IoError("cannot write " + path.string());
}

std::string join(const std::vector<double>& values) {
  std::ostringstream os;
  for (std::size_t i = 0; i < values.size(); ++i) os << (i ? "," : "") << values[i];
  return os.str();
}

std::vector<double> split_doubles(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(std::stod(item));
  return out;
}

void store_split(TrainedModel& model, const SplitConfig& cfg, const std::string& source) {
  auto& m = model.metadata();
  m["split.source"] = source;
  m["split.mode"] = to_string(cfg.mode);
  m["split.fractions"] = join(cfg.fractions);
  m["split.seed"] = std::to_string(cfg.seed);
  m["split.stratified"] = cfg.stratified ? "true" : "false";
  m["split.group_by"] = to_string(cfg.group_by);
}

std::optional<SplitConfig> stored_split(const TrainedModel& model) {
  const auto& m = model.metadata();
  if (!m.count("split.mode")) return std::nullopt;
  SplitConfig cfg;
  cfg.mode = parse_split_mode(m.at("split.mode"));
  cfg.fractions = split_doubles(m.at("split.fractions"));
  cfg.seed = std::stoull(m.at("split.seed"));
  cfg.stratified = m.at("split.stratified") == "true";
  cfg.group_by = parse_split_group(m.at("split.group_by"));
  return cfg;
}

std::unique_ptr<FeaturePipeline> pipeline_for(const TrainedModel& model, const std::string& landmark_cache) {
  const auto& m = model.metadata();
  const std::string detector = m.count("landmark_detector") ? m.at("landmark_detector") : "synthetic";
  return make_pipeline(model.spec().method, detector,
                       landmark_cache.empty() ? std::nullopt : std::optional<std::string>(input_path(landmark_cache)));
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  int classes = 7;
  int per_class = 10;
  std::int64_t seed = 0;
  std::string output;
  std::string words;
  int participants = 4;
  bool recordings = false;
  int repetitions = 20;
};

void synth_corpus(const SynthArgs& a) {
  const WordVocabulary vocab = a.words.empty() ? synthetic_vocabulary(a.classes) : load_words(a.words);
  SyntheticCorpusOptions opts;
  opts.participants = a.participants;
  opts.write_recordings = a.recordings;
  opts.recording_repetitions = a.repetitions;
  const auto manifest =
      generate_synthetic_corpus(vocab, a.per_class, static_cast<std::uint64_t>(a.seed), a.output, opts);
  std::cout << "wrote " << manifest.size() << " clips (" << vocab.size() << " classes) to "
            << (fs::path(a.output) / "manifest.jsonl").string() << '\n';
  if (a.recordings) std::cout << "recordings in " << (fs::path(a.output) / "recordings").string() << '\n';
}

struct BuildArgs {
  std::string input, output, words, detector = "skin";
  double fps = 20.0, gap = 1.0;
  int crop = kCropSize, repetitions = 20, max_face_reuse = 5;
};

void build(const BuildArgs& a) {
  BuildOptions opts;
  opts.fps = a.fps;
  opts.gap = a.gap;
  opts.crop = a.crop;
  opts.repetitions = a.repetitions;
  opts.max_face_reuse = a.max_face_reuse;
  const auto detector = make_face_detector(a.detector);
  const auto manifest = build_dataset(input_path(a.input), a.output, load_words(a.words), *detector, opts);
  std::cout << "wrote " << manifest.size() << " clips to " << (fs::path(a.output) / "manifest.jsonl").string()
            << '\n';
  for (const auto& [word, n] : manifest.class_counts()) std::cout << "  " << word << ": " << n << '\n';
}

struct ScanArgs {
  std::string root, out;
  double fps = 20.0;
};

void scan(const ScanArgs& a) {
  const auto result = scan_class_directories(input_path(a.root), a.fps);
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
  result.manifest.write(a.out);
  std::cout << "wrote " << result.manifest.size() << " records to " << a.out << '\n';
}

struct ExtractArgs {
  std::string manifest, out, detector = "synthetic";
};

void extract(const ExtractArgs& a) {
  const auto manifest = ClipManifest::read(input_path(a.manifest));
  const auto detector = make_landmark_detector(a.detector);
  fs::create_directories(a.out);
  std::size_t written = 0, failed = 0;
  for (const auto& r : manifest.records()) {
    try {
      const auto seq = extract_landmarks(read_frames(r.path), *detector, r.clip_id, r.fps);
      write_landmark_file(seq, LandmarkPipeline::cache_file(a.out, r.clip_id));
      ++written;
    } catch (const AllFramesInvalid& e) {
      spdlog::warn("{}: {}", r.clip_id, e.what());
      ++failed;
    }
  }
  if (written == 0) throw AllFramesInvalid("no clip yielded landmarks");
  std::cout << "wrote " << written << " landmark files to " << a.out;
  if (failed) std::cout << " (" << failed << " clips without landmarks)";
  std::cout << '\n';
}

struct DecodeArgs {
  std::string manifest, out;
};

void decode(const DecodeArgs& a) {
  auto manifest = ClipManifest::read(input_path(a.manifest));
  const fs::path out = fs::absolute(a.out).lexically_normal();
  for (auto& r : manifest.mutable_records()) {
    FrameSequence seq = standardize_frames(decode_clip(r.path));
    const fs::path dir = out / r.clip_id;
    write_frame_directory(seq, dir.string());
    r.path = dir.string();
    r.frame_count = seq.frames;
  }
  manifest.write((out / "manifest.jsonl").string());
  std::cout << "decoded " << manifest.size() << " clips to " << out.string() << '\n';
}

struct TrainArgs {
  std::string method = "lstm", backbone, manifest, out, split, split_by = "clip", optimizer = "adam";
  std::string landmarks, landmark_detector = "synthetic";
  std::int64_t seed = 0;
  int epochs = 100, batch_size = 16, patience = 5;
  double lr = 1e-3;
  bool no_early_stopping = false;
  std::optional<int> width, lstm_hidden, dense_hidden, stem_pool;
  std::optional<double> dropout, motion_gain;
};

void train_cmd(const TrainArgs& a) {
  ClipManifest manifest = ClipManifest::read(input_path(a.manifest));
  SplitConfig split;
  std::string split_source = "manifest";
  if (!a.split.empty() || !manifest.has_assigned_splits()) {
    const auto mode = parse_split_mode(a.split.empty() ? "two" : a.split);
    split = mode == SplitMode::two_way ? SplitConfig::two_way(static_cast<std::uint64_t>(a.seed))
                                       : SplitConfig::three_way(static_cast<std::uint64_t>(a.seed));
    split.group_by = parse_split_group(a.split_by);
    manifest = split_manifest(manifest, split);
    split_source = "generated";
  }

  ModelSpec spec = ModelSpec::defaults(parse_method(a.method), static_cast<int>(manifest.vocab().size()),
                                       a.backbone.empty() ? Backbone::none : parse_backbone(a.backbone));
  auto& hp = spec.hyperparams;
  if (a.width) hp.width = *a.width;
  if (a.lstm_hidden) hp.lstm_hidden = *a.lstm_hidden;
  if (a.dense_hidden) hp.dense_hidden = *a.dense_hidden;
  if (a.stem_pool) hp.stem_pool = *a.stem_pool;
  if (a.dropout) hp.dropout = *a.dropout;
  if (a.motion_gain) hp.motion_gain = *a.motion_gain;
  hp.learning_rate = a.lr;
  spec.seed = static_cast<std::uint64_t>(a.seed);

  TrainConfig cfg;
  cfg.epochs = a.epochs;
  cfg.batch_size = a.batch_size;
  cfg.learning_rate = a.lr;
  cfg.optimizer = nn::parse_optimizer(a.optimizer);
  cfg.early_stopping_patience = a.patience;
  cfg.early_stopping = !a.no_early_stopping;
  cfg.seed = static_cast<std::uint64_t>(a.seed);

  TrainedModel model(spec, manifest.vocab());
  if (split_source == "generated") store_split(model, split, split_source);
  else model.metadata()["split.source"] = split_source;
  model.metadata()["landmark_detector"] = a.landmark_detector;
  const auto pipeline = make_pipeline(spec.method, a.landmark_detector,
                                      a.landmarks.empty() ? std::nullopt
                                                          : std::optional<std::string>(input_path(a.landmarks)));

  const fs::path out(a.out);
  fs::create_directories(out);
  manifest.write((out / "split.jsonl").string());
  spdlog::info("training {} on {} clips ({} params)", to_string(spec.method), manifest.in_split(Split::train).size(),
               model.parameter_count());
  TrainingLog log;
  try {
    log = train(model, manifest, cfg, *pipeline);
  } catch (const TrainingDiverged& e) {
    if (!e.log().epochs.empty()) emit_curves(e.log(), out.string());
    write_training_summary(e.log(), (out / "training_summary.json").string());
    throw;
  }
  save_model(model, out.string());
  const auto files = emit_curves(log, out.string());
  write_training_summary(log, (out / "training_summary.json").string());
  const auto& last = log.epochs.back();
  std::cout << to_string(spec.method) << ": " << log.epochs.size() << " epochs (" << to_string(log.stop_reason)
            << ", best " << log.best_epoch << ")  train_acc " << last.train_acc << "  " << log.monitor_split
            << "_acc " << last.val_acc << '\n'
            << "model, " << fs::path(files.table).filename().string() << ", accuracy.png, loss.png in " << out.string()
            << '\n';
}

struct EvaluateArgs {
  std::string model_dir, manifest, split = "test", out, landmarks;
};

void evaluate_cmd(const EvaluateArgs& a) {
  const auto model = load_model(input_path(a.model_dir));
  std::string manifest_path = a.manifest.empty() ? std::string() : input_path(a.manifest);
  if (manifest_path.empty()) {
    manifest_path = (fs::path(input_path(a.model_dir)) / "split.jsonl").string();
    if (!fs::is_regular_file(manifest_path)) throw UsageError("--manifest is required: the model directory has no split.jsonl");
  }
  ClipManifest manifest = ClipManifest::read(manifest_path);
  if (!manifest.has_assigned_splits()) {
    const auto cfg = stored_split(model);
    if (!cfg) throw EmptySplit("manifest has no splits and the checkpoint records no split configuration");
    manifest = split_manifest(manifest, *cfg);
  }
  const auto pipeline = pipeline_for(model, a.landmarks);
  Evaluation ev = evaluate(model, manifest, *pipeline, parse_split(a.split));

  const fs::path summary = fs::path(input_path(a.model_dir)) / "training_summary.json";
  if (fs::is_regular_file(summary)) {
    const auto log = read_training_summary(summary.string());
    if (!log.epochs.empty()) {
      const auto& last = log.epochs.back();
      ev.report.train_accuracy = last.train_acc;
      ev.report.train_loss = last.train_loss;
      ev.report.val_accuracy = last.val_acc;
      ev.report.val_loss = last.val_loss;
    }
  }
  std::cout << render_report(ev);
  const fs::path out = a.out.empty() ? fs::path(input_path(a.model_dir)) / "evaluation.json" : fs::path(a.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  write_text(out, report_json(ev) + "\n");
  std::cout << "report: " << out.string() << '\n';
}

struct CompareArgs {
  std::vector<std::string> reports, model_dirs;
  std::string out;
};

void compare_cmd(const CompareArgs& a) {
  std::vector<MetricsReport> reports;
  for (const auto& r : a.reports) reports.push_back(read_report(input_path(r)));
  for (const auto& d : a.model_dirs)
    reports.push_back(read_report((fs::path(input_path(d)) / "evaluation.json").string()));
  if (reports.empty()) throw UsageError("compare-methods needs --reports or --model-dirs");
  const auto rows = compare_methods(reports);
  const std::string table = render_comparison(rows);
  std::cout << table;
  if (!a.out.empty()) {
    fs::create_directories(a.out);
    write_text(fs::path(a.out) / "comparison.txt", table);
    write_text(fs::path(a.out) / "comparison.json", comparison_json(rows) + "\n");
  }
}

struct PredictArgs {
  std::string model_dir, clip, landmarks;
  bool json = false;
};

void predict_cmd(const PredictArgs& a) {
  const auto model = load_model(input_path(a.model_dir));
  const auto pipeline = pipeline_for(model, a.landmarks);
  ClipRecord r;
  r.path = input_path(a.clip);
  r.clip_id = fs::path(r.path).filename().string();
  r.fps = probe_fps(r.path, 20.0);
  const auto p = predict_clip(model, pipeline->from_record(r));
  if (a.json) {
    nlohmann::ordered_json j{{"clip", r.path}, {"label", p.label}, {"class_id", p.class_id},
                             {"confidence", p.confidence}, {"distribution", p.distribution}};
    std::cout << j.dump() << '\n';
  } else {
    std::cout << p.label << ' ' << p.confidence << '\n';
  }
}

struct LiveArgs {
  std::string model_dir, source, bindings, log, robot = "mock", object, landmarks;
  int window = 20, stride = 5;
  double threshold = 0.7, cooldown = 1.0;
  std::int64_t seed = 0;
  bool paced = false;
};

void live_cmd(const LiveArgs& a) {
  const auto model = load_model(input_path(a.model_dir));
  const auto pipeline = pipeline_for(model, a.landmarks);
  const auto bindings = a.bindings.empty() ? CommandBindings::defaults(model.vocab())
                                           : CommandBindings::load(input_path(a.bindings), model.vocab());
  WindowConfig cfg;
  cfg.window = a.window;
  cfg.stride = a.stride;
  cfg.confidence_threshold = a.threshold;
  cfg.cooldown = a.cooldown;
  auto source = make_source(a.source, &model.vocab(), static_cast<std::uint64_t>(a.seed), a.paced);
  auto robot = make_robot(a.robot);
  std::unique_ptr<ObjectDetector> detector;
  if (!a.object.empty()) detector = std::make_unique<StubObjectDetector>(a.object);
  LiveOptions opts;
  opts.event_log = a.log;
  const auto result = run_live(*source, model, *pipeline, cfg, bindings, *robot, detector.get(), opts);
  for (const auto& e : result.events) std::cout << event_json(e) << '\n';
  const auto& s = result.stats;
  std::cout << "frames " << s.frames_processed << ", windows " << s.windows << ", dispatches "
            << result.events.size() << ", dropped " << s.frames_dropped << ", " << s.windows_per_second
            << " windows/s\n";
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Lip-reading toolkit: corpus building, landmark and frame features, training, evaluation and "
               "live command recognition.\n"
               "Relative input paths are resolved against $" +
                   std::string(kDataRootEnv) + " when it is set.",
               "lipread"};
  app.set_config("--config", "", "TOML file with option defaults; [subcommand] sections apply to subcommands");
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error, off")->capture_default_str();

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth-corpus", "Generate a synthetic clip corpus");
  c_synth->add_option("--classes", synth.classes, "Number of word classes")->capture_default_str();
  c_synth->add_option("--per-class", synth.per_class, "Clips per class")->capture_default_str();
  c_synth->add_option("--seed", synth.seed, "Generator seed")->required();
  c_synth->add_option("--output", synth.output, "Output directory")->required();
  c_synth->add_option("--words", synth.words, "Word list file (overrides --classes)");
  c_synth->add_option("--participants", synth.participants, "Synthetic speakers")->capture_default_str();
  c_synth->add_flag("--recordings", synth.recordings, "Also write raw multi-word recordings for build-dataset");
  c_synth->add_option("--repetitions", synth.repetitions, "Words per recording")->capture_default_str();

  BuildArgs bld;
  auto* c_build = app.add_subcommand("build-dataset", "Segment raw recordings into face-cropped word clips");
  c_build->add_option("--input", bld.input, "Recordings laid out as <word>/<participant>.<ext>")->required();
  c_build->add_option("--output", bld.output, "Output directory")->required();
  c_build->add_option("--words", bld.words, "Word list file (default: the seven-word set)");
  c_build->add_option("--fps", bld.fps, "Frame rate for frame-directory recordings")->capture_default_str();
  c_build->add_option("--crop", bld.crop, "Face crop size in pixels")->capture_default_str();
  c_build->add_option("--repetitions", bld.repetitions, "Words per recording")->capture_default_str();
  c_build->add_option("--gap", bld.gap, "Seconds of stillness between repetitions")->capture_default_str();
  c_build->add_option("--face-detector", bld.detector, "skin or full-frame")->capture_default_str();
  c_build->add_option("--max-face-reuse", bld.max_face_reuse, "Frames a lost face box may be reused")
      ->capture_default_str();

  ScanArgs scn;
  auto* c_scan = app.add_subcommand("scan", "Catalog a directory-per-class clip tree into a manifest");
  c_scan->add_option("--root", scn.root, "Corpus root")->required();
  c_scan->add_option("--out", scn.out, "Manifest file to write")->required();
  c_scan->add_option("--fps", scn.fps, "Frame rate for frame directories")->capture_default_str();

  ExtractArgs ext;
  auto* c_extract = app.add_subcommand("extract-landmarks", "Write per-clip mouth landmark files");
  c_extract->add_option("--manifest", ext.manifest, "Clip manifest")->required();
  c_extract->add_option("--out", ext.out, "Output directory")->required();
  c_extract->add_option("--detector", ext.detector, "Landmark detector (synthetic)")->capture_default_str();

  DecodeArgs dec;
  auto* c_decode = app.add_subcommand("decode", "Write standardized 20-frame 300x300 clips");
  c_decode->add_option("--manifest", dec.manifest, "Clip manifest")->required();
  c_decode->add_option("--out", dec.out, "Output directory")->required();

  TrainArgs tr;
  auto* c_train = app.add_subcommand("train", "Train a classifier and write checkpoint, log and curves");
  c_train->add_option("--method", tr.method, "indirect, cnn or lstm")->capture_default_str();
  c_train->add_option("--backbone", tr.backbone, "Indirect backbone: mobile, vgg or resnet");
  c_train->add_option("--manifest", tr.manifest, "Clip manifest")->required();
  c_train->add_option("--split", tr.split, "two or three; default: keep manifest splits, else two");
  c_train->add_option("--split-by", tr.split_by, "clip or participant")->capture_default_str();
  c_train->add_option("--seed", tr.seed, "Seed for splitting, initialization and batching")->required();
  c_train->add_option("--out", tr.out, "Output (model) directory")->required();
  c_train->add_option("--epochs", tr.epochs)->capture_default_str();
  c_train->add_option("--batch-size", tr.batch_size)->capture_default_str();
  c_train->add_option("--lr", tr.lr, "Learning rate")->capture_default_str();
  c_train->add_option("--optimizer", tr.optimizer, "adam or sgd")->capture_default_str();
  c_train->add_option("--patience", tr.patience, "Early-stopping patience in epochs")->capture_default_str();
  c_train->add_flag("--no-early-stopping", tr.no_early_stopping, "Train for all epochs");
  c_train->add_option("--width", tr.width, "Base channel count");
  c_train->add_option("--dropout", tr.dropout, "Dropout rate");
  c_train->add_option("--lstm-hidden", tr.lstm_hidden, "LSTM units");
  c_train->add_option("--dense-hidden", tr.dense_hidden, "Hidden dense units");
  c_train->add_option("--stem-pool", tr.stem_pool, "Frame downsampling factor for direct methods");
  c_train->add_option("--motion-gain", tr.motion_gain, "Mean-frame subtraction gain for direct methods; 0 disables");
  c_train->add_option("--landmarks", tr.landmarks, "Landmark cache directory (indirect)");
  c_train->add_option("--landmark-detector", tr.landmark_detector, "Landmark detector (indirect)")
      ->capture_default_str();

  EvaluateArgs ev;
  auto* c_eval = app.add_subcommand("evaluate", "Score a trained model on a split");
  c_eval->add_option("--model-dir", ev.model_dir, "Checkpoint directory")->required();
  c_eval->add_option("--manifest", ev.manifest,
                     "Clip manifest (default <model-dir>/split.jsonl; splits re-derived from the checkpoint if absent)");
  c_eval->add_option("--split", ev.split, "train, val or test")->capture_default_str();
  c_eval->add_option("--out", ev.out, "Report file (default <model-dir>/evaluation.json)");
  c_eval->add_option("--landmarks", ev.landmarks, "Landmark cache directory (indirect)");

  CompareArgs cmp;
  auto* c_cmp = app.add_subcommand("compare-methods", "Tabulate evaluation reports, best validation accuracy first");
  c_cmp->add_option("--reports", cmp.reports, "evaluation.json files");
  c_cmp->add_option("--model-dirs", cmp.model_dirs, "Model directories holding evaluation.json");
  c_cmp->add_option("--out", cmp.out, "Directory for comparison.txt and comparison.json");

  PredictArgs prd;
  auto* c_pred = app.add_subcommand("predict", "Classify one clip");
  c_pred->add_option("--model-dir", prd.model_dir, "Checkpoint directory")->required();
  c_pred->add_option("--clip", prd.clip, "Video file or frame directory")->required();
  c_pred->add_option("--landmarks", prd.landmarks, "Landmark cache directory (indirect)");
  c_pred->add_flag("--json", prd.json, "Print the full distribution as JSON");

  LiveArgs lv;
  auto* c_live = app.add_subcommand("live", "Sliding-window recognition with robot command dispatch");
  c_live->add_option("--model-dir", lv.model_dir, "Checkpoint directory")->required();
  c_live->add_option("--source", lv.source, "camera:N, file:PATH or synth:SCRIPT (e.g. synth:bro:2,salam:2)")
      ->required();
  c_live->add_option("--bindings", lv.bindings, "Word-to-action JSON (default: built-in bindings)");
  c_live->add_option("--log", lv.log, "Event log (JSON lines)");
  c_live->add_option("--robot", lv.robot, "mock or tcp:HOST:PORT")->capture_default_str();
  c_live->add_option("--object", lv.object, "Label reported by the stub object detector");
  c_live->add_option("--window", lv.window)->capture_default_str();
  c_live->add_option("--stride", lv.stride)->capture_default_str();
  c_live->add_option("--threshold", lv.threshold, "Confidence threshold")->capture_default_str();
  c_live->add_option("--cooldown", lv.cooldown, "Seconds between dispatches")->capture_default_str();
  c_live->add_option("--seed", lv.seed, "Seed for synthetic sources")->capture_default_str();
  c_live->add_flag("--paced", lv.paced, "Play synthetic sources at their nominal frame rate");
  c_live->add_option("--landmarks", lv.landmarks, "Landmark cache directory (unused for live input)");

  auto* c_version = app.add_subcommand("version", "Print tool and file format versions");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error[UsageError]: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  auto logger = spdlog::get("lipread");
  if (!logger) logger = spdlog::stderr_color_mt("lipread");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%H:%M:%S] %^%l%$ %v");
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (c_synth->parsed()) synth_corpus(synth);
    else if (c_build->parsed()) build(bld);
    else if (c_scan->parsed()) scan(scn);
    else if (c_extract->parsed()) extract(ext);
    else if (c_decode->parsed()) decode(dec);
    else if (c_train->parsed()) train_cmd(tr);
    else if (c_eval->parsed()) evaluate_cmd(ev);
    else if (c_cmp->parsed()) compare_cmd(cmp);
    else if (c_pred->parsed()) predict_cmd(prd);
    else if (c_live->parsed()) live_cmd(lv);
    else if (c_version->parsed())
      std::cout << tool_version() << " (manifest v1, landmarks v1, checkpoint v" << kCheckpointFormatVersion
                << ")\n";
  } catch (const Error& e) {
    std::cerr << "error[" << e.kind() << "]: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error[InternalError]: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace lipread::cli
