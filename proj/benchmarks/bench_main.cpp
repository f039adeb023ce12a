#include <random>

#include <benchmark/benchmark.h>

#include "lipread/layers.hpp"
#include "lipread/models.hpp"
#include "lipread/pipeline.hpp"
#include "lipread/realtime.hpp"

using namespace lipread;

namespace {

// Conv forward on a (1, side, side, channels) map.
void BM_Conv2DInfer(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0)), ch = static_cast<int>(state.range(1));
  std::mt19937_64 rng(1);
  nn::Conv2D conv(ch, ch, 3, 1, rng);
  nn::Tensor x({1, side, side, ch});
  std::normal_distribution<double> d;
  for (auto& v : x.values()) v = d(rng);
  for (auto _ : state) benchmark::DoNotOptimize(conv.infer(x));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Conv2DInfer)->Args({20, 16})->Args({20, 32})->Args({40, 16});

Features input_for(Method m, std::mt19937_64& rng) {
  if (m == Method::indirect_cnn) {
    std::normal_distribution<double> d(0, 0.4);
    LipTensor t;
    t.data.resize(static_cast<std::size_t>(t.frames) * kMouthPoints * 2);
    for (auto& v : t.data) v = d(rng);
    return t;
  }
  std::uniform_real_distribution<float> u(0, 1);
  FrameSequence s;
  s.frames = 20;
  s.data.resize(20 * s.frame_stride());
  for (auto& v : s.data) v = u(rng);
  return s;
}

// One clip through a default-size model, features already extracted.
void BM_PredictClip(benchmark::State& state) {
  const auto method = static_cast<Method>(state.range(0));
  const TrainedModel model(ModelSpec::defaults(method, 7), WordVocabulary::default_wordset());
  std::mt19937_64 rng(2);
  const auto x = input_for(method, rng);
  for (auto _ : state) benchmark::DoNotOptimize(predict_clip(model, x));
  state.SetLabel(to_string(method));
}
BENCHMARK(BM_PredictClip)
    ->Arg(static_cast<int>(Method::indirect_cnn))
    ->Arg(static_cast<int>(Method::direct_cnn))
    ->Arg(static_cast<int>(Method::direct_lstm))
    ->Unit(benchmark::kMillisecond);

// Rendering one synthetic 300x300 face frame.
void BM_SynthFrame(benchmark::State& state) {
  SynthScriptSource source(parse_synth_script("0:1000"), 4);
  for (auto _ : state) benchmark::DoNotOptimize(source.next());
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SynthFrame)->Unit(benchmark::kMillisecond);

// Window of raw frames to model features.
void BM_WindowFeatures(benchmark::State& state) {
  const auto method = static_cast<Method>(state.range(0));
  const auto pipeline = make_pipeline(method);
  SynthScriptSource source(parse_synth_script("3:1"), 5);
  std::vector<cv::Mat> window;
  for (int i = 0; i < 20; ++i) window.push_back(*source.next());
  for (auto _ : state) benchmark::DoNotOptimize(pipeline->from_frames(window, 20.0, "bench"));
  state.SetLabel(to_string(method));
}
BENCHMARK(BM_WindowFeatures)
    ->Arg(static_cast<int>(Method::indirect_cnn))
    ->Arg(static_cast<int>(Method::direct_lstm))
    ->Unit(benchmark::kMillisecond);

// Full realtime loop on a scripted stream, a window per frame.
void BM_LiveWindows(benchmark::State& state) {
  const auto method = static_cast<Method>(state.range(0));
  const TrainedModel model(ModelSpec::defaults(method, 7), WordVocabulary::default_wordset());
  const auto pipeline = make_pipeline(method);
  const auto bindings = CommandBindings::defaults(model.vocab());
  WindowConfig cfg;
  cfg.stride = 1;
  std::size_t windows = 0;
  for (auto _ : state) {
    SynthScriptSource source(parse_synth_script("2:1,4:1"), 3);
    MockRobot robot;
    windows += run_live(source, model, *pipeline, cfg, bindings, robot).windows.size();
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(windows));
  state.SetLabel(to_string(method));
}
BENCHMARK(BM_LiveWindows)
    ->Arg(static_cast<int>(Method::indirect_cnn))
    ->Arg(static_cast<int>(Method::direct_lstm))
    ->Unit(benchmark::kMillisecond)
    ->Iterations(2);

}  // namespace

// libbenchmark_main.a ships as LTO bytecode from another compiler build.
BENCHMARK_MAIN();
