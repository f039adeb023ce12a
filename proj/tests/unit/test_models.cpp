#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <future>
#include <numeric>
#include <random>

#include "lipread/checkpoint.hpp"
#include "lipread/errors.hpp"
#include "lipread/models.hpp"
#include "tempdir.hpp"

using namespace lipread;

namespace {

const WordVocabulary& vocab7() {
  static const auto v = WordVocabulary::default_wordset();
  return v;
}

FrameSequence random_clip(std::uint64_t seed, int frames = 20) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(0.f, 1.f);
  FrameSequence s;
  s.frames = frames;
  s.data.resize(static_cast<std::size_t>(frames) * s.frame_stride());
  for (auto& v : s.data) v = u(rng);
  return s;
}

LipTensor random_lips(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, 0.3);
  LipTensor t;
  t.data.resize(static_cast<std::size_t>(t.frames) * kMouthPoints * 2);
  for (auto& v : t.data) v = d(rng);
  t.normalization.applied = true;
  return t;
}

Features input_for(Method m, std::uint64_t seed) {
  if (m == Method::indirect_cnn) return random_lips(seed);
  return random_clip(seed);
}

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

struct Variant {
  Method method;
  Backbone backbone;
};

const Variant kVariants[] = {{Method::indirect_cnn, Backbone::mobile},
                             {Method::indirect_cnn, Backbone::vgg},
                             {Method::indirect_cnn, Backbone::resnet},
                             {Method::direct_cnn, Backbone::none},
                             {Method::direct_lstm, Backbone::none}};

}  // namespace

TEST_SUITE("models") {

TEST_CASE("names parse") {
  CHECK(parse_method("indirect") == Method::indirect_cnn);
  CHECK(parse_method("cnn") == Method::direct_cnn);
  CHECK(parse_method("lstm") == Method::direct_lstm);
  CHECK(parse_method(to_string(Method::direct_lstm)) == Method::direct_lstm);
  CHECK(parse_backbone("vgg") == Backbone::vgg);
  CHECK_THROWS_AS(parse_method("gru"), InvalidSpec);
  CHECK_THROWS_AS(parse_backbone("inception"), InvalidSpec);
}

TEST_CASE("every variant maps its input to one distribution over the classes") {
  for (const auto& v : kVariants) {
    INFO(to_string(v.method) << " " << to_string(v.backbone));
    auto spec = ModelSpec::defaults(v.method, 7, v.backbone);
    spec.validate();
    TrainedModel model(spec, vocab7());
    CHECK(model.parameter_count() > 0);
    const auto p = predict_clip(model, input_for(v.method, 1));
    REQUIRE(p.distribution.size() == 7);
    CHECK(sum(p.distribution) == doctest::Approx(1.0));
    CHECK(p.label == vocab7().word(p.class_id));
    CHECK(p.confidence == *std::max_element(p.distribution.begin(), p.distribution.end()));
  }
}

TEST_CASE("expected input shapes") {
  CHECK(expected_input_shape(Method::indirect_cnn) == std::vector<int>{20, 20, 2});
  CHECK(expected_input_shape(Method::direct_cnn) == std::vector<int>{20, 300, 300, 3});
  TrainedModel lstm(ModelSpec::defaults(Method::direct_lstm, 7), vocab7());
  CHECK(lstm.sample_shape() == nn::Shape{20, 20, 20, 3});
  TrainedModel cnn(ModelSpec::defaults(Method::direct_cnn, 7), vocab7());
  CHECK(cnn.sample_shape() == nn::Shape{20, 20, 3});
}

TEST_CASE("all-zero clip still yields a distribution") {
  TrainedModel model(ModelSpec::defaults(Method::direct_lstm, 7), vocab7());
  FrameSequence zeros;
  zeros.frames = 20;
  zeros.data.assign(static_cast<std::size_t>(20) * zeros.frame_stride(), 0.f);
  const auto p = predict_clip(model, zeros);
  CHECK(p.distribution.size() == 7);
  CHECK(sum(p.distribution) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("wrong features are rejected") {
  TrainedModel direct(ModelSpec::defaults(Method::direct_cnn, 7), vocab7());
  TrainedModel indirect(ModelSpec::defaults(Method::indirect_cnn, 7), vocab7());
  CHECK_THROWS_AS(predict_clip(direct, random_lips(1)), ShapeMismatch);
  CHECK_THROWS_AS(predict_clip(indirect, random_clip(1)), ShapeMismatch);
  CHECK_THROWS_AS(predict_clip(direct, random_clip(1, 19)), ShapeMismatch);
  auto wrong = random_clip(1);
  wrong.height = wrong.width = 150;
  wrong.data.resize(static_cast<std::size_t>(20) * wrong.frame_stride());
  CHECK_THROWS_AS(predict_clip(direct, wrong), ShapeMismatch);
}

TEST_CASE("prediction is deterministic and thread safe") {
  TrainedModel model(ModelSpec::defaults(Method::indirect_cnn, 7), vocab7());
  const auto x = random_lips(3);
  const auto ref = predict_clip(model, x).distribution;
  CHECK(predict_clip(model, x).distribution == ref);
  std::vector<std::future<std::vector<double>>> jobs;
  for (int i = 0; i < 4; ++i)
    jobs.push_back(std::async(std::launch::async, [&] { return predict_clip(model, x).distribution; }));
  for (auto& j : jobs) CHECK(j.get() == ref);
}

TEST_CASE("same seed builds the same weights") {
  auto spec = ModelSpec::defaults(Method::indirect_cnn, 7, Backbone::resnet);
  spec.seed = 5;
  TrainedModel a(spec, vocab7()), b(spec, vocab7());
  const auto wa = a.weights(), wb = b.weights();
  REQUIRE(wa.size() == wb.size());
  for (std::size_t i = 0; i < wa.size(); ++i) CHECK(std::equal(wa[i].values().begin(), wa[i].values().end(), wb[i].values().begin()));
  spec.seed = 6;
  TrainedModel c(spec, vocab7());
  CHECK_FALSE(std::equal(wa[0].values().begin(), wa[0].values().end(), c.weights()[0].values().begin()));
}

TEST_CASE("direct cnn ignores frame order") {
  TrainedModel model(ModelSpec::defaults(Method::direct_cnn, 7), vocab7());
  const auto clip = random_clip(4);
  FrameSequence rev = clip;
  const std::size_t stride = clip.frame_stride();
  for (int t = 0; t < 20; ++t)
    std::copy(clip.frame(19 - t), clip.frame(19 - t) + stride, rev.data.begin() + static_cast<std::ptrdiff_t>(t * stride));
  const auto a = predict_clip(model, clip).distribution, b = predict_clip(model, rev).distribution;
  for (int i = 0; i < 7; ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
}

TEST_CASE("spec validation") {
  const auto base = ModelSpec::defaults(Method::direct_lstm, 7);
  auto s = base;
  s.num_classes = 1;
  CHECK_THROWS_AS(s.validate(), InvalidSpec);
  s = base;
  s.input_shape = {20, 20, 2};
  CHECK_THROWS_AS(s.validate(), InvalidSpec);
  s = base;
  s.backbone = Backbone::vgg;
  CHECK_THROWS_AS(s.validate(), InvalidSpec);
  s = base;
  s.hyperparams.dropout = 1.0;
  CHECK_THROWS_AS(s.validate(), InvalidSpec);
  s = base;
  s.hyperparams.stem_pool = 7;
  CHECK_THROWS_AS(s.validate(), InvalidSpec);
  s = base;
  s.hyperparams.motion_gain = -1;
  CHECK_THROWS_AS(s.validate(), InvalidSpec);
  s = base;
  s.hyperparams.learning_rate = -1e-3;
  CHECK_THROWS_AS(s.validate(), InvalidSpec);
  auto ind = ModelSpec::defaults(Method::indirect_cnn, 7);
  CHECK(ind.backbone == Backbone::mobile);
  ind.backbone = Backbone::none;
  CHECK_THROWS_AS(ind.validate(), InvalidSpec);
  ind = ModelSpec::defaults(Method::indirect_cnn, 7);
  ind.hyperparams.motion_gain = 1;
  CHECK_THROWS_AS(ind.validate(), InvalidSpec);
  CHECK_THROWS_AS(TrainedModel(ind, vocab7()), InvalidSpec);
  CHECK_THROWS_AS(TrainedModel(ModelSpec::defaults(Method::direct_cnn, 5), vocab7()), InvalidSpec);
}

TEST_CASE("prediction helpers") {
  const std::vector<double> tie{0.1, 0.4, 0.4, 0.0, 0.05, 0.05, 0.0};
  const auto p = make_prediction(tie, vocab7());
  CHECK(p.class_id == 1);
  CHECK(p.confidence == 0.4);
  CHECK_THROWS_AS(make_prediction(std::vector<double>{0.5, 0.5}, vocab7()), ShapeMismatch);
  const nn::Tensor rows({2, 3}, std::vector<double>{1, 0, 0, 0, 0.5, 0.5});
  CHECK(aggregate_frame_distributions(rows) == std::vector<double>{0.5, 0.25, 0.25});
}

TEST_CASE("stem pooling and mean-frame subtraction") {
  auto clip = random_clip(5, 20);
  const auto pooled = pool_frames(clip, 15);
  REQUIRE(pooled.shape() == nn::Shape{20, 20, 20, 3});
  // Block (2, 3) of frame 4, channel 1, by hand.
  double acc = 0;
  for (int y = 30; y < 45; ++y)
    for (int x = 45; x < 60; ++x) acc += clip.at(4, y, x, 1);
  CHECK(pooled[((4 * 20 + 2) * 20 + 3) * 3 + 1] == doctest::Approx(acc / 225).epsilon(1e-6));

  auto moved = pooled;
  subtract_clip_mean(moved, 10.0);
  const std::size_t per = 20 * 20 * 3;
  for (std::size_t i = 0; i < per; i += 97) {
    double mean = 0, col = 0;
    for (int t = 0; t < 20; ++t) mean += moved[t * per + i], col += pooled[t * per + i];
    CHECK(mean == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(moved[3 * per + i] == doctest::Approx(10.0 * (pooled[3 * per + i] - col / 20)));
  }
}

TEST_CASE("checkpoint round trip") {
  for (const auto& v : kVariants) {
    INFO(to_string(v.method) << " " << to_string(v.backbone));
    auto spec = ModelSpec::defaults(v.method, 7, v.backbone);
    spec.seed = 17;
    TrainedModel model(spec, vocab7());
    std::mt19937_64 rng(2);
    std::normal_distribution<double> d(0, 0.05);
    for (auto* p : model.parameters())
      for (auto& x : p->value.values()) x += d(rng);
    model.set_fingerprint({17, "abc"});
    model.metadata()["note"] = "unit";
    oracle::TempDir tmp;
    save_model(model, tmp / "ckpt");
    CHECK(is_checkpoint_dir(tmp / "ckpt"));
    const auto back = load_model(tmp / "ckpt");
    CHECK(back.spec() == model.spec());
    CHECK(back.vocab() == model.vocab());
    CHECK(back.fingerprint() == model.fingerprint());
    CHECK(back.metadata().at("note") == "unit");
    for (int i = 0; i < 3; ++i) {
      const auto x = input_for(v.method, 100 + i);
      const auto a = predict_clip(model, x).distribution, b = predict_clip(back, x).distribution;
      for (int c = 0; c < 7; ++c) CHECK(std::abs(a[c] - b[c]) <= 1e-12);
    }
  }
}

TEST_CASE("checkpoint damage is detected") {
  TrainedModel model(ModelSpec::defaults(Method::indirect_cnn, 7), vocab7());
  oracle::TempDir tmp;
  const auto dir = tmp / "ckpt";
  CHECK_THROWS_AS(load_model(dir), MissingCheckpoint);
  CHECK_FALSE(is_checkpoint_dir(dir));
  save_model(model, dir);
  const auto weights = dir + "/weights.bin";
  const auto size = std::filesystem::file_size(weights);

  SUBCASE("flipped byte") {
    std::fstream f(weights, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(static_cast<std::streamoff>(size / 2));
    f.put('\x5a');
    f.close();
    CHECK_THROWS_AS(load_model(dir), CorruptCheckpoint);
  }
  SUBCASE("truncated weights") {
    std::filesystem::resize_file(weights, size - 8);
    CHECK_THROWS_AS(load_model(dir), CorruptCheckpoint);
  }
  SUBCASE("missing weights") {
    std::filesystem::remove(weights);
    CHECK_THROWS_AS(load_model(dir), MissingCheckpoint);
  }
  SUBCASE("garbled metadata") {
    std::ofstream(dir + "/model.json") << "{ not json";
    CHECK_THROWS_AS(load_model(dir), CorruptCheckpoint);
  }
}

}  // TEST_SUITE
