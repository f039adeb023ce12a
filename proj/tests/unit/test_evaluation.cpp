#include <doctest.h>

#include <cmath>
#include <fstream>
#include <map>
#include <random>

#include <json.hpp>

#include "lipread/errors.hpp"
#include "lipread/evaluation.hpp"
#include "oracles.hpp"
#include "tempdir.hpp"

using namespace lipread;

namespace {

WordVocabulary vocab_n(int n) {
  std::vector<std::string> words;
  for (int i = 0; i < n; ++i) words.push_back("w" + std::to_string(i));
  return WordVocabulary::from_labels(words);
}

ConfusionMatrix to_matrix(const std::vector<std::vector<std::int64_t>>& m) {
  std::vector<std::int64_t> flat;
  for (const auto& row : m) flat.insert(flat.end(), row.begin(), row.end());
  return ConfusionMatrix(vocab_n(static_cast<int>(m.size())), flat);
}

// The clip's features one-hot encode the class the test wants predicted.
class ScriptedPipeline final : public FeaturePipeline {
 public:
  explicit ScriptedPipeline(std::map<std::string, int> predicted) : predicted_(std::move(predicted)) {}
  std::string name() const override { return "scripted"; }
  Features from_record(const ClipRecord& r) const override {
    LipTensor t;
    t.data.assign(static_cast<std::size_t>(t.frames) * kMouthPoints * 2, 0.0);
    t.data[static_cast<std::size_t>(predicted_.at(r.clip_id))] = 1.0;
    return t;
  }
  Features from_frames(const std::vector<cv::Mat>&, double, const std::string&) const override {
    throw InvalidArgument("records only");
  }

 private:
  std::map<std::string, int> predicted_;
};

TrainedModel readout_model(const WordVocabulary& vocab) {
  const int c = static_cast<int>(vocab.size());
  auto spec = ModelSpec::defaults(Method::indirect_cnn, c);
  std::mt19937_64 rng(0);
  auto net = std::make_unique<nn::Sequential>();
  net->emplace<nn::Flatten>();
  net->emplace<nn::Dense>(800, c, rng);
  TrainedModel model(spec, vocab, std::move(net));
  auto p = model.parameters();
  p[0]->value.fill(0.0);
  p[1]->value.fill(0.0);
  for (int i = 0; i < c; ++i) p[0]->value[static_cast<std::size_t>(i) * c + i] = 5.0;
  return model;
}

}  // namespace

TEST_SUITE("evaluation") {

TEST_CASE("metrics agree with the brute-force oracle") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> classes(2, 9), count(0, 12), sparse(0, 3);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = classes(rng);
    std::vector<std::vector<std::int64_t>> m(n, std::vector<std::int64_t>(n));
    for (auto& row : m)
      for (auto& v : row) v = sparse(rng) == 0 ? 0 : count(rng);
    const auto got = compute_metrics(to_matrix(m), "x");
    const auto want = oracle::brute_force_scores(m);
    INFO("trial " << trial);
    CHECK(std::abs(got.accuracy - want.accuracy) <= 1e-9);
    CHECK(std::abs(got.macro_precision - want.macro_precision) <= 1e-9);
    CHECK(std::abs(got.macro_recall - want.macro_recall) <= 1e-9);
    CHECK(std::abs(got.macro_f1 - want.macro_f1) <= 1e-9);
    REQUIRE(got.per_class.size() == static_cast<std::size_t>(n));
    for (int c = 0; c < n; ++c) {
      CHECK(std::abs(got.per_class[c].precision - want.per_class[c].precision) <= 1e-9);
      CHECK(std::abs(got.per_class[c].recall - want.per_class[c].recall) <= 1e-9);
      CHECK(std::abs(got.per_class[c].f1 - want.per_class[c].f1) <= 1e-9);
    }
  }
}

TEST_CASE("hand-worked two-class example") {
  // 3 of class 0 right, 1 called class 1; 2 of class 1 right.
  const auto r = compute_metrics(to_matrix({{3, 1}, {0, 2}}));
  CHECK(r.samples == 6);
  CHECK(r.accuracy == doctest::Approx(5.0 / 6));
  CHECK(r.per_class[0].precision == doctest::Approx(1.0));
  CHECK(r.per_class[0].recall == doctest::Approx(0.75));
  CHECK(r.per_class[1].precision == doctest::Approx(2.0 / 3));
  CHECK(r.per_class[1].f1 == doctest::Approx(0.8));
  CHECK(r.per_class[0].support == 4);
}

TEST_CASE("zero denominators are flagged, not NaN") {
  const auto r = compute_metrics(to_matrix({{2, 0, 0}, {1, 0, 0}, {0, 0, 0}}));
  CHECK(r.per_class[1].precision == 0.0);
  CHECK(r.per_class[1].precision_degenerate);
  CHECK_FALSE(r.per_class[1].recall_degenerate);
  CHECK(r.per_class[1].f1_degenerate);
  CHECK(r.per_class[2].recall_degenerate);
  CHECK(r.per_class[2].recall == 0.0);
  for (const auto& c : r.per_class) CHECK(std::isfinite(c.f1));
  const auto empty = compute_metrics(ConfusionMatrix(vocab_n(3)));
  CHECK(empty.accuracy == 0.0);
  CHECK(std::isfinite(empty.macro_f1));
}

TEST_CASE("confusion matrix bookkeeping") {
  ConfusionMatrix m(vocab_n(3));
  m.add(0, 0);
  m.add(2, 1, 4);
  CHECK(m.at(2, 1) == 4);
  CHECK(m.total() == 5);
  CHECK(m.trace() == 1);
  CHECK_THROWS_AS(m.add(3, 0), InvalidArgument);
  CHECK_THROWS_AS(ConfusionMatrix(vocab_n(2), {1, 2, 3}), ShapeMismatch);
  CHECK_THROWS_AS(ConfusionMatrix(vocab_n(2), {1, 2, 3, -1}), InvalidArgument);
}

TEST_CASE("evaluate scores the requested split") {
  const auto vocab = vocab_n(3);
  std::vector<ClipRecord> recs;
  std::map<std::string, int> predicted;
  // truth t, clip k: predicted (t + (k == 0)) % 3, so one error per class.
  for (int t = 0; t < 3; ++t)
    for (int k = 0; k < 4; ++k) {
      ClipRecord r;
      r.label = vocab.word(t);
      r.clip_id = r.label + "_" + std::to_string(k);
      r.path = "/none";
      r.frame_count = 20;
      r.split = k < 3 ? Split::test : Split::train;
      predicted[r.clip_id] = (t + (k == 0)) % 3;
      recs.push_back(r);
    }
  const ClipManifest manifest(vocab, recs);
  const auto model = readout_model(vocab);
  const auto ev = evaluate(model, manifest, ScriptedPipeline(predicted));
  CHECK(ev.report.samples == 9);
  CHECK(ev.report.split == "test");
  CHECK(ev.report.accuracy == doctest::Approx(6.0 / 9));
  CHECK(ev.matrix.at(0, 1) == 1);
  CHECK(ev.matrix.at(2, 0) == 1);
  CHECK(std::isfinite(ev.report.loss));
  REQUIRE(ev.clip_ids.size() == 9);
  for (std::size_t i = 0; i < 9; ++i) CHECK(ev.predictions[i].class_id == predicted.at(ev.clip_ids[i]));
  CHECK(evaluate(model, manifest, ScriptedPipeline(predicted), Split::train).report.accuracy == 1.0);
  CHECK_THROWS_AS(evaluate(model, manifest, ScriptedPipeline(predicted), Split::val), EmptySplit);
}

TEST_CASE("comparison sorts by validation accuracy") {
  std::vector<MetricsReport> reports(4);
  reports[0].method = "a";
  reports[0].val_accuracy = 0.8;
  reports[1].method = "b";  // unknown
  reports[2].method = "c";
  reports[2].val_accuracy = 0.95;
  reports[3].method = "d";
  reports[3].val_accuracy = 0.8;
  const auto rows = compare_methods(reports);
  CHECK(rows[0].method == "c");
  CHECK(rows[1].method == "a");
  CHECK(rows[2].method == "d");
  CHECK(rows[3].method == "b");
  const auto table = render_comparison(rows);
  CHECK(table.find("Val-Acc") != std::string::npos);
  CHECK(table.find("Train-Loss") != std::string::npos);
  const auto j = nlohmann::json::parse(comparison_json(rows));
  CHECK(j.size() == 4);
  CHECK(j[3]["val_acc"].is_null());
}

TEST_CASE("report json round trip") {
  Evaluation ev;
  ev.matrix = to_matrix({{3, 1}, {0, 2}});
  ev.report = compute_metrics(ev.matrix, "direct_lstm");
  ev.report.loss = 0.25;
  ev.report.val_accuracy = 0.9;
  ev.report.train_loss = 0.1;
  ev.predictions.resize(6);
  ev.clip_ids.assign(6, "c");
  oracle::TempDir tmp;
  std::ofstream(tmp / "r.json") << report_json(ev);
  const auto back = read_report(tmp / "r.json");
  CHECK(back.method == "direct_lstm");
  CHECK(back.accuracy == ev.report.accuracy);
  CHECK(back.macro_f1 == ev.report.macro_f1);
  CHECK(back.loss == 0.25);
  CHECK(back.val_accuracy == 0.9);
  CHECK(std::isnan(back.val_loss));
  CHECK(render_report(ev).find("accuracy") != std::string::npos);
  std::ofstream(tmp / "bad.json") << "{\"method\": 1}";
  CHECK_THROWS_AS(read_report(tmp / "bad.json"), IoError);
  CHECK_THROWS_AS(read_report(tmp / "none.json"), IoError);
}

}  // TEST_SUITE
