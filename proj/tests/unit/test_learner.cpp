#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "gcn/fixture.hpp"
#include "gcn/learner.hpp"
#include "support/oracles.hpp"

using namespace gcn;

namespace {

TrainingResult fit(LearnerBackend& l, const Corpus& train, int iterations, std::size_t batch = 16) {
  return gcn::train(
      l,
      [&](int i) {
        std::vector<LabeledExample> b;
        for (std::size_t k = 0; k < batch; ++k) b.push_back(train.examples[(i * batch + k) % train.size()]);
        return std::optional(b);
      },
      iterations);
}

// Every tag sequence of length <= n over `alphabet`.
std::vector<std::vector<std::string>> all_sequences(const std::vector<std::string>& alphabet, std::size_t n) {
  std::vector<std::vector<std::string>> out{{}};
  std::size_t from = 0;
  for (std::size_t len = 1; len <= n; ++len) {
    const std::size_t to = out.size();
    for (std::size_t i = from; i < to; ++i)
      for (const auto& t : alphabet) {
        auto s = out[i];
        s.push_back(t);
        out.push_back(std::move(s));
      }
    from = to;
  }
  return out;
}

}  // namespace

TEST(LabelSpace, FromFixtureCorpora) {
  auto intent = LabelSpace::from_corpus(fixture::make(TaskKind::IntentDetection, 1, {5, 1, 1}).train);
  EXPECT_EQ(intent.intents, (std::vector<std::string>{"book_flight", "find_restaurant", "get_weather", "play_music",
                                                      "set_alarm"}));
  EXPECT_EQ(intent.output_size(), 5u);

  auto slot = LabelSpace::from_corpus(fixture::make(TaskKind::SlotTagging, 1, {20, 1, 1}).train);
  EXPECT_EQ(slot.output_size(), 2 * slot.slot_types.size() + 1);
  const auto tags = slot.tag_set();
  ASSERT_FALSE(tags.empty());
  EXPECT_EQ(tags[0], "O");
  EXPECT_EQ(tags.size(), slot.output_size());
}

TEST(LabelSpace, Admits) {
  LabelSpace s;
  s.task = TaskKind::SlotTagging;
  s.slot_types = {"city", "date"};
  LabeledExample ok{"city boston", "to boston", std::vector<std::string>{"O", "B-city"}, TaskKind::SlotTagging};
  LabeledExample bad{"artist adele", "play adele", std::vector<std::string>{"O", "B-artist"}, TaskKind::SlotTagging};
  LabeledExample untagged{"generic", "hello", std::nullopt, TaskKind::SlotTagging};
  EXPECT_TRUE(s.admits(ok));
  EXPECT_FALSE(s.admits(bad));
  EXPECT_FALSE(s.admits(untagged));
  ok.task = TaskKind::IntentDetection;
  EXPECT_FALSE(s.admits(ok));
}

TEST(Spans, ConllevalChunking) {
  EXPECT_EQ(extract_spans({"B-a", "I-a", "O", "I-b", "I-b", "B-b"}),
            (std::vector<TagSpan>{{"a", 0, 2}, {"b", 3, 5}, {"b", 5, 6}}));
  EXPECT_EQ(extract_spans({"B-a", "I-b"}), (std::vector<TagSpan>{{"a", 0, 1}, {"b", 1, 2}}));
  EXPECT_TRUE(extract_spans({"O", "O"}).empty());
  EXPECT_TRUE(extract_spans({}).empty());
}

TEST(Spans, F1MatchesOracleExhaustively) {
  // Pairs of equal-length sentences over two alphabets; covers stray I- tags and type switches.
  const std::vector<std::pair<std::vector<std::string>, std::size_t>> grids = {
      {{"O", "B-a", "I-a"}, 5}, {{"O", "B-a", "I-a", "B-b", "I-b"}, 3}};
  std::size_t checked = 0;
  for (const auto& [alphabet, n] : grids) {
    const auto seqs = all_sequences(alphabet, n);
    for (const auto& g : seqs)
      for (const auto& p : seqs) {
        if (g.size() != p.size()) continue;
        ASSERT_DOUBLE_EQ(span_f1({g}, {p}), oracle::span_f1({g}, {p}));
        ++checked;
      }
  }
  EXPECT_GT(checked, 30000u);
}

TEST(Spans, F1IsMicroAveraged) {
  const std::vector<std::vector<std::string>> gold{{"B-a", "O"}, {"B-a", "B-a"}};
  const std::vector<std::vector<std::string>> pred{{"B-a", "O"}, {"O", "O"}};
  // tp 1, pred 1, gold 3: p=1, r=1/3.
  EXPECT_DOUBLE_EQ(span_f1(gold, pred), 0.5);
  EXPECT_DOUBLE_EQ(span_f1({{"O"}}, {{"O"}}), 1.0);
  EXPECT_DOUBLE_EQ(span_f1({{"B-a"}}, {{"O"}}), 0.0);
}

TEST(Learner, IntentClassifierLearnsFixture) {
  const auto b = fixture::make(TaskKind::IntentDetection, 4, {60, 10, 40});
  auto l = spawn(LabelSpace::from_corpus(b.train), 1);
  const double before = l->evaluate(b.validation).metric;
  auto r = fit(*l, b.train, 300);
  EXPECT_EQ(r.iterations_used, 300);
  EXPECT_LT(r.loss_curve.back(), r.loss_curve.front());
  const auto ev = l->evaluate(b.validation);
  EXPECT_GT(ev.metric, 0.9) << "before " << before;
  EXPECT_EQ(ev.per_example.size(), b.validation.size());
}

TEST(Learner, SlotTaggerLearnsFixture) {
  const auto b = fixture::make(TaskKind::SlotTagging, 4, {60, 10, 40});
  LearnerConfig cfg;
  cfg.learning_rate = 3e-3;
  auto l = spawn(LabelSpace::from_corpus(b.train), 1, cfg);
  fit(*l, b.train, 400);
  EXPECT_GT(l->evaluate(b.validation).metric, 0.8);
  const auto& ex = b.validation.examples.front();
  EXPECT_EQ(l->predict_tags(ex.utterance).size(), ex.iob_tags->size());
}

TEST(Learner, DialogueResponderReducesLoss) {
  const auto b = fixture::make(TaskKind::DialogueResponse, 4, {20, 4, 4});
  LearnerConfig cfg;
  cfg.learning_rate = 3e-3;
  auto l = spawn(LabelSpace::from_corpus(b.train), 1, cfg);
  const double before = l->evaluate(b.train).metric;
  fit(*l, b.train, 150);
  const double after = l->evaluate(b.train).metric;
  EXPECT_GT(after, before);
  EXPECT_GE(after, 0.0);
  EXPECT_LE(after, 1.0);
}

TEST(Learner, SameSeedSameModel) {
  const auto b = fixture::make(TaskKind::IntentDetection, 4, {10, 4, 4});
  auto x = spawn(LabelSpace::from_corpus(b.train), 9);
  auto y = spawn(LabelSpace::from_corpus(b.train), 9);
  auto rx = fit(*x, b.train, 20);
  auto ry = fit(*y, b.train, 20);
  EXPECT_EQ(rx.loss_curve, ry.loss_curve);
  EXPECT_EQ(x->evaluate(b.validation).per_example, y->evaluate(b.validation).per_example);
}

TEST(Learner, RejectsOutsideLabelSpace) {
  const auto b = fixture::make(TaskKind::IntentDetection, 4, {4, 1, 1});
  auto l = spawn(LabelSpace::from_corpus(b.train), 1);
  LabeledExample e{"order_pizza", "pizza please", std::nullopt, TaskKind::IntentDetection};
  EXPECT_THROW(l->train_step({e}), std::invalid_argument);
}

TEST(Learner, NonFiniteLossAborts) {
  const auto b = fixture::make(TaskKind::IntentDetection, 4, {10, 1, 1});
  LearnerConfig cfg;
  cfg.init_scale = std::numeric_limits<double>::infinity();
  auto l = spawn(LabelSpace::from_corpus(b.train), 1, cfg);
  EXPECT_THROW(fit(*l, b.train, 5), LearnerAbort);
}

TEST(Learner, TrainStopsWhenStreamEnds) {
  const auto b = fixture::make(TaskKind::IntentDetection, 4, {4, 1, 1});
  auto l = spawn(LabelSpace::from_corpus(b.train), 1);
  auto r = gcn::train(
      *l,
      [&](int i) -> std::optional<std::vector<LabeledExample>> {
        if (i == 3) return std::nullopt;
        return b.train.examples;
      },
      10);
  EXPECT_EQ(r.iterations_used, 3);
  EXPECT_EQ(r.loss_curve.size(), 3u);
}

TEST(Learner, EvaluationHygiene) {
  const auto b = fixture::make(TaskKind::IntentDetection, 4, {4, 2, 2});
  auto l = spawn(LabelSpace::from_corpus(b.train), 1);
  ASSERT_EQ(b.test.split, SplitTag::Test);
  EXPECT_THROW(l->evaluate(b.test), hygiene::TestSetLeak);
  EXPECT_NO_THROW(l->evaluate(b.test, hygiene::Component::FinalLearnerEvaluation));
  EXPECT_THROW(l->evaluate(Corpus{}), std::invalid_argument);
}
