#include <gtest/gtest.h>

#include "segrefine/synth.hpp"
#include "segrefine/trainer.hpp"
#include "test_util.hpp"

using namespace segrefine;
using L = LabelTag;

namespace {

TaggerConfig small_config(std::size_t vocab) {
  TaggerConfig cfg;
  cfg.hidden = 16;
  cfg.token_emb = 8;
  cfg.feat_emb = 8;
  cfg.n_layers = 2;
  cfg.vocab_size = vocab;
  cfg.batch = 8;
  cfg.max_len = 64;
  return cfg;
}

struct ToyData {
  std::vector<LabeledSequence> train;
  std::vector<SubwordSequence> val_inputs;
  std::vector<SegmentedSentence> val_gold;
  Vocabulary vocab;
};

ToyData toy_data(std::size_t n_train, std::size_t n_val, std::uint64_t seed) {
  SynthSpec spec;
  spec.vocab_size = 60;
  spec.seed = seed;
  const auto gold = generate(spec, n_train + n_val);
  SubwordSegmenter seg(learn_bpe(word_frequencies(gold), 30));
  Rng rng(seed + 100);
  ToyData d;
  std::vector<SubwordSequence> train_tokens;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const auto base = corrupt(gold[i], 0.2, 0.2, rng);
    if (i < n_train) {
      d.train.push_back(make_training_pair(gold[i], base, seg));
      train_tokens.push_back(d.train.back().tokens);
    } else {
      d.val_inputs.push_back(seg(base));
      d.val_gold.push_back(gold[i]);
    }
  }
  d.vocab = build_vocab(train_tokens, 1000);
  return d;
}

}  // namespace

TEST(ClipAndScale, ScalesThenClamps) {
  TaggerModel g(small_config(4));
  g.W_out(0, 0) = 5.0;
  g.W_out(1, 0) = 200.0;
  g.W_out(2, 0) = -200.0;
  g.b_out(3) = -4.0;
  clip_and_scale(g, 0.1, -1.0, 1.0);
  EXPECT_DOUBLE_EQ(g.W_out(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(g.W_out(1, 0), 1.0);
  EXPECT_DOUBLE_EQ(g.W_out(2, 0), -1.0);
  EXPECT_DOUBLE_EQ(g.b_out(3), -0.4);
  EXPECT_THROW(clip_and_scale(g, 0.1, 1.0, 1.0), ConfigError);
}

TEST(AdaDelta, FirstStepFromZeroState) {
  double sg = 0.0, sd = 0.0;
  const double d = adadelta_update(sg, sd, 1.0, 0.9, 1e-5);
  EXPECT_NEAR(d, -0.0099995, 1e-7);
  EXPECT_NEAR(sg, 0.1, 1e-15);
  EXPECT_NEAR(sd, 0.1 * d * d, 1e-18);
}

TEST(AdaDelta, ZeroGradientDecaysState) {
  double sg = 0.4, sd = 0.2;
  EXPECT_EQ(adadelta_update(sg, sd, 0.0, 0.9, 1e-5), 0.0);
  EXPECT_NEAR(sg, 0.36, 1e-15);
  EXPECT_NEAR(sd, 0.18, 1e-15);
}

TEST(AdaDelta, StepOpposesGradient) {
  Rng rng(1);
  double sg = 0.0, sd = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double g = uniform(rng, -1.0, 1.0);
    const double d = adadelta_update(sg, sd, g, 0.9, 1e-5);
    if (g != 0.0) {
      EXPECT_LT(d * g, 0.0);
    }
  }
}

TEST(AdaDelta, TensorStepMatchesScalarRule) {
  Rng rng(2);
  auto model = TaggerModel::initialized(small_config(5), 1);
  OptimizerState state(model);
  double sg = 0.0, sd = 0.0;
  for (int step = 0; step < 3; ++step) {
    auto g = model.zeros_like();
    const double v = uniform(rng, -1.0, 1.0);
    g.fwd.Wh(2, 3) = v;
    const auto deltas = adadelta_step(state, g, 0.9, 1e-5);
    EXPECT_DOUBLE_EQ(deltas.fwd.Wh(2, 3), adadelta_update(sg, sd, v, 0.9, 1e-5));
    EXPECT_EQ(deltas.fwd.Wh(0, 0), 0.0);
    const double before = model.fwd.Wh(2, 3);
    apply_deltas(model, deltas);
    EXPECT_DOUBLE_EQ(model.fwd.Wh(2, 3), before + deltas.fwd.Wh(2, 3));
  }
}

TEST(PredictLabels, ZeroModelPicksFirstLabel) {
  const TaggerModel m(small_config(5));
  const auto seq = testutil::pieces({"a", "b", "c", "d"});
  const auto labels = predict_labels(m, Vocabulary{}, seq);
  EXPECT_EQ(labels, (std::vector<L>(4, L::B)));
}

TEST(PredictLabels, LongInputIsWindowed) {
  auto cfg = small_config(5);
  cfg.max_len = 3;
  const auto m = TaggerModel::initialized(cfg, 4);
  std::vector<std::string> ps(10, "a");
  EXPECT_EQ(predict_labels(m, Vocabulary{}, testutil::pieces(ps)).size(), 10u);
  EXPECT_THROW(forward(m, std::vector<int>(4, 0), std::vector<int>(4, 0)), LengthExceeded);
}

TEST(Encode, UsesSurfaceWithMarkerAndFeature) {
  auto seq = testutil::pieces({"ab", "c", "d"});
  seq.tokens[0].continuation = true;
  seq.tokens[0].is_subword = true;
  seq.tokens[1].is_subword = true;
  const Vocabulary vocab({U"ab@@", U"c", U"ab"});
  const auto in = encode_input(seq, vocab);
  EXPECT_EQ(in.tokens, (std::vector<int>{1, 2, Vocabulary::kUnk}));
  EXPECT_EQ(in.features, (std::vector<int>{1, 1, 0}));
}

TEST(Encode, LabeledChunksRespectMaxLen) {
  LabeledSequence ls{testutil::pieces({"a", "b", "c", "d", "e"}), {L::B, L::E, L::S, L::B, L::E}};
  const auto chunks = encode_labeled(ls, Vocabulary{}, 2);
  ASSERT_EQ(chunks.size(), 3u);
  EXPECT_EQ(chunks[0].labels, (std::vector<int>{0, 2}));
  EXPECT_EQ(chunks[2].labels, (std::vector<int>{2}));
  ls.labels.pop_back();
  EXPECT_THROW(encode_labeled(ls, Vocabulary{}, 2), LengthMismatch);
}

TEST(PretrainedEmbeddings, FullPartialAndEmptyFiles) {
  testutil::TempDir dir("emb");
  const Vocabulary vocab({U"ka", U"kha@@"});
  auto cfg = small_config(vocab.size());
  cfg.token_emb = 2;
  cfg.feat_emb = 14;
  TaggerModel m(cfg);

  testutil::spit(dir / "empty.vec", "");
  EXPECT_EQ(load_pretrained_embeddings(dir / "empty.vec", vocab, m), 0u);
  EXPECT_EQ(m.token_embeddings, Matrix::Zero(3, 2));

  testutil::spit(dir / "one.vec", "kha@@ 0.5 -1.5\nzzz 9 9\n");
  EXPECT_EQ(load_pretrained_embeddings(dir / "one.vec", vocab, m), 1u);
  EXPECT_EQ(m.token_embeddings(2, 0), 0.5);
  EXPECT_EQ(m.token_embeddings(2, 1), -1.5);
  EXPECT_EQ(m.token_embeddings(1, 0), 0.0);

  testutil::spit(dir / "full.vec", "2 2\nka 1 2\nkha@@ 3 4\n");
  EXPECT_EQ(load_pretrained_embeddings(dir / "full.vec", vocab, m), 2u);
  EXPECT_EQ(m.token_embeddings.row(1), (Eigen::RowVector2d(1, 2)));
  EXPECT_EQ(m.token_embeddings.row(2), (Eigen::RowVector2d(3, 4)));
}

TEST(PretrainedEmbeddings, DimensionMismatch) {
  testutil::TempDir dir("emb_bad");
  const Vocabulary vocab({U"ka"});
  auto cfg = small_config(vocab.size());
  TaggerModel m(cfg);
  testutil::spit(dir / "bad.vec", "ka 1 2 3\n");
  EXPECT_THROW(load_pretrained_embeddings(dir / "bad.vec", vocab, m), DimensionMismatch);
  testutil::spit(dir / "nan.vec", "ka x\n");
  EXPECT_THROW(load_pretrained_embeddings(dir / "nan.vec", vocab, m), FormatError);
}

TEST(Train, LossFallsOnToyData) {
  const auto d = toy_data(50, 10, 3);
  const auto cfg = small_config(d.vocab.size());
  const auto r = train(cfg, d.vocab, d.train, d.val_inputs, d.val_gold, {4, 7, {}});
  ASSERT_EQ(r.log.size(), 4u);
  EXPECT_LT(r.log[1].train_loss, r.log[0].train_loss);
  EXPECT_LT(r.log[2].train_loss, r.log[1].train_loss);
  EXPECT_GE(r.best_epoch, 1u);
  double best = 0.0;
  for (const auto& e : r.log) best = std::max(best, e.val_f);
  EXPECT_EQ(r.log[r.best_epoch - 1].val_f, best);
  EXPECT_EQ(validation_f(r.model, d.vocab, d.val_inputs, d.val_gold), best);
}

TEST(Train, MemorizesOneSentence) {
  LabeledSequence ls{testutil::pieces({"a", "b", "c", "d", "e", "f"}), {L::B, L::E, L::XB, L::XE, L::S, L::S}};
  const Vocabulary vocab({U"a", U"b", U"c", U"d", U"e", U"f"});
  auto cfg = small_config(vocab.size());
  cfg.dropout = 0.0;
  const auto r = train(cfg, vocab, {ls}, {}, {}, {200, 1, {}});
  EXPECT_EQ(predict_labels(r.model, vocab, ls.tokens), ls.labels);
}

TEST(Train, SameSeedSameModelFile) {
  testutil::TempDir dir("train_det");
  const auto d = toy_data(30, 5, 4);
  const auto cfg = small_config(d.vocab.size());
  train(cfg, d.vocab, d.train, d.val_inputs, d.val_gold, {2, 9, {}}).model.save(dir / "a.stgr");
  train(cfg, d.vocab, d.train, d.val_inputs, d.val_gold, {2, 9, {}}).model.save(dir / "b.stgr");
  train(cfg, d.vocab, d.train, d.val_inputs, d.val_gold, {2, 10, {}}).model.save(dir / "c.stgr");
  EXPECT_EQ(testutil::slurp(dir / "a.stgr"), testutil::slurp(dir / "b.stgr"));
  EXPECT_NE(testutil::slurp(dir / "a.stgr"), testutil::slurp(dir / "c.stgr"));
}

TEST(Train, RejectsInconsistentInputs) {
  const auto d = toy_data(5, 2, 5);
  auto cfg = small_config(d.vocab.size() + 1);
  EXPECT_THROW(train(cfg, d.vocab, d.train, d.val_inputs, d.val_gold, {}), ConfigError);
  cfg.vocab_size = d.vocab.size();
  EXPECT_THROW(train(cfg, d.vocab, {}, d.val_inputs, d.val_gold, {}), ConfigError);
  EXPECT_THROW(train(cfg, d.vocab, d.train, d.val_inputs, {}, {}), CorpusMismatch);
}

TEST(Refine, SplitsLearnedMerge) {
  BpeModel bpe;
  bpe.merges = {{U"a", U"b"}, {U"c", U"d</w>"}};
  SubwordSegmenter seg(bpe);
  const auto pair = make_training_pair(testutil::S("ab cd"), testutil::S("abcd"), seg);
  ASSERT_EQ(serialize_pieces(pair.tokens), "ab@@ cd");
  ASSERT_EQ(pair.labels, (std::vector<L>{L::S, L::S}));
  const Vocabulary vocab({U"ab@@", U"cd"});
  auto cfg = small_config(vocab.size());
  cfg.dropout = 0.0;
  const auto r = train(cfg, vocab, {pair}, {}, {}, {100, 2, {}});
  EXPECT_EQ(refine(r.model, vocab, seg, testutil::S("abcd")), testutil::S("ab cd"));
}
