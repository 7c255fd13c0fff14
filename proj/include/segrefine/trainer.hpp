#ifndef SEGREFINE_TRAINER_HPP
#define SEGREFINE_TRAINER_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "segrefine/bpe.hpp"
#include "segrefine/corpus.hpp"
#include "segrefine/decoder.hpp"
#include "segrefine/evaluator.hpp"
#include "segrefine/labeler.hpp"
#include "segrefine/rng.hpp"
#include "segrefine/tagger.hpp"

namespace segrefine {

// ---------------------------------------------------------------------------
// Gradient post-processing and AdaDelta

/// g <- clamp(g * scale, lo, hi) on every gradient entry.
inline void clip_and_scale(TaggerGradients& grads, double scale, double lo, double hi) {
  if (!(lo < hi)) throw ConfigError("clip range is empty");
  grads.for_each_tensor([&](const char*, auto& t) {
    t = (t.array() * scale).cwiseMax(lo).cwiseMin(hi).matrix();
  });
}

/// Running averages E[g^2] and E[dx^2], zero-initialized.
struct OptimizerState {
  TaggerModel sq_grad;
  TaggerModel sq_delta;

  explicit OptimizerState(const TaggerModel& model) : sq_grad(model.zeros_like()), sq_delta(model.zeros_like()) {}
};

/// Scalar AdaDelta update; returns the parameter delta.
inline double adadelta_update(double& sq_grad, double& sq_delta, double g, double rho, double eps) {
  sq_grad = rho * sq_grad + (1.0 - rho) * g * g;
  const double delta = -std::sqrt(sq_delta + eps) / std::sqrt(sq_grad + eps) * g;
  sq_delta = rho * sq_delta + (1.0 - rho) * delta * delta;
  return delta;
}

/// Updates the state from `grads` and returns the parameter deltas.
inline TaggerModel adadelta_step(OptimizerState& state, const TaggerGradients& grads, double rho, double eps) {
  TaggerModel deltas = grads;
  TaggerModel::zip(
      [&](auto& sq_grad, auto& sq_delta, auto& d) {
        sq_grad.array() = rho * sq_grad.array() + (1.0 - rho) * d.array().square();
        d.array() = -((sq_delta.array() + eps).sqrt() / (sq_grad.array() + eps).sqrt()) * d.array();
        sq_delta.array() = rho * sq_delta.array() + (1.0 - rho) * d.array().square();
      },
      state.sq_grad, state.sq_delta, deltas);
  return deltas;
}

inline void apply_deltas(TaggerModel& model, const TaggerModel& deltas) {
  TaggerModel::zip([](auto& t, const auto& d) { t += d; }, model, deltas);
}

// ---------------------------------------------------------------------------
// Encoding

struct EncodedSequence {
  TaggerInput input;
  std::vector<int> labels;
};

inline TaggerInput encode_input(const SubwordSequence& seq, const Vocabulary& vocab) {
  TaggerInput in;
  in.tokens.reserve(seq.size());
  in.features.reserve(seq.size());
  for (const auto& t : seq.tokens) {
    in.tokens.push_back(vocab.id(t.surface_text()));
    in.features.push_back(t.is_subword ? 1 : 0);
  }
  return in;
}

/// Encoded chunks of at most max_len tokens.
inline std::vector<EncodedSequence> encode_labeled(const LabeledSequence& ls, const Vocabulary& vocab,
                                                   std::size_t max_len) {
  if (ls.labels.size() != ls.tokens.size()) throw LengthMismatch("label count differs from token count");
  const auto in = encode_input(ls.tokens, vocab);
  std::vector<EncodedSequence> out;
  for (std::size_t s = 0; s < in.tokens.size(); s += max_len) {
    const std::size_t e = std::min(in.tokens.size(), s + max_len);
    EncodedSequence es;
    es.input.tokens.assign(in.tokens.begin() + long(s), in.tokens.begin() + long(e));
    es.input.features.assign(in.features.begin() + long(s), in.features.begin() + long(e));
    for (std::size_t i = s; i < e; ++i) es.labels.push_back(static_cast<int>(ls.labels[i]));
    out.push_back(std::move(es));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Inference

/// Per-token argmax; ties go to the earlier label (B < M < E < S < -B < -M < -E).
/// Sequences longer than max_len are tagged in consecutive windows.
inline std::vector<LabelTag> predict_labels(const TaggerModel& model, const Vocabulary& vocab,
                                            const SubwordSequence& seq) {
  const auto in = encode_input(seq, vocab);
  std::vector<LabelTag> out;
  out.reserve(in.tokens.size());
  const std::size_t w = model.config.max_len;
  for (std::size_t s = 0; s < in.tokens.size(); s += w) {
    const std::size_t e = std::min(in.tokens.size(), s + w);
    const Matrix probs = forward(model, {in.tokens.begin() + long(s), in.tokens.begin() + long(e)},
                                 {in.features.begin() + long(s), in.features.begin() + long(e)});
    for (Eigen::Index r = 0; r < probs.rows(); ++r) {
      Eigen::Index best = 0;
      for (Eigen::Index c = 1; c < probs.cols(); ++c) {
        if (probs(r, c) > probs(r, best)) best = c;
      }
      out.push_back(static_cast<LabelTag>(best));
    }
  }
  return out;
}

/// BPE-split an existing segmentation, tag it and decode a new one.
inline SegmentedSentence refine(const TaggerModel& model, const Vocabulary& vocab, SubwordSegmenter& bpe,
                                const SegmentedSentence& input) {
  const auto seq = bpe(input);
  return decode(seq, predict_labels(model, vocab, seq));
}

// ---------------------------------------------------------------------------
// Pretrained vectors

/// Replaces rows of known tokens from a `token v1 .. vd` text file. A
/// leading `count dim` header line is accepted. Returns the matched count.
inline std::size_t load_pretrained_embeddings(const std::string& path, const Vocabulary& vocab, TaggerModel& model) {
  const auto lines = read_lines(path);
  const auto d = model.token_embeddings.cols();
  std::vector<bool> matched(vocab.size(), false);
  std::size_t count = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::istringstream ss(lines[i]);
    std::string token;
    if (!(ss >> token)) continue;
    std::vector<double> values;
    std::string field;
    while (ss >> field) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(field, &used));
        if (used != field.size()) throw std::invalid_argument(field);
      } catch (const std::exception&) {
        throw FormatError(path + ":" + std::to_string(i + 1) + ": bad vector component '" + field + "'");
      }
    }
    if (i == 0 && values.size() == 1 && token.find_first_not_of("0123456789") == std::string::npos) continue;
    if (Eigen::Index(values.size()) != d) {
      throw DimensionMismatch(path + ":" + std::to_string(i + 1) + ": expected " + std::to_string(d) +
                              " components, found " + std::to_string(values.size()));
    }
    const Text tok = with_location(path, i + 1, [&] { return from_utf8(token); });
    if (!vocab.contains(tok)) continue;
    const int id = vocab.id(tok);
    for (Eigen::Index k = 0; k < d; ++k) model.token_embeddings(id, k) = values[std::size_t(k)];
    if (!matched[std::size_t(id)]) {
      matched[std::size_t(id)] = true;
      ++count;
    }
  }
  return count;
}

// ---------------------------------------------------------------------------
// Training

struct EpochLog {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_f = 0.0;
};

struct TrainOptions {
  std::size_t epochs = 15;
  std::uint64_t seed = 1;
  std::function<void(const EpochLog&)> on_epoch;
};

struct TrainResult {
  TaggerModel model;  // epoch-best on validation F
  std::size_t best_epoch = 0;
  std::vector<EpochLog> log;
};

/// Validation F of the model's refinements of `val_inputs` against `val_gold`.
inline double validation_f(const TaggerModel& model, const Vocabulary& vocab, const std::vector<SubwordSequence>& val_inputs,
                           const std::vector<SegmentedSentence>& val_gold) {
  std::vector<SegmentedSentence> pred;
  pred.reserve(val_inputs.size());
  for (const auto& seq : val_inputs) pred.push_back(decode(seq, predict_labels(model, vocab, seq)));
  return evaluate(val_gold, pred, {}).f_score;
}

/// Minibatch training: length-bucketed padded batches, dropout on layer
/// inputs, gradient scale + clip, AdaDelta. With GradNormalization::sum the
/// optimizer sees the gradient of the batch's summed token loss (the mean
/// loss times the token count) before scaling and clipping. Keeps the epoch with the best
/// validation F (the first one on ties), or the last epoch without validation data.
inline TrainResult train(const TaggerConfig& cfg, const Vocabulary& vocab, const std::vector<LabeledSequence>& train_set,
                         const std::vector<SubwordSequence>& val_inputs,
                         const std::vector<SegmentedSentence>& val_gold, const TrainOptions& opts,
                         const TaggerModel* init = nullptr) {
  cfg.validate();
  if (train_set.empty()) throw ConfigError("training set is empty");
  if (cfg.vocab_size != vocab.size()) throw ConfigError("config vocab_size differs from the vocabulary size");
  if (val_inputs.size() != val_gold.size()) throw CorpusMismatch("validation inputs and gold differ in size");

  Rng master(opts.seed);
  const std::uint64_t init_seed = master(), order_seed = master(), dropout_seed = master();
  TaggerModel model = init ? *init : TaggerModel::initialized(cfg, init_seed);
  model.config = cfg;
  OptimizerState state(model);
  Rng order_rng(order_seed), dropout_rng(dropout_seed);

  std::vector<EncodedSequence> data;
  for (const auto& ls : train_set) {
    for (auto& e : encode_labeled(ls, vocab, cfg.max_len)) data.push_back(std::move(e));
  }

  TrainResult result;
  double best_f = -1.0;
  std::vector<std::size_t> order(data.size());
  for (std::size_t epoch = 1; epoch <= opts.epochs; ++epoch) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    shuffle(order, order_rng);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return data[a].labels.size() < data[b].labels.size();
    });
    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t s = 0; s < order.size(); s += cfg.batch) {
      batches.emplace_back(order.begin() + long(s), order.begin() + long(std::min(order.size(), s + cfg.batch)));
    }
    shuffle(batches, order_rng);

    double loss_sum = 0.0;
    std::size_t token_sum = 0;
    for (const auto& batch : batches) {
      std::vector<TaggerInput> inputs;
      std::vector<std::vector<int>> labels;
      for (std::size_t idx : batch) {
        inputs.push_back(data[idx].input);
        labels.push_back(data[idx].labels);
      }
      TaggerPass pass(model, inputs, &dropout_rng);
      loss_sum += pass.loss(labels) * double(pass.n_tokens());
      token_sum += pass.n_tokens();
      auto grads = pass.backward(labels);
      if (cfg.grad_normalization == GradNormalization::sum) {
        TaggerModel::zip([&](auto& t) { t *= double(pass.n_tokens()); }, grads);
      }
      clip_and_scale(grads, cfg.grad_scale, cfg.grad_lo, cfg.grad_hi);
      apply_deltas(model, adadelta_step(state, grads, cfg.rho, cfg.epsilon));
    }

    EpochLog log{epoch, loss_sum / double(std::max<std::size_t>(token_sum, 1)),
                 val_inputs.empty() ? 0.0 : validation_f(model, vocab, val_inputs, val_gold)};
    result.log.push_back(log);
    if (opts.on_epoch) opts.on_epoch(log);
    if (val_inputs.empty() || log.val_f > best_f) {
      best_f = log.val_f;
      result.best_epoch = epoch;
      result.model = model;
    }
  }
  if (opts.epochs == 0) result.model = model;
  return result;
}

}  // namespace segrefine

#endif  // SEGREFINE_TRAINER_HPP
