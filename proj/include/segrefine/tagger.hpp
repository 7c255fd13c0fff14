#ifndef SEGREFINE_TAGGER_HPP
#define SEGREFINE_TAGGER_HPP

// Refiner sequence tagger: token + feature embeddings, a stack of
// alternating-direction LSTM layers with a gated residual path
//
//   i = sig(Wxi x + Whi h')   f = sig(Wxf x + Whf h')   o = sig(Wxo x + Who h')
//   c = f * c' + i * (Wxc x + Whc h')
//   h = o * tanh(c) + (1 - i) * x
//
// (h', c' the previous state in the layer's unroll direction), two parameter
// sets shared by all layers of the same direction, and a softmax output.

#include <Eigen/Dense>

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "segrefine/error.hpp"
#include "segrefine/labeler.hpp"
#include "segrefine/rng.hpp"

namespace segrefine {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Direction { forward, backward };

/// How per-token losses of a batch are combined into the optimized gradient.
enum class GradNormalization : std::uint64_t { sum = 0, mean = 1 };

struct TaggerConfig {
  std::size_t n_layers = 8;
  std::size_t hidden = 512;
  std::size_t token_emb = 256;
  std::size_t feat_emb = 256;
  std::size_t n_labels = kNumLabels;
  std::size_t vocab_size = 18559;  // tagger vocabulary incl. UNK
  double dropout = 0.1;
  std::size_t batch = 150;
  double grad_scale = 0.1;
  double grad_lo = -1.0;
  double grad_hi = 1.0;
  double rho = 0.9;
  double epsilon = 1e-5;
  double xavier_magnitude = 2.34;
  std::size_t max_len = 120;
  GradNormalization grad_normalization = GradNormalization::sum;

  void validate() const {
    if (token_emb + feat_emb != hidden) {
      throw ConfigError("token_emb + feat_emb must equal hidden for the residual path");
    }
    if (n_layers == 0 || n_layers % 2 != 0) throw ConfigError("n_layers must be even and positive");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
    if (n_labels != kNumLabels) throw ConfigError("n_labels must be 7");
    if (vocab_size < 1 || batch < 1 || max_len < 1 || hidden < 1) throw ConfigError("sizes must be positive");
    if (!(grad_lo < grad_hi)) throw ConfigError("gradient clip range is empty");
  }
};


/// Gate weights stacked row-wise in the order i, f, c, o: Wx = [Wxi; Wxf;
/// Wxc; Wxo] and Wh likewise, each block hidden x hidden.
struct LstmParams {
  Matrix Wx;
  Matrix Wh;

  LstmParams() = default;
  explicit LstmParams(std::size_t hidden)
      : Wx(Matrix::Zero(4 * Eigen::Index(hidden), Eigen::Index(hidden))),
        Wh(Matrix::Zero(4 * Eigen::Index(hidden), Eigen::Index(hidden))) {}

  Eigen::Index hidden() const { return Wx.cols(); }

  enum Gate { kInput = 0, kForget = 1, kCell = 2, kOutput = 3 };
  auto Wx_gate(Gate g) { return Wx.middleRows(g * hidden(), hidden()); }
  auto Wh_gate(Gate g) { return Wh.middleRows(g * hidden(), hidden()); }
  auto Wx_gate(Gate g) const { return Wx.middleRows(g * hidden(), hidden()); }
  auto Wh_gate(Gate g) const { return Wh.middleRows(g * hidden(), hidden()); }
};

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// One step of the gated-residual cell for a single sequence.
inline std::pair<Vector, Vector> lstm_step(const LstmParams& p, const Vector& x, const Vector& h_prev,
                                           const Vector& c_prev) {
  const auto H = p.hidden();
  if (x.size() != H || h_prev.size() != H || c_prev.size() != H) throw ShapeMismatch("lstm_step: dimension mismatch");
  const Vector a = p.Wx * x + p.Wh * h_prev;
  const Vector i = a.segment(0, H).unaryExpr(&sigmoid);
  const Vector f = a.segment(H, H).unaryExpr(&sigmoid);
  const Vector g = a.segment(2 * H, H);
  const Vector o = a.segment(3 * H, H).unaryExpr(&sigmoid);
  Vector c = f.cwiseProduct(c_prev) + i.cwiseProduct(g);
  Vector h = o.cwiseProduct(c.array().tanh().matrix()) + (Vector::Ones(H) - i).cwiseProduct(x);
  return {std::move(h), std::move(c)};
}

// ---------------------------------------------------------------------------
// Batched layer. Activations are H x (T*B) with column t*B + b for step t of
// batch item b; masked (padding) columns hold a zero state.

struct LayerCache {
  Matrix X;      // input after dropout
  Matrix gates;  // activated i, f, o; raw candidate g
  Matrix C;
  Matrix Hout;
  Matrix tanhC;
};

namespace detail {
inline std::optional<Eigen::Index> prev_step(Eigen::Index t, Eigen::Index T, Direction d) {
  if (d == Direction::forward) return t > 0 ? std::optional(t - 1) : std::nullopt;
  return t + 1 < T ? std::optional(t + 1) : std::nullopt;
}
inline Eigen::Index step_at(Eigen::Index k, Eigen::Index T, Direction d) {
  return d == Direction::forward ? k : T - 1 - k;
}
}  // namespace detail

/// mask(t, b) is 1 for real tokens, 0 for padding.
inline void layer_forward(const LstmParams& p, Direction dir, const Eigen::MatrixXd& mask, LayerCache& lc) {
  const auto H = p.hidden();
  const auto T = mask.rows(), B = mask.cols();
  if (lc.X.rows() != H || lc.X.cols() != T * B) throw ShapeMismatch("layer input has the wrong shape");
  lc.gates.noalias() = p.Wx * lc.X;
  lc.C.setZero(H, T * B);
  lc.Hout.setZero(H, T * B);
  lc.tanhC.setZero(H, T * B);
  for (Eigen::Index k = 0; k < T; ++k) {
    const auto t = detail::step_at(k, T, dir);
    const auto tp = detail::prev_step(t, T, dir);
    auto G = lc.gates.middleCols(t * B, B);
    if (tp) G.noalias() += p.Wh * lc.Hout.middleCols(*tp * B, B);
    G.topRows(2 * H) = G.topRows(2 * H).unaryExpr(&sigmoid);
    G.bottomRows(H) = G.bottomRows(H).unaryExpr(&sigmoid);
    auto i = G.middleRows(0, H).array();
    auto f = G.middleRows(H, H).array();
    auto g = G.middleRows(2 * H, H).array();
    auto o = G.middleRows(3 * H, H).array();
    auto c = lc.C.middleCols(t * B, B);
    c.array() = i * g;
    if (tp) c.array() += f * lc.C.middleCols(*tp * B, B).array();
    auto tc = lc.tanhC.middleCols(t * B, B);
    tc = c.array().tanh().matrix();
    auto h = lc.Hout.middleCols(t * B, B);
    h.array() = o * tc.array() + (1.0 - i) * lc.X.middleCols(t * B, B).array();
    for (Eigen::Index b = 0; b < B; ++b) {
      if (mask(t, b) == 0.0) {
        c.col(b).setZero();
        h.col(b).setZero();
        tc.col(b).setZero();
      }
    }
  }
}

/// Backpropagates dH (gradient w.r.t. the layer outputs) through time.
/// Accumulates into dWx/dWh and returns the gradient w.r.t. lc.X.
inline Matrix layer_backward(const LstmParams& p, Direction dir, const Eigen::MatrixXd& mask, const LayerCache& lc,
                             const Matrix& dH, Matrix& dWx, Matrix& dWh) {
  const auto H = p.hidden();
  const auto T = mask.rows(), B = mask.cols();
  Matrix dA(4 * H, T * B);
  Matrix dX(H, T * B);
  Matrix Hprev = Matrix::Zero(H, T * B);
  Matrix dh_next = Matrix::Zero(H, B), dc_next = Matrix::Zero(H, B);
  Matrix dh(H, B), dc(H, B);
  for (Eigen::Index k = T - 1; k >= 0; --k) {
    const auto t = detail::step_at(k, T, dir);
    const auto tp = detail::prev_step(t, T, dir);
    dh = dH.middleCols(t * B, B) + dh_next;
    dc = dc_next;
    for (Eigen::Index b = 0; b < B; ++b) {
      if (mask(t, b) == 0.0) {
        dh.col(b).setZero();
        dc.col(b).setZero();
      }
    }
    const auto G = lc.gates.middleCols(t * B, B);
    const auto i = G.middleRows(0, H).array();
    const auto f = G.middleRows(H, H).array();
    const auto g = G.middleRows(2 * H, H).array();
    const auto o = G.middleRows(3 * H, H).array();
    const auto tc = lc.tanhC.middleCols(t * B, B).array();
    const auto x = lc.X.middleCols(t * B, B).array();
    dc.array() += dh.array() * o * (1.0 - tc * tc);
    auto dAt = dA.middleCols(t * B, B);
    dAt.middleRows(0, H).array() = (dc.array() * g - dh.array() * x) * i * (1.0 - i);
    if (tp) {
      const auto cp = lc.C.middleCols(*tp * B, B).array();
      dAt.middleRows(H, H).array() = dc.array() * cp * f * (1.0 - f);
      Hprev.middleCols(t * B, B) = lc.Hout.middleCols(*tp * B, B);
    } else {
      dAt.middleRows(H, H).setZero();
    }
    dAt.middleRows(2 * H, H).array() = dc.array() * i;
    dAt.middleRows(3 * H, H).array() = dh.array() * tc * o * (1.0 - o);
    dX.middleCols(t * B, B).array() = dh.array() * (1.0 - i);
    dc_next.array() = dc.array() * f;
    dh_next.noalias() = p.Wh.transpose() * dAt;
  }
  dWx.noalias() += dA * lc.X.transpose();
  dWh.noalias() += dA * Hprev.transpose();
  dX.noalias() += p.Wx.transpose() * dA;
  return dX;
}

/// Unrolls one layer over a single sequence with a zero initial state.
/// Outputs are in original time order.
inline std::vector<Vector> run_layer(const LstmParams& p, const std::vector<Vector>& inputs, Direction dir) {
  if (inputs.empty()) throw ShapeMismatch("run_layer: empty input");
  const auto H = p.hidden();
  LayerCache lc;
  lc.X.resize(H, Eigen::Index(inputs.size()));
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    if (inputs[t].size() != H) throw ShapeMismatch("run_layer: input dimension differs from hidden");
    lc.X.col(Eigen::Index(t)) = inputs[t];
  }
  const Matrix mask = Matrix::Ones(Eigen::Index(inputs.size()), 1);
  layer_forward(p, dir, mask, lc);
  std::vector<Vector> out;
  out.reserve(inputs.size());
  for (Eigen::Index t = 0; t < lc.Hout.cols(); ++t) out.emplace_back(lc.Hout.col(t));
  return out;
}

// ---------------------------------------------------------------------------
// Model

/// Uniform(-b, b) with b = sqrt(3 * magnitude / fan_in), filled row-major.
inline Matrix xavier_init(Eigen::Index rows, Eigen::Index cols, double fan_in, double magnitude, Rng& rng) {
  if (!(fan_in >= 1.0)) throw ConfigError("xavier_init: fan_in must be >= 1");
  const double bound = std::sqrt(3.0 * magnitude / fan_in);
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = uniform(rng, -bound, bound);
  }
  return m;
}

struct TaggerModel {
  TaggerConfig config;
  Matrix token_embeddings;    // vocab x token_emb
  Matrix feature_embeddings;  // 2 x feat_emb
  LstmParams fwd;             // layers 1, 3, 5, ...
  LstmParams bwd;             // layers 2, 4, 6, ...
  Matrix W_out;               // n_labels x hidden
  Vector b_out;               // n_labels

  TaggerModel() = default;

  /// Zero-initialized model of the configured shapes.
  explicit TaggerModel(const TaggerConfig& cfg) : config(cfg) {
    cfg.validate();
    const auto V = Eigen::Index(cfg.vocab_size), H = Eigen::Index(cfg.hidden);
    token_embeddings = Matrix::Zero(V, Eigen::Index(cfg.token_emb));
    feature_embeddings = Matrix::Zero(2, Eigen::Index(cfg.feat_emb));
    fwd = LstmParams(cfg.hidden);
    bwd = LstmParams(cfg.hidden);
    W_out = Matrix::Zero(Eigen::Index(cfg.n_labels), H);
    b_out = Vector::Zero(Eigen::Index(cfg.n_labels));
  }

  /// Xavier-initialized model; the output bias starts at zero.
  static TaggerModel initialized(const TaggerConfig& cfg, std::uint64_t seed) {
    TaggerModel m(cfg);
    Rng rng(seed);
    const double mag = cfg.xavier_magnitude;
    const auto H = Eigen::Index(cfg.hidden);
    m.token_embeddings = xavier_init(m.token_embeddings.rows(), m.token_embeddings.cols(), double(cfg.token_emb), mag, rng);
    m.feature_embeddings = xavier_init(2, Eigen::Index(cfg.feat_emb), double(cfg.feat_emb), mag, rng);
    for (LstmParams* p : {&m.fwd, &m.bwd}) {
      p->Wx = xavier_init(4 * H, H, double(H), mag, rng);
      p->Wh = xavier_init(4 * H, H, double(H), mag, rng);
    }
    m.W_out = xavier_init(Eigen::Index(cfg.n_labels), H, double(H), mag, rng);
    return m;
  }

  const LstmParams& layer_params(std::size_t layer) const { return layer % 2 == 0 ? fwd : bwd; }
  LstmParams& layer_params(std::size_t layer) { return layer % 2 == 0 ? fwd : bwd; }
  static Direction layer_direction(std::size_t layer) {
    return layer % 2 == 0 ? Direction::forward : Direction::backward;
  }

  /// Visits every trainable tensor in a fixed order.
  template <typename Self, typename F>
  static void visit(Self& self, F&& f) {
    f("token_embeddings", self.token_embeddings);
    f("feature_embeddings", self.feature_embeddings);
    f("fwd.Wx", self.fwd.Wx);
    f("fwd.Wh", self.fwd.Wh);
    f("bwd.Wx", self.bwd.Wx);
    f("bwd.Wh", self.bwd.Wh);
    f("W_out", self.W_out);
    f("b_out", self.b_out);
  }
  template <typename F> void for_each_tensor(F&& f) { visit(*this, std::forward<F>(f)); }

  /// Calls f on corresponding tensors of equally shaped models.
  template <typename F, typename... Models>
  static void zip(F&& f, Models&... ms) {
    f(ms.token_embeddings...);
    f(ms.feature_embeddings...);
    f(ms.fwd.Wx...);
    f(ms.fwd.Wh...);
    f(ms.bwd.Wx...);
    f(ms.bwd.Wh...);
    f(ms.W_out...);
    f(ms.b_out...);
  }
  template <typename F> void for_each_tensor(F&& f) const { visit(*this, std::forward<F>(f)); }

  /// Same shapes, all zeros (used for gradients and optimizer state).
  TaggerModel zeros_like() const {
    TaggerModel z = *this;
    z.for_each_tensor([](const char*, auto& t) { t.setZero(); });
    return z;
  }

  void save(const std::string& path) const;
  static TaggerModel load(const std::string& path);
};

using TaggerGradients = TaggerModel;

// ---------------------------------------------------------------------------
// Forward / backward over a padded batch

struct TaggerInput {
  std::vector<int> tokens;
  std::vector<int> features;  // 0/1
};

class TaggerPass {
 public:
  /// Runs the network on `batch`. With `dropout_rng` set, inverted dropout at
  /// config.dropout is applied to every layer input.
  TaggerPass(const TaggerModel& model, const std::vector<TaggerInput>& batch, Rng* dropout_rng = nullptr)
      : model_(model) {
    const auto& cfg = model.config;
    B_ = Eigen::Index(batch.size());
    T_ = 0;
    for (const auto& s : batch) {
      if (s.tokens.size() != s.features.size()) throw ShapeMismatch("token and feature counts differ");
      if (s.tokens.empty()) throw ShapeMismatch("empty sequence");
      if (s.tokens.size() > cfg.max_len) throw LengthExceeded("sequence longer than max_len");
      T_ = std::max(T_, Eigen::Index(s.tokens.size()));
    }
    const auto H = Eigen::Index(cfg.hidden), E = Eigen::Index(cfg.token_emb), F = Eigen::Index(cfg.feat_emb);
    mask_ = Matrix::Zero(T_, B_);
    tokens_.assign(std::size_t(T_ * B_), -1);
    features_.assign(std::size_t(T_ * B_), 0);
    Matrix X0 = Matrix::Zero(H, T_ * B_);
    for (Eigen::Index b = 0; b < B_; ++b) {
      const auto& s = batch[std::size_t(b)];
      for (Eigen::Index t = 0; t < Eigen::Index(s.tokens.size()); ++t) {
        const int tok = s.tokens[std::size_t(t)], feat = s.features[std::size_t(t)];
        if (tok < 0 || tok >= model.token_embeddings.rows()) throw ShapeMismatch("token id out of range");
        if (feat != 0 && feat != 1) throw ShapeMismatch("feature id must be 0 or 1");
        mask_(t, b) = 1.0;
        const auto col = t * B_ + b;
        tokens_[std::size_t(col)] = tok;
        features_[std::size_t(col)] = feat;
        X0.col(col).head(E) = model.token_embeddings.row(tok).transpose();
        X0.col(col).tail(F) = model.feature_embeddings.row(feat).transpose();
      }
      n_tokens_ += s.tokens.size();
    }

    layers_.resize(cfg.n_layers);
    dropout_.resize(cfg.n_layers);
    const Matrix* input = &X0;
    for (std::size_t k = 0; k < cfg.n_layers; ++k) {
      auto& lc = layers_[k];
      lc.X = *input;
      if (dropout_rng && cfg.dropout > 0.0) {
        const double keep = 1.0 - cfg.dropout;
        Matrix& m = dropout_[k];
        m.resize(H, T_ * B_);
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
          for (Eigen::Index r = 0; r < H; ++r) m(r, c) = bernoulli(*dropout_rng, keep) ? 1.0 / keep : 0.0;
        }
        lc.X.array() *= m.array();
      }
      layer_forward(model.layer_params(k), TaggerModel::layer_direction(k), mask_, lc);
      input = &lc.Hout;
    }

    logits_ = model.W_out * layers_.back().Hout;
    logits_.colwise() += model.b_out;
    probs_.resize(logits_.rows(), logits_.cols());
    for (Eigen::Index c = 0; c < logits_.cols(); ++c) {
      const double mx = logits_.col(c).maxCoeff();
      probs_.col(c) = (logits_.col(c).array() - mx).exp().matrix();
      probs_.col(c) /= probs_.col(c).sum();
    }
  }

  Eigen::Index max_len() const { return T_; }
  Eigen::Index batch_size() const { return B_; }
  std::size_t n_tokens() const { return n_tokens_; }
  const std::vector<LayerCache>& layers() const { return layers_; }

  /// Label probabilities of batch item b, one row per real token.
  Matrix probabilities(Eigen::Index b) const {
    const auto len = Eigen::Index(mask_.col(b).sum());
    Matrix out(len, probs_.rows());
    for (Eigen::Index t = 0; t < len; ++t) out.row(t) = probs_.col(t * B_ + b).transpose();
    return out;
  }

  /// Mean negative log-likelihood over all real tokens.
  double loss(const std::vector<std::vector<int>>& labels) const {
    check_labels(labels);
    double total = 0.0;
    for (Eigen::Index b = 0; b < B_; ++b) {
      for (std::size_t t = 0; t < labels[std::size_t(b)].size(); ++t) {
        const auto col = Eigen::Index(t) * B_ + b;
        const double mx = logits_.col(col).maxCoeff();
        const double lse = mx + std::log((logits_.col(col).array() - mx).exp().sum());
        total += lse - logits_(labels[std::size_t(b)][t], col);
      }
    }
    return total / double(n_tokens_);
  }

  /// Exact gradient of loss(labels) with respect to every tensor.
  TaggerGradients backward(const std::vector<std::vector<int>>& labels) const {
    check_labels(labels);
    const auto& cfg = model_.config;
    TaggerGradients grads = model_.zeros_like();
    Matrix dlogits = Matrix::Zero(probs_.rows(), probs_.cols());
    for (Eigen::Index b = 0; b < B_; ++b) {
      for (std::size_t t = 0; t < labels[std::size_t(b)].size(); ++t) {
        const auto col = Eigen::Index(t) * B_ + b;
        dlogits.col(col) = probs_.col(col);
        dlogits(labels[std::size_t(b)][t], col) -= 1.0;
      }
    }
    dlogits /= double(n_tokens_);
    grads.W_out.noalias() = dlogits * layers_.back().Hout.transpose();
    grads.b_out = dlogits.rowwise().sum();
    Matrix dH = model_.W_out.transpose() * dlogits;
    for (std::size_t k = cfg.n_layers; k-- > 0;) {
      auto& g = grads.layer_params(k);
      Matrix dX = layer_backward(model_.layer_params(k), TaggerModel::layer_direction(k), mask_, layers_[k], dH,
                                 g.Wx, g.Wh);
      if (dropout_[k].size()) dX.array() *= dropout_[k].array();
      dH = std::move(dX);
    }
    const auto E = Eigen::Index(cfg.token_emb), F = Eigen::Index(cfg.feat_emb);
    for (Eigen::Index col = 0; col < T_ * B_; ++col) {
      const int tok = tokens_[std::size_t(col)];
      if (tok < 0) continue;
      grads.token_embeddings.row(tok) += dH.col(col).head(E).transpose();
      grads.feature_embeddings.row(features_[std::size_t(col)]) += dH.col(col).tail(F).transpose();
    }
    return grads;
  }

 private:
  void check_labels(const std::vector<std::vector<int>>& labels) const {
    if (Eigen::Index(labels.size()) != B_) throw ShapeMismatch("label batch size differs from input batch size");
    for (Eigen::Index b = 0; b < B_; ++b) {
      const auto& l = labels[std::size_t(b)];
      if (Eigen::Index(l.size()) != Eigen::Index(mask_.col(b).sum())) throw ShapeMismatch("label count differs from token count");
      for (int y : l) {
        if (y < 0 || y >= Eigen::Index(model_.config.n_labels)) throw ShapeMismatch("label id out of range");
      }
    }
  }

  const TaggerModel& model_;
  Eigen::Index T_ = 0, B_ = 0;
  std::size_t n_tokens_ = 0;
  Matrix mask_;
  std::vector<int> tokens_, features_;
  std::vector<LayerCache> layers_;
  std::vector<Matrix> dropout_;
  Matrix logits_, probs_;
};

/// Label probabilities (len x 7) for one sequence, no dropout.
inline Matrix forward(const TaggerModel& model, const std::vector<int>& token_ids, const std::vector<int>& feat_ids) {
  if (token_ids.size() != feat_ids.size()) throw ShapeMismatch("token and feature counts differ");
  TaggerPass pass(model, {TaggerInput{token_ids, feat_ids}});
  return pass.probabilities(0);
}

/// Mean over tokens of -log p(gold); rows of `probs` are per-token distributions.
inline double loss(const Matrix& probs, const std::vector<int>& labels) {
  if (Eigen::Index(labels.size()) != probs.rows()) throw ShapeMismatch("label count differs from row count");
  double total = 0.0;
  for (std::size_t t = 0; t < labels.size(); ++t) total -= std::log(probs(Eigen::Index(t), labels[t]));
  return labels.empty() ? 0.0 : total / double(labels.size());
}

// ---------------------------------------------------------------------------
// Serialization: "STGR", u32 version, config block, u32 tensor count, then
// per tensor: u32 name length, name, u32 rank, u64 dims, row-major f64 data.
// All integers and floats little-endian.

namespace detail {
static_assert(std::endian::native == std::endian::little, "model I/O assumes a little-endian host");

inline constexpr std::uint32_t kTaggerFormatVersion = 1;

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
template <typename T>
T get(std::istream& in, const std::string& path) {
  T v;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw FormatError(path + ": truncated model file");
  return v;
}

using TensorMap = Eigen::Map<Matrix, 0, Eigen::OuterStride<>>;

inline TensorMap whole(Matrix& m) { return TensorMap(m.data(), m.rows(), m.cols(), Eigen::OuterStride<>(m.rows())); }
inline TensorMap whole(Vector& v) { return TensorMap(v.data(), v.size(), 1, Eigen::OuterStride<>(v.size())); }
}  // namespace detail

inline void TaggerModel::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError(path + ": cannot write file");
  out.write("STGR", 4);
  detail::put<std::uint32_t>(out, detail::kTaggerFormatVersion);
  const auto& c = config;
  for (std::size_t v : {c.n_layers, c.hidden, c.token_emb, c.feat_emb, c.n_labels, c.vocab_size, c.batch, c.max_len}) {
    detail::put<std::uint64_t>(out, v);
  }
  detail::put<std::uint64_t>(out, static_cast<std::uint64_t>(c.grad_normalization));
  for (double v : {c.dropout, c.grad_scale, c.grad_lo, c.grad_hi, c.rho, c.epsilon, c.xavier_magnitude}) {
    detail::put<double>(out, v);
  }
  std::vector<std::pair<std::string, Matrix>> tensors;
  tensors.emplace_back("token_embeddings", token_embeddings);
  tensors.emplace_back("feature_embeddings", feature_embeddings);
  static constexpr const char* kGateNames[] = {"i", "f", "c", "o"};
  for (const auto& [prefix, p] : {std::pair<std::string, const LstmParams*>{"fwd", &fwd}, {"bwd", &bwd}}) {
    for (int g = 0; g < 4; ++g) {
      tensors.emplace_back(prefix + ".W_x" + kGateNames[g], p->Wx_gate(LstmParams::Gate(g)));
      tensors.emplace_back(prefix + ".W_h" + kGateNames[g], p->Wh_gate(LstmParams::Gate(g)));
    }
  }
  tensors.emplace_back("W_out", W_out);
  tensors.emplace_back("b_out", Matrix(b_out));
  detail::put<std::uint32_t>(out, std::uint32_t(tensors.size()));
  for (const auto& [name, m] : tensors) {
    detail::put<std::uint32_t>(out, std::uint32_t(name.size()));
    out.write(name.data(), std::streamsize(name.size()));
    const bool vec = name == "b_out";
    detail::put<std::uint32_t>(out, vec ? 1u : 2u);
    detail::put<std::uint64_t>(out, std::uint64_t(m.rows()));
    if (!vec) detail::put<std::uint64_t>(out, std::uint64_t(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index col = 0; col < m.cols(); ++col) detail::put<double>(out, m(r, col));
    }
  }
  if (!out) throw FormatError(path + ": write failed");
}

inline TaggerModel TaggerModel::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path + ": cannot open file");
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "STGR", 4) != 0) throw FormatError(path + ": not a tagger model (bad magic)");
  const auto version = detail::get<std::uint32_t>(in, path);
  if (version != detail::kTaggerFormatVersion) throw FormatError(path + ": unsupported model version " + std::to_string(version));
  TaggerConfig c;
  for (std::size_t* v : {&c.n_layers, &c.hidden, &c.token_emb, &c.feat_emb, &c.n_labels, &c.vocab_size, &c.batch, &c.max_len}) {
    *v = std::size_t(detail::get<std::uint64_t>(in, path));
  }
  const auto norm = detail::get<std::uint64_t>(in, path);
  if (norm > 1) throw FormatError(path + ": bad gradient normalization flag");
  c.grad_normalization = static_cast<GradNormalization>(norm);
  for (double* v : {&c.dropout, &c.grad_scale, &c.grad_lo, &c.grad_hi, &c.rho, &c.epsilon, &c.xavier_magnitude}) {
    *v = detail::get<double>(in, path);
  }
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw FormatError(path + ": " + e.what());
  }
  TaggerModel m(c);
  const auto count = detail::get<std::uint32_t>(in, path);
  std::set<std::string> seen;
  for (std::uint32_t k = 0; k < count; ++k) {
    const auto len = detail::get<std::uint32_t>(in, path);
    if (len > 256) throw FormatError(path + ": tensor name too long");
    std::string name(len, '\0');
    if (!in.read(name.data(), len)) throw FormatError(path + ": truncated model file");
    const auto rank = detail::get<std::uint32_t>(in, path);
    if (rank != 1 && rank != 2) throw FormatError(path + ": tensor '" + name + "' has bad rank");
    const auto rows = Eigen::Index(detail::get<std::uint64_t>(in, path));
    const auto cols = rank == 2 ? Eigen::Index(detail::get<std::uint64_t>(in, path)) : Eigen::Index(1);

    std::optional<detail::TensorMap> dst;
    const auto H = Eigen::Index(c.hidden);
    const auto gate = name.size() == 8 ? std::string("ifco").find(name[7]) : std::string::npos;
    if (name == "token_embeddings") {
      dst = detail::whole(m.token_embeddings);
    } else if (name == "feature_embeddings") {
      dst = detail::whole(m.feature_embeddings);
    } else if (name == "W_out") {
      dst = detail::whole(m.W_out);
    } else if (name == "b_out") {
      dst = detail::whole(m.b_out);
    } else if ((name.starts_with("fwd.W_") || name.starts_with("bwd.W_")) && gate != std::string::npos &&
               (name[6] == 'x' || name[6] == 'h')) {
      LstmParams& p = name[0] == 'f' ? m.fwd : m.bwd;
      Matrix& W = name[6] == 'x' ? p.Wx : p.Wh;
      dst.emplace(W.data() + Eigen::Index(gate) * H, H, H, Eigen::OuterStride<>(W.rows()));
    } else {
      throw FormatError(path + ": unknown tensor '" + name + "'");
    }
    if (rows != dst->rows() || cols != dst->cols()) {
      throw FormatError(path + ": tensor '" + name + "' has the wrong shape");
    }
    Matrix v(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index col = 0; col < cols; ++col) v(r, col) = detail::get<double>(in, path);
    }
    *dst = v;
    if (!seen.insert(name).second) throw FormatError(path + ": duplicate tensor '" + name + "'");
  }
  if (seen.size() != 20) throw FormatError(path + ": expected 20 tensors, found " + std::to_string(seen.size()));
  return m;
}

}  // namespace segrefine

#endif  // SEGREFINE_TAGGER_HPP
