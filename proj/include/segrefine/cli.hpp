#ifndef SEGREFINE_CLI_HPP
#define SEGREFINE_CLI_HPP

// Command-line driver. Every subcommand reads and writes the plain-text and
// binary formats owned by the library modules. Defaults come from an INI
// config (--config, else $SEGREFINE_CONFIG) and are overridden by flags.

#include <CLI11.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "segrefine/atomizer.hpp"
#include "segrefine/baseline.hpp"
#include "segrefine/bpe.hpp"
#include "segrefine/corpus.hpp"
#include "segrefine/decoder.hpp"
#include "segrefine/evaluator.hpp"
#include "segrefine/labeler.hpp"
#include "segrefine/synth.hpp"
#include "segrefine/tagger.hpp"
#include "segrefine/trainer.hpp"

namespace segrefine::cli {

/// Flat `section.key = value` settings with typed lookups.
class Settings {
 public:
  Settings() = default;

  static Settings load(const std::string& path) {
    Settings s;
    try {
      boost::property_tree::read_ini(path, s.tree_);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw FormatError(path + ":" + std::to_string(e.line()) + ": " + e.message());
    }
    return s;
  }

  template <typename T>
  T get(const std::string& key, T fallback) const {
    if (!tree_.get_child_optional(key)) return fallback;
    try {
      return tree_.get<T>(key);
    } catch (const boost::property_tree::ptree_bad_data&) {
      throw ConfigError("config key '" + key + "' has a malformed value");
    }
  }

 private:
  boost::property_tree::ptree tree_;
};

inline std::vector<double> parse_weights(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string field;
  while (std::getline(ss, field, ',')) {
    try {
      out.push_back(std::stod(field));
    } catch (const std::exception&) {
      throw ConfigError("bad weight list '" + s + "'");
    }
  }
  return out;
}

inline std::string format_weights(const std::vector<double>& w) {
  std::ostringstream out;
  for (std::size_t i = 0; i < w.size(); ++i) out << (i ? "," : "") << w[i];
  return out.str();
}

/// Sentence-level cut: gold pieces from split_long and the baseline cut at
/// the same character offsets.
inline std::vector<std::pair<SegmentedSentence, SegmentedSentence>> split_pair(const SegmentedSentence& gold,
                                                                                const SegmentedSentence& base,
                                                                                std::size_t max_len,
                                                                                const std::u32string& terminators) {
  const auto pieces = split_long(gold, max_len, terminators);
  std::vector<std::pair<SegmentedSentence, SegmentedSentence>> out;
  if (pieces.size() == 1) {
    out.emplace_back(gold, base);
    return out;
  }
  std::vector<std::size_t> cuts;
  std::size_t off = 0;
  for (const auto& p : pieces) {
    off += p.text().size();
    cuts.push_back(off);
  }
  std::vector<std::vector<Text>> base_pieces(pieces.size());
  std::size_t piece = 0, pos = 0;
  for (const auto& w : base.words()) {
    std::size_t i = 0;
    while (i < w.size()) {
      const std::size_t take = std::min(w.size() - i, cuts[piece] - pos);
      base_pieces[piece].push_back(w.substr(i, take));
      i += take;
      pos += take;
      if (pos == cuts[piece] && piece + 1 < pieces.size()) ++piece;
    }
  }
  for (std::size_t k = 0; k < pieces.size(); ++k) out.emplace_back(pieces[k], SegmentedSentence(base_pieces[k]));
  return out;
}

inline Text utf8_chars(const std::string& s) { return from_utf8(s); }

namespace detail {

inline int run_commands(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  // The config path must be known before option defaults are set.
  std::string config_path;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--config" && i + 1 < argc) config_path = argv[i + 1];
    else if (a.rfind("--config=", 0) == 0) config_path = a.substr(9);
  }
  if (config_path.empty()) {
    if (const char* env = std::getenv("SEGREFINE_CONFIG")) config_path = env;
  }
  Settings cfg;
  try {
    if (!config_path.empty()) cfg = Settings::load(config_path);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  CLI::App app{"segrefine: baseline word segmentation refined by a subword tagger"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for all subcommands");
  app.add_option("--config", config_path, "INI config file (default: $SEGREFINE_CONFIG)");

  // Shared settings with config-file defaults.
  std::string atom_delims = cfg.get<std::string>("atomizer.atom_delimiters", "་");
  std::string punct = cfg.get<std::string>("atomizer.punctuation_atoms", "།");
  std::string preseg = cfg.get<std::string>("atomizer.presegment_chars", "།");
  std::size_t max_len = cfg.get<std::size_t>("corpus.max_len", 120);
  std::string terminators = cfg.get<std::string>("corpus.terminators", "/།");
  std::size_t vocab_max = cfg.get<std::size_t>("corpus.vocab_size", 18559);

  auto add_atomizer = [&](CLI::App* sub) {
    sub->add_option("--atom-delimiters", atom_delims, "Characters that end an atom")->capture_default_str();
    sub->add_option("--punctuation", punct, "Characters that form their own atom")->capture_default_str();
    sub->add_option("--presegment", preseg, "Characters after which input is pre-split")->capture_default_str();
  };
  auto atomizer_config = [&] {
    AtomizerConfig a;
    a.atom_delimiters = utf8_chars(atom_delims);
    a.punctuation_atoms = utf8_chars(punct);
    a.presegment_chars = utf8_chars(preseg);
    return a;
  };

  // synth-gen ---------------------------------------------------------------
  auto* synth = app.add_subcommand("synth-gen", "Generate a synthetic segmented corpus");
  SynthSpec spec;
  spec.n_atoms_alphabet = cfg.get("synth.atoms", spec.n_atoms_alphabet);
  spec.vocab_size = cfg.get("synth.vocab_size", spec.vocab_size);
  spec.zipf_exponent = cfg.get("synth.zipf_exponent", spec.zipf_exponent);
  std::string word_len_w = cfg.get<std::string>("synth.word_len_weights", format_weights(spec.word_len_weights));
  std::string sent_len_w = cfg.get<std::string>("synth.sentence_len_weights", format_weights(spec.sentence_len_weights));
  std::size_t synth_n = 0;
  std::string synth_out, synth_baseline_out;
  double p_merge = cfg.get("synth.p_merge", 0.1), p_split = cfg.get("synth.p_split", 0.1);
  std::uint64_t synth_corrupt_seed = 0;
  synth->add_option("--seed", spec.seed, "Generator seed")->required();
  synth->add_option("-n,--sentences", synth_n, "Number of sentences")->required();
  synth->add_option("-o,--out", synth_out, "Output corpus")->required();
  synth->add_option("--atoms", spec.n_atoms_alphabet, "Syllable inventory size")->capture_default_str();
  synth->add_option("--vocab-size", spec.vocab_size, "Distinct words")->capture_default_str();
  synth->add_option("--zipf", spec.zipf_exponent, "Zipf exponent of word frequencies")->capture_default_str();
  synth->add_option("--word-len-weights", word_len_w, "Weights of word lengths 1..4 atoms")->capture_default_str();
  synth->add_option("--sentence-len-weights", sent_len_w, "Weights of sentence lengths 1..N words")->capture_default_str();
  synth->add_option("--baseline-out", synth_baseline_out, "Also write a boundary-corrupted copy");
  synth->add_option("--p-merge", p_merge, "Corruption: boundary deletion rate")->capture_default_str();
  synth->add_option("--p-split", p_split, "Corruption: boundary insertion rate")->capture_default_str();
  synth->add_option("--corrupt-seed", synth_corrupt_seed, "Corruption seed (required with --baseline-out)");
  add_atomizer(synth);

  // train-baseline -----------------------------------------------------------
  auto* trb = app.add_subcommand("train-baseline", "Train the perceptron baseline and its dictionary");
  std::string trb_train, trb_model, trb_dict;
  std::size_t trb_epochs = cfg.get<std::size_t>("baseline.epochs", 10);
  std::uint64_t trb_seed = 0;
  trb->add_option("--train", trb_train, "Gold segmented corpus")->required();
  trb->add_option("--model", trb_model, "Output perceptron model")->required();
  trb->add_option("--dict", trb_dict, "Output dictionary (training words)")->required();
  trb->add_option("--epochs", trb_epochs, "Training epochs")->capture_default_str();
  trb->add_option("--seed", trb_seed, "Shuffle seed")->required();
  add_atomizer(trb);

  // segment-baseline / pipeline share baseline decoding settings.
  std::size_t beam = cfg.get<std::size_t>("baseline.beam", 8);
  double in_dict_cost = cfg.get("baseline.in_dict_cost", 1.0), oov_cost = cfg.get("baseline.oov_cost", 2.0);
  auto add_baseline_decoding = [&](CLI::App* sub) {
    sub->add_option("--beam", beam, "k-best width")->capture_default_str();
    sub->add_option("--in-dict-cost", in_dict_cost, "Lattice cost of dictionary words")->capture_default_str();
    sub->add_option("--oov-cost", oov_cost, "Lattice cost of other words")->capture_default_str();
    add_atomizer(sub);
  };
  auto baseline_config = [&] {
    BaselineConfig b;
    b.atomizer = atomizer_config();
    b.beam = beam;
    b.in_dict_cost = in_dict_cost;
    b.oov_cost = oov_cost;
    return b;
  };

  auto* segb = app.add_subcommand("segment-baseline", "Segment raw text with the baseline");
  std::string segb_model, segb_dict, segb_in, segb_out;
  segb->add_option("--model", segb_model, "Perceptron model")->required();
  segb->add_option("--dict", segb_dict, "Dictionary")->required();
  segb->add_option("-i,--input", segb_in, "Raw text, one sentence per line")->required();
  segb->add_option("-o,--out", segb_out, "Segmented output")->required();
  add_baseline_decoding(segb);

  // learn-bpe / apply-bpe -----------------------------------------------------
  auto* lbpe = app.add_subcommand("learn-bpe", "Learn BPE merges from a segmented corpus");
  std::string lbpe_in, lbpe_out;
  std::size_t n_merges = cfg.get<std::size_t>("bpe.merges", 20000);
  lbpe->add_option("-i,--input", lbpe_in, "Segmented corpus")->required();
  lbpe->add_option("-o,--out", lbpe_out, "Output BPE model")->required();
  lbpe->add_option("--merges", n_merges, "Number of merges")->capture_default_str();

  auto* abpe = app.add_subcommand("apply-bpe", "Split a segmented corpus into subwords");
  std::string abpe_model, abpe_in, abpe_out, abpe_feat;
  abpe->add_option("--bpe", abpe_model, "BPE model")->required();
  abpe->add_option("-i,--input", abpe_in, "Segmented corpus")->required();
  abpe->add_option("-o,--out", abpe_out, "Subword corpus (pieces, @@ continuation)")->required();
  abpe->add_option("--features-out", abpe_feat, "Parallel 1/0 subword-feature file")->required();

  // make-labels ----------------------------------------------------------------
  auto* mkl = app.add_subcommand("make-labels", "Align baseline output with gold into tagger training data");
  std::string mkl_gold, mkl_base, mkl_bpe, mkl_pieces, mkl_feats, mkl_labels;
  mkl->add_option("--gold", mkl_gold, "Gold segmented corpus")->required();
  mkl->add_option("--baseline", mkl_base, "Baseline segmentation of the same text")->required();
  mkl->add_option("--bpe", mkl_bpe, "BPE model")->required();
  mkl->add_option("--out-pieces", mkl_pieces, "Subword corpus")->required();
  mkl->add_option("--out-features", mkl_feats, "Subword feature file")->required();
  mkl->add_option("--out-labels", mkl_labels, "Label file")->required();
  mkl->add_option("--max-len", max_len, "Maximum words per training sentence")->capture_default_str();
  mkl->add_option("--terminators", terminators, "Characters of sentence-splitting words")->capture_default_str();

  // train-refiner ----------------------------------------------------------------
  auto* trr = app.add_subcommand("train-refiner", "Train the subword tagger");
  TaggerConfig tcfg;
  tcfg.n_layers = cfg.get("tagger.layers", tcfg.n_layers);
  tcfg.hidden = cfg.get("tagger.hidden", tcfg.hidden);
  tcfg.token_emb = cfg.get("tagger.token_emb", tcfg.token_emb);
  tcfg.feat_emb = cfg.get("tagger.feat_emb", tcfg.feat_emb);
  tcfg.dropout = cfg.get("tagger.dropout", tcfg.dropout);
  tcfg.batch = cfg.get("tagger.batch", tcfg.batch);
  tcfg.grad_scale = cfg.get("tagger.grad_scale", tcfg.grad_scale);
  tcfg.grad_lo = cfg.get("tagger.grad_clip_lo", tcfg.grad_lo);
  tcfg.grad_hi = cfg.get("tagger.grad_clip_hi", tcfg.grad_hi);
  tcfg.rho = cfg.get("tagger.rho", tcfg.rho);
  tcfg.epsilon = cfg.get("tagger.epsilon", tcfg.epsilon);
  tcfg.xavier_magnitude = cfg.get("tagger.xavier_magnitude", tcfg.xavier_magnitude);
  tcfg.max_len = cfg.get("tagger.max_len", tcfg.max_len);
  std::string grad_norm = cfg.get<std::string>("tagger.grad_normalization", "sum");
  std::size_t trr_epochs = cfg.get<std::size_t>("tagger.epochs", 15);
  std::string trr_pieces, trr_feats, trr_labels, trr_dev_gold, trr_dev_base, trr_bpe, trr_vocab, trr_model, trr_pre,
      trr_log;
  std::uint64_t trr_seed = 0;
  trr->add_option("--pieces", trr_pieces, "Training subword corpus")->required();
  trr->add_option("--features", trr_feats, "Training subword features")->required();
  trr->add_option("--labels", trr_labels, "Training labels")->required();
  trr->add_option("--dev-gold", trr_dev_gold, "Validation gold corpus")->required();
  trr->add_option("--dev-baseline", trr_dev_base, "Validation baseline segmentation")->required();
  trr->add_option("--bpe", trr_bpe, "BPE model")->required();
  trr->add_option("--vocab-out", trr_vocab, "Output tagger vocabulary")->required();
  trr->add_option("--model-out", trr_model, "Output tagger model")->required();
  trr->add_option("--seed", trr_seed, "Training seed")->required();
  trr->add_option("--pretrained", trr_pre, "Pretrained token vectors (token v1 .. vd)");
  trr->add_option("--log", trr_log, "Per-epoch log file");
  trr->add_option("--epochs", trr_epochs, "Epochs")->capture_default_str();
  trr->add_option("--vocab-size", vocab_max, "Maximum tagger vocabulary size incl. UNK")->capture_default_str();
  trr->add_option("--layers", tcfg.n_layers, "Stacked LSTM layers (even)")->capture_default_str();
  trr->add_option("--hidden", tcfg.hidden, "LSTM hidden size")->capture_default_str();
  trr->add_option("--token-emb", tcfg.token_emb, "Token embedding size")->capture_default_str();
  trr->add_option("--feat-emb", tcfg.feat_emb, "Feature embedding size")->capture_default_str();
  trr->add_option("--dropout", tcfg.dropout, "Dropout on LSTM inputs")->capture_default_str();
  trr->add_option("--batch", tcfg.batch, "Batch size")->capture_default_str();
  trr->add_option("--grad-scale", tcfg.grad_scale, "Gradient scale")->capture_default_str();
  trr->add_option("--grad-clip-lo", tcfg.grad_lo, "Gradient clip lower bound")->capture_default_str();
  trr->add_option("--grad-clip-hi", tcfg.grad_hi, "Gradient clip upper bound")->capture_default_str();
  trr->add_option("--rho", tcfg.rho, "AdaDelta decay")->capture_default_str();
  trr->add_option("--epsilon", tcfg.epsilon, "AdaDelta epsilon")->capture_default_str();
  trr->add_option("--xavier-magnitude", tcfg.xavier_magnitude, "Xavier init magnitude")->capture_default_str();
  trr->add_option("--max-len", tcfg.max_len, "Maximum tokens per sequence")->capture_default_str();
  trr->add_option("--grad-normalization", grad_norm, "sum | mean over batch tokens")
      ->check(CLI::IsMember({"sum", "mean"}))
      ->capture_default_str();

  // refine / pipeline -----------------------------------------------------------
  auto* ref = app.add_subcommand("refine", "Refine an existing segmentation");
  std::string ref_model, ref_vocab, ref_bpe, ref_in, ref_out;
  auto add_refiner_files = [&](CLI::App* sub) {
    sub->add_option("--model", ref_model, "Tagger model")->required();
    sub->add_option("--vocab", ref_vocab, "Tagger vocabulary")->required();
    sub->add_option("--bpe", ref_bpe, "BPE model")->required();
  };
  add_refiner_files(ref);
  ref->add_option("-i,--input", ref_in, "Segmented corpus")->required();
  ref->add_option("-o,--out", ref_out, "Refined corpus")->required();

  auto* pipe = app.add_subcommand("pipeline", "Raw text -> baseline -> BPE -> tagger -> decoder");
  std::string pipe_bmodel, pipe_dict;
  pipe->add_option("--baseline-model", pipe_bmodel, "Perceptron model")->required();
  pipe->add_option("--dict", pipe_dict, "Dictionary")->required();
  add_refiner_files(pipe);
  pipe->add_option("-i,--input", ref_in, "Raw text")->required();
  pipe->add_option("-o,--out", ref_out, "Segmented output")->required();
  add_baseline_decoding(pipe);

  // evaluate ----------------------------------------------------------------------
  auto* ev = app.add_subcommand("evaluate", "Score a segmentation against gold");
  std::string ev_gold, ev_pred, ev_vocab;
  bool ev_tsv = false;
  ev->add_option("--gold", ev_gold, "Gold corpus")->required();
  ev->add_option("--pred", ev_pred, "Predicted corpus")->required();
  ev->add_option("--train-vocab", ev_vocab, "Training word list (one word per line)")->required();
  ev->add_flag("--tsv", ev_tsv, "Also print a tab-separated record");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    CLI::App* failing = &app;
    for (auto* sub : app.get_subcommands()) failing = sub;
    err << failing->help();
    return 2;
  }

  try {
    if (*synth) {
      spec.word_len_weights = parse_weights(word_len_w);
      spec.sentence_len_weights = parse_weights(sent_len_w);
      const auto corpus = generate(spec, synth_n);
      write_corpus(synth_out, corpus);
      if (!synth_baseline_out.empty()) {
        if (synth->count("--corrupt-seed") == 0) throw ConfigError("--baseline-out requires --corrupt-seed");
        Rng rng(synth_corrupt_seed);
        const auto acfg = atomizer_config();
        std::vector<SegmentedSentence> noisy;
        noisy.reserve(corpus.size());
        for (const auto& s : corpus) noisy.push_back(corrupt(s, p_merge, p_split, rng, acfg));
        write_corpus(synth_baseline_out, noisy);
      }
    } else if (*trb) {
      const auto gold = read_corpus(trb_train);
      const auto model = train_perceptron(gold, atomizer_config(), trb_epochs, trb_seed);
      model.save(trb_model);
      Dictionary dict;
      for (const auto& w : word_set(gold)) dict.insert(w);
      save_dictionary(trb_dict, dict);
    } else if (*segb) {
      const auto model = PerceptronModel::load(segb_model);
      const auto dict = load_dictionary(segb_dict);
      const auto bcfg = baseline_config();
      const auto lines = read_lines(segb_in);
      std::vector<std::string> outl;
      for (std::size_t i = 0; i < lines.size(); ++i) {
        outl.push_back(with_location(segb_in, i + 1, [&] {
          return serialize(segment_baseline(model, dict, bcfg, from_utf8(lines[i])));
        }));
      }
      write_lines(segb_out, outl);
    } else if (*lbpe) {
      learn_bpe(word_frequencies(read_corpus(lbpe_in)), n_merges).save(lbpe_out);
    } else if (*abpe) {
      SubwordSegmenter seg(BpeModel::load(abpe_model));
      std::vector<SubwordSequence> seqs;
      for (const auto& s : read_corpus(abpe_in)) seqs.push_back(seg(s));
      write_subword_corpus(abpe_out, abpe_feat, seqs);
    } else if (*mkl) {
      const auto gold = read_corpus(mkl_gold);
      const auto base = read_corpus(mkl_base);
      if (gold.size() != base.size()) throw CorpusMismatch(mkl_base + ": sentence count differs from " + mkl_gold);
      SubwordSegmenter seg(BpeModel::load(mkl_bpe));
      const auto term = utf8_chars(terminators);
      std::vector<SubwordSequence> seqs;
      std::vector<std::string> labels;
      for (std::size_t i = 0; i < gold.size(); ++i) {
        with_location(mkl_base, i + 1, [&] {
          if (gold[i].text() != base[i].text()) throw TextMismatch("text differs from the gold sentence");
          for (const auto& [g, b] : split_pair(gold[i], base[i], max_len, term)) {
            auto ls = make_training_pair(g, b, seg);
            labels.push_back(serialize_labels(ls.labels));
            seqs.push_back(std::move(ls.tokens));
          }
          return 0;
        });
      }
      write_subword_corpus(mkl_pieces, mkl_feats, seqs);
      write_lines(mkl_labels, labels);
    } else if (*trr) {
      if (grad_norm == "mean") tcfg.grad_normalization = GradNormalization::mean;
      const auto seqs = read_subword_corpus(trr_pieces, trr_feats);
      const auto labels = read_label_corpus(trr_labels);
      if (seqs.size() != labels.size()) throw CorpusMismatch(trr_labels + ": line count differs from " + trr_pieces);
      std::vector<LabeledSequence> train_set;
      for (std::size_t i = 0; i < seqs.size(); ++i) {
        if (labels[i].size() != seqs[i].size()) {
          throw LengthMismatch(trr_labels + ":" + std::to_string(i + 1) + ": label count differs from token count");
        }
        train_set.push_back({seqs[i], labels[i]});
      }
      const auto vocab = build_vocab(seqs, vocab_max);
      tcfg.vocab_size = vocab.size();
      SubwordSegmenter seg(BpeModel::load(trr_bpe));
      const auto dev_gold = read_corpus(trr_dev_gold);
      std::vector<SubwordSequence> dev_inputs;
      for (const auto& s : read_corpus(trr_dev_base)) dev_inputs.push_back(seg(s));
      std::optional<TaggerModel> init;
      if (!trr_pre.empty()) {
        Rng master(trr_seed);
        init = TaggerModel::initialized(tcfg, master());
        out << "pretrained vectors matched: " << load_pretrained_embeddings(trr_pre, vocab, *init) << "/"
            << vocab.size() << "\n";
      }
      std::ostringstream log;
      TrainOptions opts;
      opts.epochs = trr_epochs;
      opts.seed = trr_seed;
      opts.on_epoch = [&](const EpochLog& l) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "epoch %zu\tloss %.6f\tval_f %.4f\n", l.epoch, l.train_loss, l.val_f);
        out << buf << std::flush;
        log << buf;
      };
      const auto result = train(tcfg, vocab, train_set, dev_inputs, dev_gold, opts, init ? &*init : nullptr);
      out << "best epoch " << result.best_epoch << "\n";
      log << "best epoch " << result.best_epoch << "\n";
      vocab.save(trr_vocab);
      result.model.save(trr_model);
      if (!trr_log.empty()) {
        std::ofstream f(trr_log, std::ios::binary);
        if (!(f << log.str())) throw Error("cannot write " + trr_log);
      }
    } else if (*ref || *pipe) {
      const auto model = TaggerModel::load(ref_model);
      const auto vocab = Vocabulary::load(ref_vocab);
      if (vocab.size() != model.config.vocab_size) throw FormatError(ref_vocab + ": vocabulary size differs from the model");
      SubwordSegmenter seg(BpeModel::load(ref_bpe));
      std::vector<std::string> outl;
      if (*ref) {
        for (const auto& s : read_corpus(ref_in)) outl.push_back(serialize(refine(model, vocab, seg, s)));
      } else {
        const auto bmodel = PerceptronModel::load(pipe_bmodel);
        const auto dict = load_dictionary(pipe_dict);
        const auto bcfg = baseline_config();
        const auto lines = read_lines(ref_in);
        for (std::size_t i = 0; i < lines.size(); ++i) {
          outl.push_back(with_location(ref_in, i + 1, [&] {
            const auto base = segment_baseline(bmodel, dict, bcfg, from_utf8(lines[i]));
            return serialize(refine(model, vocab, seg, base));
          }));
        }
      }
      write_lines(ref_out, outl);
    } else if (*ev) {
      const auto gold = read_corpus(ev_gold);
      const auto pred = read_corpus(ev_pred);
      const auto train_vocab = load_dictionary(ev_vocab);
      const auto m = evaluate(gold, pred, train_vocab);
      out << m.report();
      if (ev_tsv) out << m.record() << "\n";
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace detail

/// Exit codes: 0 success, 1 data or config error, 2 usage error.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  try {
    return detail::run_commands(argc, argv, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace segrefine::cli

#endif  // SEGREFINE_CLI_HPP
