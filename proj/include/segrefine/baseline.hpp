#ifndef SEGREFINE_BASELINE_HPP
#define SEGREFINE_BASELINE_HPP

// Discriminative baseline segmenter: averaged structured perceptron over
// b/m/e/s atom tags, k-best viterbi, a word lattice built from the k-best
// list and dictionary-weighted shortest-path re-ranking.

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "segrefine/atomizer.hpp"
#include "segrefine/corpus.hpp"
#include "segrefine/error.hpp"
#include "segrefine/rng.hpp"
#include "segrefine/text.hpp"

namespace segrefine {

/// Atom position tag. Enumerator order is the tie-break order b < e < m < s.
enum class AtomTag : std::uint8_t { b = 0, e = 1, m = 2, s = 3 };
inline constexpr std::size_t kNumAtomTags = 4;
inline constexpr std::array<AtomTag, 4> kAtomTags = {AtomTag::b, AtomTag::e, AtomTag::m, AtomTag::s};

inline char atom_tag_char(AtomTag t) { return "bems"[static_cast<int>(t)]; }

inline std::optional<AtomTag> parse_atom_tag(std::string_view s) {
  if (s.size() != 1) return std::nullopt;
  switch (s[0]) {
    case 'b': return AtomTag::b;
    case 'e': return AtomTag::e;
    case 'm': return AtomTag::m;
    case 's': return AtomTag::s;
    default: return std::nullopt;
  }
}

inline bool can_start(AtomTag t) { return t == AtomTag::b || t == AtomTag::s; }
inline bool can_end(AtomTag t) { return t == AtomTag::e || t == AtomTag::s; }
inline bool can_follow(AtomTag prev, AtomTag next) {
  const bool open = prev == AtomTag::b || prev == AtomTag::m;
  return open ? (next == AtomTag::m || next == AtomTag::e) : (next == AtomTag::b || next == AtomTag::s);
}

using TagSequence = std::vector<AtomTag>;

inline bool is_valid_tag_sequence(const TagSequence& tags) {
  if (tags.empty() || !can_start(tags.front()) || !can_end(tags.back())) return false;
  for (std::size_t i = 1; i < tags.size(); ++i) {
    if (!can_follow(tags[i - 1], tags[i])) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Features

namespace detail {
inline const std::string kBos = "<BOS>";
inline const std::string kEos = "<EOS>";
inline const std::string kStartTag = "<S>";

inline std::string atom_at(const std::vector<std::string>& atoms, long pos) {
  if (pos < 0) return kBos;
  if (pos >= static_cast<long>(atoms.size())) return kEos;
  return atoms[static_cast<std::size_t>(pos)];
}

inline std::vector<std::string> atom_strings(const std::vector<Atom>& atoms) {
  std::vector<std::string> out;
  out.reserve(atoms.size());
  for (const auto& a : atoms) out.push_back(to_utf8(a.text));
  return out;
}
}  // namespace detail

/// Label-independent window features of one position.
inline std::vector<std::string> context_features(const std::vector<std::string>& atoms, std::size_t pos) {
  const long p = static_cast<long>(pos);
  using detail::atom_at;
  return {
      "U[-2]=" + atom_at(atoms, p - 2),
      "U[-1]=" + atom_at(atoms, p - 1),
      "U[0]=" + atom_at(atoms, p),
      "U[+1]=" + atom_at(atoms, p + 1),
      "U[+2]=" + atom_at(atoms, p + 2),
      "B[-1,0]=" + atom_at(atoms, p - 1) + " " + atom_at(atoms, p),
      "B[0,+1]=" + atom_at(atoms, p) + " " + atom_at(atoms, p + 1),
  };
}

inline std::string prev_feature(std::optional<AtomTag> prev) {
  return "PREV=" + (prev ? std::string(1, atom_tag_char(*prev)) : detail::kStartTag);
}

/// Window unigrams -2..+2, bigrams (-1,0) and (0,+1), and the previous tag
/// (`std::nullopt` at sentence start).
inline std::vector<std::string> extract_features(const std::vector<Atom>& atoms, std::size_t pos,
                                                 std::optional<AtomTag> prev) {
  auto keys = context_features(detail::atom_strings(atoms), pos);
  keys.push_back(prev_feature(prev));
  return keys;
}

// ---------------------------------------------------------------------------
// Model

using TagWeights = std::array<double, kNumAtomTags>;
using WeightTable = std::unordered_map<std::string, TagWeights>;

struct PerceptronModel {
  WeightTable weights;
  WeightTable averaged_weights;
  bool averaged = false;
  int window = 2;

  /// Averaged weights once training finished, raw weights otherwise.
  const WeightTable& decoding_weights() const { return averaged ? averaged_weights : weights; }

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError(path + ": cannot write file");
    out << "PERCEPTRON v1\n";
    std::map<std::string, TagWeights> sorted(decoding_weights().begin(), decoding_weights().end());
    char buf[64];
    for (const auto& [key, w] : sorted) {
      for (AtomTag t : kAtomTags) {
        const double v = w[static_cast<int>(t)];
        if (v == 0.0) continue;
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << key << '\t' << atom_tag_char(t) << '\t' << buf << '\n';
      }
    }
  }

  static PerceptronModel load(const std::string& path) {
    const auto lines = read_lines(path);
    if (lines.empty() || lines[0] != "PERCEPTRON v1") {
      throw FormatError(path + ":1: expected header 'PERCEPTRON v1'");
    }
    PerceptronModel m;
    for (std::size_t i = 1; i < lines.size(); ++i) {
      const auto& l = lines[i];
      if (l.empty()) continue;
      const auto t2 = l.rfind('\t');
      const auto t1 = t2 == std::string::npos ? t2 : l.rfind('\t', t2 - 1);
      const auto where = path + ":" + std::to_string(i + 1) + ": ";
      if (t1 == std::string::npos) throw FormatError(where + "expected key<TAB>label<TAB>weight");
      const auto tag = parse_atom_tag(std::string_view(l).substr(t1 + 1, t2 - t1 - 1));
      if (!tag) throw FormatError(where + "bad label");
      double v;
      try {
        std::size_t used = 0;
        v = std::stod(l.substr(t2 + 1), &used);
        if (used != l.size() - t2 - 1) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw FormatError(where + "bad weight");
      }
      m.averaged_weights[l.substr(0, t1)][static_cast<int>(*tag)] = v;
    }
    m.weights = m.averaged_weights;
    m.averaged = true;
    return m;
  }
};

/// Per-position label-independent scores plus PREV-feature weights, so the
/// local score of (pos, prev, tag) is static[pos][tag] + prev[prev][tag].
class LocalScorer {
 public:
  LocalScorer(const WeightTable& w, const std::vector<Atom>& atoms) {
    const auto strs = detail::atom_strings(atoms);
    static_.resize(atoms.size(), TagWeights{});
    for (std::size_t pos = 0; pos < atoms.size(); ++pos) {
      for (const auto& key : context_features(strs, pos)) add(w, key, static_[pos]);
    }
    start_ = TagWeights{};
    add(w, prev_feature(std::nullopt), start_);
    for (AtomTag p : kAtomTags) {
      prev_[static_cast<int>(p)] = TagWeights{};
      add(w, prev_feature(p), prev_[static_cast<int>(p)]);
    }
  }

  double operator()(std::size_t pos, std::optional<AtomTag> prev, AtomTag tag) const {
    const auto& pw = prev ? prev_[static_cast<int>(*prev)] : start_;
    return static_[pos][static_cast<int>(tag)] + pw[static_cast<int>(tag)];
  }

 private:
  static void add(const WeightTable& w, const std::string& key, TagWeights& acc) {
    auto it = w.find(key);
    if (it == w.end()) return;
    for (std::size_t i = 0; i < kNumAtomTags; ++i) acc[i] += it->second[i];
  }

  std::vector<TagWeights> static_;
  TagWeights start_{};
  std::array<TagWeights, kNumAtomTags> prev_{};
};

struct ScoredTags {
  TagSequence tags;
  double score = 0.0;
};

namespace detail {
inline bool better(const ScoredTags& a, const ScoredTags& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.tags < b.tags;
}
}  // namespace detail

/// Exact k-best first-order viterbi over valid b/m/e/s sequences, best first.
/// Each tag state keeps its own k best prefixes; ranking is (score desc,
/// tag sequence lexicographically asc), which extension preserves.
inline std::vector<ScoredTags> viterbi_beam(const WeightTable& weights, const std::vector<Atom>& atoms,
                                            std::size_t beam) {
  if (beam < 1) throw ConfigError("beam must be >= 1");
  if (atoms.empty()) throw BeamEmpty("no atoms to tag");
  const LocalScorer local(weights, atoms);
  std::array<std::vector<ScoredTags>, kNumAtomTags> lists;
  for (AtomTag t : kAtomTags) {
    if (can_start(t)) lists[static_cast<int>(t)].push_back({{t}, local(0, std::nullopt, t)});
  }
  for (std::size_t pos = 1; pos < atoms.size(); ++pos) {
    std::array<std::vector<ScoredTags>, kNumAtomTags> next;
    for (AtomTag t : kAtomTags) {
      auto& cands = next[static_cast<int>(t)];
      for (AtomTag p : kAtomTags) {
        if (!can_follow(p, t)) continue;
        for (const auto& h : lists[static_cast<int>(p)]) {
          cands.push_back({h.tags, h.score + local(pos, p, t)});
        }
      }
      std::sort(cands.begin(), cands.end(), detail::better);
      if (cands.size() > beam) cands.resize(beam);
      for (auto& c : cands) c.tags.push_back(t);
    }
    lists = std::move(next);
  }
  std::vector<ScoredTags> out;
  for (AtomTag t : kAtomTags) {
    if (!can_end(t)) continue;
    for (auto& h : lists[static_cast<int>(t)]) out.push_back(std::move(h));
  }
  if (out.empty()) throw BeamEmpty("no valid tag sequence");
  std::sort(out.begin(), out.end(), detail::better);
  if (out.size() > beam) out.resize(beam);
  return out;
}

inline std::vector<ScoredTags> viterbi_beam(const PerceptronModel& model, const std::vector<Atom>& atoms,
                                            std::size_t beam) {
  return viterbi_beam(model.decoding_weights(), atoms, beam);
}

// ---------------------------------------------------------------------------
// Tag/word conversions

/// Atom-index word spans [i, j) encoded by a valid tag sequence.
inline std::vector<std::pair<std::size_t, std::size_t>> tag_spans(const TagSequence& tags) {
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  std::size_t start = 0;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    if (can_end(tags[i])) {
      spans.emplace_back(start, i + 1);
      start = i + 1;
    }
  }
  if (start < tags.size()) spans.emplace_back(start, tags.size());
  return spans;
}

inline Text join_atoms(const std::vector<Atom>& atoms, std::size_t i, std::size_t j) {
  Text t;
  for (std::size_t k = i; k < j; ++k) t += atoms[k].text;
  return t;
}

/// Gold tags for a sentence whose word boundaries all fall on atom edges.
inline TagSequence gold_tags(const SegmentedSentence& s, const std::vector<Atom>& atoms) {
  const auto bounds = s.boundaries();
  TagSequence tags;
  tags.reserve(atoms.size());
  std::size_t w = 0;
  for (const auto& a : atoms) {
    if (a.start >= bounds[w + 1]) throw AtomMisalignment("word boundary falls inside an atom");
    const bool first = a.start == bounds[w];
    if (a.end > bounds[w + 1]) throw AtomMisalignment("word boundary falls inside an atom");
    const bool last = a.end == bounds[w + 1];
    if (first && last) tags.push_back(AtomTag::s);
    else if (first) tags.push_back(AtomTag::b);
    else if (last) tags.push_back(AtomTag::e);
    else tags.push_back(AtomTag::m);
    if (last) ++w;
  }
  return tags;
}

// ---------------------------------------------------------------------------
// Training

struct PerceptronTrainStats {
  std::vector<double> epoch_accuracy;  // tag accuracy of the raw model while training
};

/// Structured averaged perceptron with full-sequence updates. Sentence order
/// is reshuffled every epoch from `seed`.
inline PerceptronModel train_perceptron(const std::vector<SegmentedSentence>& gold, const AtomizerConfig& cfg,
                                        std::size_t epochs, std::uint64_t seed,
                                        PerceptronTrainStats* stats = nullptr) {
  struct Instance {
    std::vector<Atom> atoms;
    TagSequence tags;
  };
  std::vector<Instance> data;
  data.reserve(gold.size());
  for (const auto& s : gold) {
    auto atoms = atomize(s.text(), cfg);
    auto tags = gold_tags(s, atoms);
    data.push_back({std::move(atoms), std::move(tags)});
  }

  PerceptronModel model;
  WeightTable accum;  // sum of c * delta for lazy averaging
  double c = 1.0;
  auto update = [&](const std::string& key, AtomTag t, double delta) {
    model.weights[key][static_cast<int>(t)] += delta;
    accum[key][static_cast<int>(t)] += c * delta;
  };
  auto apply = [&](const Instance& inst, const TagSequence& tags, double delta) {
    const auto strs = detail::atom_strings(inst.atoms);
    for (std::size_t pos = 0; pos < tags.size(); ++pos) {
      for (const auto& k : context_features(strs, pos)) update(k, tags[pos], delta);
      update(prev_feature(pos ? std::optional(tags[pos - 1]) : std::nullopt), tags[pos], delta);
    }
  };

  Rng rng(seed);
  std::vector<std::size_t> order(data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    shuffle(order, rng);
    std::size_t correct = 0, total = 0;
    for (std::size_t idx : order) {
      const auto& inst = data[idx];
      const auto pred = viterbi_beam(model.weights, inst.atoms, 1).front().tags;
      for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == inst.tags[i];
      total += pred.size();
      if (pred != inst.tags) {
        apply(inst, inst.tags, 1.0);
        apply(inst, pred, -1.0);
      }
      c += 1.0;
    }
    if (stats) stats->epoch_accuracy.push_back(total ? double(correct) / double(total) : 1.0);
  }

  for (const auto& [key, w] : model.weights) {
    const auto& a = accum[key];
    TagWeights avg;
    bool nonzero = false;
    for (std::size_t i = 0; i < kNumAtomTags; ++i) {
      avg[i] = w[i] - a[i] / c;
      nonzero |= avg[i] != 0.0;
    }
    if (nonzero) model.averaged_weights.emplace(key, avg);
  }
  model.averaged = true;
  return model;
}

// ---------------------------------------------------------------------------
// Lattice and re-ranking

struct LatticeEdge {
  std::size_t from = 0;
  std::size_t to = 0;
  Text word;
  double cost = 0.0;
};

struct WordLattice {
  std::size_t n_atoms = 0;
  std::vector<LatticeEdge> edges;  // sorted by (from, to)
};

using Dictionary = std::unordered_set<Text>;

/// Union of the word spans of every k-best segmentation.
inline WordLattice build_lattice(const std::vector<TagSequence>& kbest, const std::vector<Atom>& atoms) {
  std::map<std::pair<std::size_t, std::size_t>, Text> spans;
  for (const auto& tags : kbest) {
    if (tags.size() != atoms.size()) throw LengthMismatch("tag sequence length differs from atom count");
    for (const auto& [i, j] : tag_spans(tags)) {
      if (!spans.count({i, j})) spans.emplace(std::pair{i, j}, join_atoms(atoms, i, j));
    }
  }
  WordLattice lat;
  lat.n_atoms = atoms.size();
  for (auto& [span, word] : spans) lat.edges.push_back({span.first, span.second, std::move(word), 0.0});
  return lat;
}

/// Minimum-cost 0 -> n path; ties prefer fewer words, then the
/// lexicographically smaller word sequence. Edge costs are overwritten from
/// dictionary membership.
inline std::vector<Text> rerank_shortest_path(WordLattice& lat, const Dictionary& dict, double in_dict_cost,
                                              double oov_cost) {
  for (auto& e : lat.edges) e.cost = dict.count(e.word) ? in_dict_cost : oov_cost;
  struct Best {
    bool reached = false;
    double cost = 0.0;
    std::vector<Text> words;
  };
  std::vector<Best> best(lat.n_atoms + 1);
  best[0].reached = true;
  auto edges = lat.edges;
  std::stable_sort(edges.begin(), edges.end(), [](const auto& a, const auto& b) { return a.from < b.from; });
  for (const auto& e : edges) {
    if (e.from >= e.to || e.to > lat.n_atoms) throw NoPath("malformed lattice edge");
    const auto& src = best[e.from];
    if (!src.reached) continue;
    auto& dst = best[e.to];
    const double cost = src.cost + e.cost;
    const std::size_t n = src.words.size() + 1;
    bool take = !dst.reached || cost < dst.cost;
    if (!take && cost == dst.cost) {
      if (n != dst.words.size()) {
        take = n < dst.words.size();
      } else {
        auto cand = src.words;
        cand.push_back(e.word);
        take = cand < dst.words;
      }
    }
    if (take) {
      dst.reached = true;
      dst.cost = cost;
      dst.words = src.words;
      dst.words.push_back(e.word);
    }
  }
  if (!best[lat.n_atoms].reached || lat.n_atoms == 0) throw NoPath("lattice has no complete path");
  return best[lat.n_atoms].words;
}

// ---------------------------------------------------------------------------
// End-to-end baseline segmentation

struct BaselineConfig {
  AtomizerConfig atomizer;
  std::size_t beam = 8;
  double in_dict_cost = 1.0;
  double oov_cost = 2.0;
};

/// Drops ASCII blanks; raw input carries no word separators.
inline Text strip_blanks(TextView text) {
  Text out;
  for (char32_t c : text) {
    if (!is_blank(c) && c != U'\n') out.push_back(c);
  }
  return out;
}

inline SegmentedSentence segment_baseline(const PerceptronModel& model, const Dictionary& dict,
                                          const BaselineConfig& cfg, TextView raw) {
  const Text text = strip_blanks(raw);
  if (text.empty()) throw EmptyLine("input line is empty");
  std::vector<Text> words;
  for (const auto& piece : presegment(text, cfg.atomizer)) {
    const auto atoms = atomize(piece, cfg.atomizer);
    const auto kbest = viterbi_beam(model, atoms, cfg.beam);
    std::vector<TagSequence> seqs;
    seqs.reserve(kbest.size());
    for (const auto& k : kbest) seqs.push_back(k.tags);
    auto lat = build_lattice(seqs, atoms);
    for (auto& w : rerank_shortest_path(lat, dict, cfg.in_dict_cost, cfg.oov_cost)) words.push_back(std::move(w));
  }
  return SegmentedSentence(std::move(words));
}

inline Dictionary load_dictionary(const std::string& path) {
  Dictionary d;
  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    d.insert(with_location(path, i + 1, [&] { return from_utf8(lines[i]); }));
  }
  return d;
}

inline void save_dictionary(const std::string& path, const Dictionary& d) {
  std::vector<std::string> lines;
  for (const auto& w : d) lines.push_back(to_utf8(w));
  std::sort(lines.begin(), lines.end());
  write_lines(path, lines);
}

}  // namespace segrefine

#endif  // SEGREFINE_BASELINE_HPP
