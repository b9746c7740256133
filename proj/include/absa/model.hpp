#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "absa/autograd.hpp"
#include "absa/codec.hpp"
#include "absa/types.hpp"

namespace absa::model {

struct ModelConfig {
  int d = 64;
  int layers_enc = 2;
  int layers_dec = 2;
  int heads = 4;
  int ffn_dim = 256;
  int vocab_size = 0;  // filled from the vocabulary at construction
  int num_classes = 4;
  double alpha = 0.5;  // blend weight between MLP(H^e) and raw token embeddings
  double dropout = 0.1;
  unsigned long long seed = 13;
  int max_src_len = 192;
  int max_tgt_len = 128;
  bool scaled_logits = false;  // divide head dot products by sqrt(d)

  void validate() const {
    if (d <= 0 || heads <= 0 || d % heads != 0)
      throw std::invalid_argument("ModelConfig: d must be a positive multiple of heads");
    if (layers_enc < 1 || layers_dec < 1 || ffn_dim < 1)
      throw std::invalid_argument("ModelConfig: layers and ffn_dim must be positive");
    if (alpha < 0.0 || alpha > 1.0)
      throw std::invalid_argument("ModelConfig: alpha must be in [0, 1]");
    if (dropout < 0.0 || dropout >= 1.0)
      throw std::invalid_argument("ModelConfig: dropout must be in [0, 1)");
  }
};

// Source-side vocabulary: <s>, </s>, <unk>, then corpus types in sorted
// order. Class tokens live past the vocabulary in the embedding table.
class Vocabulary {
 public:
  static constexpr int kBos = 0;
  static constexpr int kEos = 1;
  static constexpr int kUnk = 2;

  explicit Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
    if (tokens_.size() < 3 || tokens_[0] != "<s>" || tokens_[1] != "</s>" ||
        tokens_[2] != "<unk>")
      throw std::invalid_argument("Vocabulary: must start with <s> </s> <unk>");
    for (size_t i = 0; i < tokens_.size(); ++i) ids_[tokens_[i]] = static_cast<int>(i);
  }

  static Vocabulary from_corpus(const std::vector<Sentence>& sentences) {
    std::map<std::string, int> types;
    for (const auto& s : sentences)
      for (const auto& t : s.tokens()) types[t] = 1;
    std::vector<std::string> toks = {"<s>", "</s>", "<unk>"};
    for (const auto& [t, _] : types)
      if (t != "<s>" && t != "</s>" && t != "<unk>") toks.push_back(t);
    return Vocabulary(std::move(toks));
  }

  int id(const std::string& token) const {
    auto it = ids_.find(token);
    return it == ids_.end() ? kUnk : it->second;
  }
  int size() const { return static_cast<int>(tokens_.size()); }
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

struct TrainExample {
  Sentence sentence;
  TargetSequence gold;
  double weight = 1.0;
};

struct TrainConfig {
  double learning_rate = 5e-3;
  int warmup_steps = 50;
  int epochs = 100;
  int batch_size = 8;
  double grad_clip = 5.0;  // global norm; <= 0 disables
};

struct TrainResult {
  std::vector<double> step_losses;
  std::vector<double> step_lrs;
  std::vector<double> epoch_means;
};

template <class S>
class TransformerT {
 public:
  using Mat = ad::Matrix<S>;
  using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;
  using Tape = ad::Tape<S>;
  using Var = ad::Var<S>;

  struct Tensor {
    std::string name;
    Mat value;
  };

  struct EncoderOutput {
    Mat states;                  // n x d, specials already dropped
    std::vector<int> token_ids;  // vocabulary ids of the n source tokens
  };

  struct StepDistribution {
    Vec probs;  // length n + l, sums to 1
  };

  struct HeadMatrices {
    Mat token_embeds;  // E^e
    Mat mlp_states;    // MLP(H^e)
    Mat blended;       // alpha * MLP(H^e) + (1 - alpha) * E^e
    Mat class_embeds;  // C^d
  };

  TransformerT(ModelConfig cfg, Vocabulary vocab,
               ClassTokenList classes = ClassTokenList::standard(), bool multitask = false)
      : cfg_(std::move(cfg)),
        vocab_(std::move(vocab)),
        classes_(std::move(classes)),
        multitask_(multitask) {
    cfg_.vocab_size = vocab_.size();
    cfg_.num_classes = classes_.size();
    cfg_.validate();
    build_parameters();
  }

  const ModelConfig& config() const { return cfg_; }
  const Vocabulary& vocab() const { return vocab_; }
  const ClassTokenList& classes() const { return classes_; }
  bool multitask() const { return multitask_; }

  std::vector<Tensor>& parameters() { return params_; }
  const std::vector<Tensor>& parameters() const { return params_; }

  void zero_parameters() {
    for (auto& p : params_) p.value.setZero();
  }

  // ---- inference ----

  EncoderOutput encode(const Sentence& sentence) const {
    Tape t;
    auto bound = bind(t, /*needs_grad=*/false);
    auto ids = source_ids(sentence);
    auto full = encoder_forward(t, bound, with_specials(ids), /*train=*/false, nullptr);
    EncoderOutput out;
    out.states = t.value(t.slice_rows(full, 1, static_cast<int>(ids.size())));
    out.token_ids = std::move(ids);
    return out;
  }

  // all decoder hidden states for a prefix; row T-1 is h_t^d
  Mat decoder_states(const EncoderOutput& enc, const TargetSequence& prefix) const {
    Tape t;
    auto bound = bind(t, false);
    auto encv = t.constant(enc.states);
    auto out = decoder_forward(t, bound, encv, decoder_input_rows(enc, prefix),
                               /*train=*/false, nullptr);
    return t.value(out);
  }

  Vec decode_step(const EncoderOutput& enc, const TargetSequence& prefix) const {
    Mat states = decoder_states(enc, prefix);
    return states.row(states.rows() - 1).transpose();
  }

  StepDistribution predict_distribution(const EncoderOutput& enc, const Vec& hidden,
                                        const Sentence& sentence) const {
    if (hidden.size() != cfg_.d)
      throw std::invalid_argument("predict_distribution: hidden state must have length d");
    if (sentence.size() != static_cast<int>(enc.states.rows()))
      throw std::invalid_argument("predict_distribution: sentence does not match encoder output");
    Mat pointer_class = head_table(enc);
    Vec logits = pointer_class * hidden;
    if (cfg_.scaled_logits) logits /= std::sqrt(S(cfg_.d));
    StepDistribution dist;
    const S m = logits.maxCoeff();
    Eigen::Array<S, Eigen::Dynamic, 1> e = (logits.array() - m).exp();
    dist.probs = (e / e.sum()).matrix();
    return dist;
  }

  HeadMatrices head_matrices(const EncoderOutput& enc) const {
    Tape t;
    auto bound = bind(t, false);
    auto encv = t.constant(enc.states);
    auto parts = head_forward(t, bound, encv, enc.token_ids);
    HeadMatrices out;
    out.token_embeds = t.value(parts.token_embeds);
    out.mlp_states = t.value(parts.mlp_states);
    out.blended = t.value(parts.blended);
    out.class_embeds = t.value(parts.class_embeds);
    return out;
  }

  // ---- training ----

  // teacher-forced mean NLL over the batch, evaluation mode (no dropout)
  double nll_loss(const std::vector<TrainExample>& batch) const {
    if (batch.empty()) throw std::invalid_argument("nll_loss: empty batch");
    Tape t;
    auto bound = bind(t, false);
    double total = 0;
    for (const auto& ex : batch)
      total += static_cast<double>(
          t.value(sequence_nll(t, bound, ex.sentence, ex.gold, false, nullptr))(0, 0));
    return total / static_cast<double>(batch.size());
  }

  TrainResult train(const std::vector<TrainExample>& data, const TrainConfig& tc) {
    if (data.empty()) throw std::invalid_argument("train: empty dataset");
    if (tc.batch_size < 1 || tc.epochs < 0 || tc.learning_rate <= 0)
      throw std::invalid_argument("train: bad optimizer config");

    const int batches_per_epoch =
        (static_cast<int>(data.size()) + tc.batch_size - 1) / tc.batch_size;
    const long total_steps = static_cast<long>(tc.epochs) * batches_per_epoch;
    const long warmup = std::max(1L, std::min<long>(tc.warmup_steps, total_steps));

    std::vector<Mat> adam_m(params_.size()), adam_v(params_.size());
    for (size_t i = 0; i < params_.size(); ++i) {
      adam_m[i] = Mat::Zero(params_[i].value.rows(), params_[i].value.cols());
      adam_v[i] = Mat::Zero(params_[i].value.rows(), params_[i].value.cols());
    }
    const double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;

    TrainResult result;
    std::vector<int> order(data.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

    long step = 0;
    for (int epoch = 0; epoch < tc.epochs; ++epoch) {
      std::shuffle(order.begin(), order.end(), train_rng_);
      double epoch_sum = 0;
      int epoch_batches = 0;
      for (int b = 0; b < batches_per_epoch; ++b) {
        ++step;
        const int begin = b * tc.batch_size;
        const int end = std::min<int>(begin + tc.batch_size, static_cast<int>(data.size()));

        Tape t;
        auto bound = bind(t, /*needs_grad=*/true);
        std::vector<Var> losses;
        double weight_sum = 0;
        for (int i = begin; i < end; ++i) {
          const auto& ex = data[order[i]];
          auto nll = sequence_nll(t, bound, ex.sentence, ex.gold, /*train=*/true, &train_rng_);
          losses.push_back(t.scale(nll, S(ex.weight)));
          weight_sum += ex.weight;
        }
        auto loss = t.scale(t.sum_all(losses), S(1.0 / weight_sum));
        const double loss_value = static_cast<double>(t.value(loss)(0, 0));
        if (!std::isfinite(loss_value))
          throw std::runtime_error("training diverged: non-finite loss at step " +
                                   std::to_string(step));
        t.backward(loss);

        // triangular schedule: linear ramp to the peak, linear decay to zero
        double lr = tc.learning_rate;
        if (step <= warmup)
          lr *= static_cast<double>(step) / static_cast<double>(warmup);
        else if (total_steps > warmup)
          lr *= static_cast<double>(total_steps - step) /
                static_cast<double>(total_steps - warmup);

        double grad_norm_sq = 0;
        for (size_t i = 0; i < params_.size(); ++i)
          grad_norm_sq += static_cast<double>(t.grad(bound[i]).squaredNorm());
        double clip_scale = 1.0;
        if (tc.grad_clip > 0 && std::sqrt(grad_norm_sq) > tc.grad_clip)
          clip_scale = tc.grad_clip / std::sqrt(grad_norm_sq);

        const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
        const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
        for (size_t i = 0; i < params_.size(); ++i) {
          Mat g = t.grad(bound[i]) * S(clip_scale);
          adam_m[i] = S(beta1) * adam_m[i] + S(1.0 - beta1) * g;
          adam_v[i] = S(beta2) * adam_v[i] + (S(1.0 - beta2) * g.array().square()).matrix();
          auto mhat = adam_m[i].array() / S(bc1);
          auto vhat = adam_v[i].array() / S(bc2);
          params_[i].value.array() -= S(lr) * mhat / (vhat.sqrt() + S(adam_eps));
        }

        result.step_losses.push_back(loss_value);
        result.step_lrs.push_back(lr);
        epoch_sum += loss_value;
        ++epoch_batches;
      }
      result.epoch_means.push_back(epoch_sum / std::max(1, epoch_batches));
    }
    return result;
  }

  // ---- generation ----

  TargetSequence generate_greedy(const Sentence& sentence, Subtask subtask, int max_len,
                                 std::optional<Span> given_aspect = std::nullopt) const {
    if (max_len < 1) throw std::invalid_argument("generate: max_len must be >= 1");
    auto enc = encode(sentence);
    const Mat table = head_table(enc);
    std::vector<int> seq = forced_prefix(sentence, subtask, given_aspect);
    const int eos = sentence.size() + classes_.eos_index();
    while (static_cast<int>(seq.size()) < max_len) {
      Vec probs = step_probs(enc, table, seq);
      int best = 0;
      for (int i = 1; i < probs.size(); ++i)
        if (probs(i) > probs(best)) best = i;
      seq.push_back(best);
      if (best == eos) break;
    }
    return TargetSequence::raw(std::move(seq), sentence.size(), classes_.size());
  }

  TargetSequence generate(const Sentence& sentence, Subtask subtask, int beam, int max_len,
                          std::optional<Span> given_aspect = std::nullopt) const {
    if (beam < 1) throw std::invalid_argument("generate: beam must be >= 1");
    if (max_len < 1) throw std::invalid_argument("generate: max_len must be >= 1");

    auto enc = encode(sentence);
    const Mat table = head_table(enc);
    const int eos = sentence.size() + classes_.eos_index();

    struct Hyp {
      std::vector<int> seq;
      double logp = 0;
      int free_len = 0;
    };
    auto normalized = [](const Hyp& h) {
      return h.logp / static_cast<double>(std::max(1, h.free_len));
    };

    std::vector<Hyp> alive = {Hyp{forced_prefix(sentence, subtask, given_aspect), 0.0, 0}};
    std::vector<Hyp> finished;

    // All alive hypotheses share a length, so in-step ranking by summed
    // log-prob matches the length-normalized ranking.
    while (!alive.empty()) {
      if (static_cast<int>(alive.front().seq.size()) >= max_len) {
        for (auto& h : alive) finished.push_back(std::move(h));
        break;
      }
      struct Cand {
        double logp;
        int index;
        int parent;
      };
      std::vector<Cand> cands;
      for (size_t p = 0; p < alive.size(); ++p) {
        Vec probs = step_probs(enc, table, alive[p].seq);
        for (int i = 0; i < probs.size(); ++i)
          cands.push_back({alive[p].logp + std::log(static_cast<double>(probs(i)) + 1e-30),
                           i, static_cast<int>(p)});
      }
      std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
        if (a.logp != b.logp) return a.logp > b.logp;
        if (a.index != b.index) return a.index < b.index;
        return a.parent < b.parent;
      });

      // top `beam` expansions; hypotheses that emit EOS retire and keep
      // their slot for this step
      std::vector<Hyp> next;
      int taken = 0;
      for (const auto& c : cands) {
        if (taken >= beam) break;
        ++taken;
        Hyp h = alive[c.parent];
        h.seq.push_back(c.index);
        h.logp = c.logp;
        h.free_len += 1;
        if (c.index == eos)
          finished.push_back(std::move(h));
        else
          next.push_back(std::move(h));
      }
      alive = std::move(next);
    }

    const Hyp* best = nullptr;
    for (const auto& h : finished)
      if (!best || normalized(h) > normalized(*best) ||
          (normalized(h) == normalized(*best) && h.seq < best->seq))
        best = &h;
    if (!best)  // max_len left no room beyond the forced prefix
      return TargetSequence::raw(forced_prefix(sentence, subtask, given_aspect),
                                 sentence.size(), classes_.size());
    return TargetSequence::raw(best->seq, sentence.size(), classes_.size());
  }

  // forced leading indexes: task tag in multitask mode, the given aspect for
  // ALSC/AOE
  std::vector<int> forced_prefix(const Sentence& sentence, Subtask subtask,
                                 std::optional<Span> given_aspect) const {
    const int n = sentence.size();
    const bool needs_given = subtask == Subtask::ALSC || subtask == Subtask::AOE;
    if (needs_given && !given_aspect)
      throw std::invalid_argument("generate: ALSC/AOE require given_aspect");
    if (!needs_given && given_aspect)
      throw std::invalid_argument("generate: given_aspect only valid for ALSC/AOE");
    std::vector<int> forced;
    if (multitask_) {
      const int tag = classes_.tag_index(codec::task_tag(subtask));
      if (tag < 0)
        throw std::invalid_argument("generate: class list lacks task tag " +
                                    codec::task_tag(subtask));
      forced.push_back(n + tag);
    }
    if (needs_given) {
      if (given_aspect->end >= n) throw std::out_of_range("generate: given aspect out of range");
      forced.push_back(given_aspect->start);
      forced.push_back(given_aspect->end);
    }
    return forced;
  }

  // ---- internals shared with the gradient checker ----

  std::vector<Var> bind(Tape& t, bool needs_grad) const {
    std::vector<Var> out;
    out.reserve(params_.size());
    for (const auto& p : params_)
      out.push_back(needs_grad ? t.leaf(p.value) : t.constant(p.value));
    return out;
  }

  Var sequence_nll(Tape& t, const std::vector<Var>& bound, const Sentence& sentence,
                   const TargetSequence& gold, bool train, std::mt19937_64* rng) const {
    const int n = sentence.size();
    if (gold.n() != n || gold.l() != classes_.size())
      throw std::invalid_argument("sequence_nll: target does not match sentence/classes");
    auto src = source_ids(sentence);
    auto full = encoder_forward(t, bound, with_specials(src), train, rng);
    auto enc = t.slice_rows(full, 1, n);

    std::vector<int> dec_rows = {Vocabulary::kBos};
    const auto& y = gold.indexes();
    for (size_t i = 0; i + 1 < y.size(); ++i) dec_rows.push_back(embed_row(src, y[i]));
    auto dec = decoder_forward(t, bound, enc, dec_rows, train, rng);

    auto head = head_forward(t, bound, enc, src);
    auto table = t.concat_rows({head.blended, head.class_embeds});
    auto logits = t.matmul_nt(dec, table);
    if (cfg_.scaled_logits) logits = t.scale(logits, S(1.0 / std::sqrt(double(cfg_.d))));
    return t.nll_rows(logits, y);
  }

 private:
  struct HeadVars {
    Var token_embeds;
    Var mlp_states;
    Var blended;
    Var class_embeds;
  };

  void build_parameters() {
    std::mt19937_64 rng(cfg_.seed);
    std::normal_distribution<double> init(0.0, 0.02);
    auto normal = [&](int r, int c) {
      Mat m(r, c);
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) m(i, j) = S(init(rng));
      return m;
    };
    auto zeros = [](int r, int c) { return Mat::Zero(r, c); };
    auto ones = [](int r, int c) { return Mat::Ones(r, c); };

    auto add = [&](const std::string& name, Mat v) {
      index_[name] = static_cast<int>(params_.size());
      params_.push_back({name, std::move(v)});
    };
    const int d = cfg_.d, f = cfg_.ffn_dim;
    const int rows = vocab_.size() + classes_.size();

    add("embed.tok", normal(rows, d));
    add("embed.pos_src", normal(cfg_.max_src_len, d));
    add("embed.pos_tgt", normal(cfg_.max_tgt_len, d));

    auto add_attention = [&](const std::string& prefix) {
      for (const char* w : {"wq", "wk", "wv", "wo"}) add(prefix + "." + w, normal(d, d));
      for (const char* bnm : {"bq", "bk", "bv", "bo"}) add(prefix + "." + bnm, zeros(1, d));
    };
    auto add_ln = [&](const std::string& prefix) {
      add(prefix + ".g", ones(1, d));
      add(prefix + ".b", zeros(1, d));
    };
    auto add_ffn = [&](const std::string& prefix) {
      add(prefix + ".w1", normal(d, f));
      add(prefix + ".b1", zeros(1, f));
      add(prefix + ".w2", normal(f, d));
      add(prefix + ".b2", zeros(1, d));
    };

    for (int i = 0; i < cfg_.layers_enc; ++i) {
      const std::string p = "enc." + std::to_string(i);
      add_attention(p + ".attn");
      add_ln(p + ".ln1");
      add_ffn(p + ".ffn");
      add_ln(p + ".ln2");
    }
    for (int i = 0; i < cfg_.layers_dec; ++i) {
      const std::string p = "dec." + std::to_string(i);
      add_attention(p + ".self");
      add_ln(p + ".ln1");
      add_attention(p + ".cross");
      add_ln(p + ".ln2");
      add_ffn(p + ".ffn");
      add_ln(p + ".ln3");
    }
    add("head.mlp.w1", normal(d, d));
    add("head.mlp.b1", zeros(1, d));
    add("head.mlp.w2", normal(d, d));
    add("head.mlp.b2", zeros(1, d));

    train_rng_.seed(cfg_.seed + 0x9e3779b97f4a7c15ULL);
  }

  int idx(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::logic_error("unknown parameter: " + name);
    return it->second;
  }

  std::vector<int> source_ids(const Sentence& sentence) const {
    std::vector<int> ids;
    ids.reserve(sentence.tokens().size());
    for (const auto& tok : sentence.tokens()) ids.push_back(vocab_.id(tok));
    return ids;
  }

  std::vector<int> with_specials(const std::vector<int>& ids) const {
    std::vector<int> out;
    out.reserve(ids.size() + 2);
    out.push_back(Vocabulary::kBos);
    out.insert(out.end(), ids.begin(), ids.end());
    out.push_back(Vocabulary::kEos);
    return out;
  }

  int embed_row(const std::vector<int>& src_ids, int index) const {
    const int n = static_cast<int>(src_ids.size());
    if (index < 0 || index >= n + classes_.size())
      throw std::out_of_range("prefix index outside [0, n+l)");
    return index < n ? src_ids[index] : vocab_.size() + (index - n);
  }

  std::vector<int> decoder_input_rows(const EncoderOutput& enc,
                                      const TargetSequence& prefix) const {
    std::vector<int> rows = {Vocabulary::kBos};
    for (int y : prefix.indexes()) rows.push_back(embed_row(enc.token_ids, y));
    return rows;
  }

  Var maybe_dropout(Tape& t, Var x, bool train, std::mt19937_64* rng) const {
    if (!train || cfg_.dropout == 0.0) return x;
    return t.dropout(x, cfg_.dropout, *rng);
  }

  Var attention(Tape& t, const std::vector<Var>& b, const std::string& prefix, Var x,
                Var memory, const Mat* mask) const {
    auto P = [&](const char* nm) { return b[idx(prefix + "." + nm)]; };
    auto q = t.add_rowvec(t.matmul(x, P("wq")), P("bq"));
    auto k = t.add_rowvec(t.matmul(memory, P("wk")), P("bk"));
    auto v = t.add_rowvec(t.matmul(memory, P("wv")), P("bv"));
    const int dk = cfg_.d / cfg_.heads;
    const S inv_sqrt_dk = S(1.0 / std::sqrt(static_cast<double>(dk)));
    std::vector<Var> heads;
    for (int h = 0; h < cfg_.heads; ++h) {
      auto qh = t.slice_cols(q, h * dk, dk);
      auto kh = t.slice_cols(k, h * dk, dk);
      auto vh = t.slice_cols(v, h * dk, dk);
      auto scores = t.scale(t.matmul_nt(qh, kh), inv_sqrt_dk);
      if (mask) scores = t.add_const(scores, *mask);
      heads.push_back(t.matmul(t.row_softmax(scores), vh));
    }
    auto ctx = t.concat_cols(heads);
    return t.add_rowvec(t.matmul(ctx, P("wo")), P("bo"));
  }

  Var ffn(Tape& t, const std::vector<Var>& b, const std::string& prefix, Var x) const {
    auto h = t.gelu(t.add_rowvec(t.matmul(x, b[idx(prefix + ".w1")]), b[idx(prefix + ".b1")]));
    return t.add_rowvec(t.matmul(h, b[idx(prefix + ".w2")]), b[idx(prefix + ".b2")]);
  }

  Var sublayer(Tape& t, const std::vector<Var>& b, const std::string& ln, Var x, Var sub,
               bool train, std::mt19937_64* rng) const {
    auto summed = t.add(x, maybe_dropout(t, sub, train, rng));
    return t.layer_norm(summed, b[idx(ln + ".g")], b[idx(ln + ".b")]);
  }

  Var encoder_forward(Tape& t, const std::vector<Var>& b, const std::vector<int>& ids,
                      bool train, std::mt19937_64* rng) const {
    const int T = static_cast<int>(ids.size());
    if (T > cfg_.max_src_len)
      throw std::invalid_argument("sentence longer than max_src_len");
    auto x = t.add(t.gather_rows(b[idx("embed.tok")], ids),
                   t.slice_rows(b[idx("embed.pos_src")], 0, T));
    x = maybe_dropout(t, x, train, rng);
    for (int i = 0; i < cfg_.layers_enc; ++i) {
      const std::string p = "enc." + std::to_string(i);
      x = sublayer(t, b, p + ".ln1", x, attention(t, b, p + ".attn", x, x, nullptr), train, rng);
      x = sublayer(t, b, p + ".ln2", x, ffn(t, b, p + ".ffn", x), train, rng);
    }
    return x;
  }

  Var decoder_forward(Tape& t, const std::vector<Var>& b, Var enc_states,
                      const std::vector<int>& dec_rows, bool train,
                      std::mt19937_64* rng) const {
    const int T = static_cast<int>(dec_rows.size());
    if (T > cfg_.max_tgt_len) throw std::invalid_argument("prefix longer than max_tgt_len");
    Mat mask = Mat::Zero(T, T);
    for (int i = 0; i < T; ++i)
      for (int j = i + 1; j < T; ++j) mask(i, j) = S(-1e9);

    auto x = t.add(t.gather_rows(b[idx("embed.tok")], dec_rows),
                   t.slice_rows(b[idx("embed.pos_tgt")], 0, T));
    x = maybe_dropout(t, x, train, rng);
    for (int i = 0; i < cfg_.layers_dec; ++i) {
      const std::string p = "dec." + std::to_string(i);
      x = sublayer(t, b, p + ".ln1", x, attention(t, b, p + ".self", x, x, &mask), train, rng);
      x = sublayer(t, b, p + ".ln2", x,
                   attention(t, b, p + ".cross", x, enc_states, nullptr), train, rng);
      x = sublayer(t, b, p + ".ln3", x, ffn(t, b, p + ".ffn", x), train, rng);
    }
    return x;
  }

  HeadVars head_forward(Tape& t, const std::vector<Var>& b, Var enc_states,
                        const std::vector<int>& src_ids) const {
    HeadVars out;
    out.token_embeds = t.gather_rows(b[idx("embed.tok")], src_ids);
    auto hidden = t.gelu(t.add_rowvec(t.matmul(enc_states, b[idx("head.mlp.w1")]),
                                      b[idx("head.mlp.b1")]));
    out.mlp_states =
        t.add_rowvec(t.matmul(hidden, b[idx("head.mlp.w2")]), b[idx("head.mlp.b2")]);
    out.blended = t.axpby(S(cfg_.alpha), out.mlp_states, S(1.0 - cfg_.alpha), out.token_embeds);
    std::vector<int> class_rows;
    for (int k = 0; k < classes_.size(); ++k) class_rows.push_back(vocab_.size() + k);
    out.class_embeds = t.gather_rows(b[idx("embed.tok")], class_rows);
    return out;
  }

  // the frozen (n+l) x d pointer/class table used at generation time
  Mat head_table(const EncoderOutput& enc) const {
    Tape t;
    auto bound = bind(t, false);
    auto encv = t.constant(enc.states);
    auto head = head_forward(t, bound, encv, enc.token_ids);
    return t.value(t.concat_rows({head.blended, head.class_embeds}));
  }

  Vec step_probs(const EncoderOutput& enc, const Mat& table,
                 const std::vector<int>& prefix) const {
    Tape t;
    auto bound = bind(t, false);
    auto encv = t.constant(enc.states);
    std::vector<int> rows = {Vocabulary::kBos};
    for (int y : prefix) rows.push_back(embed_row(enc.token_ids, y));
    auto dec = decoder_forward(t, bound, encv, rows, false, nullptr);
    Vec h = t.value(dec).row(t.value(dec).rows() - 1).transpose();
    Vec logits = table * h;
    if (cfg_.scaled_logits) logits /= std::sqrt(S(cfg_.d));
    const S m = logits.maxCoeff();
    Eigen::Array<S, Eigen::Dynamic, 1> e = (logits.array() - m).exp();
    return (e / e.sum()).matrix();
  }

  ModelConfig cfg_;
  Vocabulary vocab_;
  ClassTokenList classes_;
  bool multitask_ = false;
  std::vector<Tensor> params_;
  std::unordered_map<std::string, int> index_;
  std::mt19937_64 train_rng_;
};

using Transformer = TransformerT<float>;

// Analytic gradients vs central finite differences (eps = 1e-4) over a
// deterministic sample of parameter entries, in double precision.
struct GradCheckResult {
  double max_rel_error = 0.0;
  int samples = 0;
};

GradCheckResult gradient_check(TransformerT<double>& model,
                               const std::vector<TrainExample>& batch, int num_samples,
                               unsigned long long seed = 7, double eps = 1e-4);

}  // namespace absa::model
