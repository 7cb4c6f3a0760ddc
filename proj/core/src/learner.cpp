#include "gcn/learner.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "gcn/reward.hpp"
#include "gcn/rng.hpp"
#include "gcn/text.hpp"

namespace gcn {

namespace {

std::uint64_t fnv1a(std::string_view s, std::uint64_t salt) {
  std::uint64_t h = 1469598103934665603ULL ^ (salt * 0x9E3779B97F4A7C15ULL);
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return splitmix64(h);
}

std::vector<std::string> words(std::string_view text) { return tokenize(normalize_text(text)); }

// Flat parameter vector with Adam state.
struct Params {
  std::vector<double> w, g, m, v;
  long long step = 0;

  std::size_t add(std::size_t n) {
    const std::size_t off = w.size();
    w.resize(off + n, 0.0);
    return off;
  }
  void finalize() {
    g.assign(w.size(), 0.0);
    m.assign(w.size(), 0.0);
    v.assign(w.size(), 0.0);
  }
  void normal(std::size_t off, std::size_t n, double scale, Rng& rng) {
    for (std::size_t i = 0; i < n; ++i) w[off + i] = scale * standard_normal(rng);
  }
  void adam(const LearnerConfig& c, double lr) {
    ++step;
    const double c1 = 1.0 - std::pow(c.adam_beta1, static_cast<double>(step));
    const double c2 = 1.0 - std::pow(c.adam_beta2, static_cast<double>(step));
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (g[i] == 0.0 && m[i] == 0.0) continue;  // untouched hashed rows stay put
      m[i] = c.adam_beta1 * m[i] + (1.0 - c.adam_beta1) * g[i];
      v[i] = c.adam_beta2 * v[i] + (1.0 - c.adam_beta2) * g[i] * g[i];
      w[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + c.adam_epsilon);
    }
    std::fill(g.begin(), g.end(), 0.0);
  }
};

void softmax_inplace(std::vector<double>& z) {
  const double mx = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (double& x : z) {
    x = std::exp(x - mx);
    s += x;
  }
  for (double& x : z) x /= s;
}

std::size_t argmax(const std::vector<double>& z) {
  return static_cast<std::size_t>(std::max_element(z.begin(), z.end()) - z.begin());
}

void check_finite(double loss, const char* who) {
  if (!std::isfinite(loss)) throw LearnerAbort(std::string(who) + ": non-finite training loss");
}

double resolve_lr(const LearnerConfig& c, TaskKind task) {
  return c.learning_rate > 0.0 ? c.learning_rate : default_learning_rate(task);
}

// ---- intent detection: mean of hashed unigram+bigram embeddings -> linear ----

class IntentLearner final : public LearnerBackend {
 public:
  IntentLearner(const LabelSpace& labels, std::uint64_t seed, const LearnerConfig& config)
      : labels_(labels), config_(config), lr_(resolve_lr(config, TaskKind::IntentDetection)) {
    if (labels_.intents.empty()) throw std::invalid_argument("intent learner needs a non-empty intent set");
    B_ = static_cast<std::size_t>(config_.hash_buckets);
    d_ = static_cast<std::size_t>(config_.embedding_dim);
    C_ = labels_.intents.size();
    off_emb_ = p_.add(B_ * d_);
    off_w_ = p_.add(C_ * d_);
    off_b_ = p_.add(C_);
    p_.finalize();
    Rng rng(derive_seed(seed, 0x1e47));
    p_.normal(off_emb_, B_ * d_, config_.init_scale, rng);
    p_.normal(off_w_, C_ * d_, 1.0 / std::sqrt(static_cast<double>(d_)), rng);
  }

  TaskKind task() const override { return TaskKind::IntentDetection; }
  const LabelSpace& label_space() const override { return labels_; }
  std::size_t parameter_count() const override { return p_.w.size(); }

  double train_step(const std::vector<LabeledExample>& batch) override {
    if (batch.empty()) throw std::invalid_argument("empty training batch");
    double loss = 0.0;
    const double scale = 1.0 / static_cast<double>(batch.size());
    std::vector<double> h, probs, dh(d_);
    std::vector<std::size_t> feats;
    for (const auto& e : batch) {
      const std::size_t y = class_of(e.label);
      forward(e.utterance, feats, h, probs);
      loss -= std::log(std::max(probs[y], 1e-300));
      probs[y] -= 1.0;
      std::fill(dh.begin(), dh.end(), 0.0);
      for (std::size_t c = 0; c < C_; ++c) {
        const double gc = probs[c] * scale;
        for (std::size_t j = 0; j < d_; ++j) {
          p_.g[off_w_ + c * d_ + j] += gc * h[j];
          dh[j] += gc * p_.w[off_w_ + c * d_ + j];
        }
        p_.g[off_b_ + c] += gc;
      }
      if (feats.empty()) continue;
      const double inv = 1.0 / static_cast<double>(feats.size());
      for (std::size_t f : feats)
        for (std::size_t j = 0; j < d_; ++j) p_.g[off_emb_ + f * d_ + j] += dh[j] * inv;
    }
    loss *= scale;
    check_finite(loss, "intent learner");
    p_.adam(config_, lr_);
    return loss;
  }

  std::string predict_label(std::string_view utterance) const override {
    std::vector<double> h, probs;
    std::vector<std::size_t> feats;
    forward(utterance, feats, h, probs);
    return labels_.intents[argmax(probs)];
  }

  double datapoint_performance(const LabeledExample& e) const override {
    if (!labels_.admits(e)) return 0.0;
    return predict_label(e.utterance) == e.label ? 1.0 : 0.0;
  }

 protected:
  Evaluation evaluate_examples(const std::vector<LabeledExample>& examples) const override {
    Evaluation ev;
    double hits = 0.0;
    for (const auto& e : examples) {
      const double s = datapoint_performance(e);
      ev.per_example.push_back(s);
      hits += s;
    }
    ev.metric = hits / static_cast<double>(examples.size());
    return ev;
  }

 private:
  std::size_t class_of(const std::string& label) const {
    auto it = std::lower_bound(labels_.intents.begin(), labels_.intents.end(), label);
    if (it == labels_.intents.end() || *it != label) throw std::invalid_argument("intent outside label space: " + label);
    return static_cast<std::size_t>(it - labels_.intents.begin());
  }

  void forward(std::string_view utterance, std::vector<std::size_t>& feats, std::vector<double>& h,
               std::vector<double>& probs) const {
    const auto toks = words(utterance);
    feats.clear();
    for (std::size_t i = 0; i < toks.size(); ++i) {
      feats.push_back(fnv1a(toks[i], 1) % B_);
      if (i + 1 < toks.size()) feats.push_back(fnv1a(toks[i] + ' ' + toks[i + 1], 2) % B_);
    }
    h.assign(d_, 0.0);
    if (!feats.empty()) {
      for (std::size_t f : feats)
        for (std::size_t j = 0; j < d_; ++j) h[j] += p_.w[off_emb_ + f * d_ + j];
      for (double& x : h) x /= static_cast<double>(feats.size());
    }
    probs.assign(C_, 0.0);
    for (std::size_t c = 0; c < C_; ++c) {
      double s = p_.w[off_b_ + c];
      for (std::size_t j = 0; j < d_; ++j) s += p_.w[off_w_ + c * d_ + j] * h[j];
      probs[c] = s;
    }
    softmax_inplace(probs);
  }

  LabelSpace labels_;
  LearnerConfig config_;
  double lr_;
  std::size_t B_ = 0, d_ = 0, C_ = 0, off_emb_ = 0, off_w_ = 0, off_b_ = 0;
  Params p_;
};

// ---- slot tagging: hashed (-1, 0, +1) window -> tanh hidden -> 2S+1 tags ----

class SlotLearner final : public LearnerBackend {
 public:
  SlotLearner(const LabelSpace& labels, std::uint64_t seed, const LearnerConfig& config)
      : labels_(labels), tags_(labels.tag_set()), config_(config), lr_(resolve_lr(config, TaskKind::SlotTagging)) {
    B_ = static_cast<std::size_t>(config_.hash_buckets);
    d_ = static_cast<std::size_t>(config_.embedding_dim);
    H_ = static_cast<std::size_t>(config_.hidden_dim);
    T_ = tags_.size();
    in_ = 3 * d_;
    off_emb_ = p_.add(B_ * d_);
    off_w1_ = p_.add(H_ * in_);
    off_b1_ = p_.add(H_);
    off_w2_ = p_.add(T_ * H_);
    off_b2_ = p_.add(T_);
    p_.finalize();
    Rng rng(derive_seed(seed, 0x5107));
    p_.normal(off_emb_, B_ * d_, config_.init_scale, rng);
    p_.normal(off_w1_, H_ * in_, 1.0 / std::sqrt(static_cast<double>(in_)), rng);
    p_.normal(off_w2_, T_ * H_, 1.0 / std::sqrt(static_cast<double>(H_)), rng);
  }

  TaskKind task() const override { return TaskKind::SlotTagging; }
  const LabelSpace& label_space() const override { return labels_; }
  std::size_t parameter_count() const override { return p_.w.size(); }

  double train_step(const std::vector<LabeledExample>& batch) override {
    if (batch.empty()) throw std::invalid_argument("empty training batch");
    std::size_t n_tok = 0;
    for (const auto& e : batch) {
      if (!e.iob_tags) throw std::invalid_argument("slot example without tags");
      n_tok += e.iob_tags->size();
    }
    if (n_tok == 0) return 0.0;
    const double scale = 1.0 / static_cast<double>(n_tok);
    double loss = 0.0;
    std::vector<double> x, h, probs, dh(H_), dx(in_);
    std::vector<std::size_t> feats;
    for (const auto& e : batch) {
      const auto toks = words(e.utterance);
      if (toks.size() != e.iob_tags->size()) throw std::invalid_argument("tag count does not match tokens");
      for (std::size_t i = 0; i < toks.size(); ++i) {
        const std::size_t y = tag_index((*e.iob_tags)[i]);
        forward(toks, i, feats, x, h, probs);
        loss -= std::log(std::max(probs[y], 1e-300));
        probs[y] -= 1.0;
        std::fill(dh.begin(), dh.end(), 0.0);
        for (std::size_t t = 0; t < T_; ++t) {
          const double gt = probs[t] * scale;
          for (std::size_t j = 0; j < H_; ++j) {
            p_.g[off_w2_ + t * H_ + j] += gt * h[j];
            dh[j] += gt * p_.w[off_w2_ + t * H_ + j];
          }
          p_.g[off_b2_ + t] += gt;
        }
        std::fill(dx.begin(), dx.end(), 0.0);
        for (std::size_t j = 0; j < H_; ++j) {
          const double da = dh[j] * (1.0 - h[j] * h[j]);
          for (std::size_t k = 0; k < in_; ++k) {
            p_.g[off_w1_ + j * in_ + k] += da * x[k];
            dx[k] += da * p_.w[off_w1_ + j * in_ + k];
          }
          p_.g[off_b1_ + j] += da;
        }
        for (std::size_t o = 0; o < 3; ++o)
          for (std::size_t k = 0; k < d_; ++k) p_.g[off_emb_ + feats[o] * d_ + k] += dx[o * d_ + k];
      }
    }
    loss *= scale;
    check_finite(loss, "slot learner");
    p_.adam(config_, lr_);
    return loss;
  }

  std::vector<std::string> predict_tags(std::string_view utterance) const override {
    const auto toks = words(utterance);
    std::vector<std::string> out;
    std::vector<double> x, h, probs;
    std::vector<std::size_t> feats;
    for (std::size_t i = 0; i < toks.size(); ++i) {
      forward(toks, i, feats, x, h, probs);
      out.push_back(tags_[argmax(probs)]);
    }
    return out;
  }

  double datapoint_performance(const LabeledExample& e) const override {
    if (!labels_.admits(e) || !e.iob_tags) return 0.0;
    return token_f1(*e.iob_tags, predict_tags(e.utterance));
  }

 protected:
  Evaluation evaluate_examples(const std::vector<LabeledExample>& examples) const override {
    Evaluation ev;
    std::vector<std::vector<std::string>> gold, pred;
    for (const auto& e : examples) {
      if (!e.iob_tags) throw std::invalid_argument("slot example without tags");
      gold.push_back(*e.iob_tags);
      pred.push_back(predict_tags(e.utterance));
      ev.per_example.push_back(token_f1(gold.back(), pred.back()));
    }
    ev.metric = span_f1(gold, pred);
    return ev;
  }

 private:
  std::size_t tag_index(const std::string& tag) const {
    auto it = std::find(tags_.begin(), tags_.end(), tag);
    if (it == tags_.end()) throw std::invalid_argument("tag outside label space: " + tag);
    return static_cast<std::size_t>(it - tags_.begin());
  }

  void forward(const std::vector<std::string>& toks, std::size_t i, std::vector<std::size_t>& feats,
               std::vector<double>& x, std::vector<double>& h, std::vector<double>& probs) const {
    feats.assign(3, 0);
    x.assign(in_, 0.0);
    for (std::size_t o = 0; o < 3; ++o) {
      const long j = static_cast<long>(i) + static_cast<long>(o) - 1;
      const std::string& tok =
          (j < 0 || j >= static_cast<long>(toks.size())) ? pad_ : toks[static_cast<std::size_t>(j)];
      feats[o] = fnv1a(tok, 10 + o) % B_;
      for (std::size_t k = 0; k < d_; ++k) x[o * d_ + k] = p_.w[off_emb_ + feats[o] * d_ + k];
    }
    h.assign(H_, 0.0);
    for (std::size_t j = 0; j < H_; ++j) {
      double s = p_.w[off_b1_ + j];
      for (std::size_t k = 0; k < in_; ++k) s += p_.w[off_w1_ + j * in_ + k] * x[k];
      h[j] = std::tanh(s);
    }
    probs.assign(T_, 0.0);
    for (std::size_t t = 0; t < T_; ++t) {
      double s = p_.w[off_b2_ + t];
      for (std::size_t j = 0; j < H_; ++j) s += p_.w[off_w2_ + t * H_ + j] * h[j];
      probs[t] = s;
    }
    softmax_inplace(probs);
  }

  LabelSpace labels_;
  std::vector<std::string> tags_;
  LearnerConfig config_;
  double lr_;
  const std::string pad_ = "<pad>";
  std::size_t B_ = 0, d_ = 0, H_ = 0, T_ = 0, in_ = 0, off_emb_ = 0, off_w1_ = 0, off_b1_ = 0, off_w2_ = 0,
              off_b2_ = 0;
  Params p_;
};

// ---- dialogue: [mean hashed context ; previous response token] -> tanh -> next token ----

class DialogueLearner final : public LearnerBackend {
 public:
  DialogueLearner(const LabelSpace& labels, std::uint64_t seed, const LearnerConfig& config)
      : labels_(labels), config_(config), lr_(resolve_lr(config, TaskKind::DialogueResponse)) {
    B_ = static_cast<std::size_t>(config_.hash_buckets);
    d_ = static_cast<std::size_t>(config_.embedding_dim);
    H_ = static_cast<std::size_t>(config_.hidden_dim);
    V_ = labels_.vocabulary.size() + 2;  // + unknown + end
    unk_ = labels_.vocabulary.size();
    end_ = unk_ + 1;
    in_ = 2 * d_;
    off_ctx_ = p_.add(B_ * d_);
    off_tok_ = p_.add((V_ + 1) * d_);  // last row: start of response
    off_w1_ = p_.add(H_ * in_);
    off_b1_ = p_.add(H_);
    off_w2_ = p_.add(V_ * H_);
    off_b2_ = p_.add(V_);
    p_.finalize();
    Rng rng(derive_seed(seed, 0xd1a1));
    p_.normal(off_ctx_, B_ * d_, config_.init_scale, rng);
    p_.normal(off_tok_, (V_ + 1) * d_, config_.init_scale, rng);
    p_.normal(off_w1_, H_ * in_, 1.0 / std::sqrt(static_cast<double>(in_)), rng);
    p_.normal(off_w2_, V_ * H_, 1.0 / std::sqrt(static_cast<double>(H_)), rng);
  }

  TaskKind task() const override { return TaskKind::DialogueResponse; }
  const LabelSpace& label_space() const override { return labels_; }
  std::size_t parameter_count() const override { return p_.w.size(); }

  double train_step(const std::vector<LabeledExample>& batch) override {
    if (batch.empty()) throw std::invalid_argument("empty training batch");
    std::vector<std::vector<std::size_t>> targets;
    std::size_t n_tok = 0;
    for (const auto& e : batch) {
      targets.push_back(encode(e.utterance));
      n_tok += targets.back().size();
    }
    const double scale = 1.0 / static_cast<double>(n_tok);
    double loss = 0.0;
    std::vector<double> ctx, x, h, probs, dh(H_), dx(in_);
    std::vector<std::size_t> feats;
    for (std::size_t b = 0; b < batch.size(); ++b) {
      context(batch[b].label, feats, ctx);
      std::vector<double> dctx(d_, 0.0);
      std::size_t prev = V_;
      for (std::size_t y : targets[b]) {
        step(ctx, prev, x, h, probs);
        loss -= std::log(std::max(probs[y], 1e-300));
        probs[y] -= 1.0;
        std::fill(dh.begin(), dh.end(), 0.0);
        for (std::size_t v = 0; v < V_; ++v) {
          const double gv = probs[v] * scale;
          for (std::size_t j = 0; j < H_; ++j) {
            p_.g[off_w2_ + v * H_ + j] += gv * h[j];
            dh[j] += gv * p_.w[off_w2_ + v * H_ + j];
          }
          p_.g[off_b2_ + v] += gv;
        }
        std::fill(dx.begin(), dx.end(), 0.0);
        for (std::size_t j = 0; j < H_; ++j) {
          const double da = dh[j] * (1.0 - h[j] * h[j]);
          for (std::size_t k = 0; k < in_; ++k) {
            p_.g[off_w1_ + j * in_ + k] += da * x[k];
            dx[k] += da * p_.w[off_w1_ + j * in_ + k];
          }
          p_.g[off_b1_ + j] += da;
        }
        for (std::size_t k = 0; k < d_; ++k) {
          dctx[k] += dx[k];
          p_.g[off_tok_ + prev * d_ + k] += dx[d_ + k];
        }
        prev = y;
      }
      if (!feats.empty()) {
        const double inv = 1.0 / static_cast<double>(feats.size());
        for (std::size_t f : feats)
          for (std::size_t k = 0; k < d_; ++k) p_.g[off_ctx_ + f * d_ + k] += dctx[k] * inv;
      }
    }
    loss *= scale;
    check_finite(loss, "dialogue learner");
    p_.adam(config_, lr_);
    return loss;
  }

  std::string predict_response(std::string_view context_text) const override {
    std::vector<double> ctx, x, h, probs;
    std::vector<std::size_t> feats;
    context(context_text, feats, ctx);
    std::vector<std::string> out;
    std::size_t prev = V_;
    for (int i = 0; i < config_.max_response_tokens; ++i) {
      step(ctx, prev, x, h, probs);
      const std::size_t y = argmax(probs);
      if (y == end_) break;
      out.push_back(y == unk_ ? std::string("<unk>") : labels_.vocabulary[y]);
      prev = y;
    }
    return join(out);
  }

  // exp(-mean token loss) of the response given the context.
  double datapoint_performance(const LabeledExample& e) const override {
    double loss = 0.0;
    std::size_t n = 0;
    example_loss(e, loss, n);
    return std::clamp(std::exp(-loss / static_cast<double>(n)), 0.0, 1.0);
  }

 protected:
  Evaluation evaluate_examples(const std::vector<LabeledExample>& examples) const override {
    Evaluation ev;
    double total = 0.0;
    std::size_t count = 0;
    for (const auto& e : examples) {
      double loss = 0.0;
      std::size_t n = 0;
      example_loss(e, loss, n);
      total += loss;
      count += n;
      ev.per_example.push_back(std::clamp(std::exp(-loss / static_cast<double>(n)), 0.0, 1.0));
    }
    ev.metric = std::clamp(std::exp(-total / static_cast<double>(count)), 0.0, 1.0);
    return ev;
  }

 private:
  std::vector<std::size_t> encode(std::string_view text) const {
    std::vector<std::size_t> ids;
    for (const auto& w : words(text)) {
      auto it = std::lower_bound(labels_.vocabulary.begin(), labels_.vocabulary.end(), w);
      ids.push_back(it != labels_.vocabulary.end() && *it == w
                        ? static_cast<std::size_t>(it - labels_.vocabulary.begin())
                        : unk_);
    }
    ids.push_back(end_);
    return ids;
  }

  void example_loss(const LabeledExample& e, double& loss, std::size_t& n) const {
    std::vector<double> ctx, x, h, probs;
    std::vector<std::size_t> feats;
    context(e.label, feats, ctx);
    std::size_t prev = V_;
    for (std::size_t y : encode(e.utterance)) {
      step(ctx, prev, x, h, probs);
      loss -= std::log(std::max(probs[y], 1e-300));
      ++n;
      prev = y;
    }
  }

  void context(std::string_view text, std::vector<std::size_t>& feats, std::vector<double>& ctx) const {
    feats.clear();
    for (const auto& w : words(text)) feats.push_back(fnv1a(w, 20) % B_);
    ctx.assign(d_, 0.0);
    if (feats.empty()) return;
    for (std::size_t f : feats)
      for (std::size_t k = 0; k < d_; ++k) ctx[k] += p_.w[off_ctx_ + f * d_ + k];
    for (double& v : ctx) v /= static_cast<double>(feats.size());
  }

  void step(const std::vector<double>& ctx, std::size_t prev, std::vector<double>& x, std::vector<double>& h,
            std::vector<double>& probs) const {
    x.assign(in_, 0.0);
    for (std::size_t k = 0; k < d_; ++k) {
      x[k] = ctx[k];
      x[d_ + k] = p_.w[off_tok_ + prev * d_ + k];
    }
    h.assign(H_, 0.0);
    for (std::size_t j = 0; j < H_; ++j) {
      double s = p_.w[off_b1_ + j];
      for (std::size_t k = 0; k < in_; ++k) s += p_.w[off_w1_ + j * in_ + k] * x[k];
      h[j] = std::tanh(s);
    }
    probs.assign(V_, 0.0);
    for (std::size_t v = 0; v < V_; ++v) {
      double s = p_.w[off_b2_ + v];
      for (std::size_t j = 0; j < H_; ++j) s += p_.w[off_w2_ + v * H_ + j] * h[j];
      probs[v] = s;
    }
    softmax_inplace(probs);
  }

  LabelSpace labels_;
  LearnerConfig config_;
  double lr_;
  std::size_t B_ = 0, d_ = 0, H_ = 0, V_ = 0, unk_ = 0, end_ = 0, in_ = 0;
  std::size_t off_ctx_ = 0, off_tok_ = 0, off_w1_ = 0, off_b1_ = 0, off_w2_ = 0, off_b2_ = 0;
  Params p_;
};

}  // namespace

LabelSpace LabelSpace::from_corpus(const Corpus& corpus) {
  LabelSpace s;
  s.task = corpus.task;
  std::set<std::string> intents, types, vocab;
  for (const auto& e : corpus.examples) {
    switch (corpus.task) {
      case TaskKind::IntentDetection: intents.insert(e.label); break;
      case TaskKind::SlotTagging:
        if (e.iob_tags)
          for (const auto& t : *e.iob_tags)
            if (t.size() > 2) types.insert(t.substr(2));
        break;
      case TaskKind::DialogueResponse:
        for (auto& w : words(e.utterance)) vocab.insert(std::move(w));
        for (auto& w : words(e.label)) vocab.insert(std::move(w));
        break;
    }
  }
  s.intents.assign(intents.begin(), intents.end());
  s.slot_types.assign(types.begin(), types.end());
  s.vocabulary.assign(vocab.begin(), vocab.end());
  return s;
}

std::vector<std::string> LabelSpace::tag_set() const {
  std::vector<std::string> tags{"O"};
  for (const auto& t : slot_types) {
    tags.push_back("B-" + t);
    tags.push_back("I-" + t);
  }
  return tags;
}

std::size_t LabelSpace::output_size() const {
  switch (task) {
    case TaskKind::IntentDetection: return intents.size();
    case TaskKind::SlotTagging: return 2 * slot_types.size() + 1;
    case TaskKind::DialogueResponse: return vocabulary.size() + 2;
  }
  return 0;
}

bool LabelSpace::admits(const LabeledExample& e) const {
  if (e.task != task) return false;
  switch (task) {
    case TaskKind::IntentDetection: return std::binary_search(intents.begin(), intents.end(), e.label);
    case TaskKind::SlotTagging:
      if (!e.iob_tags) return false;
      for (const auto& t : *e.iob_tags) {
        if (t == "O") continue;
        if (t.size() < 3 || !std::binary_search(slot_types.begin(), slot_types.end(), t.substr(2))) return false;
      }
      return true;
    case TaskKind::DialogueResponse: return true;
  }
  return false;
}

double default_learning_rate(TaskKind task) { return task == TaskKind::IntentDetection ? 3e-3 : 1e-4; }

std::string LearnerBackend::predict_label(std::string_view) const {
  throw std::logic_error("predict_label is not supported by this learner");
}
std::vector<std::string> LearnerBackend::predict_tags(std::string_view) const {
  throw std::logic_error("predict_tags is not supported by this learner");
}
std::string LearnerBackend::predict_response(std::string_view) const {
  throw std::logic_error("predict_response is not supported by this learner");
}

Evaluation LearnerBackend::evaluate(const Corpus& corpus, hygiene::Component who) const {
  hygiene::check_access(who, corpus.split);
  if (corpus.examples.empty()) throw std::invalid_argument("cannot evaluate on an empty corpus");
  if (corpus.task != task()) throw std::invalid_argument("corpus task does not match learner task");
  return evaluate_examples(corpus.examples);
}

std::unique_ptr<LearnerBackend> spawn(const LabelSpace& labels, std::uint64_t seed, const LearnerConfig& config) {
  switch (labels.task) {
    case TaskKind::IntentDetection: return std::make_unique<IntentLearner>(labels, seed, config);
    case TaskKind::SlotTagging: return std::make_unique<SlotLearner>(labels, seed, config);
    case TaskKind::DialogueResponse: return std::make_unique<DialogueLearner>(labels, seed, config);
  }
  throw std::invalid_argument("unknown task");
}

TrainingResult train(LearnerBackend& learner,
                     const std::function<std::optional<std::vector<LabeledExample>>(int)>& next_batch, int budget) {
  TrainingResult r;
  for (int i = 0; i < budget; ++i) {
    auto batch = next_batch(i);
    if (!batch) break;
    r.loss_curve.push_back(learner.train_step(*batch));
    ++r.iterations_used;
  }
  return r;
}

std::vector<TagSpan> extract_spans(const std::vector<std::string>& tags) {
  std::vector<TagSpan> spans;
  std::optional<TagSpan> open;
  auto close = [&](std::size_t at) {
    if (open) {
      open->end = at;
      spans.push_back(*open);
      open.reset();
    }
  };
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const std::string& t = tags[i];
    if (t.size() > 2 && (t[0] == 'B' || t[0] == 'I') && t[1] == '-') {
      const std::string type = t.substr(2);
      if (t[0] == 'I' && open && open->type == type) continue;
      close(i);
      open = TagSpan{type, i, i};
    } else {
      close(i);
    }
  }
  close(tags.size());
  return spans;
}

double span_f1(const std::vector<std::vector<std::string>>& gold, const std::vector<std::vector<std::string>>& predicted) {
  if (gold.size() != predicted.size()) throw std::invalid_argument("span_f1: sentence count mismatch");
  std::size_t tp = 0, n_gold = 0, n_pred = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const auto g = extract_spans(gold[i]);
    const auto p = extract_spans(predicted[i]);
    n_gold += g.size();
    n_pred += p.size();
    std::set<TagSpan> gs(g.begin(), g.end());
    for (const auto& s : p) tp += gs.count(s);
  }
  if (n_gold == 0 && n_pred == 0) return 1.0;
  if (tp == 0) return 0.0;
  const double prec = static_cast<double>(tp) / static_cast<double>(n_pred);
  const double rec = static_cast<double>(tp) / static_cast<double>(n_gold);
  return 2.0 * prec * rec / (prec + rec);
}

}  // namespace gcn
