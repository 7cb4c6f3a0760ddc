#include "gcn/tiny_lm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <mutex>
#include <numeric>
#include <set>
#include <stdexcept>

#include "gcn/text.hpp"
#include "json.hpp"

namespace gcn {

namespace {

void log_softmax_inplace(std::vector<double>& v) {
  const double m = *std::max_element(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  const double lse = m + std::log(s);
  for (double& x : v) x -= lse;
}

std::mutex& registry_mutex() {
  static std::mutex m;
  return m;
}

std::map<std::string, BackendLoader>& registry() {
  static std::map<std::string, BackendLoader> r{
      {"tiny_lm", [](const std::filesystem::path& dir) -> std::unique_ptr<LanguageModelBackend> {
         return TinyLM::load(dir);
       }}};
  return r;
}

}  // namespace

void register_backend(const std::string& name, BackendLoader loader) {
  std::lock_guard lock(registry_mutex());
  registry()[name] = std::move(loader);
}

std::unique_ptr<LanguageModelBackend> load_backend(const std::filesystem::path& dir) {
  std::ifstream in(dir / "backend.json");
  if (!in) throw std::runtime_error("missing backend.json in " + dir.string());
  const auto meta = nlohmann::json::parse(in);
  const std::string name = meta.at("backend").get<std::string>();
  BackendLoader loader;
  {
    std::lock_guard lock(registry_mutex());
    auto it = registry().find(name);
    if (it == registry().end()) throw std::runtime_error("unknown generator backend: " + name);
    loader = it->second;
  }
  return loader(dir);
}

// ---- vocabulary ----

Vocabulary::Vocabulary(std::vector<std::string> tokens, std::vector<std::string> specials)
    : tokens_(std::move(tokens)), specials_(std::move(specials)) {
  if (tokens_.empty() || tokens_[0] != kUnknownToken) throw std::invalid_argument("vocabulary must start with <UNK>");
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], static_cast<int>(i)).second)
      throw std::invalid_argument("duplicate vocabulary token: " + tokens_[i]);
  }
}

Vocabulary Vocabulary::build(const std::vector<std::string>& texts, const SeparatorSet& separators) {
  separators.validate();
  std::vector<std::string> specials{separators.bos, separators.go, separators.eos};
  std::set<std::string> words;
  for (const auto& text : texts) {
    for (const auto& chunk : split_whitespace(text)) {
      if (std::find(specials.begin(), specials.end(), chunk) != specials.end()) continue;
      for (auto& w : tokenize(chunk)) words.insert(std::move(w));
    }
  }
  std::vector<std::string> tokens{kUnknownToken};
  tokens.insert(tokens.end(), specials.begin(), specials.end());
  for (const auto& w : words) {
    if (w != kUnknownToken && std::find(specials.begin(), specials.end(), w) == specials.end()) tokens.push_back(w);
  }
  return Vocabulary(std::move(tokens), std::move(specials));
}

int Vocabulary::id(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? 0 : it->second;
}

std::vector<int> Vocabulary::encode(std::string_view text) const {
  std::vector<int> ids;
  for (const auto& chunk : split_whitespace(text)) {
    if (std::find(specials_.begin(), specials_.end(), chunk) != specials_.end()) {
      ids.push_back(id(chunk));
      continue;
    }
    for (const auto& w : tokenize(chunk)) ids.push_back(id(w));
  }
  return ids;
}

std::string Vocabulary::decode(std::span<const int> ids) const {
  std::string out;
  for (int i : ids) {
    if (!out.empty()) out += ' ';
    out += token(i);
  }
  return out;
}

// ---- model ----

struct TinyLM::Activations {
  std::vector<double> x, h1, h2, logp;
  double value = 0.0;
};

TinyLM::TinyLM(Vocabulary vocabulary, int eos_token, TinyLMConfig config)
    : vocab_(std::move(vocabulary)), eos_(eos_token), config_(config) {
  if (eos_ < 0 || eos_ >= vocab_.size()) throw std::invalid_argument("eos token outside vocabulary");
  if (config_.embedding_dim <= 0 || config_.hidden_dim <= 0 || config_.context_window <= 0)
    throw std::invalid_argument("tiny_lm dimensions must be positive");
  init_layout();
  params_.assign(total_, 0.0);
  Rng rng(derive_seed(config_.seed, 0x7119));
  auto fill = [&](std::size_t off, std::size_t n, double scale) {
    for (std::size_t i = 0; i < n; ++i) params_[off + i] = scale * standard_normal(rng);
  };
  const std::size_t V = static_cast<std::size_t>(vocab_.size());
  const std::size_t d = static_cast<std::size_t>(config_.embedding_dim);
  const std::size_t H = static_cast<std::size_t>(config_.hidden_dim);
  fill(off_embed_, (V + 1) * d, config_.init_scale);
  fill(off_bag_, V * d, config_.init_scale);
  fill(off_w1_, H * static_cast<std::size_t>(input_dim_), 1.0 / std::sqrt(static_cast<double>(input_dim_)));
  fill(off_w2_, H * H, 1.0 / std::sqrt(static_cast<double>(H)));
  fill(off_wo_, V * H, config_.init_scale / std::sqrt(static_cast<double>(H)));
  grad_.assign(total_, 0.0);
  adam_m_.assign(total_, 0.0);
  adam_v_.assign(total_, 0.0);
}

void TinyLM::init_layout() {
  const std::size_t V = static_cast<std::size_t>(vocab_.size());
  const std::size_t d = static_cast<std::size_t>(config_.embedding_dim);
  const std::size_t H = static_cast<std::size_t>(config_.hidden_dim);
  input_dim_ = (config_.context_window + 1) * config_.embedding_dim;
  std::size_t off = 0;
  off_embed_ = off;
  off += (V + 1) * d;  // last row is padding
  off_bag_ = off;
  off += V * d;
  off_w1_ = off;
  off += H * static_cast<std::size_t>(input_dim_);
  off_b1_ = off;
  off += H;
  off_w2_ = off;
  off += H * H;
  off_b2_ = off;
  off += H;
  off_wo_ = off;
  off += V * H;
  off_bo_ = off;
  off += V;
  off_wv_ = off;
  off += config_.value_head ? H : 0;
  off_bv_ = off;
  off += config_.value_head ? 1 : 0;
  total_ = off;
}

std::size_t TinyLM::group_begin(std::size_t group) const {
  switch (group) {
    case 0: return off_wo_;
    case 1: return off_w2_;
    case 2: return off_w1_;
    case 3: return off_embed_;
  }
  throw std::out_of_range("parameter group");
}

std::size_t TinyLM::group_end(std::size_t group) const {
  switch (group) {
    case 0: return total_;
    case 1: return off_wo_;
    case 2: return off_w2_;
    case 3: return off_w1_;
  }
  throw std::out_of_range("parameter group");
}

std::string TinyLM::parameter_group_name(std::size_t group) const {
  static const char* names[] = {"output", "hidden2", "hidden1", "embeddings"};
  if (group >= 4) throw std::out_of_range("parameter group");
  return names[group];
}

void TinyLM::set_trainable_groups(std::size_t count) { trainable_ = std::min<std::size_t>(count, 4); }

std::vector<double> TinyLM::parameter_group_values(std::size_t group) const {
  return {params_.begin() + static_cast<std::ptrdiff_t>(group_begin(group)),
          params_.begin() + static_cast<std::ptrdiff_t>(group_end(group))};
}

void TinyLM::forward_position(std::span<const int> seq, std::size_t t, const std::vector<double>& bag_sum,
                              Activations& a) const {
  const int V = vocab_.size();
  const int d = config_.embedding_dim;
  const int H = config_.hidden_dim;
  const int K = config_.context_window;
  const double* P = params_.data();
  a.x.assign(static_cast<std::size_t>(input_dim_), 0.0);
  for (int k = 0; k < K; ++k) {
    const long idx = static_cast<long>(t) - k;
    const int tok = idx >= 0 ? seq[static_cast<std::size_t>(idx)] : V;
    const double* row = P + off_embed_ + static_cast<std::size_t>(tok) * d;
    std::copy(row, row + d, a.x.begin() + k * d);
  }
  const double inv = 1.0 / static_cast<double>(t + 1);
  for (int j = 0; j < d; ++j) a.x[static_cast<std::size_t>(K * d + j)] = bag_sum[static_cast<std::size_t>(j)] * inv;

  a.h1.resize(static_cast<std::size_t>(H));
  for (int i = 0; i < H; ++i) {
    const double* w = P + off_w1_ + static_cast<std::size_t>(i) * input_dim_;
    double s = P[off_b1_ + i];
    for (int j = 0; j < input_dim_; ++j) s += w[j] * a.x[static_cast<std::size_t>(j)];
    a.h1[static_cast<std::size_t>(i)] = std::tanh(s);
  }
  a.h2.resize(static_cast<std::size_t>(H));
  for (int i = 0; i < H; ++i) {
    const double* w = P + off_w2_ + static_cast<std::size_t>(i) * H;
    double s = P[off_b2_ + i];
    for (int j = 0; j < H; ++j) s += w[j] * a.h1[static_cast<std::size_t>(j)];
    a.h2[static_cast<std::size_t>(i)] = std::tanh(s);
  }
  a.logp.resize(static_cast<std::size_t>(V));
  for (int i = 0; i < V; ++i) {
    const double* w = P + off_wo_ + static_cast<std::size_t>(i) * H;
    double s = P[off_bo_ + i];
    for (int j = 0; j < H; ++j) s += w[j] * a.h2[static_cast<std::size_t>(j)];
    a.logp[static_cast<std::size_t>(i)] = s;
  }
  log_softmax_inplace(a.logp);
  if (config_.value_head) {
    double s = P[off_bv_];
    for (int j = 0; j < H; ++j) s += P[off_wv_ + j] * a.h2[static_cast<std::size_t>(j)];
    a.value = s;
  }
}

void TinyLM::forward_sequence(std::span<const int> seq, std::size_t first, std::vector<Activations>& acts) const {
  const std::size_t d = static_cast<std::size_t>(config_.embedding_dim);
  acts.clear();
  if (seq.size() < 2) return;
  acts.resize(seq.size() - 1 - first);
  std::vector<double> bag(d, 0.0);
  for (std::size_t t = 0; t + 1 < seq.size(); ++t) {
    const double* row = params_.data() + off_bag_ + static_cast<std::size_t>(seq[t]) * d;
    for (std::size_t j = 0; j < d; ++j) bag[j] += row[j];
    if (t >= first) forward_position(seq, t, bag, acts[t - first]);
  }
}

void TinyLM::backward_sequence(std::span<const int> seq, std::size_t first, const std::vector<Activations>& acts,
                               std::span<const std::vector<double>> dlogits, std::span<const double> dvalue) {
  const int V = vocab_.size();
  const int d = config_.embedding_dim;
  const int H = config_.hidden_dim;
  const int K = config_.context_window;
  const double* P = params_.data();
  double* G = grad_.data();
  const bool need_h2 = trainable_ >= 2;
  const bool need_h1 = trainable_ >= 3;
  const bool need_x = trainable_ >= 4;

  std::vector<double> dh2(static_cast<std::size_t>(H)), da2(static_cast<std::size_t>(H)),
      dh1(static_cast<std::size_t>(H)), da1(static_cast<std::size_t>(H)), dx(static_cast<std::size_t>(input_dim_));
  std::vector<std::vector<double>> dbag;
  if (need_x) dbag.assign(acts.size(), std::vector<double>(static_cast<std::size_t>(d), 0.0));

  for (std::size_t p = 0; p < acts.size(); ++p) {
    const Activations& a = acts[p];
    const auto& g = dlogits[p];
    const double gv = dvalue.empty() ? 0.0 : dvalue[p];
    if (trainable_ >= 1) {
      for (int i = 0; i < V; ++i) {
        const double gi = g[static_cast<std::size_t>(i)];
        if (gi == 0.0) continue;
        double* w = G + off_wo_ + static_cast<std::size_t>(i) * H;
        for (int j = 0; j < H; ++j) w[j] += gi * a.h2[static_cast<std::size_t>(j)];
        G[off_bo_ + i] += gi;
      }
      if (config_.value_head && gv != 0.0) {
        for (int j = 0; j < H; ++j) G[off_wv_ + j] += gv * a.h2[static_cast<std::size_t>(j)];
        G[off_bv_] += gv;
      }
    }
    if (!need_h2) continue;
    std::fill(dh2.begin(), dh2.end(), 0.0);
    for (int i = 0; i < V; ++i) {
      const double gi = g[static_cast<std::size_t>(i)];
      if (gi == 0.0) continue;
      const double* w = P + off_wo_ + static_cast<std::size_t>(i) * H;
      for (int j = 0; j < H; ++j) dh2[static_cast<std::size_t>(j)] += gi * w[j];
    }
    if (config_.value_head && gv != 0.0)
      for (int j = 0; j < H; ++j) dh2[static_cast<std::size_t>(j)] += gv * P[off_wv_ + j];
    for (int i = 0; i < H; ++i) {
      const double h = a.h2[static_cast<std::size_t>(i)];
      da2[static_cast<std::size_t>(i)] = dh2[static_cast<std::size_t>(i)] * (1.0 - h * h);
    }
    for (int i = 0; i < H; ++i) {
      const double gi = da2[static_cast<std::size_t>(i)];
      double* w = G + off_w2_ + static_cast<std::size_t>(i) * H;
      for (int j = 0; j < H; ++j) w[j] += gi * a.h1[static_cast<std::size_t>(j)];
      G[off_b2_ + i] += gi;
    }
    if (!need_h1) continue;
    std::fill(dh1.begin(), dh1.end(), 0.0);
    for (int i = 0; i < H; ++i) {
      const double gi = da2[static_cast<std::size_t>(i)];
      const double* w = P + off_w2_ + static_cast<std::size_t>(i) * H;
      for (int j = 0; j < H; ++j) dh1[static_cast<std::size_t>(j)] += gi * w[j];
    }
    for (int i = 0; i < H; ++i) {
      const double h = a.h1[static_cast<std::size_t>(i)];
      da1[static_cast<std::size_t>(i)] = dh1[static_cast<std::size_t>(i)] * (1.0 - h * h);
    }
    for (int i = 0; i < H; ++i) {
      const double gi = da1[static_cast<std::size_t>(i)];
      double* w = G + off_w1_ + static_cast<std::size_t>(i) * input_dim_;
      for (int j = 0; j < input_dim_; ++j) w[j] += gi * a.x[static_cast<std::size_t>(j)];
      G[off_b1_ + i] += gi;
    }
    if (!need_x) continue;
    std::fill(dx.begin(), dx.end(), 0.0);
    for (int i = 0; i < H; ++i) {
      const double gi = da1[static_cast<std::size_t>(i)];
      const double* w = P + off_w1_ + static_cast<std::size_t>(i) * input_dim_;
      for (int j = 0; j < input_dim_; ++j) dx[static_cast<std::size_t>(j)] += gi * w[j];
    }
    const std::size_t t = first + p;
    for (int k = 0; k < K; ++k) {
      const long idx = static_cast<long>(t) - k;
      const int tok = idx >= 0 ? seq[static_cast<std::size_t>(idx)] : V;
      double* row = G + off_embed_ + static_cast<std::size_t>(tok) * d;
      for (int j = 0; j < d; ++j) row[j] += dx[static_cast<std::size_t>(k * d + j)];
    }
    const double inv = 1.0 / static_cast<double>(t + 1);
    for (int j = 0; j < d; ++j) dbag[p][static_cast<std::size_t>(j)] = dx[static_cast<std::size_t>(K * d + j)] * inv;
  }

  if (!need_x || acts.empty()) return;
  // Prefix-mean gradient: token j receives the sum over positions t >= j.
  std::vector<double> running(static_cast<std::size_t>(d), 0.0);
  for (std::size_t t = first + acts.size(); t-- > 0;) {
    if (t >= first) {
      const auto& db = dbag[t - first];
      for (int j = 0; j < d; ++j) running[static_cast<std::size_t>(j)] += db[static_cast<std::size_t>(j)];
    }
    double* row = G + off_bag_ + static_cast<std::size_t>(seq[t]) * d;
    for (int j = 0; j < d; ++j) row[j] += running[static_cast<std::size_t>(j)];
  }
}

std::vector<double> TinyLM::next_token_logprobs(std::span<const int> prefix) const {
  if (prefix.empty()) throw std::invalid_argument("empty prefix");
  const std::size_t d = static_cast<std::size_t>(config_.embedding_dim);
  std::vector<double> bag(d, 0.0);
  for (int tok : prefix) {
    const double* row = params_.data() + off_bag_ + static_cast<std::size_t>(tok) * d;
    for (std::size_t j = 0; j < d; ++j) bag[j] += row[j];
  }
  Activations a;
  forward_position(prefix, prefix.size() - 1, bag, a);
  return a.logp;
}

Sample TinyLM::sample(std::span<const int> prompt, const SamplerConfig& sampler, Rng& rng) const {
  if (prompt.empty()) throw std::invalid_argument("sampling needs a non-empty prompt");
  if (!(sampler.temperature > 0.0)) throw std::invalid_argument("temperature must be positive");
  const std::size_t d = static_cast<std::size_t>(config_.embedding_dim);
  const int V = vocab_.size();
  std::vector<int> seq(prompt.begin(), prompt.end());
  std::vector<double> bag(d, 0.0);
  for (int tok : seq) {
    const double* row = params_.data() + off_bag_ + static_cast<std::size_t>(tok) * d;
    for (std::size_t j = 0; j < d; ++j) bag[j] += row[j];
  }
  Sample out;
  Activations a;
  std::vector<int> order(static_cast<std::size_t>(V));
  std::vector<double> probs(static_cast<std::size_t>(V));
  for (int step = 0; step < sampler.max_new_tokens; ++step) {
    forward_position(seq, seq.size() - 1, bag, a);
    // Sampling distribution: temperature, then top-k, then nucleus.
    for (int i = 0; i < V; ++i) probs[static_cast<std::size_t>(i)] = a.logp[static_cast<std::size_t>(i)] / sampler.temperature;
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int x, int y) { return probs[static_cast<std::size_t>(x)] > probs[static_cast<std::size_t>(y)]; });
    std::size_t keep = order.size();
    if (sampler.top_k > 0) keep = std::min(keep, static_cast<std::size_t>(sampler.top_k));
    const double top = probs[static_cast<std::size_t>(order[0])];
    double z = 0.0;
    std::vector<double> w(keep);
    for (std::size_t i = 0; i < keep; ++i) {
      w[i] = std::exp(probs[static_cast<std::size_t>(order[i])] - top);
      z += w[i];
    }
    if (sampler.top_p < 1.0) {
      double cum = 0.0;
      std::size_t cut = keep;
      for (std::size_t i = 0; i < keep; ++i) {
        cum += w[i] / z;
        if (cum >= sampler.top_p) {
          cut = i + 1;
          break;
        }
      }
      keep = cut;
      z = 0.0;
      for (std::size_t i = 0; i < keep; ++i) z += w[i];
    }
    double u = uniform01(rng) * z;
    std::size_t pick = keep - 1;
    for (std::size_t i = 0; i < keep; ++i) {
      u -= w[i];
      if (u < 0.0) {
        pick = i;
        break;
      }
    }
    const int tok = order[pick];
    out.tokens.push_back(tok);
    out.logprobs.push_back(a.logp[static_cast<std::size_t>(tok)]);
    if (tok == eos_) {
      out.stopped_at_eos = true;
      break;
    }
    seq.push_back(tok);
    const double* row = params_.data() + off_bag_ + static_cast<std::size_t>(tok) * d;
    for (std::size_t j = 0; j < d; ++j) bag[j] += row[j];
  }
  return out;
}

SequenceScores TinyLM::score(std::span<const int> prompt, std::span<const int> continuation) const {
  if (prompt.empty()) throw std::invalid_argument("scoring needs a non-empty prompt");
  SequenceScores out;
  if (continuation.empty()) return out;
  std::vector<int> seq(prompt.begin(), prompt.end());
  seq.insert(seq.end(), continuation.begin(), continuation.end());
  std::vector<Activations> acts;
  forward_sequence(seq, prompt.size() - 1, acts);
  out.logprobs.reserve(continuation.size());
  for (std::size_t i = 0; i < continuation.size(); ++i)
    out.logprobs.push_back(acts[i].logp[static_cast<std::size_t>(continuation[i])]);
  if (config_.value_head) {
    for (const auto& a : acts) out.values.push_back(a.value);
  }
  return out;
}

void TinyLM::accumulate_gradient(std::span<const int> prompt, std::span<const int> continuation,
                                 std::span<const double> dlogprob, std::span<const double> dvalue) {
  if (prompt.empty()) throw std::invalid_argument("empty prompt");
  if (dlogprob.size() != continuation.size() || (!dvalue.empty() && dvalue.size() != continuation.size()))
    throw std::invalid_argument("gradient weights do not match continuation length");
  if (continuation.empty()) return;
  std::vector<int> seq(prompt.begin(), prompt.end());
  seq.insert(seq.end(), continuation.begin(), continuation.end());
  std::vector<Activations> acts;
  const std::size_t first = prompt.size() - 1;
  forward_sequence(seq, first, acts);
  std::vector<std::vector<double>> dlogits(acts.size());
  for (std::size_t i = 0; i < acts.size(); ++i) {
    // d logp[a] / d logits = onehot(a) - softmax
    auto& g = dlogits[i];
    g.resize(acts[i].logp.size());
    for (std::size_t v = 0; v < g.size(); ++v) g[v] = -dlogprob[i] * std::exp(acts[i].logp[v]);
    g[static_cast<std::size_t>(continuation[i])] += dlogprob[i];
  }
  backward_sequence(seq, first, acts, dlogits, config_.value_head ? dvalue : std::span<const double>{});
}

void TinyLM::zero_grad() { std::fill(grad_.begin(), grad_.end(), 0.0); }

void TinyLM::apply_sgd(double learning_rate) {
  const std::size_t begin = trainable_ == 0 ? total_ : group_begin(trainable_ - 1);
  for (std::size_t i = begin; i < total_; ++i) params_[i] -= learning_rate * grad_[i];
  zero_grad();
}

double TinyLM::train_supervised(const std::vector<std::vector<int>>& batch, double learning_rate) {
  zero_grad();
  std::size_t n_tokens = 0;
  for (const auto& s : batch) n_tokens += s.size() > 1 ? s.size() - 1 : 0;
  if (n_tokens == 0) return 0.0;
  const double scale = 1.0 / static_cast<double>(n_tokens);
  double loss = 0.0;
  std::vector<Activations> acts;
  for (const auto& seq : batch) {
    if (seq.size() < 2) continue;
    forward_sequence(seq, 0, acts);
    std::vector<std::vector<double>> dlogits(acts.size());
    for (std::size_t t = 0; t < acts.size(); ++t) {
      const auto target = static_cast<std::size_t>(seq[t + 1]);
      loss -= acts[t].logp[target];
      auto& g = dlogits[t];
      g.resize(acts[t].logp.size());
      for (std::size_t v = 0; v < g.size(); ++v) g[v] = scale * std::exp(acts[t].logp[v]);
      g[target] -= scale;
    }
    backward_sequence(seq, 0, acts, dlogits, {});
  }
  ++adam_step_;
  const double b1 = config_.adam_beta1, b2 = config_.adam_beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(adam_step_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(adam_step_));
  const std::size_t begin = trainable_ == 0 ? total_ : group_begin(trainable_ - 1);
  for (std::size_t i = begin; i < total_; ++i) {
    adam_m_[i] = b1 * adam_m_[i] + (1.0 - b1) * grad_[i];
    adam_v_[i] = b2 * adam_v_[i] + (1.0 - b2) * grad_[i] * grad_[i];
    params_[i] -= learning_rate * (adam_m_[i] / c1) / (std::sqrt(adam_v_[i] / c2) + config_.adam_epsilon);
  }
  zero_grad();
  return loss * scale;
}

std::unique_ptr<LanguageModelBackend> TinyLM::clone() const { return std::make_unique<TinyLM>(*this); }

void TinyLM::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "backend.json");
    out << nlohmann::json{{"backend", backend_name()}}.dump() << '\n';
  }
  nlohmann::json j;
  j["config"] = {{"embedding_dim", config_.embedding_dim}, {"context_window", config_.context_window},
                 {"hidden_dim", config_.hidden_dim},       {"value_head", config_.value_head},
                 {"init_scale", config_.init_scale},       {"seed", config_.seed},
                 {"adam_beta1", config_.adam_beta1},       {"adam_beta2", config_.adam_beta2},
                 {"adam_epsilon", config_.adam_epsilon}};
  j["vocabulary"] = vocab_.tokens();
  j["specials"] = vocab_.specials();
  j["eos"] = eos_;
  j["trainable_groups"] = trainable_;
  j["params"] = params_;
  j["adam_m"] = adam_m_;
  j["adam_v"] = adam_v_;
  j["adam_step"] = adam_step_;
  std::ofstream out(dir / "model.json");
  if (!out) throw std::runtime_error("cannot write " + (dir / "model.json").string());
  out << j.dump() << '\n';
}

std::unique_ptr<TinyLM> TinyLM::load(const std::filesystem::path& dir) {
  std::ifstream in(dir / "model.json");
  if (!in) throw std::runtime_error("cannot read " + (dir / "model.json").string());
  const auto j = nlohmann::json::parse(in);
  TinyLMConfig c;
  const auto& jc = j.at("config");
  c.embedding_dim = jc.at("embedding_dim");
  c.context_window = jc.at("context_window");
  c.hidden_dim = jc.at("hidden_dim");
  c.value_head = jc.at("value_head");
  c.init_scale = jc.at("init_scale");
  c.seed = jc.at("seed");
  c.adam_beta1 = jc.at("adam_beta1");
  c.adam_beta2 = jc.at("adam_beta2");
  c.adam_epsilon = jc.at("adam_epsilon");
  Vocabulary vocab(j.at("vocabulary").get<std::vector<std::string>>(), j.at("specials").get<std::vector<std::string>>());
  auto model = std::make_unique<TinyLM>(std::move(vocab), j.at("eos").get<int>(), c);
  auto params = j.at("params").get<std::vector<double>>();
  if (params.size() != model->params_.size()) throw std::runtime_error("checkpoint parameter count mismatch");
  model->params_ = std::move(params);
  model->adam_m_ = j.at("adam_m").get<std::vector<double>>();
  model->adam_v_ = j.at("adam_v").get<std::vector<double>>();
  model->adam_step_ = j.at("adam_step").get<long long>();
  model->trainable_ = j.at("trainable_groups").get<std::size_t>();
  return model;
}

}  // namespace gcn
