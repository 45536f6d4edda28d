// SPDX-License-Identifier: Apache-2.0
#include "textstack/bilstm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "textstack/io.hpp"
#include "textstack/logreg.hpp"
#include "textstack/rng.hpp"

namespace textstack {

std::vector<std::string> build_rnn_vocab(
    const std::vector<ProcessedTweet>& train) {
  std::unordered_map<std::string, std::pair<std::int64_t, std::size_t>> counts;
  std::size_t order = 0;
  for (const auto& tweet : train) {
    for (const auto& token : tweet.tokens) {
      auto [it, inserted] = counts.try_emplace(token, 0, order);
      if (inserted) ++order;
      ++it->second.first;
    }
  }
  struct WordCount {
    std::string word;
    std::int64_t count;
    std::size_t first_seen;
  };
  std::vector<WordCount> sorted;
  sorted.reserve(counts.size());
  for (auto& [word, cs] : counts) {
    if (word == kNullToken) continue;
    sorted.push_back({word, cs.first, cs.second});
  }
  std::sort(sorted.begin(), sorted.end(),
            [](const WordCount& a, const WordCount& b) {
              if (a.count != b.count) return a.count > b.count;
              return a.first_seen < b.first_seen;
            });
  std::vector<std::string> words;
  words.reserve(sorted.size() + 1);
  words.emplace_back(kNullToken);
  for (auto& wc : sorted) words.push_back(std::move(wc.word));
  return words;
}

namespace {

EmbeddingTable make_table(std::vector<std::string> words, int dim) {
  EmbeddingTable table;
  table.words = std::move(words);
  for (std::size_t i = 0; i < table.words.size(); ++i) {
    table.index.emplace(table.words[i], static_cast<int>(i));
  }
  table.vectors.resize(static_cast<Eigen::Index>(table.words.size()), dim);
  return table;
}

void fill_random_row(Eigen::MatrixXd& m, Eigen::Index row, Rng& rng) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    m(row, c) = rng.uniform(-0.1, 0.1);
  }
}

}  // namespace

EmbeddingTable random_embeddings(std::vector<std::string> words, int dim,
                                 std::uint64_t seed) {
  EmbeddingTable table = make_table(std::move(words), dim);
  Rng rng(seed);
  for (Eigen::Index r = 0; r < table.vectors.rows(); ++r) {
    fill_random_row(table.vectors, r, rng);
  }
  return table;
}

EmbeddingTable load_embeddings(const std::filesystem::path& path,
                               std::vector<std::string> words,
                               std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot read embedding file: " + path.string());
  }
  std::unordered_map<std::string, std::vector<double>> file_vectors;
  std::string line;
  std::size_t lineno = 0;
  int dim = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    std::vector<double> values;
    double v;
    while (ss >> v) values.push_back(v);
    if (!ss.eof()) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                               ": non-numeric vector component");
    }
    if (dim < 0) {
      dim = static_cast<int>(values.size());
      if (dim == 0) {
        throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                                 ": first line has no vector components");
      }
    } else if (static_cast<int>(values.size()) != dim) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                               ": expected " + std::to_string(dim) +
                               " components, got " +
                               std::to_string(values.size()));
    }
    file_vectors.emplace(std::move(word), std::move(values));
  }
  if (dim < 0) {
    throw std::runtime_error(path.string() + ": empty embedding file");
  }

  EmbeddingTable table = make_table(std::move(words), dim);
  Rng rng(seed);
  for (Eigen::Index r = 0; r < table.vectors.rows(); ++r) {
    auto it = file_vectors.find(table.words[static_cast<std::size_t>(r)]);
    if (it == file_vectors.end()) {
      fill_random_row(table.vectors, r, rng);
    } else {
      for (int c = 0; c < dim; ++c) {
        table.vectors(r, c) = it->second[static_cast<std::size_t>(c)];
      }
    }
  }
  return table;
}

namespace {

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

void init_uniform(Eigen::MatrixXd& m, double bound, Rng& rng) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      m(r, c) = rng.uniform(-bound, bound);
    }
  }
}

LstmParams make_lstm_params(int hidden, int input, Rng& rng) {
  LstmParams p;
  const double wb = 1.0 / std::sqrt(static_cast<double>(input));
  const double ub = 1.0 / std::sqrt(static_cast<double>(hidden));
  for (auto* m : {&p.wi, &p.wf, &p.wg, &p.wo}) {
    m->resize(hidden, input);
    init_uniform(*m, wb, rng);
  }
  for (auto* m : {&p.ui, &p.uf, &p.ug, &p.uo}) {
    m->resize(hidden, hidden);
    init_uniform(*m, ub, rng);
  }
  p.bi = Eigen::VectorXd::Zero(hidden);
  p.bf = Eigen::VectorXd::Ones(hidden);  // open forget gates at the start
  p.bg = Eigen::VectorXd::Zero(hidden);
  p.bo = Eigen::VectorXd::Zero(hidden);
  return p;
}

LstmParams zero_like(const LstmParams& p) {
  LstmParams z;
  z.wi = Eigen::MatrixXd::Zero(p.wi.rows(), p.wi.cols());
  z.wf = Eigen::MatrixXd::Zero(p.wf.rows(), p.wf.cols());
  z.wg = Eigen::MatrixXd::Zero(p.wg.rows(), p.wg.cols());
  z.wo = Eigen::MatrixXd::Zero(p.wo.rows(), p.wo.cols());
  z.ui = Eigen::MatrixXd::Zero(p.ui.rows(), p.ui.cols());
  z.uf = Eigen::MatrixXd::Zero(p.uf.rows(), p.uf.cols());
  z.ug = Eigen::MatrixXd::Zero(p.ug.rows(), p.ug.cols());
  z.uo = Eigen::MatrixXd::Zero(p.uo.rows(), p.uo.cols());
  z.bi = Eigen::VectorXd::Zero(p.bi.size());
  z.bf = Eigen::VectorXd::Zero(p.bf.size());
  z.bg = Eigen::VectorXd::Zero(p.bg.size());
  z.bo = Eigen::VectorXd::Zero(p.bo.size());
  return z;
}

struct Gradients {
  LstmParams fwd, bwd;
  Eigen::VectorXd attention;
  Eigen::MatrixXd w_out;
  Eigen::VectorXd b_out;
  Eigen::MatrixXd embed;
};

Gradients zero_gradients(const BiLstmModel& model) {
  Gradients g;
  g.fwd = zero_like(model.fwd);
  g.bwd = zero_like(model.bwd);
  g.attention = Eigen::VectorXd::Zero(model.attention.size());
  g.w_out = Eigen::MatrixXd::Zero(model.w_out.rows(), model.w_out.cols());
  g.b_out = Eigen::VectorXd::Zero(model.b_out.size());
  g.embed = Eigen::MatrixXd::Zero(model.embeddings.vectors.rows(),
                                  model.embeddings.vectors.cols());
  return g;
}

// Parameter blocks in a fixed order shared by the model, its gradients, and
// the Adam moments. The embedding block is last and only traversed when the
// table is trainable.
template <typename Fn>
void for_each_block(LstmParams& p, Fn&& fn) {
  for (auto* m : {&p.wi, &p.wf, &p.wg, &p.wo, &p.ui, &p.uf, &p.ug, &p.uo}) {
    fn(m->data(), static_cast<std::size_t>(m->size()));
  }
  for (auto* v : {&p.bi, &p.bf, &p.bg, &p.bo}) {
    fn(v->data(), static_cast<std::size_t>(v->size()));
  }
}

template <typename Fn>
void for_each_block(BiLstmModel& model, Fn&& fn) {
  for_each_block(model.fwd, fn);
  for_each_block(model.bwd, fn);
  fn(model.attention.data(), static_cast<std::size_t>(model.attention.size()));
  fn(model.w_out.data(), static_cast<std::size_t>(model.w_out.size()));
  fn(model.b_out.data(), static_cast<std::size_t>(model.b_out.size()));
  if (model.embeddings.trainable) {
    fn(model.embeddings.vectors.data(),
       static_cast<std::size_t>(model.embeddings.vectors.size()));
  }
}

template <typename Fn>
void for_each_block(Gradients& g, bool trainable_embeddings, Fn&& fn) {
  for_each_block(g.fwd, fn);
  for_each_block(g.bwd, fn);
  fn(g.attention.data(), static_cast<std::size_t>(g.attention.size()));
  fn(g.w_out.data(), static_cast<std::size_t>(g.w_out.size()));
  fn(g.b_out.data(), static_cast<std::size_t>(g.b_out.size()));
  if (trainable_embeddings) {
    fn(g.embed.data(), static_cast<std::size_t>(g.embed.size()));
  }
}

inline Eigen::ArrayXd sigmoid(const Eigen::ArrayXd& x) {
  return 1.0 / (1.0 + (-x).exp());
}

struct LstmCache {
  std::vector<Eigen::ArrayXd> i, f, g, o, c, tanh_c;
  std::vector<Eigen::VectorXd> h;
};

// Runs one direction over xs in processing order.
LstmCache run_lstm(const LstmParams& p, const std::vector<Eigen::VectorXd>& xs) {
  const auto hidden = p.bi.size();
  const std::size_t steps = xs.size();
  LstmCache cache;
  cache.i.resize(steps);
  cache.f.resize(steps);
  cache.g.resize(steps);
  cache.o.resize(steps);
  cache.c.resize(steps);
  cache.tanh_c.resize(steps);
  cache.h.resize(steps);

  Eigen::VectorXd h_prev = Eigen::VectorXd::Zero(hidden);
  Eigen::ArrayXd c_prev = Eigen::ArrayXd::Zero(hidden);
  for (std::size_t t = 0; t < steps; ++t) {
    cache.i[t] = sigmoid((p.wi * xs[t] + p.ui * h_prev + p.bi).array());
    cache.f[t] = sigmoid((p.wf * xs[t] + p.uf * h_prev + p.bf).array());
    cache.g[t] = (p.wg * xs[t] + p.ug * h_prev + p.bg).array().tanh();
    cache.o[t] = sigmoid((p.wo * xs[t] + p.uo * h_prev + p.bo).array());
    cache.c[t] = cache.f[t] * c_prev + cache.i[t] * cache.g[t];
    cache.tanh_c[t] = cache.c[t].tanh();
    cache.h[t] = (cache.o[t] * cache.tanh_c[t]).matrix();
    h_prev = cache.h[t];
    c_prev = cache.c[t];
  }
  return cache;
}

// Backpropagation through time for one direction. dh_out[t] is the loss
// gradient wrt h at processing step t; returns per-step input gradients.
std::vector<Eigen::VectorXd> backprop_lstm(
    const LstmParams& p, const std::vector<Eigen::VectorXd>& xs,
    const LstmCache& cache, const std::vector<Eigen::VectorXd>& dh_out,
    LstmParams& grads) {
  const auto hidden = p.bi.size();
  const std::size_t steps = xs.size();
  std::vector<Eigen::VectorXd> dx(steps);

  Eigen::VectorXd dh_next = Eigen::VectorXd::Zero(hidden);
  Eigen::ArrayXd dc_next = Eigen::ArrayXd::Zero(hidden);
  for (std::size_t ti = steps; ti-- > 0;) {
    Eigen::ArrayXd dh = (dh_out[ti] + dh_next).array();
    Eigen::ArrayXd dc =
        dc_next + dh * cache.o[ti] * (1.0 - cache.tanh_c[ti].square());
    Eigen::ArrayXd do_ = dh * cache.tanh_c[ti];

    Eigen::ArrayXd c_prev = ti == 0 ? Eigen::ArrayXd::Zero(hidden).eval()
                                    : cache.c[ti - 1];
    Eigen::VectorXd h_prev = ti == 0 ? Eigen::VectorXd::Zero(hidden).eval()
                                     : cache.h[ti - 1];

    Eigen::VectorXd dpre_i =
        (dc * cache.g[ti] * cache.i[ti] * (1.0 - cache.i[ti])).matrix();
    Eigen::VectorXd dpre_f =
        (dc * c_prev * cache.f[ti] * (1.0 - cache.f[ti])).matrix();
    Eigen::VectorXd dpre_g =
        (dc * cache.i[ti] * (1.0 - cache.g[ti].square())).matrix();
    Eigen::VectorXd dpre_o = (do_ * cache.o[ti] * (1.0 - cache.o[ti])).matrix();

    grads.wi.noalias() += dpre_i * xs[ti].transpose();
    grads.wf.noalias() += dpre_f * xs[ti].transpose();
    grads.wg.noalias() += dpre_g * xs[ti].transpose();
    grads.wo.noalias() += dpre_o * xs[ti].transpose();
    grads.ui.noalias() += dpre_i * h_prev.transpose();
    grads.uf.noalias() += dpre_f * h_prev.transpose();
    grads.ug.noalias() += dpre_g * h_prev.transpose();
    grads.uo.noalias() += dpre_o * h_prev.transpose();
    grads.bi += dpre_i;
    grads.bf += dpre_f;
    grads.bg += dpre_g;
    grads.bo += dpre_o;

    dx[ti] = p.wi.transpose() * dpre_i + p.wf.transpose() * dpre_f +
             p.wg.transpose() * dpre_g + p.wo.transpose() * dpre_o;
    dh_next = p.ui.transpose() * dpre_i + p.uf.transpose() * dpre_f +
              p.ug.transpose() * dpre_g + p.uo.transpose() * dpre_o;
    dc_next = dc * cache.f[ti];
  }
  return dx;
}

std::vector<int> token_indices(const BiLstmModel& model,
                               const std::vector<std::string>& tokens,
                               bool* truncated) {
  std::vector<int> indices;
  const std::size_t limit = static_cast<std::size_t>(model.max_len);
  if (truncated) *truncated = tokens.size() > limit;
  const std::size_t take = std::min(tokens.size(), limit);
  indices.reserve(std::max<std::size_t>(take, 1));
  for (std::size_t t = 0; t < take; ++t) {
    indices.push_back(model.embeddings.lookup(tokens[t]));
  }
  if (indices.empty()) indices.push_back(0);  // learned null embedding
  return indices;
}

struct ForwardCache {
  std::vector<int> indices;
  std::vector<Eigen::VectorXd> xs_fwd, xs_bwd;
  LstmCache fwd, bwd;
  Eigen::MatrixXd states;       // 2h x T, column t = [h_fwd_t; h_bwd_t]
  Eigen::MatrixXd tanh_states;  // tanh of states
  Eigen::VectorXd alpha;        // T
  Eigen::VectorXd pooled;       // 2h
  Eigen::VectorXd pooled_tanh;  // 2h
  Eigen::VectorXd probs;        // C
};

ForwardCache forward_cached(const BiLstmModel& model,
                            const std::vector<int>& indices) {
  const int h = model.hidden;
  const std::size_t steps = indices.size();
  ForwardCache fc;
  fc.indices = indices;
  fc.xs_fwd.resize(steps);
  fc.xs_bwd.resize(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    fc.xs_fwd[t] = model.embeddings.vectors.row(indices[t]).transpose();
    fc.xs_bwd[t] =
        model.embeddings.vectors.row(indices[steps - 1 - t]).transpose();
  }
  fc.fwd = run_lstm(model.fwd, fc.xs_fwd);
  fc.bwd = run_lstm(model.bwd, fc.xs_bwd);

  fc.states.resize(2 * h, static_cast<Eigen::Index>(steps));
  for (std::size_t t = 0; t < steps; ++t) {
    fc.states.col(static_cast<Eigen::Index>(t)).head(h) = fc.fwd.h[t];
    fc.states.col(static_cast<Eigen::Index>(t)).tail(h) =
        fc.bwd.h[steps - 1 - t];
  }
  fc.tanh_states = fc.states.array().tanh().matrix();

  Eigen::VectorXd scores = fc.tanh_states.transpose() * model.attention;
  fc.alpha = softmax(scores);
  fc.pooled = fc.states * fc.alpha;
  fc.pooled_tanh = fc.pooled.array().tanh();
  fc.probs = softmax(model.w_out * fc.pooled_tanh + model.b_out);
  return fc;
}

// Accumulates one example's gradients; returns the example loss.
double backward_example(const BiLstmModel& model, const ForwardCache& fc,
                        int label, Gradients& grads) {
  const int h = model.hidden;
  const std::size_t steps = fc.indices.size();
  const double loss = -std::log(std::max(fc.probs[label], 1e-300));

  Eigen::VectorXd dz = fc.probs;
  dz[label] -= 1.0;
  grads.w_out.noalias() += dz * fc.pooled_tanh.transpose();
  grads.b_out += dz;

  Eigen::VectorXd da = model.w_out.transpose() * dz;
  Eigen::VectorXd dr =
      (da.array() * (1.0 - fc.pooled_tanh.array().square())).matrix();

  // r = states * alpha
  Eigen::VectorXd dalpha = fc.states.transpose() * dr;
  double dot = fc.alpha.dot(dalpha);
  Eigen::VectorXd dscore =
      (fc.alpha.array() * (dalpha.array() - dot)).matrix();

  grads.attention.noalias() += fc.tanh_states * dscore;

  Eigen::MatrixXd dstates = dr * fc.alpha.transpose();  // 2h x T
  dstates.array() += (model.attention * dscore.transpose()).array() *
                     (1.0 - fc.tanh_states.array().square());

  std::vector<Eigen::VectorXd> dh_fwd(steps), dh_bwd(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    dh_fwd[t] = dstates.col(static_cast<Eigen::Index>(t)).head(h);
    // backward step t processed original position steps-1-t
    dh_bwd[t] = dstates.col(static_cast<Eigen::Index>(steps - 1 - t)).tail(h);
  }

  auto dx_fwd = backprop_lstm(model.fwd, fc.xs_fwd, fc.fwd, dh_fwd, grads.fwd);
  auto dx_bwd = backprop_lstm(model.bwd, fc.xs_bwd, fc.bwd, dh_bwd, grads.bwd);
  for (std::size_t t = 0; t < steps; ++t) {
    grads.embed.row(fc.indices[t]) += dx_fwd[t].transpose();
    grads.embed.row(fc.indices[steps - 1 - t]) += dx_bwd[t].transpose();
  }
  return loss;
}

}  // namespace

BiLstmModel make_bilstm(EmbeddingTable embeddings, int hidden, int max_len,
                        std::uint64_t seed) {
  if (hidden < 1) throw std::runtime_error("hidden size must be >= 1");
  if (max_len < 1) throw std::runtime_error("max_len must be >= 1");
  BiLstmModel model;
  model.embeddings = std::move(embeddings);
  model.hidden = hidden;
  model.max_len = max_len;
  model.class_names = class_name_vector();
  const int classes = static_cast<int>(model.class_names.size());
  const int dim = model.embeddings.dim();

  Rng rng(seed);
  model.fwd = make_lstm_params(hidden, dim, rng);
  model.bwd = make_lstm_params(hidden, dim, rng);
  model.attention.resize(2 * hidden);
  const double ab = 1.0 / std::sqrt(2.0 * hidden);
  for (Eigen::Index i = 0; i < model.attention.size(); ++i) {
    model.attention[i] = rng.uniform(-ab, ab);
  }
  model.w_out.resize(classes, 2 * hidden);
  init_uniform(model.w_out, ab, rng);
  model.b_out = Eigen::VectorXd::Zero(classes);
  return model;
}

BiLstmOutput bilstm_forward(const BiLstmModel& model,
                            const std::vector<std::string>& tokens) {
  BiLstmOutput out;
  auto indices = token_indices(model, tokens, &out.truncated);
  ForwardCache fc = forward_cached(model, indices);
  out.probs = fc.probs;
  if (tokens.empty()) {
    out.attention.tokens = {std::string(kNullToken)};
  } else {
    out.attention.tokens.assign(tokens.begin(),
                                tokens.begin() + static_cast<std::ptrdiff_t>(
                                                     indices.size()));
  }
  out.attention.weights = fc.alpha;
  return out;
}

double bilstm_loss(const BiLstmModel& model,
                   const std::vector<std::string>& tokens, int label) {
  auto indices = token_indices(model, tokens, nullptr);
  ForwardCache fc = forward_cached(model, indices);
  return -std::log(std::max(fc.probs[label], 1e-300));
}

BiLstmFit fit_bilstm(const std::vector<ProcessedTweet>& train,
                     const BiLstmConfig& config, EmbeddingTable embeddings) {
  if (train.empty()) throw std::runtime_error("fit_bilstm: empty training set");
  embeddings.trainable = config.trainable_embeddings;

  BiLstmFit fit;
  fit.model = make_bilstm(std::move(embeddings), config.hidden, config.max_len,
                          mix_seed(config.seed, 1));
  auto& model = fit.model;

  Gradients grads = zero_gradients(model);
  Gradients adam_m = zero_gradients(model);
  Gradients adam_v = zero_gradients(model);

  const std::size_t n = train.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(mix_seed(config.seed, 2));

  const std::size_t batch_size =
      config.batch_size <= 0 ? n : static_cast<std::size_t>(config.batch_size);

  // The parameter, gradient, and moment blocks line up index-for-index and
  // their storage never reallocates during training.
  std::vector<std::pair<double*, std::size_t>> pb, gb, mb, vb;
  for_each_block(model, [&](double* d, std::size_t s) { pb.emplace_back(d, s); });
  for_each_block(grads, model.embeddings.trainable,
                 [&](double* d, std::size_t s) { gb.emplace_back(d, s); });
  for_each_block(adam_m, model.embeddings.trainable,
                 [&](double* d, std::size_t s) { mb.emplace_back(d, s); });
  for_each_block(adam_v, model.embeddings.trainable,
                 [&](double* d, std::size_t s) { vb.emplace_back(d, s); });

  long step = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += batch_size) {
      const std::size_t count = std::min(batch_size, n - start);

      for_each_block(grads, model.embeddings.trainable,
                     [](double* data, std::size_t size) {
                       std::fill(data, data + size, 0.0);
                     });
      for (std::size_t k = 0; k < count; ++k) {
        const auto& tweet = train[order[start + k]];
        auto indices = token_indices(model, tweet.tokens, nullptr);
        ForwardCache fc = forward_cached(model, indices);
        epoch_loss +=
            backward_example(model, fc, static_cast<int>(tweet.label), grads);
      }

      const double inv = 1.0 / static_cast<double>(count);
      double sq_norm = 0.0;
      for_each_block(grads, model.embeddings.trainable,
                     [&](double* data, std::size_t size) {
                       for (std::size_t i = 0; i < size; ++i) {
                         data[i] *= inv;
                         sq_norm += data[i] * data[i];
                       }
                     });
      double norm = std::sqrt(sq_norm);
      if (config.clip_norm > 0.0 && norm > config.clip_norm) {
        const double scale = config.clip_norm / norm;
        for_each_block(grads, model.embeddings.trainable,
                       [&](double* data, std::size_t size) {
                         for (std::size_t i = 0; i < size; ++i) {
                           data[i] *= scale;
                         }
                       });
        norm = config.clip_norm;
      }
      fit.max_clipped_norm = std::max(fit.max_clipped_norm, norm);

      ++step;
      const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(step));
      const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(step));
      for (std::size_t b = 0; b < pb.size(); ++b) {
        double* p = pb[b].first;
        double* g = gb[b].first;
        double* m = mb[b].first;
        double* v = vb[b].first;
        const std::size_t size = pb[b].second;
        for (std::size_t i = 0; i < size; ++i) {
          m[i] = kAdamBeta1 * m[i] + (1.0 - kAdamBeta1) * g[i];
          v[i] = kAdamBeta2 * v[i] + (1.0 - kAdamBeta2) * g[i] * g[i];
          p[i] -= config.learning_rate * (m[i] / bc1) /
                  (std::sqrt(v[i] / bc2) + kAdamEps);
        }
      }
    }
    epoch_loss /= static_cast<double>(n);
    if (!std::isfinite(epoch_loss)) {
      throw std::runtime_error("fit_bilstm: non-finite loss at epoch " +
                               std::to_string(epoch + 1));
    }
    fit.epoch_losses.push_back(epoch_loss);
  }
  return fit;
}

namespace {

// Independent scalar-loop forward in extended precision, used only by the
// finite-difference side of the gradient check. Central differences of an
// O(1) loss at epsilon 1e-5 lose ~11 digits to cancellation in plain
// doubles, which would swamp the relative error of small-magnitude
// gradients; 80-bit evaluation keeps the oracle noise well below the 1e-4
// gate. It also re-derives the forward pass without Eigen expressions.
long double loss_extended(const BiLstmModel& model,
                          const std::vector<int>& indices, int label) {
  using LD = long double;
  const int h = model.hidden;
  const int dim = model.embeddings.dim();
  const std::size_t steps = indices.size();

  auto run_direction = [&](const LstmParams& p, bool reversed) {
    std::vector<std::vector<LD>> states(steps, std::vector<LD>(h));
    std::vector<LD> h_prev(static_cast<std::size_t>(h), 0.0L);
    std::vector<LD> c_prev(static_cast<std::size_t>(h), 0.0L);
    for (std::size_t step = 0; step < steps; ++step) {
      const std::size_t pos = reversed ? steps - 1 - step : step;
      const int row = indices[pos];
      std::vector<LD> h_new(static_cast<std::size_t>(h));
      std::vector<LD> c_new(static_cast<std::size_t>(h));
      for (int r = 0; r < h; ++r) {
        LD zi = p.bi[r], zf = p.bf[r], zg = p.bg[r], zo = p.bo[r];
        for (int c = 0; c < dim; ++c) {
          const LD x = model.embeddings.vectors(row, c);
          zi += static_cast<LD>(p.wi(r, c)) * x;
          zf += static_cast<LD>(p.wf(r, c)) * x;
          zg += static_cast<LD>(p.wg(r, c)) * x;
          zo += static_cast<LD>(p.wo(r, c)) * x;
        }
        for (int c = 0; c < h; ++c) {
          const LD hp = h_prev[static_cast<std::size_t>(c)];
          zi += static_cast<LD>(p.ui(r, c)) * hp;
          zf += static_cast<LD>(p.uf(r, c)) * hp;
          zg += static_cast<LD>(p.ug(r, c)) * hp;
          zo += static_cast<LD>(p.uo(r, c)) * hp;
        }
        const LD gate_i = 1.0L / (1.0L + std::exp(-zi));
        const LD gate_f = 1.0L / (1.0L + std::exp(-zf));
        const LD gate_g = std::tanh(zg);
        const LD gate_o = 1.0L / (1.0L + std::exp(-zo));
        c_new[static_cast<std::size_t>(r)] =
            gate_f * c_prev[static_cast<std::size_t>(r)] + gate_i * gate_g;
        h_new[static_cast<std::size_t>(r)] =
            gate_o * std::tanh(c_new[static_cast<std::size_t>(r)]);
      }
      states[pos] = h_new;
      h_prev = std::move(h_new);
      c_prev = std::move(c_new);
    }
    return states;
  };

  auto fwd_states = run_direction(model.fwd, false);
  auto bwd_states = run_direction(model.bwd, true);

  std::vector<LD> scores(steps);
  LD score_max = -std::numeric_limits<LD>::infinity();
  for (std::size_t t = 0; t < steps; ++t) {
    LD s = 0.0L;
    for (int k = 0; k < h; ++k) {
      s += static_cast<LD>(model.attention[k]) *
           std::tanh(fwd_states[t][static_cast<std::size_t>(k)]);
      s += static_cast<LD>(model.attention[h + k]) *
           std::tanh(bwd_states[t][static_cast<std::size_t>(k)]);
    }
    scores[t] = s;
    score_max = std::max(score_max, s);
  }
  LD alpha_sum = 0.0L;
  std::vector<LD> alpha(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    alpha[t] = std::exp(scores[t] - score_max);
    alpha_sum += alpha[t];
  }

  std::vector<LD> pooled(static_cast<std::size_t>(2 * h), 0.0L);
  for (std::size_t t = 0; t < steps; ++t) {
    const LD weight = alpha[t] / alpha_sum;
    for (int k = 0; k < h; ++k) {
      pooled[static_cast<std::size_t>(k)] +=
          weight * fwd_states[t][static_cast<std::size_t>(k)];
      pooled[static_cast<std::size_t>(h + k)] +=
          weight * bwd_states[t][static_cast<std::size_t>(k)];
    }
  }

  const int classes = static_cast<int>(model.b_out.size());
  std::vector<LD> logits(static_cast<std::size_t>(classes));
  LD logit_max = -std::numeric_limits<LD>::infinity();
  for (int c = 0; c < classes; ++c) {
    LD z = model.b_out[c];
    for (int k = 0; k < 2 * h; ++k) {
      z += static_cast<LD>(model.w_out(c, k)) *
           std::tanh(pooled[static_cast<std::size_t>(k)]);
    }
    logits[static_cast<std::size_t>(c)] = z;
    logit_max = std::max(logit_max, z);
  }
  LD lse = 0.0L;
  for (int c = 0; c < classes; ++c) {
    lse += std::exp(logits[static_cast<std::size_t>(c)] - logit_max);
  }
  return logit_max + std::log(lse) - logits[static_cast<std::size_t>(label)];
}

}  // namespace

double bilstm_gradient_check(const BiLstmModel& model,
                             const std::vector<std::string>& tokens, int label,
                             double epsilon) {
  BiLstmModel probe = model;
  auto indices = token_indices(probe, tokens, nullptr);
  Gradients grads = zero_gradients(probe);
  {
    ForwardCache fc = forward_cached(probe, indices);
    backward_example(probe, fc, label, grads);
  }

  std::vector<std::pair<double*, std::size_t>> pb, gb;
  for_each_block(probe, [&](double* d, std::size_t s) { pb.emplace_back(d, s); });
  for_each_block(grads, probe.embeddings.trainable,
                 [&](double* d, std::size_t s) { gb.emplace_back(d, s); });

  double worst = 0.0;
  for (std::size_t b = 0; b < pb.size(); ++b) {
    double* params = pb[b].first;
    const double* analytic = gb[b].first;
    for (std::size_t i = 0; i < pb[b].second; ++i) {
      const double saved = params[i];
      const double up = saved + epsilon;
      const double down = saved - epsilon;
      params[i] = up;
      const long double plus = loss_extended(probe, indices, label);
      params[i] = down;
      const long double minus = loss_extended(probe, indices, label);
      params[i] = saved;
      const long double step =
          static_cast<long double>(up) - static_cast<long double>(down);
      const double fd = static_cast<double>((plus - minus) / step);
      const double denom = std::max(1e-12, std::abs(analytic[i]) + std::abs(fd));
      worst = std::max(worst, std::abs(analytic[i] - fd) / denom);
    }
  }
  return worst;
}

std::array<std::vector<AttendedWord>, kNumClasses> classwise_attention(
    const BiLstmModel& model, const DatasetSplit& split,
    const AttentionTableOptions& options) {
  std::array<std::map<std::string, std::pair<double, int>>, kNumClasses> sums;

  auto accumulate = [&](const std::vector<ProcessedTweet>& tweets) {
    for (const auto& tweet : tweets) {
      BiLstmOutput out = bilstm_forward(model, tweet.tokens);
      int cls = options.use_predicted
                    ? argmax_lowest(out.probs)
                    : static_cast<int>(tweet.label);
      for (std::size_t t = 0; t < out.attention.tokens.size(); ++t) {
        const auto& word = out.attention.tokens[t];
        if (is_sentinel_token(word) || word == kNullToken) continue;
        auto& slot = sums[static_cast<std::size_t>(cls)][word];
        slot.first += out.attention.weights[static_cast<Eigen::Index>(t)];
        slot.second += 1;
      }
    }
  };
  accumulate(split.train);
  accumulate(split.valid);
  accumulate(split.test);

  std::array<std::vector<AttendedWord>, kNumClasses> tables;
  for (int c = 0; c < kNumClasses; ++c) {
    auto& table = tables[static_cast<std::size_t>(c)];
    for (const auto& [word, sum_count] : sums[static_cast<std::size_t>(c)]) {
      if (sum_count.second < options.min_count) continue;
      table.push_back(
          {word, sum_count.first / sum_count.second, sum_count.second});
    }
    std::sort(table.begin(), table.end(),
              [](const AttendedWord& a, const AttendedWord& b) {
                if (a.mean_attention != b.mean_attention) {
                  return a.mean_attention > b.mean_attention;
                }
                if (a.count != b.count) return a.count > b.count;
                return a.word < b.word;
              });
    if (options.top_k >= 0 &&
        table.size() > static_cast<std::size_t>(options.top_k)) {
      table.resize(static_cast<std::size_t>(options.top_k));
    }
  }
  return tables;
}

namespace {

void save_lstm_params(const LstmParams& p, BinaryWriter& out) {
  out.mat(p.wi);
  out.mat(p.wf);
  out.mat(p.wg);
  out.mat(p.wo);
  out.mat(p.ui);
  out.mat(p.uf);
  out.mat(p.ug);
  out.mat(p.uo);
  out.vec(p.bi);
  out.vec(p.bf);
  out.vec(p.bg);
  out.vec(p.bo);
}

LstmParams load_lstm_params(BinaryReader& in) {
  LstmParams p;
  p.wi = in.mat();
  p.wf = in.mat();
  p.wg = in.mat();
  p.wo = in.mat();
  p.ui = in.mat();
  p.uf = in.mat();
  p.ug = in.mat();
  p.uo = in.mat();
  p.bi = in.vec();
  p.bf = in.vec();
  p.bg = in.vec();
  p.bo = in.vec();
  return p;
}

}  // namespace

void save_bilstm(const BiLstmModel& model, const std::filesystem::path& path,
                 const std::string& ingest_hash) {
  BinaryWriter out(path);
  out.str(kModelMagic);
  out.u32(static_cast<std::uint32_t>(ModelKind::bilstm));
  out.str(ingest_hash);
  out.strings(model.class_names);
  out.u32(static_cast<std::uint32_t>(model.hidden));
  out.u32(static_cast<std::uint32_t>(model.max_len));
  out.u32(model.embeddings.trainable ? 1 : 0);
  out.strings(model.embeddings.words);
  out.mat(model.embeddings.vectors);
  save_lstm_params(model.fwd, out);
  save_lstm_params(model.bwd, out);
  out.vec(model.attention);
  out.mat(model.w_out);
  out.vec(model.b_out);
  out.close();
}

BiLstmModel load_bilstm(const std::filesystem::path& path,
                        std::string* ingest_hash) {
  BinaryReader in(path);
  if (in.str() != kModelMagic) {
    throw std::runtime_error("not a model file: " + path.string());
  }
  if (in.u32() != static_cast<std::uint32_t>(ModelKind::bilstm)) {
    throw std::runtime_error("not a BiLSTM model: " + path.string());
  }
  std::string hash = in.str();
  if (ingest_hash) *ingest_hash = hash;

  BiLstmModel model;
  model.class_names = in.strings();
  model.hidden = static_cast<int>(in.u32());
  model.max_len = static_cast<int>(in.u32());
  model.embeddings.trainable = in.u32() != 0;
  model.embeddings.words = in.strings();
  model.embeddings.vectors = in.mat();
  for (std::size_t i = 0; i < model.embeddings.words.size(); ++i) {
    model.embeddings.index.emplace(model.embeddings.words[i],
                                   static_cast<int>(i));
  }
  model.fwd = load_lstm_params(in);
  model.bwd = load_lstm_params(in);
  model.attention = in.vec();
  model.w_out = in.mat();
  model.b_out = in.vec();
  if (model.attention.size() != 2 * model.hidden ||
      model.w_out.cols() != 2 * model.hidden) {
    throw std::runtime_error("corrupt BiLSTM model: " + path.string());
  }
  return model;
}

}  // namespace textstack
