#include "crashsev/text.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <set>
#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "crashsev/error.hpp"
#include "crashsev/rng.hpp"

namespace crashsev {

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (const char ch : text) {
    const auto u = static_cast<unsigned char>(ch);
    if (std::isalnum(u)) {
      current.push_back(static_cast<char>(std::tolower(u)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

double TfidfModel::idf(int term) const {
  return std::log(static_cast<double>(n_docs) /
                  (1.0 + static_cast<double>(doc_freq[term]))) +
         1.0;
}

TfidfModel tfidf_fit(const std::vector<std::vector<std::string>>& corpus,
                     int max_vocab) {
  if (corpus.empty()) throw DataError("cannot fit tf-idf on an empty corpus");
  std::map<std::string, std::int64_t> df;
  for (const auto& doc : corpus) {
    std::set<std::string_view> seen;
    for (const auto& tok : doc) {
      if (seen.insert(tok).second) ++df[tok];
    }
  }
  std::vector<std::pair<std::string, std::int64_t>> terms(df.begin(), df.end());
  // Keep the most document-frequent terms; the map ordering already settles
  // ties lexicographically under stable_sort.
  std::stable_sort(terms.begin(), terms.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (max_vocab >= 0 && terms.size() > static_cast<std::size_t>(max_vocab)) {
    terms.resize(max_vocab);
  }
  std::sort(terms.begin(), terms.end());

  TfidfModel model;
  model.max_vocab = max_vocab;
  model.n_docs = static_cast<std::int64_t>(corpus.size());
  for (auto& [term, freq] : terms) {
    model.index[term] = static_cast<int>(model.vocab.size());
    model.vocab.push_back(term);
    model.doc_freq.push_back(freq);
  }
  return model;
}

std::vector<double> tfidf_transform(const TfidfModel& model,
                                    const std::vector<std::string>& doc,
                                    std::size_t* empty_count) {
  std::vector<double> vec(model.vocab.size(), 0.0);
  bool any = false;
  for (const auto& tok : doc) {
    const auto it = model.index.find(tok);
    if (it == model.index.end()) continue;
    vec[it->second] += 1.0;
    any = true;
  }
  if (!any) {
    if (empty_count) ++*empty_count;
    return vec;
  }
  double norm_sq = 0.0;
  for (std::size_t t = 0; t < vec.size(); ++t) {
    if (vec[t] > 0.0) vec[t] *= model.idf(static_cast<int>(t));
    norm_sq += vec[t] * vec[t];
  }
  const double norm = std::sqrt(norm_sq);
  if (norm > 0.0) {
    for (double& v : vec) v /= norm;
  }
  return vec;
}

std::vector<std::vector<double>> tfidf_transform_corpus_serial(
    const TfidfModel& model, const std::vector<std::vector<std::string>>& docs,
    std::size_t* empty_count) {
  std::vector<std::vector<double>> out(docs.size());
  for (std::size_t d = 0; d < docs.size(); ++d) {
    out[d] = tfidf_transform(model, docs[d], empty_count);
  }
  return out;
}

std::vector<std::vector<double>> tfidf_transform_corpus(
    const TfidfModel& model, const std::vector<std::vector<std::string>>& docs,
    int n_threads, std::size_t* empty_count) {
  std::vector<std::vector<double>> out(docs.size());
  std::vector<std::uint8_t> empty_flags(docs.size(), 0);
  const std::int64_t n = static_cast<std::int64_t>(docs.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(n_threads > 0 ? n_threads : 1)
#endif
  for (std::int64_t d = 0; d < n; ++d) {
    std::size_t empty = 0;
    out[d] = tfidf_transform(model, docs[d], &empty);
    empty_flags[d] = empty ? 1 : 0;
  }
  if (empty_count) {
    for (const auto f : empty_flags) *empty_count += f;
  }
  return out;
}

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct TrainShared {
  const std::vector<std::vector<int>>* docs;  // in-vocab token id sequences
  std::vector<float>* v_in;
  std::vector<float>* v_out;
  std::vector<double>* cum_unigram;  // count^0.75, cumulative
  const W2vParams* params;
  std::int64_t total_steps = 0;  // center tokens across all epochs
  std::atomic<std::int64_t> processed{0};
};

// One worker's pass over a slice of documents for one epoch. Returns
// (loss sum, pair count) for the epoch-loss average.
std::pair<double, std::int64_t> train_slice(TrainShared& sh, std::size_t doc_begin,
                                            std::size_t doc_end, Rng& rng) {
  const int dim = sh.params->dim;
  float* v_in = sh.v_in->data();
  float* v_out = sh.v_out->data();
  std::vector<float> grad_in(dim);
  double loss_sum = 0.0;
  std::int64_t pairs = 0;

  for (std::size_t d = doc_begin; d < doc_end; ++d) {
    const auto& seq = (*sh.docs)[d];
    const int len = static_cast<int>(seq.size());
    for (int t = 0; t < len; ++t) {
      const std::int64_t done = sh.processed.fetch_add(1, std::memory_order_relaxed);
      const double frac =
          static_cast<double>(done) / static_cast<double>(sh.total_steps);
      const double lr =
          std::max(sh.params->lr_floor, sh.params->lr_initial * (1.0 - frac));
      const int shrink = static_cast<int>(rng.uniform_int(sh.params->window));
      const int eff = sh.params->window - shrink;
      const int center = seq[t];
      float* wi = v_in + static_cast<std::size_t>(center) * dim;

      for (int off = -eff; off <= eff; ++off) {
        if (off == 0) continue;
        const int pos = t + off;
        if (pos < 0 || pos >= len) continue;
        const int context = seq[pos];
        std::fill(grad_in.begin(), grad_in.end(), 0.0f);
        for (int neg = 0; neg < sh.params->negatives + 1; ++neg) {
          int target;
          double label;
          if (neg == 0) {
            target = context;
            label = 1.0;
          } else {
            target = static_cast<int>(rng.pick_cumulative(*sh.cum_unigram));
            if (target == context) continue;
            label = 0.0;
          }
          float* wo = v_out + static_cast<std::size_t>(target) * dim;
          double dot = 0.0;
          for (int c = 0; c < dim; ++c) dot += wi[c] * wo[c];
          const double p = sigmoid(dot);
          loss_sum -= std::log(std::max(label > 0.5 ? p : 1.0 - p, 1e-12));
          const double g = (label - p) * lr;
          for (int c = 0; c < dim; ++c) {
            grad_in[c] += static_cast<float>(g) * wo[c];
            wo[c] += static_cast<float>(g) * wi[c];
          }
        }
        for (int c = 0; c < dim; ++c) wi[c] += grad_in[c];
        ++pairs;
      }
    }
  }
  return {loss_sum, pairs};
}

}  // namespace

EmbeddingModel w2v_train(const std::vector<std::vector<std::string>>& corpus,
                         const W2vParams& params) {
  if (params.dim < 1 || params.window < 1 || params.epochs < 1) {
    throw DataError("embedding hyperparameters must be positive");
  }
  std::map<std::string, std::int64_t> counts;
  for (const auto& doc : corpus) {
    for (const auto& tok : doc) ++counts[tok];
  }
  std::vector<std::pair<std::string, std::int64_t>> kept;
  for (const auto& [term, n] : counts) {
    if (n >= params.min_count) kept.emplace_back(term, n);
  }
  if (kept.empty()) {
    throw DataError("no term reaches min_count " +
                    std::to_string(params.min_count) +
                    "; vocabulary is empty");
  }
  // Frequency-descending rows, ties lexicographic (map order is stable
  // under stable_sort).
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  EmbeddingModel model;
  model.params = params;
  for (auto& [term, n] : kept) {
    model.index[term] = static_cast<int>(model.vocab.size());
    model.vocab.push_back(term);
    model.counts.push_back(n);
  }
  const std::size_t V = model.vocab.size();
  const int dim = params.dim;
  model.input_vectors.resize(V * dim);
  model.context_vectors.assign(V * dim, 0.0f);
  Rng init_rng(derive_seed(params.seed, "w2v-init"));
  for (auto& v : model.input_vectors) {
    v = static_cast<float>((init_rng.uniform01() - 0.5) / dim);
  }

  std::vector<std::vector<int>> docs;
  docs.reserve(corpus.size());
  std::int64_t tokens_per_epoch = 0;
  for (const auto& doc : corpus) {
    std::vector<int> seq;
    seq.reserve(doc.size());
    for (const auto& tok : doc) {
      const auto it = model.index.find(tok);
      if (it != model.index.end()) seq.push_back(it->second);
    }
    tokens_per_epoch += static_cast<std::int64_t>(seq.size());
    docs.push_back(std::move(seq));
  }
  if (tokens_per_epoch == 0) {
    throw DataError("corpus has no in-vocabulary tokens");
  }

  std::vector<double> cum;
  cum.reserve(V);
  double acc = 0.0;
  for (const auto n : model.counts) {
    acc += std::pow(static_cast<double>(n), 0.75);
    cum.push_back(acc);
  }

  TrainShared sh;
  sh.docs = &docs;
  sh.v_in = &model.input_vectors;
  sh.v_out = &model.context_vectors;
  sh.cum_unigram = &cum;
  sh.params = &params;
  sh.total_steps = tokens_per_epoch * params.epochs;

  const int workers = std::max(1, params.workers);
  std::vector<Rng> worker_rngs;
  for (int w = 0; w < workers; ++w) {
    worker_rngs.emplace_back(
        derive_seed(params.seed, "w2v-worker:" + std::to_string(w)));
  }
  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    double loss_sum = 0.0;
    std::int64_t pairs = 0;
    if (workers == 1) {
      const auto [ls, pc] = train_slice(sh, 0, docs.size(), worker_rngs[0]);
      loss_sum = ls;
      pairs = pc;
    } else {
      std::vector<double> losses(workers, 0.0);
      std::vector<std::int64_t> pair_counts(workers, 0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(workers)
#endif
      for (int w = 0; w < workers; ++w) {
        const std::size_t begin = docs.size() * w / workers;
        const std::size_t end = docs.size() * (w + 1) / workers;
        const auto [ls, pc] = train_slice(sh, begin, end, worker_rngs[w]);
        losses[w] = ls;
        pair_counts[w] = pc;
      }
      for (int w = 0; w < workers; ++w) {
        loss_sum += losses[w];
        pairs += pair_counts[w];
      }
    }
    model.epoch_losses.push_back(pairs > 0 ? loss_sum / pairs : 0.0);
  }
  return model;
}

std::vector<std::vector<float>> token_matrix(const EmbeddingModel& model,
                                             const std::vector<std::string>& doc) {
  std::vector<std::vector<float>> rows;
  for (const auto& tok : doc) {
    const auto it = model.index.find(tok);
    if (it == model.index.end()) continue;
    const float* v =
        model.input_vectors.data() + static_cast<std::size_t>(it->second) * model.dim();
    rows.emplace_back(v, v + model.dim());
  }
  return rows;
}

std::vector<double> embed_document(const EmbeddingModel& model,
                                   const std::vector<std::string>& doc,
                                   std::size_t* oov_count) {
  std::vector<double> vec(model.dim(), 0.0);
  std::size_t n = 0;
  for (const auto& tok : doc) {
    const auto it = model.index.find(tok);
    if (it == model.index.end()) continue;
    const float* v =
        model.input_vectors.data() + static_cast<std::size_t>(it->second) * model.dim();
    for (int c = 0; c < model.dim(); ++c) vec[c] += v[c];
    ++n;
  }
  if (n == 0) {
    if (oov_count) ++*oov_count;
    return vec;
  }
  for (double& v : vec) v /= static_cast<double>(n);
  return vec;
}

std::vector<std::vector<double>> embed_corpus(
    const EmbeddingModel& model, const std::vector<std::vector<std::string>>& docs,
    int n_threads, std::size_t* oov_count) {
  std::vector<std::vector<double>> out(docs.size());
  std::vector<std::uint8_t> oov_flags(docs.size(), 0);
  const std::int64_t n = static_cast<std::int64_t>(docs.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(n_threads > 0 ? n_threads : 1)
#endif
  for (std::int64_t d = 0; d < n; ++d) {
    std::size_t oov = 0;
    out[d] = embed_document(model, docs[d], &oov);
    oov_flags[d] = oov ? 1 : 0;
  }
  if (oov_count) {
    for (const auto f : oov_flags) *oov_count += f;
  }
  return out;
}

double cosine_similarity(const EmbeddingModel& model, std::string_view a,
                         std::string_view b) {
  const auto ia = model.index.find(std::string(a));
  const auto ib = model.index.find(std::string(b));
  if (ia == model.index.end() || ib == model.index.end()) return 0.0;
  const float* va =
      model.input_vectors.data() + static_cast<std::size_t>(ia->second) * model.dim();
  const float* vb =
      model.input_vectors.data() + static_cast<std::size_t>(ib->second) * model.dim();
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (int c = 0; c < model.dim(); ++c) {
    dot += static_cast<double>(va[c]) * vb[c];
    na += static_cast<double>(va[c]) * va[c];
    nb += static_cast<double>(vb[c]) * vb[c];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::vector<double> fuse_vectors(std::span<const double> structured,
                                 std::span<const double> text) {
  std::vector<double> out;
  out.reserve(structured.size() + text.size());
  out.insert(out.end(), structured.begin(), structured.end());
  out.insert(out.end(), text.begin(), text.end());
  return out;
}

FeatureMatrix fuse_features(const FeatureMatrix& structured,
                            const std::vector<std::vector<double>>& text_rows,
                            const std::vector<std::string>& text_names) {
  if (text_rows.size() != structured.rows()) {
    throw DataError("text row count does not match the structured matrix");
  }
  FeatureMatrix text(structured.rows(), text_names.size());
  for (std::size_t c = 0; c < text_names.size(); ++c) {
    text.columns[c].name = "nlp:" + text_names[c];
    text.columns[c].kind = ColumnKind::Text;
  }
  for (std::size_t r = 0; r < text_rows.size(); ++r) {
    if (text_rows[r].size() != text_names.size()) {
      throw DataError("text vector length does not match its feature names");
    }
    for (std::size_t c = 0; c < text_names.size(); ++c) {
      text.at(r, c) = text_rows[r][c];
    }
  }
  FeatureMatrix fused = FeatureMatrix::hstack(structured, text);
  fused.check_invariants();
  return fused;
}

}  // namespace crashsev
