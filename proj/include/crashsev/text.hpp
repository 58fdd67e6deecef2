#pragma once

// Narrative featurization: tokenization, TF-IDF, skip-gram embeddings with
// negative sampling, document pooling, and fusion with structured features.

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "crashsev/matrix.hpp"

namespace crashsev {

// Lowercases and splits on runs of non-alphanumeric characters; numbers
// survive as tokens.
std::vector<std::string> tokenize(std::string_view text);

struct TfidfModel {
  std::vector<std::string> vocab;           // column order, lexicographic
  std::unordered_map<std::string, int> index;
  std::vector<std::int64_t> doc_freq;       // aligned with vocab
  std::int64_t n_docs = 0;
  int max_vocab = 500;

  double idf(int term) const;  // ln(N / (1 + df)) + 1
};

// Vocabulary keeps the max_vocab terms with the highest document frequency
// (ties broken lexicographically). Fit on training documents only.
TfidfModel tfidf_fit(const std::vector<std::vector<std::string>>& corpus,
                     int max_vocab = 500);

// Raw term count times IDF, L2-normalized when nonzero. A document with no
// in-vocabulary token maps to the zero vector and bumps the diagnostic.
std::vector<double> tfidf_transform(const TfidfModel& model,
                                    const std::vector<std::string>& doc,
                                    std::size_t* empty_count = nullptr);
std::vector<std::vector<double>> tfidf_transform_corpus(
    const TfidfModel& model, const std::vector<std::vector<std::string>>& docs,
    int n_threads = 1, std::size_t* empty_count = nullptr);
// Plain loop kept as the reference for the parallel transform.
std::vector<std::vector<double>> tfidf_transform_corpus_serial(
    const TfidfModel& model, const std::vector<std::vector<std::string>>& docs,
    std::size_t* empty_count = nullptr);

struct W2vParams {
  int dim = 100;
  int window = 5;
  int negatives = 5;
  int epochs = 15;
  int min_count = 2;
  double lr_initial = 0.025;
  double lr_floor = 1e-4;
  std::uint64_t seed = 0;
  // workers > 1 trades bit-exact reproducibility for speed (lock-free
  // concurrent updates); the default stays deterministic.
  int workers = 1;
};

struct EmbeddingModel {
  W2vParams params;
  std::vector<std::string> vocab;  // frequency-descending, ties lexicographic
  std::unordered_map<std::string, int> index;
  std::vector<std::int64_t> counts;
  std::vector<float> input_vectors;    // |V| x dim, row-major
  std::vector<float> context_vectors;  // |V| x dim
  std::vector<double> epoch_losses;    // mean negative-sampling loss per epoch

  int dim() const { return params.dim; }
};

EmbeddingModel w2v_train(const std::vector<std::vector<std::string>>& corpus,
                         const W2vParams& params);

// Token rows for a document (|doc in-vocab| x dim), the matrix that gets
// mean-pooled.
std::vector<std::vector<float>> token_matrix(const EmbeddingModel& model,
                                             const std::vector<std::string>& doc);

// Unweighted mean over in-vocabulary token vectors; all-OOV or empty
// documents map to the zero vector and bump the diagnostic.
std::vector<double> embed_document(const EmbeddingModel& model,
                                   const std::vector<std::string>& doc,
                                   std::size_t* oov_count = nullptr);
std::vector<std::vector<double>> embed_corpus(
    const EmbeddingModel& model, const std::vector<std::vector<std::string>>& docs,
    int n_threads = 1, std::size_t* oov_count = nullptr);

double cosine_similarity(const EmbeddingModel& model, std::string_view a,
                         std::string_view b);

// Concatenation fusion; text columns keep their names under an "nlp:" prefix.
std::vector<double> fuse_vectors(std::span<const double> structured,
                                 std::span<const double> text);
FeatureMatrix fuse_features(const FeatureMatrix& structured,
                            const std::vector<std::vector<double>>& text_rows,
                            const std::vector<std::string>& text_names);

}  // namespace crashsev
