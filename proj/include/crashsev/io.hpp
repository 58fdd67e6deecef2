#pragma once

// Versioned model persistence: a JSON header (format tag, version,
// hyperparameters, vocabulary/schema) followed by a little-endian binary
// payload. Model round-trips are prediction-exact; embedding matrices are
// stored as raw 32-bit floats.

#include <string>
#include <variant>

#include "crashsev/adaboost.hpp"
#include "crashsev/forest.hpp"
#include "crashsev/gbt.hpp"
#include "crashsev/text.hpp"

namespace crashsev {

void save_model(const std::string& path, const ForestModel& model);
void save_model(const std::string& path, const AdaBoostModel& model);
void save_model(const std::string& path, const GbtModel& model);

using AnyModel = std::variant<ForestModel, AdaBoostModel, GbtModel>;

// Dispatches on the header's algorithm tag.
AnyModel load_model(const std::string& path);
ForestModel load_forest(const std::string& path);
AdaBoostModel load_adaboost(const std::string& path);
GbtModel load_gbt(const std::string& path);

void save_embedding(const std::string& path, const EmbeddingModel& model);
EmbeddingModel load_embedding(const std::string& path);

void save_tfidf(const std::string& path, const TfidfModel& model);
TfidfModel load_tfidf(const std::string& path);

// Whole-file helpers.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace crashsev
