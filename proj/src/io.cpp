#include "crashsev/io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "crashsev/error.hpp"

namespace crashsev {

namespace {

using nlohmann::json;

constexpr char kMagic[8] = {'C', 'S', 'E', 'V', 'M', 'D', 'L', '1'};

// Little-endian scalar packing, independent of host order.
void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_i32(std::string& out, std::int32_t v) {
  put_u32(out, static_cast<std::uint32_t>(v));
}
void put_f64(std::string& out, double v) {
  put_u64(out, std::bit_cast<std::uint64_t>(v));
}
void put_f32(std::string& out, float v) {
  put_u32(out, std::bit_cast<std::uint32_t>(v));
}

struct Reader {
  const std::string& data;
  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (pos + n > data.size()) throw DataError("model file truncated");
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data[pos + i]))
           << (8 * i);
    }
    pos += 8;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data[pos + i]))
           << (8 * i);
    }
    pos += 4;
    return v;
  }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  float f32() { return std::bit_cast<float>(u32()); }
};

void put_tree(std::string& out, const DecisionTree& tree) {
  put_u32(out, static_cast<std::uint32_t>(tree.nodes.size()));
  put_i32(out, tree.n_classes);
  for (const auto& n : tree.nodes) {
    put_i32(out, n.feature);
    put_f64(out, n.threshold);
    out.push_back(n.missing_left ? 1 : 0);
    put_i32(out, n.left);
    put_i32(out, n.right);
    put_u32(out, static_cast<std::uint32_t>(n.histogram.size()));
    for (const double h : n.histogram) put_f64(out, h);
    put_f64(out, n.value);
    put_f64(out, n.weight);
    put_f64(out, n.impurity);
    put_f64(out, n.split_gain);
  }
}

DecisionTree get_tree(Reader& r) {
  DecisionTree tree;
  const std::uint32_t n_nodes = r.u32();
  tree.n_classes = r.i32();
  tree.nodes.reserve(n_nodes);
  for (std::uint32_t i = 0; i < n_nodes; ++i) {
    TreeNode n;
    n.feature = r.i32();
    n.threshold = r.f64();
    r.need(1);
    n.missing_left = r.data[r.pos++] != 0;
    n.left = r.i32();
    n.right = r.i32();
    const std::uint32_t hist = r.u32();
    n.histogram.resize(hist);
    for (auto& h : n.histogram) h = r.f64();
    n.value = r.f64();
    n.weight = r.f64();
    n.impurity = r.f64();
    n.split_gain = r.f64();
    tree.nodes.push_back(std::move(n));
  }
  return tree;
}

void write_container(const std::string& path, const json& header,
                     const std::string& payload) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  const std::string head = header.dump();
  std::string buf;
  buf.append(kMagic, sizeof(kMagic));
  put_u64(buf, head.size());
  buf += head;
  buf += payload;
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("short write to " + path);
}

json read_container(const std::string& path, std::string& raw, Reader& reader) {
  raw = read_text_file(path);
  if (raw.size() < sizeof(kMagic) + 8 ||
      std::memcmp(raw.data(), kMagic, sizeof(kMagic)) != 0) {
    throw DataError(path + " is not a model container");
  }
  reader.pos = sizeof(kMagic);
  const std::uint64_t head_len = reader.u64();
  reader.need(head_len);
  json header;
  try {
    header = json::parse(raw.substr(reader.pos, head_len));
  } catch (const json::exception& e) {
    throw DataError("bad model header in " + path + ": " + e.what());
  }
  reader.pos += head_len;
  return header;
}

std::string algorithm_of(const json& header, const std::string& path) {
  if (!header.contains("algorithm")) {
    throw DataError("model header in " + path + " has no algorithm tag");
  }
  return header["algorithm"].get<std::string>();
}

}  // namespace

void save_model(const std::string& path, const ForestModel& model) {
  json header = {
      {"algorithm", "random_forest"},
      {"version", 1},
      {"seed", model.seed},
      {"n_classes", model.n_classes},
      {"feature_names", model.feature_names},
      {"params",
       {{"n_trees", model.params.n_trees},
        {"features_per_split", model.params.features_per_split},
        {"bootstrap", model.params.bootstrap},
        {"max_depth", model.params.max_depth},
        {"min_samples_leaf", model.params.min_samples_leaf}}},
  };
  std::string payload;
  put_u32(payload, static_cast<std::uint32_t>(model.trees.size()));
  for (const auto& tree : model.trees) put_tree(payload, tree);
  write_container(path, header, payload);
}

ForestModel load_forest(const std::string& path) {
  std::string raw;
  Reader reader{raw};
  const json header = read_container(path, raw, reader);
  if (algorithm_of(header, path) != "random_forest") {
    throw DataError(path + " does not hold a random forest");
  }
  ForestModel model;
  model.seed = header["seed"].get<std::uint64_t>();
  model.n_classes = header["n_classes"].get<int>();
  model.feature_names = header["feature_names"].get<std::vector<std::string>>();
  const json& p = header["params"];
  model.params.n_trees = p["n_trees"].get<int>();
  model.params.features_per_split = p["features_per_split"].get<int>();
  model.params.bootstrap = p["bootstrap"].get<bool>();
  model.params.max_depth = p["max_depth"].get<int>();
  model.params.min_samples_leaf = p["min_samples_leaf"].get<int>();
  const std::uint32_t n_trees = reader.u32();
  model.trees.reserve(n_trees);
  for (std::uint32_t t = 0; t < n_trees; ++t) model.trees.push_back(get_tree(reader));
  return model;
}

void save_model(const std::string& path, const AdaBoostModel& model) {
  json header = {
      {"algorithm", "adaboost"},
      {"version", 1},
      {"n_classes", model.n_classes},
      {"n_classes_present", model.n_classes_present},
      {"feature_names", model.feature_names},
      {"params",
       {{"max_stages", model.params.max_stages},
        {"weak_max_depth", model.params.weak_max_depth}}},
  };
  std::string payload;
  put_u32(payload, static_cast<std::uint32_t>(model.stages.size()));
  for (const auto& stage : model.stages) {
    put_f64(payload, stage.alpha);
    put_f64(payload, stage.error);
    put_tree(payload, stage.tree);
  }
  write_container(path, header, payload);
}

AdaBoostModel load_adaboost(const std::string& path) {
  std::string raw;
  Reader reader{raw};
  const json header = read_container(path, raw, reader);
  if (algorithm_of(header, path) != "adaboost") {
    throw DataError(path + " does not hold an AdaBoost model");
  }
  AdaBoostModel model;
  model.n_classes = header["n_classes"].get<int>();
  model.n_classes_present = header["n_classes_present"].get<int>();
  model.feature_names = header["feature_names"].get<std::vector<std::string>>();
  const json& p = header["params"];
  model.params.max_stages = p["max_stages"].get<int>();
  model.params.weak_max_depth = p["weak_max_depth"].get<int>();
  const std::uint32_t n_stages = reader.u32();
  model.stages.reserve(n_stages);
  for (std::uint32_t s = 0; s < n_stages; ++s) {
    AdaBoostStage stage;
    stage.alpha = reader.f64();
    stage.error = reader.f64();
    stage.tree = get_tree(reader);
    model.stages.push_back(std::move(stage));
  }
  return model;
}

void save_model(const std::string& path, const GbtModel& model) {
  json header = {
      {"algorithm", "gbt"},
      {"version", 1},
      {"n_classes", model.n_classes},
      {"feature_names", model.feature_names},
      {"best_round", model.best_round},
      {"train_logloss", model.train_logloss},
      {"valid_logloss", model.valid_logloss},
      {"params",
       {{"n_rounds", model.params.n_rounds},
        {"eta", model.params.eta},
        {"lambda_l2", model.params.lambda_l2},
        {"alpha_l1", model.params.alpha_l1},
        {"gamma_min_gain", model.params.gamma_min_gain},
        {"max_depth", model.params.max_depth},
        {"min_samples_leaf", model.params.min_samples_leaf},
        {"base_score", model.params.base_score},
        {"early_stopping_rounds", model.params.early_stopping_rounds}}},
  };
  std::string payload;
  put_u32(payload, static_cast<std::uint32_t>(model.rounds.size()));
  for (const auto& round : model.rounds) {
    put_u32(payload, static_cast<std::uint32_t>(round.size()));
    for (const auto& tree : round) put_tree(payload, tree);
  }
  write_container(path, header, payload);
}

GbtModel load_gbt(const std::string& path) {
  std::string raw;
  Reader reader{raw};
  const json header = read_container(path, raw, reader);
  if (algorithm_of(header, path) != "gbt") {
    throw DataError(path + " does not hold a gradient-boosting model");
  }
  GbtModel model;
  model.n_classes = header["n_classes"].get<int>();
  model.feature_names = header["feature_names"].get<std::vector<std::string>>();
  model.best_round = header["best_round"].get<int>();
  model.train_logloss = header["train_logloss"].get<std::vector<double>>();
  model.valid_logloss = header["valid_logloss"].get<std::vector<double>>();
  const json& p = header["params"];
  model.params.n_rounds = p["n_rounds"].get<int>();
  model.params.eta = p["eta"].get<double>();
  model.params.lambda_l2 = p["lambda_l2"].get<double>();
  model.params.alpha_l1 = p["alpha_l1"].get<double>();
  model.params.gamma_min_gain = p["gamma_min_gain"].get<double>();
  model.params.max_depth = p["max_depth"].get<int>();
  model.params.min_samples_leaf = p["min_samples_leaf"].get<int>();
  model.params.base_score = p["base_score"].get<double>();
  model.params.early_stopping_rounds = p["early_stopping_rounds"].get<int>();
  const std::uint32_t n_rounds = reader.u32();
  model.rounds.reserve(n_rounds);
  for (std::uint32_t r = 0; r < n_rounds; ++r) {
    const std::uint32_t n_classes = reader.u32();
    std::vector<DecisionTree> round;
    round.reserve(n_classes);
    for (std::uint32_t c = 0; c < n_classes; ++c) round.push_back(get_tree(reader));
    model.rounds.push_back(std::move(round));
  }
  return model;
}

AnyModel load_model(const std::string& path) {
  std::string raw;
  Reader reader{raw};
  const json header = read_container(path, raw, reader);
  const std::string algo = algorithm_of(header, path);
  if (algo == "random_forest") return load_forest(path);
  if (algo == "adaboost") return load_adaboost(path);
  if (algo == "gbt") return load_gbt(path);
  throw DataError("unknown model algorithm '" + algo + "' in " + path);
}

void save_embedding(const std::string& path, const EmbeddingModel& model) {
  json header = {
      {"algorithm", "embedding"},
      {"version", 1},
      {"vocab", model.vocab},
      {"counts", model.counts},
      {"epoch_losses", model.epoch_losses},
      {"params",
       {{"dim", model.params.dim},
        {"window", model.params.window},
        {"negatives", model.params.negatives},
        {"epochs", model.params.epochs},
        {"min_count", model.params.min_count},
        {"lr_initial", model.params.lr_initial},
        {"lr_floor", model.params.lr_floor},
        {"seed", model.params.seed},
        {"workers", model.params.workers}}},
  };
  std::string payload;
  for (const float v : model.input_vectors) put_f32(payload, v);
  for (const float v : model.context_vectors) put_f32(payload, v);
  write_container(path, header, payload);
}

EmbeddingModel load_embedding(const std::string& path) {
  std::string raw;
  Reader reader{raw};
  const json header = read_container(path, raw, reader);
  if (algorithm_of(header, path) != "embedding") {
    throw DataError(path + " does not hold an embedding model");
  }
  EmbeddingModel model;
  model.vocab = header["vocab"].get<std::vector<std::string>>();
  model.counts = header["counts"].get<std::vector<std::int64_t>>();
  model.epoch_losses = header["epoch_losses"].get<std::vector<double>>();
  const json& p = header["params"];
  model.params.dim = p["dim"].get<int>();
  model.params.window = p["window"].get<int>();
  model.params.negatives = p["negatives"].get<int>();
  model.params.epochs = p["epochs"].get<int>();
  model.params.min_count = p["min_count"].get<int>();
  model.params.lr_initial = p["lr_initial"].get<double>();
  model.params.lr_floor = p["lr_floor"].get<double>();
  model.params.seed = p["seed"].get<std::uint64_t>();
  model.params.workers = p["workers"].get<int>();
  for (std::size_t i = 0; i < model.vocab.size(); ++i) {
    model.index[model.vocab[i]] = static_cast<int>(i);
  }
  const std::size_t n = model.vocab.size() * model.params.dim;
  model.input_vectors.resize(n);
  model.context_vectors.resize(n);
  for (auto& v : model.input_vectors) v = reader.f32();
  for (auto& v : model.context_vectors) v = reader.f32();
  return model;
}

void save_tfidf(const std::string& path, const TfidfModel& model) {
  json header = {
      {"algorithm", "tfidf"},
      {"version", 1},
      {"vocab", model.vocab},
      {"doc_freq", model.doc_freq},
      {"n_docs", model.n_docs},
      {"max_vocab", model.max_vocab},
  };
  write_container(path, header, "");
}

TfidfModel load_tfidf(const std::string& path) {
  std::string raw;
  Reader reader{raw};
  const json header = read_container(path, raw, reader);
  if (algorithm_of(header, path) != "tfidf") {
    throw DataError(path + " does not hold a tf-idf model");
  }
  TfidfModel model;
  model.vocab = header["vocab"].get<std::vector<std::string>>();
  model.doc_freq = header["doc_freq"].get<std::vector<std::int64_t>>();
  model.n_docs = header["n_docs"].get<std::int64_t>();
  model.max_vocab = header["max_vocab"].get<int>();
  for (std::size_t i = 0; i < model.vocab.size(); ++i) {
    model.index[model.vocab[i]] = static_cast<int>(i);
  }
  return model;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string content((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failure on " + path);
  return content;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("short write to " + path);
}

}  // namespace crashsev
