#include "mpbcfw/data.hpp"

#include "json.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

namespace mpbcfw {

using nlohmann::json;

namespace {

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  return out;
}

[[noreturn]] void fail_line(std::size_t line_no, const std::string& what) {
  throw ParseError("line " + std::to_string(line_no) + ": " + what);
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

std::vector<std::string_view> tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t' || line[pos] == '\r')) ++pos;
    const std::size_t start = pos;
    while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t' && line[pos] != '\r') ++pos;
    if (pos > start) out.push_back(line.substr(start, pos - start));
  }
  return out;
}

std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

json parse_json(std::istream& in) {
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
}

void check_header(const json& doc, const std::string& kind) {
  if (!doc.is_object() || !doc.contains("header") || !doc.contains("examples"))
    throw ParseError("expected an object with 'header' and 'examples'");
  const json& h = doc.at("header");
  if (h.value("task", std::string()) != kind) throw ParseError("header.task must be '" + kind + "'");
  if (h.value("version", -1) != kDatasetFormatVersion) throw ParseError("unsupported dataset format version");
  if (!doc.at("examples").is_array()) throw ParseError("'examples' must be an array");
  const auto n = h.at("n").get<std::size_t>();
  if (n == 0) throw ParseError("header.n must be positive");
  if (doc.at("examples").size() != n) throw ParseError("header.n does not match the number of examples");
}

Eigen::MatrixXd read_rows(const json& rows, Eigen::Index cols, std::size_t example) {
  const std::string where = "example " + std::to_string(example) + ": ";
  if (!rows.is_array()) throw ParseError(where + "features must be an array of rows");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const json& row = rows[r];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw ParseError(where + "feature row " + std::to_string(r) + " has the wrong dimension");
    for (Eigen::Index c = 0; c < cols; ++c) {
      const json& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number()) throw ParseError(where + "non-numeric feature");
      m(static_cast<Eigen::Index>(r), c) = v.get<double>();
    }
  }
  return m;
}

json write_rows(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Label read_labels(const json& labels, std::size_t example) {
  if (!labels.is_array()) throw ParseError("example " + std::to_string(example) + ": labels must be an array");
  Label y;
  for (const auto& v : labels) {
    if (!v.is_number_integer()) throw ParseError("example " + std::to_string(example) + ": labels must be integers");
    y.push_back(v.get<int>());
  }
  return y;
}

// Rewraps constructor validation failures as parse errors.
template <typename Fn>
auto build(Fn&& fn) {
  try {
    return fn();
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what());
  }
}

/// K class means with norm `radius`: scaled unit vectors when dim >= K,
/// otherwise a regular polygon in the first two coordinates.
std::vector<VectorD> class_means(int classes, Eigen::Index dim, double radius) {
  std::vector<VectorD> means;
  for (int k = 0; k < classes; ++k) {
    VectorD m = VectorD::Zero(dim);
    if (dim >= classes) {
      m[k] = radius;
    } else if (dim >= 2) {
      const double angle = 2.0 * std::numbers::pi * k / classes;
      m[0] = radius * std::cos(angle);
      m[1] = radius * std::sin(angle);
    } else {
      m[0] = radius * (2.0 * k - (classes - 1)) / std::max(1, classes - 1);
    }
    means.push_back(std::move(m));
  }
  return means;
}

VectorD gaussian_vector(Eigen::Index dim, double sigma, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  VectorD v(dim);
  for (Eigen::Index k = 0; k < dim; ++k) v[k] = sigma * normal(rng);
  return v;
}

std::string hex_of(const VectorD& w) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve(static_cast<std::size_t>(w.size()) * 16);
  for (Eigen::Index k = 0; k < w.size(); ++k) {
    const auto bits = std::bit_cast<std::uint64_t>(w[k]);
    for (int shift = 60; shift >= 0; shift -= 4) out += digits[(bits >> shift) & 0xF];
  }
  return out;
}

VectorD weights_from_hex(const std::string& hex, Eigen::Index dim) {
  if (hex.size() != static_cast<std::size_t>(dim) * 16) throw ParseError("model: weight payload length mismatch");
  VectorD w(dim);
  for (Eigen::Index k = 0; k < dim; ++k) {
    std::uint64_t bits = 0;
    const char* begin = hex.data() + k * 16;
    const auto res = std::from_chars(begin, begin + 16, bits, 16);
    if (res.ec != std::errc() || res.ptr != begin + 16) throw ParseError("model: corrupt weight payload");
    w[k] = std::bit_cast<double>(bits);
  }
  return w;
}

}  // namespace

// ---------------------------------------------------------------- multiclass

MulticlassTask read_multiclass(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  int classes = 0;
  long long dim = 0;
  bool have_header = false;
  std::vector<MulticlassTask::Example> examples;

  while (std::getline(in, line)) {
    ++line_no;
    const auto tok = tokens(line);
    if (tok.empty()) continue;
    if (!have_header) {
      if (tok.size() != 3 || tok[0] != "#multiclass" || !parse_number(tok[1], classes) || !parse_number(tok[2], dim))
        fail_line(line_no, "expected header '#multiclass K d'");
      if (classes < 2) fail_line(line_no, "K must be at least 2");
      if (dim < 1) fail_line(line_no, "d must be positive");
      have_header = true;
      continue;
    }
    MulticlassTask::Example ex;
    ex.features = VectorD::Zero(dim);
    if (!parse_number(tok[0], ex.label)) fail_line(line_no, "bad label '" + std::string(tok[0]) + "'");
    if (ex.label < 0 || ex.label >= classes) fail_line(line_no, "label out of range");
    long long prev = 0;
    for (std::size_t t = 1; t < tok.size(); ++t) {
      const auto colon = tok[t].find(':');
      long long idx = 0;
      double val = 0.0;
      if (colon == std::string_view::npos || !parse_number(tok[t].substr(0, colon), idx) ||
          !parse_number(tok[t].substr(colon + 1), val))
        fail_line(line_no, "bad feature '" + std::string(tok[t]) + "'");
      if (idx <= prev) fail_line(line_no, "feature indices must be strictly increasing");
      if (idx > dim) fail_line(line_no, "feature index exceeds declared dimension");
      if (!std::isfinite(val)) fail_line(line_no, "non-finite feature value");
      ex.features[idx - 1] = val;
      prev = idx;
    }
    examples.push_back(std::move(ex));
  }
  if (!have_header) throw ParseError("line 1: missing '#multiclass K d' header");
  if (examples.empty()) throw ParseError("dataset has no examples");
  return build([&] { return MulticlassTask(classes, dim, std::move(examples)); });
}

void write_multiclass(std::ostream& out, const MulticlassTask& task) {
  out << "#multiclass " << task.num_classes() << ' ' << task.base_dim() << '\n';
  for (const auto& ex : task.examples()) {
    out << ex.label;
    for (Eigen::Index k = 0; k < ex.features.size(); ++k) {
      const double v = ex.features[k];
      if (v == 0.0 && !std::signbit(v)) continue;
      out << ' ' << (k + 1) << ':' << shortest(v);
    }
    out << '\n';
  }
}

// --------------------------------------------------------------------- chain

ChainTask read_chain(std::istream& in) {
  const json doc = parse_json(in);
  try {
    check_header(doc, "chain");
    const json& h = doc.at("header");
    const int K = h.at("num_labels").get<int>();
    const auto dim = h.at("unary_dim").get<Eigen::Index>();
    if (K < 2 || dim < 1) throw ParseError("chain header: num_labels >= 2 and unary_dim >= 1 required");
    std::vector<ChainTask::Example> examples;
    std::size_t i = 0;
    for (const auto& e : doc.at("examples")) {
      ChainTask::Example ex;
      ex.labels = read_labels(e.at("labels"), i);
      ex.features = read_rows(e.at("features"), dim, i);
      if (static_cast<std::size_t>(ex.features.rows()) != ex.labels.size())
        throw ParseError("example " + std::to_string(i) + ": labels and features differ in length");
      examples.push_back(std::move(ex));
      ++i;
    }
    return build([&] { return ChainTask(K, dim, std::move(examples)); });
  } catch (const json::exception& e) {
    throw ParseError(std::string("chain dataset: ") + e.what());
  }
}

void write_chain(std::ostream& out, const ChainTask& task) {
  json doc;
  doc["header"] = {{"task", "chain"},
                   {"version", kDatasetFormatVersion},
                   {"n", task.size()},
                   {"num_labels", task.num_labels()},
                   {"unary_dim", task.unary_dim()}};
  json examples = json::array();
  for (const auto& ex : task.examples()) examples.push_back({{"labels", ex.labels}, {"features", write_rows(ex.features)}});
  doc["examples"] = std::move(examples);
  out << doc.dump() << '\n';
}

// -------------------------------------------------------------- binary potts

BinaryPottsTask read_binary_potts(std::istream& in) {
  const json doc = parse_json(in);
  try {
    check_header(doc, "binary-potts");
    const auto dim = doc.at("header").at("unary_dim").get<Eigen::Index>();
    if (dim < 1) throw ParseError("binary-potts header: unary_dim >= 1 required");
    std::vector<BinaryPottsTask::Example> examples;
    std::size_t i = 0;
    for (const auto& e : doc.at("examples")) {
      const std::string where = "example " + std::to_string(i) + ": ";
      BinaryPottsTask::Example ex;
      ex.labels = read_labels(e.at("labels"), i);
      ex.features = read_rows(e.at("features"), dim, i);
      if (static_cast<std::size_t>(ex.features.rows()) != ex.labels.size())
        throw ParseError(where + "labels and features differ in length");
      for (const auto& edge : e.at("edges")) {
        if (!edge.is_array() || edge.size() != 2) throw ParseError(where + "edges must be [k, l] pairs");
        const auto k = edge[0].get<long long>();
        const auto l = edge[1].get<long long>();
        if (k < 0 || l < 0 || static_cast<std::size_t>(std::max(k, l)) >= ex.labels.size())
          throw ParseError(where + "edge endpoint out of range");
        if (k == l) throw ParseError(where + "self-loop edge");
        if (k > l) throw ParseError(where + "edges must satisfy k < l");
        ex.edges.emplace_back(static_cast<std::size_t>(k), static_cast<std::size_t>(l));
      }
      examples.push_back(std::move(ex));
      ++i;
    }
    return build([&] { return BinaryPottsTask(dim, std::move(examples)); });
  } catch (const json::exception& e) {
    throw ParseError(std::string("binary-potts dataset: ") + e.what());
  }
}

void write_binary_potts(std::ostream& out, const BinaryPottsTask& task) {
  json doc;
  doc["header"] = {{"task", "binary-potts"},
                   {"version", kDatasetFormatVersion},
                   {"n", task.size()},
                   {"unary_dim", task.unary_dim()}};
  json examples = json::array();
  for (const auto& ex : task.examples()) {
    json edges = json::array();
    for (auto [k, l] : ex.edges) edges.push_back({k, l});
    examples.push_back({{"labels", ex.labels}, {"features", write_rows(ex.features)}, {"edges", std::move(edges)}});
  }
  doc["examples"] = std::move(examples);
  out << doc.dump() << '\n';
}

// ---------------------------------------------------------------- file level

MulticlassTask load_multiclass(const std::string& path) {
  auto in = open_in(path);
  return read_multiclass(in);
}

ChainTask load_chain(const std::string& path) {
  auto in = open_in(path);
  return read_chain(in);
}

BinaryPottsTask load_binary_potts(const std::string& path) {
  auto in = open_in(path);
  return read_binary_potts(in);
}

TaskKind detect_task_kind(const std::string& path) {
  auto in = open_in(path);
  char c = 0;
  while (in.get(c) && std::isspace(static_cast<unsigned char>(c))) {
  }
  if (c == '#') return TaskKind::Multiclass;
  if (c != '{') throw ParseError("cannot determine the task kind of '" + path + "'");
  in.seekg(0);
  const json doc = parse_json(in);
  try {
    return task_kind_from_string(doc.at("header").at("task").get<std::string>());
  } catch (const std::exception& e) {
    throw ParseError("cannot determine the task kind of '" + path + "': " + e.what());
  }
}

std::unique_ptr<StructuredTask> load_dataset(const std::string& path, std::optional<TaskKind> kind) {
  switch (kind ? *kind : detect_task_kind(path)) {
    case TaskKind::Multiclass:
      return std::make_unique<MulticlassTask>(load_multiclass(path));
    case TaskKind::Chain:
      return std::make_unique<ChainTask>(load_chain(path));
    case TaskKind::BinaryPotts:
      return std::make_unique<BinaryPottsTask>(load_binary_potts(path));
  }
  throw std::logic_error("unreachable");
}

void save_dataset(const StructuredTask& task, const std::string& path) {
  auto out = open_out(path);
  if (const auto* t = dynamic_cast<const MulticlassTask*>(&task))
    write_multiclass(out, *t);
  else if (const auto* t = dynamic_cast<const ChainTask*>(&task))
    write_chain(out, *t);
  else if (const auto* t = dynamic_cast<const BinaryPottsTask*>(&task))
    write_binary_potts(out, *t);
  else
    throw std::invalid_argument("save_dataset: unsupported task type");
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

// ---------------------------------------------------------------- generators

MulticlassTask generate_multiclass(const MulticlassGenParams& p, std::uint64_t seed) {
  if (p.n == 0 || p.num_classes < 2 || p.dim < 1) throw std::invalid_argument("generate_multiclass: bad sizes");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, p.num_classes - 1);
  const auto means = class_means(p.num_classes, p.dim, p.separation);
  std::vector<MulticlassTask::Example> examples;
  examples.reserve(p.n);
  for (std::size_t i = 0; i < p.n; ++i) {
    const int y = pick(rng);
    examples.push_back({means[static_cast<std::size_t>(y)] + gaussian_vector(p.dim, p.noise, rng), y});
  }
  return MulticlassTask(p.num_classes, p.dim, std::move(examples));
}

ChainTask generate_chain(const ChainGenParams& p, std::uint64_t seed) {
  if (p.n == 0 || p.length == 0 || p.num_labels < 2 || p.dim < 1) throw std::invalid_argument("generate_chain: bad sizes");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int K = p.num_labels;

  // Random row-stochastic transition matrix with a self-transition bonus.
  Eigen::MatrixXd transition(K, K);
  for (int a = 0; a < K; ++a) {
    for (int b = 0; b < K; ++b) transition(a, b) = unit(rng) + (a == b ? p.stickiness : 0.0);
    transition.row(a) /= transition.row(a).sum();
  }
  auto draw = [&](auto row) {
    double u = unit(rng);
    for (int b = 0; b < K - 1; ++b) {
      if (u < row[b]) return b;
      u -= row[b];
    }
    return K - 1;
  };

  const auto means = class_means(K, p.dim, p.separation);
  std::uniform_int_distribution<int> first(0, K - 1);
  std::vector<ChainTask::Example> examples;
  examples.reserve(p.n);
  for (std::size_t i = 0; i < p.n; ++i) {
    ChainTask::Example ex;
    ex.labels.resize(p.length);
    ex.features.resize(static_cast<Eigen::Index>(p.length), p.dim);
    for (std::size_t l = 0; l < p.length; ++l) {
      ex.labels[l] = l == 0 ? first(rng) : draw(transition.row(ex.labels[l - 1]));
      ex.features.row(static_cast<Eigen::Index>(l)) =
          (means[static_cast<std::size_t>(ex.labels[l])] + gaussian_vector(p.dim, p.noise, rng)).transpose();
    }
    examples.push_back(std::move(ex));
  }
  return ChainTask(K, p.dim, std::move(examples));
}

std::vector<BinaryPottsTask::Edge> grid_edges(std::size_t height, std::size_t width) {
  std::vector<BinaryPottsTask::Edge> edges;
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      const std::size_t v = r * width + c;
      if (c + 1 < width) edges.emplace_back(v, v + 1);
      if (r + 1 < height) edges.emplace_back(v, v + width);
    }
  }
  return edges;
}

BinaryPottsTask generate_binary_potts(const GridGenParams& p, std::uint64_t seed) {
  if (p.n == 0 || p.height == 0 || p.width == 0 || p.dim < 1) throw std::invalid_argument("generate_binary_potts: bad sizes");
  if (!(p.smoothing >= 0.0 && p.smoothing <= 1.0)) throw std::invalid_argument("generate_binary_potts: smoothing must be in [0, 1]");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t L = p.height * p.width;
  const auto edges = grid_edges(p.height, p.width);

  std::vector<BinaryPottsTask::Example> examples;
  examples.reserve(p.n);
  for (std::size_t i = 0; i < p.n; ++i) {
    // Random field, a few sweeps of neighbour averaging, then a blend towards
    // its mean controlled by `smoothing`, thresholded at 1/2.
    std::vector<double> field(L);
    for (auto& f : field) f = unit(rng);
    for (int sweep = 0; sweep < 2; ++sweep) {
      std::vector<double> sum = field;
      std::vector<double> count(L, 1.0);
      for (auto [k, l] : edges) {
        sum[k] += field[l];
        sum[l] += field[k];
        count[k] += 1.0;
        count[l] += 1.0;
      }
      for (std::size_t v = 0; v < L; ++v) field[v] = sum[v] / count[v];
    }
    double mean = 0.0;
    for (double f : field) mean += f;
    mean /= static_cast<double>(L);

    BinaryPottsTask::Example ex;
    ex.labels.resize(L);
    ex.features.resize(static_cast<Eigen::Index>(L), p.dim);
    ex.edges = edges;
    for (std::size_t v = 0; v < L; ++v) {
      const double f = (1.0 - p.smoothing) * field[v] + p.smoothing * mean;
      ex.labels[v] = f > 0.5 ? 1 : 0;
      VectorD x = gaussian_vector(p.dim, p.noise, rng);
      x[0] += ex.labels[v] ? p.signal : -p.signal;
      ex.features.row(static_cast<Eigen::Index>(v)) = x.transpose();
    }
    examples.push_back(std::move(ex));
  }
  return BinaryPottsTask(p.dim, std::move(examples));
}

// --------------------------------------------------------------------- model

ModelMetadata describe_task(const StructuredTask& task) {
  ModelMetadata m;
  m.task = task.kind();
  if (const auto* t = dynamic_cast<const MulticlassTask*>(&task)) {
    m.num_labels = t->num_classes();
    m.feature_dim = t->base_dim();
  } else if (const auto* t = dynamic_cast<const ChainTask*>(&task)) {
    m.num_labels = t->num_labels();
    m.feature_dim = t->unary_dim();
  } else if (const auto* t = dynamic_cast<const BinaryPottsTask*>(&task)) {
    m.num_labels = 2;
    m.feature_dim = t->unary_dim();
  } else {
    throw std::invalid_argument("describe_task: unsupported task type");
  }
  return m;
}

void write_model(std::ostream& out, const Model& model) {
  nlohmann::ordered_json doc;
  doc["format"] = "mpbcfw-model";
  doc["version"] = kModelFormatVersion;
  doc["task"] = to_string(model.meta.task);
  doc["num_labels"] = model.meta.num_labels;
  doc["feature_dim"] = model.meta.feature_dim;
  doc["dim"] = model.weights.size();
  doc["algorithm"] = model.meta.algorithm;
  doc["lambda"] = model.meta.lambda;
  doc["seed"] = model.meta.seed;
  doc["weights_hex"] = hex_of(model.weights);
  out << doc.dump(2) << '\n';
}

Model read_model(std::istream& in) {
  const json doc = parse_json(in);
  try {
    if (doc.value("format", std::string()) != "mpbcfw-model") throw ParseError("model: not a model file");
    const int version = doc.at("version").get<int>();
    if (version != kModelFormatVersion)
      throw ParseError("model: unsupported version " + std::to_string(version) + " (expected " +
                       std::to_string(kModelFormatVersion) + ")");
    Model m;
    m.meta.task = task_kind_from_string(doc.at("task").get<std::string>());
    m.meta.num_labels = doc.at("num_labels").get<int>();
    m.meta.feature_dim = doc.at("feature_dim").get<Eigen::Index>();
    m.meta.algorithm = doc.at("algorithm").get<std::string>();
    m.meta.lambda = doc.at("lambda").get<double>();
    m.meta.seed = doc.at("seed").get<std::uint64_t>();
    const auto dim = doc.at("dim").get<Eigen::Index>();
    if (dim < 1) throw ParseError("model: dim must be positive");
    m.weights = weights_from_hex(doc.at("weights_hex").get<std::string>(), dim);
    return m;
  } catch (const json::exception& e) {
    throw ParseError(std::string("model: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("model: ") + e.what());
  }
}

void save_model(const Model& model, const std::string& path) {
  auto out = open_out(path);
  write_model(out, model);
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

Model load_model(const std::string& path) {
  auto in = open_in(path);
  return read_model(in);
}

void check_compatible(const Model& model, const StructuredTask& task) {
  const ModelMetadata want = describe_task(task);
  if (model.meta.task != want.task)
    throw std::invalid_argument("task-kind mismatch: model is " + to_string(model.meta.task) + ", dataset is " +
                                to_string(want.task));
  if (model.meta.num_labels != want.num_labels || model.meta.feature_dim != want.feature_dim ||
      model.weights.size() != task.dim())
    throw std::invalid_argument("model dimensions do not match the dataset");
}

}  // namespace mpbcfw
