#include "mpbcfw/tasks.hpp"

#include "mpbcfw/maxflow.hpp"

#include <set>
#include <string>

namespace mpbcfw {

namespace {

std::optional<std::uint64_t> checked_power(std::uint64_t base, std::size_t exponent) {
  std::uint64_t result = 1;
  for (std::size_t k = 0; k < exponent; ++k) {
    if (result > std::numeric_limits<std::uint64_t>::max() / base) return std::nullopt;
    result *= base;
  }
  return result;
}

// Lexicographic decoding: position 0 is the most significant digit.
Label decode_mixed_radix(std::uint64_t index, std::size_t length, int radix) {
  Label y(length, 0);
  for (std::size_t pos = length; pos-- > 0;) {
    y[pos] = static_cast<int>(index % static_cast<std::uint64_t>(radix));
    index /= static_cast<std::uint64_t>(radix);
  }
  return y;
}

double normalized_hamming(const Label& truth, const Label& y) {
  std::size_t wrong = 0;
  for (std::size_t l = 0; l < truth.size(); ++l) wrong += truth[l] != y[l];
  return static_cast<double>(wrong) / static_cast<double>(truth.size());
}

}  // namespace

// ---------------------------------------------------------------- multiclass

MulticlassTask::MulticlassTask(int num_classes, Eigen::Index base_dim, std::vector<Example> examples)
    : num_classes_(num_classes), base_dim_(base_dim), examples_(std::move(examples)) {
  if (num_classes_ < 2) throw std::invalid_argument("multiclass: need at least two classes");
  if (base_dim_ < 1) throw std::invalid_argument("multiclass: base dimension must be positive");
  if (examples_.empty()) throw std::invalid_argument("multiclass: empty dataset");
  truths_.reserve(examples_.size());
  for (const auto& ex : examples_) {
    if (ex.features.size() != base_dim_) throw std::invalid_argument("multiclass: feature dimension mismatch");
    if (!ex.features.allFinite()) throw std::invalid_argument("multiclass: non-finite feature");
    if (ex.label < 0 || ex.label >= num_classes_) throw std::invalid_argument("multiclass: label out of range");
    truths_.push_back({ex.label});
  }
}

void MulticlassTask::check_label(const Label& y) const {
  if (y.size() != 1 || y[0] < 0 || y[0] >= num_classes_)
    throw std::invalid_argument("multiclass: invalid label structure");
}

JointFeature MulticlassTask::joint_feature(std::size_t i, const Label& y) const {
  check_index(i);
  check_label(y);
  JointFeature f{VectorD::Zero(dim()), 0.0};
  f.features.segment(y[0] * base_dim_, base_dim_) = examples_[i].features;
  return f;
}

double MulticlassTask::loss(std::size_t i, const Label& y) const {
  check_index(i);
  check_label(y);
  return y[0] != examples_[i].label ? 1.0 : 0.0;
}

std::optional<std::uint64_t> MulticlassTask::label_space_size(std::size_t) const {
  return static_cast<std::uint64_t>(num_classes_);
}

Label MulticlassTask::label_at(std::size_t, std::uint64_t index) const {
  if (index >= static_cast<std::uint64_t>(num_classes_)) throw std::invalid_argument("multiclass: label index out of range");
  return {static_cast<int>(index)};
}

Label MulticlassTask::argmax(std::size_t i, const VectorD& w, bool loss_augmented) const {
  const auto& ex = examples_[i];
  int best = 0;
  double best_score = 0.0;
  for (int y = 0; y < num_classes_; ++y) {
    double score = w.segment(y * base_dim_, base_dim_).dot(ex.features);
    if (loss_augmented && y != ex.label) score += 1.0;
    if (y == 0 || score > best_score) {
      best = y;
      best_score = score;
    }
  }
  return {best};
}

// --------------------------------------------------------------------- chain

ChainTask::ChainTask(int num_labels, Eigen::Index unary_dim, std::vector<Example> examples)
    : num_labels_(num_labels), unary_dim_(unary_dim), examples_(std::move(examples)) {
  if (num_labels_ < 2) throw std::invalid_argument("chain: need at least two labels");
  if (unary_dim_ < 1) throw std::invalid_argument("chain: unary dimension must be positive");
  if (examples_.empty()) throw std::invalid_argument("chain: empty dataset");
  for (std::size_t i = 0; i < examples_.size(); ++i) {
    const auto& ex = examples_[i];
    if (ex.labels.empty()) throw std::invalid_argument("chain: empty sequence");
    if (static_cast<std::size_t>(ex.features.rows()) != ex.labels.size())
      throw std::invalid_argument("chain: feature/label length mismatch");
    if (ex.features.cols() != unary_dim_) throw std::invalid_argument("chain: unary dimension mismatch");
    if (!ex.features.allFinite()) throw std::invalid_argument("chain: non-finite feature");
    check_label(i, ex.labels);
  }
}

void ChainTask::check_label(std::size_t i, const Label& y) const {
  if (y.size() != static_cast<std::size_t>(examples_[i].features.rows()))
    throw std::invalid_argument("chain: label length mismatch");
  for (int a : y)
    if (a < 0 || a >= num_labels_) throw std::invalid_argument("chain: label out of range");
}

JointFeature ChainTask::joint_feature(std::size_t i, const Label& y) const {
  check_index(i);
  check_label(i, y);
  const auto& x = examples_[i].features;
  JointFeature f{VectorD::Zero(dim()), 0.0};
  for (std::size_t l = 0; l < y.size(); ++l)
    f.features.segment(y[l] * unary_dim_, unary_dim_) += x.row(static_cast<Eigen::Index>(l)).transpose();
  for (std::size_t l = 0; l + 1 < y.size(); ++l) f.features[transition_index(y[l], y[l + 1])] += 1.0;
  return f;
}

double ChainTask::loss(std::size_t i, const Label& y) const {
  check_index(i);
  check_label(i, y);
  return normalized_hamming(examples_[i].labels, y);
}

std::optional<std::uint64_t> ChainTask::label_space_size(std::size_t i) const {
  check_index(i);
  return checked_power(static_cast<std::uint64_t>(num_labels_), examples_[i].labels.size());
}

Label ChainTask::label_at(std::size_t i, std::uint64_t index) const {
  const auto count = label_space_size(i);
  if (count && index >= *count) throw std::invalid_argument("chain: label index out of range");
  return decode_mixed_radix(index, examples_[i].labels.size(), num_labels_);
}

Label ChainTask::argmax(std::size_t i, const VectorD& w, bool loss_augmented) const {
  const auto& ex = examples_[i];
  const auto L = static_cast<Eigen::Index>(ex.labels.size());
  const int K = num_labels_;
  const double unit_loss = 1.0 / static_cast<double>(L);

  // unary(l, a): score of label a at position l.
  const Eigen::Map<const Eigen::MatrixXd> w_unary(w.data(), unary_dim_, K);
  Eigen::MatrixXd unary = ex.features * w_unary;
  if (loss_augmented)
    for (Eigen::Index l = 0; l < L; ++l)
      for (int a = 0; a < K; ++a)
        if (a != ex.labels[static_cast<std::size_t>(l)]) unary(l, a) += unit_loss;

  Eigen::MatrixXd best(L, K);
  Eigen::MatrixXi back(L, K);
  best.row(0) = unary.row(0);
  for (Eigen::Index l = 1; l < L; ++l) {
    for (int b = 0; b < K; ++b) {
      int arg = 0;
      double val = best(l - 1, 0) + w[transition_index(0, b)];
      for (int a = 1; a < K; ++a) {
        const double cand = best(l - 1, a) + w[transition_index(a, b)];
        if (cand > val) {
          val = cand;
          arg = a;
        }
      }
      best(l, b) = val + unary(l, b);
      back(l, b) = arg;
    }
  }

  Label y(static_cast<std::size_t>(L));
  int last = 0;
  for (int b = 1; b < K; ++b)
    if (best(L - 1, b) > best(L - 1, last)) last = b;
  y[static_cast<std::size_t>(L - 1)] = last;
  for (Eigen::Index l = L - 1; l > 0; --l)
    y[static_cast<std::size_t>(l - 1)] = back(l, y[static_cast<std::size_t>(l)]);
  return y;
}

// -------------------------------------------------------------- binary potts

BinaryPottsTask::BinaryPottsTask(Eigen::Index unary_dim, std::vector<Example> examples, double pairwise_weight)
    : unary_dim_(unary_dim), examples_(std::move(examples)), pairwise_weight_(pairwise_weight) {
  if (unary_dim_ < 1) throw std::invalid_argument("binary-potts: unary dimension must be positive");
  if (examples_.empty()) throw std::invalid_argument("binary-potts: empty dataset");
  if (!(pairwise_weight_ >= 0.0) || !std::isfinite(pairwise_weight_))
    throw std::invalid_argument("binary-potts: pairwise weight must be non-negative (submodularity)");
  for (std::size_t i = 0; i < examples_.size(); ++i) {
    const auto& ex = examples_[i];
    const auto L = ex.labels.size();
    if (L == 0) throw std::invalid_argument("binary-potts: empty graph");
    if (static_cast<std::size_t>(ex.features.rows()) != L)
      throw std::invalid_argument("binary-potts: feature/label count mismatch");
    if (ex.features.cols() != unary_dim_) throw std::invalid_argument("binary-potts: unary dimension mismatch");
    if (!ex.features.allFinite()) throw std::invalid_argument("binary-potts: non-finite feature");
    check_label(i, ex.labels);
    std::set<Edge> seen;
    for (auto [k, l] : ex.edges) {
      if (k >= L || l >= L) throw std::invalid_argument("binary-potts: edge endpoint out of range");
      if (k == l) throw std::invalid_argument("binary-potts: self-loop edge");
      if (!seen.insert({std::min(k, l), std::max(k, l)}).second)
        throw std::invalid_argument("binary-potts: duplicate edge");
    }
  }
}

void BinaryPottsTask::check_label(std::size_t i, const Label& y) const {
  if (y.size() != examples_[i].labels.size()) throw std::invalid_argument("binary-potts: label count mismatch");
  for (int a : y)
    if (a != 0 && a != 1) throw std::invalid_argument("binary-potts: labels must be binary");
}

std::size_t BinaryPottsTask::disagreements(std::size_t i, const Label& y) const {
  check_index(i);
  check_label(i, y);
  std::size_t count = 0;
  for (auto [k, l] : examples_[i].edges) count += y[k] != y[l];
  return count;
}

JointFeature BinaryPottsTask::joint_feature(std::size_t i, const Label& y) const {
  check_index(i);
  check_label(i, y);
  const auto& x = examples_[i].features;
  JointFeature f{VectorD::Zero(dim()), 0.0};
  for (std::size_t l = 0; l < y.size(); ++l)
    f.features.segment(y[l] * unary_dim_, unary_dim_) += x.row(static_cast<Eigen::Index>(l)).transpose();
  f.offset_score = -pairwise_weight_ * static_cast<double>(disagreements(i, y));
  return f;
}

double BinaryPottsTask::loss(std::size_t i, const Label& y) const {
  check_index(i);
  check_label(i, y);
  return normalized_hamming(examples_[i].labels, y);
}

std::optional<std::uint64_t> BinaryPottsTask::label_space_size(std::size_t i) const {
  check_index(i);
  return checked_power(2, examples_[i].labels.size());
}

Label BinaryPottsTask::label_at(std::size_t i, std::uint64_t index) const {
  const auto count = label_space_size(i);
  if (count && index >= *count) throw std::invalid_argument("binary-potts: label index out of range");
  return decode_mixed_radix(index, examples_[i].labels.size(), 2);
}

Label BinaryPottsTask::argmax(std::size_t i, const VectorD& w, bool loss_augmented) const {
  const auto& ex = examples_[i];
  const auto L = ex.labels.size();
  const double unit_loss = 1.0 / static_cast<double>(L);

  // Maximizing the score is minimizing its negation; the Potts term then
  // costs +pairwise_weight per disagreeing edge, which is submodular.
  const VectorD score0 = ex.features * w.head(unary_dim_);
  const VectorD score1 = ex.features * w.tail(unary_dim_);
  BinaryEnergy<double> energy;
  energy.unary.resize(L);
  for (std::size_t l = 0; l < L; ++l) {
    const auto li = static_cast<Eigen::Index>(l);
    double gain0 = score0[li];
    double gain1 = score1[li];
    if (loss_augmented) (ex.labels[l] == 0 ? gain1 : gain0) += unit_loss;
    energy.unary[l] = {-gain0, -gain1};
  }
  energy.pairwise.reserve(ex.edges.size());
  for (auto [k, l] : ex.edges) energy.pairwise.push_back({k, l, pairwise_weight_});
  return minimize_binary_energy(energy).labels;
}

}  // namespace mpbcfw
