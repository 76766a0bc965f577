#ifndef MPBCFW_TASKS_HPP
#define MPBCFW_TASKS_HPP

#include "mpbcfw/oracle.hpp"

#include <utility>
#include <vector>

namespace mpbcfw {

/// Multiclass classification with the block joint feature map
/// phi(x, y) = (psi(x)[y=0], ..., psi(x)[y=K-1]) and 0/1 loss.
class MulticlassTask final : public StructuredTask {
 public:
  struct Example {
    VectorD features;
    int label = 0;
  };

  MulticlassTask(int num_classes, Eigen::Index base_dim, std::vector<Example> examples);

  TaskKind kind() const override { return TaskKind::Multiclass; }
  std::size_t size() const override { return examples_.size(); }
  Eigen::Index dim() const override { return num_classes_ * base_dim_; }

  int num_classes() const { return num_classes_; }
  Eigen::Index base_dim() const { return base_dim_; }
  const std::vector<Example>& examples() const { return examples_; }

  const Label& truth(std::size_t i) const override { return truths_.at(i); }
  JointFeature joint_feature(std::size_t i, const Label& y) const override;
  double loss(std::size_t i, const Label& y) const override;
  std::optional<std::uint64_t> label_space_size(std::size_t i) const override;
  Label label_at(std::size_t i, std::uint64_t index) const override;

 protected:
  Label argmax(std::size_t i, const VectorD& w, bool loss_augmented) const override;

 private:
  void check_label(const Label& y) const;

  int num_classes_;
  Eigen::Index base_dim_;
  std::vector<Example> examples_;
  std::vector<Label> truths_;
};

/// Chain sequence labeling: unary block features per position plus K*K
/// transition indicators; normalized Hamming loss; Viterbi max-oracle.
class ChainTask final : public StructuredTask {
 public:
  struct Example {
    /// One row per position.
    Eigen::MatrixXd features;
    Label labels;
  };

  ChainTask(int num_labels, Eigen::Index unary_dim, std::vector<Example> examples);

  TaskKind kind() const override { return TaskKind::Chain; }
  std::size_t size() const override { return examples_.size(); }
  Eigen::Index dim() const override { return num_labels_ * unary_dim_ + num_labels_ * num_labels_; }

  int num_labels() const { return num_labels_; }
  Eigen::Index unary_dim() const { return unary_dim_; }
  const std::vector<Example>& examples() const { return examples_; }
  /// Offset of the transition weight for the label pair (a, b).
  Eigen::Index transition_index(int a, int b) const { return num_labels_ * unary_dim_ + a * num_labels_ + b; }

  const Label& truth(std::size_t i) const override { return examples_.at(i).labels; }
  JointFeature joint_feature(std::size_t i, const Label& y) const override;
  double loss(std::size_t i, const Label& y) const override;
  std::optional<std::uint64_t> label_space_size(std::size_t i) const override;
  Label label_at(std::size_t i, std::uint64_t index) const override;

 protected:
  Label argmax(std::size_t i, const VectorD& w, bool loss_augmented) const override;

 private:
  void check_label(std::size_t i, const Label& y) const;

  int num_labels_;
  Eigen::Index unary_dim_;
  std::vector<Example> examples_;
};

/// Binary segmentation over a graph with a fixed-weight Potts smoothness
/// term. The prediction score is <w, phi(x, y)> - pairwise_weight * Theta(y)
/// with Theta(y) the number of disagreeing edges; the max-oracle reduces to
/// one s-t min-cut.
class BinaryPottsTask final : public StructuredTask {
 public:
  using Edge = std::pair<std::size_t, std::size_t>;

  struct Example {
    Eigen::MatrixXd features;
    Label labels;
    std::vector<Edge> edges;
  };

  BinaryPottsTask(Eigen::Index unary_dim, std::vector<Example> examples, double pairwise_weight = 1.0);

  TaskKind kind() const override { return TaskKind::BinaryPotts; }
  std::size_t size() const override { return examples_.size(); }
  Eigen::Index dim() const override { return 2 * unary_dim_; }

  Eigen::Index unary_dim() const { return unary_dim_; }
  double pairwise_weight() const { return pairwise_weight_; }
  const std::vector<Example>& examples() const { return examples_; }

  /// Number of edges whose endpoints disagree under y.
  std::size_t disagreements(std::size_t i, const Label& y) const;

  const Label& truth(std::size_t i) const override { return examples_.at(i).labels; }
  JointFeature joint_feature(std::size_t i, const Label& y) const override;
  double loss(std::size_t i, const Label& y) const override;
  std::optional<std::uint64_t> label_space_size(std::size_t i) const override;
  Label label_at(std::size_t i, std::uint64_t index) const override;

 protected:
  Label argmax(std::size_t i, const VectorD& w, bool loss_augmented) const override;

 private:
  void check_label(std::size_t i, const Label& y) const;

  Eigen::Index unary_dim_;
  std::vector<Example> examples_;
  double pairwise_weight_;
};

}  // namespace mpbcfw

#endif  // MPBCFW_TASKS_HPP
