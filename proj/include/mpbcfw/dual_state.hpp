#ifndef MPBCFW_DUAL_STATE_HPP
#define MPBCFW_DUAL_STATE_HPP

#include "mpbcfw/plane.hpp"

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace mpbcfw {

/// Per-example planes phi^1..phi^n and their running sum phi.
///
/// The aggregate is maintained incrementally and fully re-summed every n
/// block updates to bound floating-point drift.
template <typename Scalar>
class DualState {
 public:
  using PlaneT = Plane<Scalar>;
  using Vector = typename PlaneT::Vector;

  DualState(std::size_t n, Eigen::Index dim, Scalar lambda)
      : blocks_(n, PlaneT::Zero(dim)), aggregate_(PlaneT::Zero(dim)), lambda_(lambda) {
    detail::require_positive_lambda(lambda);
    if (n == 0) throw std::invalid_argument("DualState: need at least one block");
  }

  std::size_t size() const { return blocks_.size(); }
  Eigen::Index dim() const { return aggregate_.dim(); }
  Scalar lambda() const { return lambda_; }

  const PlaneT& block(std::size_t i) const { return blocks_.at(i); }
  const std::vector<PlaneT>& blocks() const { return blocks_; }
  const PlaneT& aggregate() const { return aggregate_; }

  Scalar dual() const { return dual_bound(aggregate_, lambda_); }
  Vector weights() const { return weights_of(aggregate_, lambda_); }

  /// blocks[i] <- (1 - gamma) blocks[i] + gamma new_block, aggregate follows.
  void apply_block_update(std::size_t i, const PlaneT& new_block, Scalar gamma) {
    if (i >= blocks_.size()) throw std::invalid_argument("apply_block_update: index out of range");
    if (new_block.dim() != dim()) throw std::invalid_argument("apply_block_update: dimension mismatch");
    if (!(gamma >= Scalar(0) && gamma <= Scalar(1)))
      throw std::invalid_argument("apply_block_update: gamma outside [0, 1]");
    if (gamma == Scalar(0)) return;

    PlaneT& b = blocks_[i];
    if (gamma == Scalar(1)) {
      aggregate_ += new_block - b;
      b = new_block;
    } else {
      PlaneT next = interpolate(b, new_block, gamma);
      aggregate_ += next - b;
      b = std::move(next);
    }
    if (++updates_since_resum_ >= blocks_.size()) resum();
  }

  /// Replace every block by the same interpolation towards new_blocks[i].
  /// The aggregate becomes (1 - gamma) phi + gamma sum(new_blocks).
  void apply_full_update(const std::vector<PlaneT>& new_blocks, Scalar gamma) {
    if (new_blocks.size() != blocks_.size()) throw std::invalid_argument("apply_full_update: size mismatch");
    if (!(gamma >= Scalar(0) && gamma <= Scalar(1)))
      throw std::invalid_argument("apply_full_update: gamma outside [0, 1]");
    if (gamma == Scalar(0)) return;
    for (std::size_t i = 0; i < blocks_.size(); ++i) blocks_[i] = interpolate(blocks_[i], new_blocks[i], gamma);
    resum();
  }

  void resum() {
    PlaneT sum = PlaneT::Zero(dim());
    for (const auto& b : blocks_) sum += b;
    aggregate_ = std::move(sum);
    updates_since_resum_ = 0;
  }

 private:
  std::vector<PlaneT> blocks_;
  PlaneT aggregate_;
  Scalar lambda_;
  std::size_t updates_since_resum_ = 0;
};

using DualStateD = DualState<double>;

}  // namespace mpbcfw

#endif  // MPBCFW_DUAL_STATE_HPP
