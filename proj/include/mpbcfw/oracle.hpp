#ifndef MPBCFW_ORACLE_HPP
#define MPBCFW_ORACLE_HPP

#include "mpbcfw/plane.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mpbcfw {

/// A label structure: one class id per position (a single entry for
/// multiclass problems).
using Label = std::vector<int>;

enum class TaskKind { Multiclass, Chain, BinaryPotts };

std::string to_string(TaskKind kind);
TaskKind task_kind_from_string(const std::string& name);

/// Raised when a brute-force enumeration would exceed its configured cap.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Joint feature phi(x, y) together with the unweighted score that enters the
/// plane offset (the fixed-weight Potts smoothness score; zero elsewhere).
struct JointFeature {
  VectorD features;
  double offset_score = 0.0;
};

struct OracleResult {
  PlaneD plane;
  Label label;
  /// <plane, [w 1]> at the query point.
  double value = 0.0;
};

/// A training set of one task family plus its loss and max-oracle.
///
/// Implementations are immutable after construction; every const member is
/// safe to call concurrently.
class StructuredTask {
 public:
  virtual ~StructuredTask() = default;

  virtual TaskKind kind() const = 0;
  virtual std::size_t size() const = 0;
  virtual Eigen::Index dim() const = 0;

  virtual const Label& truth(std::size_t i) const = 0;
  virtual JointFeature joint_feature(std::size_t i, const Label& y) const = 0;
  /// Task loss Delta(y_i, y), in [0, 1] for every built-in task.
  virtual double loss(std::size_t i, const Label& y) const = 0;

  /// Number of labelings of example i, or nullopt if it overflows 64 bits.
  virtual std::optional<std::uint64_t> label_space_size(std::size_t i) const = 0;
  /// The index-th labeling in canonical enumeration order.
  virtual Label label_at(std::size_t i, std::uint64_t index) const = 0;

  /// phi^{iy}: star = (phi(x_i, y) - phi(x_i, y_i)) / n,
  /// offset = (Delta(y_i, y) + s(y) - s(y_i)) / n with s the offset score.
  PlaneD plane_for(std::size_t i, const Label& y, std::size_t n) const;

  /// Loss-augmented argmax for example i at weights w, scaled by 1/n.
  OracleResult max_oracle(std::size_t i, const VectorD& w, std::size_t n) const;

  /// argmax_y <w, phi(x_i, y)> + s(y).
  Label predict(std::size_t i, const VectorD& w) const;

 protected:
  /// Exact maximizer of [loss_augmented ? Delta(y_i, y) : 0] + <w, phi(x_i, y)> + s(y).
  virtual Label argmax(std::size_t i, const VectorD& w, bool loss_augmented) const = 0;

  void check_index(std::size_t i) const {
    if (i >= size()) throw std::invalid_argument("example index out of range");
  }
};

inline constexpr std::uint64_t kDefaultEnumerationCap = 1'000'000;

/// Reference oracle: evaluates every labeling, first maximum in enumeration
/// order wins.
OracleResult brute_force_oracle(const StructuredTask& task, std::size_t i, const VectorD& w, std::size_t n,
                                std::uint64_t cap = kDefaultEnumerationCap);

/// H_i(w) for all i summed, plus lambda/2 |w|^2.
double primal_objective(const StructuredTask& task, const VectorD& w, double lambda);

}  // namespace mpbcfw

#endif  // MPBCFW_ORACLE_HPP
