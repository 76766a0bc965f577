#include "mpbcfw/oracle.hpp"

namespace mpbcfw {

std::string to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::Multiclass:
      return "multiclass";
    case TaskKind::Chain:
      return "chain";
    case TaskKind::BinaryPotts:
      return "binary-potts";
  }
  return "unknown";
}

TaskKind task_kind_from_string(const std::string& name) {
  if (name == "multiclass") return TaskKind::Multiclass;
  if (name == "chain") return TaskKind::Chain;
  if (name == "binary-potts") return TaskKind::BinaryPotts;
  throw std::invalid_argument("unknown task kind '" + name + "'");
}

PlaneD StructuredTask::plane_for(std::size_t i, const Label& y, std::size_t n) const {
  if (n == 0) throw std::invalid_argument("plane_for: n must be positive");
  const JointFeature fy = joint_feature(i, y);
  const JointFeature ft = joint_feature(i, truth(i));
  const double scale = 1.0 / static_cast<double>(n);
  return PlaneD(scale * (fy.features - ft.features), scale * (loss(i, y) + fy.offset_score - ft.offset_score));
}

OracleResult StructuredTask::max_oracle(std::size_t i, const VectorD& w, std::size_t n) const {
  check_index(i);
  if (w.size() != dim()) throw std::invalid_argument("max_oracle: weight dimension mismatch");
  if (n == 0) throw std::invalid_argument("max_oracle: n must be positive");
  OracleResult r;
  r.label = argmax(i, w, true);
  r.plane = plane_for(i, r.label, n);
  r.value = evaluate(r.plane, w);
  return r;
}

Label StructuredTask::predict(std::size_t i, const VectorD& w) const {
  check_index(i);
  if (w.size() != dim()) throw std::invalid_argument("predict: weight dimension mismatch");
  return argmax(i, w, false);
}

OracleResult brute_force_oracle(const StructuredTask& task, std::size_t i, const VectorD& w, std::size_t n,
                                std::uint64_t cap) {
  if (i >= task.size()) throw std::invalid_argument("brute_force_oracle: example index out of range");
  if (w.size() != task.dim()) throw std::invalid_argument("brute_force_oracle: weight dimension mismatch");
  const auto count = task.label_space_size(i);
  if (!count || *count > cap) throw CapacityError("brute_force_oracle: label space exceeds enumeration cap");

  OracleResult best;
  bool have = false;
  for (std::uint64_t k = 0; k < *count; ++k) {
    Label y = task.label_at(i, k);
    PlaneD p = task.plane_for(i, y, n);
    const double v = evaluate(p, w);
    if (!have || v > best.value) {
      best.plane = std::move(p);
      best.label = std::move(y);
      best.value = v;
      have = true;
    }
  }
  return best;
}

double primal_objective(const StructuredTask& task, const VectorD& w, double lambda) {
  detail::require_positive_lambda(lambda);
  double hinge = 0.0;
  for (std::size_t i = 0; i < task.size(); ++i) hinge += task.max_oracle(i, w, task.size()).value;
  return 0.5 * lambda * w.squaredNorm() + hinge;
}

}  // namespace mpbcfw
