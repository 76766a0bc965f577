#ifndef MPBCFW_DATA_HPP
#define MPBCFW_DATA_HPP

#include "mpbcfw/tasks.hpp"

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

namespace mpbcfw {

/// Malformed dataset or model file. Line numbers are 1-based when known.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kDatasetFormatVersion = 1;
inline constexpr int kModelFormatVersion = 1;

// Multiclass text format:
//   #multiclass K d
//   label idx:val idx:val ...     (0-based label, 1-based strictly increasing idx)
MulticlassTask read_multiclass(std::istream& in);
void write_multiclass(std::ostream& out, const MulticlassTask& task);

// Chain / graph JSON documents: {"header": {...}, "examples": [...]}.
ChainTask read_chain(std::istream& in);
void write_chain(std::ostream& out, const ChainTask& task);
BinaryPottsTask read_binary_potts(std::istream& in);
void write_binary_potts(std::ostream& out, const BinaryPottsTask& task);

MulticlassTask load_multiclass(const std::string& path);
ChainTask load_chain(const std::string& path);
BinaryPottsTask load_binary_potts(const std::string& path);

/// Guesses the task kind from the first bytes of a dataset file.
TaskKind detect_task_kind(const std::string& path);
std::unique_ptr<StructuredTask> load_dataset(const std::string& path, std::optional<TaskKind> kind = std::nullopt);
void save_dataset(const StructuredTask& task, const std::string& path);

// ---------------------------------------------------------------- generators

struct MulticlassGenParams {
  std::size_t n = 20;
  int num_classes = 3;
  Eigen::Index dim = 2;
  /// Distance of the class means from the origin.
  double separation = 4.0;
  double noise = 1.0;
};

struct ChainGenParams {
  std::size_t n = 30;
  std::size_t length = 5;
  int num_labels = 3;
  Eigen::Index dim = 4;
  double separation = 1.0;
  double noise = 1.0;
  /// Extra weight on self-transitions of the random Markov chain.
  double stickiness = 2.0;
};

struct GridGenParams {
  std::size_t n = 15;
  std::size_t height = 4;
  std::size_t width = 4;
  Eigen::Index dim = 3;
  /// 0 keeps the locally smoothed random field, 1 flattens it to its mean
  /// (constant ground truth).
  double smoothing = 0.3;
  double signal = 1.0;
  double noise = 1.0;
};

MulticlassTask generate_multiclass(const MulticlassGenParams& params, std::uint64_t seed);
ChainTask generate_chain(const ChainGenParams& params, std::uint64_t seed);
BinaryPottsTask generate_binary_potts(const GridGenParams& params, std::uint64_t seed);

/// 4-connected grid edges (k < l), row-major node numbering.
std::vector<BinaryPottsTask::Edge> grid_edges(std::size_t height, std::size_t width);

// --------------------------------------------------------------------- model

struct ModelMetadata {
  TaskKind task = TaskKind::Multiclass;
  std::string algorithm;
  double lambda = 0.0;
  std::uint64_t seed = 0;
  /// Classes / labels; 2 for binary-potts.
  int num_labels = 0;
  /// Per-class (multiclass) or per-position/node feature dimension.
  Eigen::Index feature_dim = 0;
};

struct Model {
  VectorD weights;
  ModelMetadata meta;
};

/// Task-shape part of the metadata for `task`.
ModelMetadata describe_task(const StructuredTask& task);

void write_model(std::ostream& out, const Model& model);
Model read_model(std::istream& in);
void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

/// Throws std::invalid_argument if the model was trained for a different task
/// shape than `task`.
void check_compatible(const Model& model, const StructuredTask& task);

}  // namespace mpbcfw

#endif  // MPBCFW_DATA_HPP
