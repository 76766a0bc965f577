#ifndef MPBCFW_WORKING_SET_HPP
#define MPBCFW_WORKING_SET_HPP

#include "mpbcfw/oracle.hpp"

#include <cstddef>
#include <vector>

namespace mpbcfw {

/// Cached oracle planes of one example. Stamps are outer-iteration indices.
class WorkingSet {
 public:
  struct Entry {
    PlaneD plane;
    Label label;
    std::size_t inserted = 0;  // insertion sequence number, unique per set
    std::size_t last_active = 0;
  };

  /// Component-wise tolerance under which two planes count as the same.
  static constexpr double kDuplicateTolerance = 1e-12;

  explicit WorkingSet(std::size_t capacity) : capacity_(capacity) {}

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::vector<Entry>& entries() const { return entries_; }
  const Entry& operator[](std::size_t k) const { return entries_.at(k); }

  /// Adds an exact-oracle plane stamped active at `stamp`. A duplicate of a
  /// stored plane only refreshes that plane's stamp. If the set then exceeds
  /// its capacity, the longest-inactive plane is dropped (oldest insertion on
  /// ties). Returns false when nothing is stored (capacity 0).
  bool insert(const PlaneD& plane, Label label, std::size_t stamp);

  /// Index of the plane maximizing <plane, [w 1]>; first maximum wins.
  /// Precondition: not empty.
  std::size_t argmax(const VectorD& w) const;

  void touch(std::size_t k, std::size_t stamp);

  /// Drops planes not active during the last `horizon` iterations, i.e. with
  /// now - last_active >= horizon. Returns the number removed.
  std::size_t evict_inactive(std::size_t now, std::size_t horizon);

 private:
  std::size_t capacity_;
  std::size_t next_insert_ = 0;
  std::vector<Entry> entries_;
};

}  // namespace mpbcfw

#endif  // MPBCFW_WORKING_SET_HPP
