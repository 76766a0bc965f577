#include "mpbcfw/working_set.hpp"

#include <algorithm>
#include <stdexcept>

namespace mpbcfw {

namespace {

bool same_plane(const PlaneD& a, const PlaneD& b) {
  if (a.dim() != b.dim()) return false;
  if (std::abs(a.offset - b.offset) > WorkingSet::kDuplicateTolerance) return false;
  return (a.star - b.star).cwiseAbs().maxCoeff() <= WorkingSet::kDuplicateTolerance;
}

}  // namespace

bool WorkingSet::insert(const PlaneD& plane, Label label, std::size_t stamp) {
  if (capacity_ == 0) return false;
  for (auto& e : entries_) {
    if (same_plane(e.plane, plane)) {
      e.last_active = std::max(e.last_active, stamp);
      return true;
    }
  }
  entries_.push_back({plane, std::move(label), next_insert_++, stamp});
  if (entries_.size() > capacity_) {
    auto victim = std::min_element(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) {
      if (a.last_active != b.last_active) return a.last_active < b.last_active;
      return a.inserted < b.inserted;
    });
    entries_.erase(victim);
  }
  return true;
}

std::size_t WorkingSet::argmax(const VectorD& w) const {
  if (entries_.empty()) throw std::logic_error("WorkingSet::argmax on empty set");
  std::size_t best = 0;
  double best_value = evaluate(entries_[0].plane, w);
  for (std::size_t k = 1; k < entries_.size(); ++k) {
    const double v = evaluate(entries_[k].plane, w);
    if (v > best_value) {
      best_value = v;
      best = k;
    }
  }
  return best;
}

void WorkingSet::touch(std::size_t k, std::size_t stamp) {
  auto& e = entries_.at(k);
  e.last_active = std::max(e.last_active, stamp);
}

std::size_t WorkingSet::evict_inactive(std::size_t now, std::size_t horizon) {
  const auto before = entries_.size();
  std::erase_if(entries_, [&](const Entry& e) { return now >= e.last_active + horizon; });
  return before - entries_.size();
}

}  // namespace mpbcfw
