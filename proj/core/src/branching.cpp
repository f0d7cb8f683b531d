#include "exhawkes/core/branching.hpp"

#include <string>

namespace exhawkes {

BranchingStructure::BranchingStructure(std::vector<std::ptrdiff_t> parents) : parents_(std::move(parents)) {
  const auto n = static_cast<std::ptrdiff_t>(parents_.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto p = parents_[i];
    if (p != kBackground && (p < 0 || p >= n))
      throw StructuralError("parent index out of range for event " + std::to_string(i));
    if (p == i) throw StructuralError("event " + std::to_string(i) + " is its own parent");
  }
}

BranchingStructure BranchingStructure::all_background(std::size_t n) {
  return BranchingStructure(std::vector<std::ptrdiff_t>(n, kBackground));
}

void BranchingStructure::set_parent(std::size_t i, std::ptrdiff_t p) {
  if (p != kBackground && (p < 0 || static_cast<std::size_t>(p) >= i))
    throw StructuralError("parent of event " + std::to_string(i) + " must be an earlier event");
  parents_.at(i) = p;
}

std::vector<std::size_t> BranchingStructure::background_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < parents_.size(); ++i)
    if (parents_[i] == kBackground) out.push_back(i);
  return out;
}

std::vector<std::size_t> BranchingStructure::triggered_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < parents_.size(); ++i)
    if (parents_[i] != kBackground) out.push_back(i);
  return out;
}

std::size_t BranchingStructure::background_count() const {
  std::size_t c = 0;
  for (auto p : parents_) c += (p == kBackground);
  return c;
}

void BranchingStructure::validate() const {
  for (std::size_t i = 0; i < parents_.size(); ++i) {
    const auto p = parents_[i];
    if (p == kBackground) continue;
    if (static_cast<std::size_t>(p) >= i)
      throw StructuralError("event " + std::to_string(i) + " has a parent that is not earlier in time");
  }
}

void BranchingStructure::validate(std::span<const double> times) const {
  if (times.size() != parents_.size()) throw StructuralError("branching size does not match pattern size");
  validate();
  for (std::size_t i = 0; i < parents_.size(); ++i) {
    const auto p = parents_[i];
    if (p != kBackground && !(times[static_cast<std::size_t>(p)] < times[i]))
      throw StructuralError("parent of event " + std::to_string(i) + " does not precede it in time");
  }
}

std::size_t BranchingStructure::root_of(std::size_t i) const {
  std::size_t steps = 0;
  while (parents_.at(i) != kBackground) {
    i = static_cast<std::size_t>(parents_[i]);
    if (++steps > parents_.size()) throw StructuralError("cycle in branching structure");
  }
  return i;
}

std::vector<Cluster> clusters(const BranchingStructure& b) {
  b.validate();
  const auto n = b.size();
  // parents precede children, so a forward pass assigns every root
  std::vector<std::size_t> root(n);
  std::vector<std::size_t> slot(n);
  std::vector<Cluster> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (b.is_background(i)) {
      root[i] = i;
      slot[i] = out.size();
      out.push_back(Cluster{i, {i}});
    } else {
      const auto p = static_cast<std::size_t>(b.parent(i));
      root[i] = root[p];
      slot[i] = slot[p];
      out[slot[i]].members.push_back(i);
    }
  }
  return out;
}

}  // namespace exhawkes
