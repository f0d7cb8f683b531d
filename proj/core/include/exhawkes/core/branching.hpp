#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace exhawkes {

class StructuralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::ptrdiff_t kBackground = -1;

// parent(i) is kBackground or the index of an earlier event of the same pattern.
class BranchingStructure {
 public:
  BranchingStructure() = default;
  explicit BranchingStructure(std::vector<std::ptrdiff_t> parents);

  static BranchingStructure all_background(std::size_t n);

  [[nodiscard]] std::size_t size() const { return parents_.size(); }
  [[nodiscard]] std::ptrdiff_t parent(std::size_t i) const { return parents_.at(i); }
  [[nodiscard]] bool is_background(std::size_t i) const { return parents_.at(i) == kBackground; }
  [[nodiscard]] const std::vector<std::ptrdiff_t>& parents() const { return parents_; }
  void set_parent(std::size_t i, std::ptrdiff_t p);

  [[nodiscard]] std::vector<std::size_t> background_indices() const;
  [[nodiscard]] std::vector<std::size_t> triggered_indices() const;
  [[nodiscard]] std::size_t background_count() const;
  [[nodiscard]] std::size_t root_of(std::size_t i) const;

  // throws StructuralError on a self link, a forward-in-time parent or a cycle
  void validate() const;
  void validate(std::span<const double> times) const;

 private:
  std::vector<std::ptrdiff_t> parents_;
};

struct Cluster {
  std::size_t root{0};
  std::vector<std::size_t> members;  // root first, then descendants in time order
};

[[nodiscard]] std::vector<Cluster> clusters(const BranchingStructure& b);

}  // namespace exhawkes
