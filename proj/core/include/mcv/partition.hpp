#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace mcv {

/// A sigma-algebra on the finite leaf set, stored as the partition that
/// generates it. Blocks are kept in canonical order (by smallest member), so
/// two partitions describe the same sigma-algebra iff they compare equal.
///
/// Partition is a cheap handle: copies share the immutable block table.
class Partition {
 public:
  Partition();

  static Partition trivial(int num_leaves);
  static Partition discrete(int num_leaves);
  /// Leaves with equal labels share a block.
  static Partition from_labels(std::span<const int> labels, std::optional<int> time_tag = {});
  /// Throws Error(InvalidConfig) unless the blocks are disjoint, nonempty and
  /// cover 0..num_leaves-1.
  static Partition from_blocks(const std::vector<std::vector<int>>& blocks, int num_leaves);

  int num_leaves() const;
  int num_blocks() const;
  const std::vector<int>& block(int b) const;
  const std::vector<std::vector<int>>& blocks() const;
  int block_of(int leaf) const;
  std::span<const int> labels() const;
  std::optional<int> time_tag() const;
  Partition with_time_tag(std::optional<int> tag) const;

  /// Every block of *this lies inside a single block of `coarser`.
  bool refines(const Partition& coarser) const;
  /// Common refinement (the join of the two sigma-algebras).
  Partition join(const Partition& other) const;
  /// True iff the leaf set is a union of blocks (i.e. the event is measurable).
  bool is_measurable(const std::vector<bool>& event) const;

  friend bool operator==(const Partition& a, const Partition& b);

 private:
  struct Data {
    std::vector<std::vector<int>> blocks;
    std::vector<int> block_of;
    std::optional<int> time_tag;
  };
  explicit Partition(std::shared_ptr<const Data> data) : data_(std::move(data)) {}

  std::shared_ptr<const Data> data_;
};

}  // namespace mcv
