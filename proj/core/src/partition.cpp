#include "mcv/partition.hpp"

#include <map>
#include <string>
#include <utility>

#include "mcv/error.hpp"

namespace mcv {

Partition::Partition() : data_(std::make_shared<Data>()) {}

Partition Partition::trivial(int num_leaves) {
  std::vector<int> labels(static_cast<size_t>(num_leaves), 0);
  return from_labels(labels);
}

Partition Partition::discrete(int num_leaves) {
  std::vector<int> labels(static_cast<size_t>(num_leaves));
  for (int i = 0; i < num_leaves; ++i) labels[static_cast<size_t>(i)] = i;
  return from_labels(labels);
}

Partition Partition::from_labels(std::span<const int> labels, std::optional<int> time_tag) {
  auto data = std::make_shared<Data>();
  data->time_tag = time_tag;
  data->block_of.resize(labels.size());
  std::map<int, int> seen;
  for (size_t leaf = 0; leaf < labels.size(); ++leaf) {
    auto [it, inserted] = seen.try_emplace(labels[leaf], static_cast<int>(data->blocks.size()));
    if (inserted) data->blocks.emplace_back();
    data->blocks[static_cast<size_t>(it->second)].push_back(static_cast<int>(leaf));
    data->block_of[leaf] = it->second;
  }
  return Partition(std::move(data));
}

Partition Partition::from_blocks(const std::vector<std::vector<int>>& blocks, int num_leaves) {
  std::vector<int> labels(static_cast<size_t>(num_leaves), -1);
  for (size_t b = 0; b < blocks.size(); ++b) {
    if (blocks[b].empty()) throw Error(ErrorCode::InvalidConfig, "partition has an empty block");
    for (int leaf : blocks[b]) {
      if (leaf < 0 || leaf >= num_leaves) {
        throw Error(ErrorCode::InvalidConfig, "partition block references unknown leaf " + std::to_string(leaf));
      }
      if (labels[static_cast<size_t>(leaf)] != -1) {
        throw Error(ErrorCode::InvalidConfig, "partition blocks overlap at leaf " + std::to_string(leaf));
      }
      labels[static_cast<size_t>(leaf)] = static_cast<int>(b);
    }
  }
  for (int l : labels) {
    if (l == -1) throw Error(ErrorCode::InvalidConfig, "partition blocks do not cover all leaves");
  }
  return from_labels(labels);
}

int Partition::num_leaves() const { return static_cast<int>(data_->block_of.size()); }
int Partition::num_blocks() const { return static_cast<int>(data_->blocks.size()); }
const std::vector<int>& Partition::block(int b) const { return data_->blocks.at(static_cast<size_t>(b)); }
const std::vector<std::vector<int>>& Partition::blocks() const { return data_->blocks; }
int Partition::block_of(int leaf) const { return data_->block_of.at(static_cast<size_t>(leaf)); }
std::span<const int> Partition::labels() const { return data_->block_of; }
std::optional<int> Partition::time_tag() const { return data_->time_tag; }

Partition Partition::with_time_tag(std::optional<int> tag) const {
  auto data = std::make_shared<Data>(*data_);
  data->time_tag = tag;
  return Partition(std::move(data));
}

bool Partition::refines(const Partition& coarser) const {
  if (coarser.num_leaves() != num_leaves()) return false;
  for (const auto& blk : data_->blocks) {
    int target = coarser.block_of(blk.front());
    for (int leaf : blk) {
      if (coarser.block_of(leaf) != target) return false;
    }
  }
  return true;
}

Partition Partition::join(const Partition& other) const {
  if (other.num_leaves() != num_leaves()) {
    throw Error(ErrorCode::InvalidConfig, "cannot join partitions over different leaf sets");
  }
  std::map<std::pair<int, int>, int> ids;
  std::vector<int> labels(static_cast<size_t>(num_leaves()));
  for (int leaf = 0; leaf < num_leaves(); ++leaf) {
    auto key = std::make_pair(block_of(leaf), other.block_of(leaf));
    auto [it, _] = ids.try_emplace(key, static_cast<int>(ids.size()));
    labels[static_cast<size_t>(leaf)] = it->second;
  }
  return from_labels(labels);
}

bool Partition::is_measurable(const std::vector<bool>& event) const {
  if (static_cast<int>(event.size()) != num_leaves()) return false;
  for (const auto& blk : data_->blocks) {
    bool first = event[static_cast<size_t>(blk.front())];
    for (int leaf : blk) {
      if (event[static_cast<size_t>(leaf)] != first) return false;
    }
  }
  return true;
}

bool operator==(const Partition& a, const Partition& b) {
  return a.data_->block_of == b.data_->block_of;
}

}  // namespace mcv
