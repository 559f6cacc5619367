#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dataset.hpp"

namespace lcfed {

enum class PartitionMode { dirichlet, pathological };

struct PartitionSpec {
    PartitionMode mode = PartitionMode::dirichlet;
    double alpha = 0.1;          // dirichlet concentration
    int labels_per_device = 3;   // pathological label budget
    int m = 100;                 // device count
    std::uint64_t seed = 0;
};

// Clustered synthetic classification task with known ground truth: devices
// are dealt round-robin onto K_true concepts; each concept is a random
// linear-softmax teacher over a shared standard-normal input distribution
// and labels are the teacher's argmax. Each device gets
// `samples_per_device` training examples plus a test set of one fifth that
// size (at least 1).
std::vector<DeviceShard> make_synthetic_clusters(int k_true, int m,
                                                 int input_dim, int classes,
                                                 int samples_per_device,
                                                 std::uint64_t seed);

// Routes each class across devices by Dirichlet(alpha) proportions. Any
// device left empty afterwards steals one example from the largest shard.
// The union of shards is exactly the input dataset; each shard is split
// 80/20 into train/test, stratified by label where the shard allows.
std::vector<DeviceShard> dirichlet_partition(const Examples& dataset,
                                             const PartitionSpec& spec);

// Gives each device examples from exactly `labels_per_device` distinct
// labels: examples are sorted by label, sliced into m*n contiguous shards
// of near-equal size (shard boundaries never straddle a label), and dealt
// n shards per device round-robin over the label ring.
std::vector<DeviceShard> pathological_partition(const Examples& dataset,
                                                const PartitionSpec& spec);

// Parsed IDX file: images (pixels scaled to [0,1], flattened row-major) or
// labels, depending on the magic number.
struct IdxData {
    bool is_images = false;
    std::size_t count = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> images; // count * rows * cols when is_images
    std::vector<int> labels;    // count entries otherwise
};

// Big-endian IDX reader; accepts magic 0x00000803 (unsigned-byte images,
// dims [count, rows, cols]) and 0x00000801 (labels, dims [count]). Throws
// FormatError naming the byte offset on malformed input.
IdxData load_idx(const std::string& path);

// Convenience: pairs an image file with a label file into one dataset.
Examples load_idx_dataset(const std::string& images_path,
                          const std::string& labels_path);

} // namespace lcfed
