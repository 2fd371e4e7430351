#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "a2d/tensor.hpp"

namespace a2d {

struct Example {
  Tensor pixels;  // values in [0, 1]
  std::size_t label = 0;
};

// Immutable list of labelled examples sharing one input width.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::string name, std::size_t num_classes, std::size_t input_dim, std::vector<Example> examples);

  const std::string& name() const noexcept { return name_; }
  std::size_t num_classes() const noexcept { return num_classes_; }
  std::size_t input_dim() const noexcept { return input_dim_; }
  std::size_t size() const noexcept { return examples_.size(); }
  bool empty() const noexcept { return examples_.empty(); }

  const Example& operator[](std::size_t i) const { return examples_[i]; }
  std::span<const Example> examples() const noexcept { return examples_; }
  auto begin() const noexcept { return examples_.begin(); }
  auto end() const noexcept { return examples_.end(); }

  Dataset subset(std::span<const std::size_t> indices, std::string name) const;
  Dataset head(std::size_t n, std::string name) const;

 private:
  std::string name_;
  std::size_t num_classes_ = 0;
  std::size_t input_dim_ = 0;
  std::vector<Example> examples_;
};

enum class IdxPixelType : std::uint8_t {
  UnsignedByte = 0x08,  // scaled by 1/255 on load
  Float64 = 0x0E,       // stored as-is; used for adversarial corpora
};

// Reads an IDX image/label pair (big-endian headers). Image files may hold
// unsigned bytes or 64-bit reals; label files must hold unsigned bytes.
Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                 std::size_t num_classes = 10, std::optional<std::size_t> limit = std::nullopt);

// Image half of an IDX pair, e.g. a single input to classify.
std::vector<Tensor> load_idx_images(const std::filesystem::path& images,
                                    std::optional<std::size_t> limit = std::nullopt);

// Images are written as rows x cols when the width is a perfect square,
// otherwise as a single row.
void write_idx(const Dataset& data, const std::filesystem::path& images, const std::filesystem::path& labels,
               IdxPixelType type = IdxPixelType::UnsignedByte);

// Disjoint seeded partition: the first train_n of a shuffled order, then test_n.
std::pair<Dataset, Dataset> split(const Dataset& data, std::size_t train_n, std::size_t test_n,
                                  std::uint64_t seed);

// Gaussian blobs around distinct centres in [0.25, 0.75]^dim, clipped to [0, 1].
// Examples are ordered class by class.
Dataset synthetic_blobs(std::size_t num_classes, std::size_t per_class, std::size_t dim, double spread,
                        std::uint64_t seed);

// Centres used by synthetic_blobs for the same (num_classes, dim, seed).
std::vector<std::vector<double>> blob_centers(std::size_t num_classes, std::size_t dim, std::uint64_t seed);

// --data-dir flag, then $A2D_DATA_DIR, then ./data.
std::filesystem::path resolve_data_dir(const std::optional<std::filesystem::path>& flag);

}  // namespace a2d
