#include "a2d/data.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <numeric>
#include <random>

#include "a2d/error.hpp"

namespace a2d {

Dataset::Dataset(std::string name, std::size_t num_classes, std::size_t input_dim, std::vector<Example> examples)
    : name_(std::move(name)), num_classes_(num_classes), input_dim_(input_dim), examples_(std::move(examples)) {
  if (num_classes_ == 0) throw InvalidInput("dataset needs at least one class");
  if (input_dim_ == 0) throw InvalidInput("dataset input width must be positive");
  for (std::size_t i = 0; i < examples_.size(); ++i) {
    const Example& e = examples_[i];
    if (e.pixels.size() != input_dim_) {
      throw InvalidInput("example " + std::to_string(i) + " has " + std::to_string(e.pixels.size()) +
                         " values, dataset width is " + std::to_string(input_dim_));
    }
    if (e.label >= num_classes_) throw InvalidInput("example " + std::to_string(i) + " label out of range");
    for (double v : e.pixels.values()) {
      if (!(v >= 0.0 && v <= 1.0)) throw InvalidInput("example " + std::to_string(i) + " has a pixel outside [0,1]");
    }
  }
}

Dataset Dataset::subset(std::span<const std::size_t> indices, std::string name) const {
  std::vector<Example> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= examples_.size()) throw InvalidInput("subset index out of range");
    out.push_back(examples_[i]);
  }
  return Dataset(std::move(name), num_classes_, input_dim_, std::move(out));
}

Dataset Dataset::head(std::size_t n, std::string name) const {
  std::vector<std::size_t> idx(std::min(n, examples_.size()));
  std::iota(idx.begin(), idx.end(), 0);
  return subset(idx, std::move(name));
}

namespace {

std::string read_all(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw MissingArtifact("cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(f), {});
}

std::uint32_t be32(const std::string& b, std::size_t off) {
  if (b.size() < off + 4) throw FormatError("IDX header truncated", b.size());
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v = (v << 8) | static_cast<std::uint8_t>(b[off + i]);
  return v;
}

void put_be32(std::string& out, std::uint32_t v) {
  for (int i = 3; i >= 0; --i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot open " + path.string() + " for writing");
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw Error("failed writing " + path.string());
}

}  // namespace

namespace {

std::vector<Tensor> parse_images(const std::string& img, const std::filesystem::path& images,
                                 std::optional<std::size_t> limit, std::size_t& count_out) {
  const std::uint32_t img_magic = be32(img, 0);
  if (img_magic != 0x00000803u && img_magic != 0x00000E03u) {
    throw FormatError("images file " + images.string() + " has bad magic", 0);
  }
  const std::size_t count = be32(img, 4);
  const std::size_t rows = be32(img, 8);
  const std::size_t cols = be32(img, 12);
  count_out = count;
  const std::size_t dim = rows * cols;
  if (dim == 0) throw FormatError("images have zero size", 8);
  const std::size_t elem = img_magic == 0x00000803u ? 1 : 8;
  if (img.size() < 16 + count * dim * elem) {
    throw FormatError("images file truncated", img.size());
  }

  const std::size_t n = limit ? std::min(*limit, count) : count;
  std::vector<Tensor> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> px(dim);
    const std::size_t base = 16 + i * dim * elem;
    if (elem == 1) {
      for (std::size_t j = 0; j < dim; ++j) px[j] = static_cast<std::uint8_t>(img[base + j]) / 255.0;
    } else {
      for (std::size_t j = 0; j < dim; ++j) {
        std::uint64_t bits = 0;
        for (int k = 0; k < 8; ++k) bits = (bits << 8) | static_cast<std::uint8_t>(img[base + j * 8 + k]);
        px[j] = std::bit_cast<double>(bits);
        if (!(px[j] >= 0.0 && px[j] <= 1.0)) throw FormatError("pixel outside [0,1]", base + j * 8);
      }
    }
    out.push_back(Tensor::vector(std::move(px)));
  }
  return out;
}

}  // namespace

std::vector<Tensor> load_idx_images(const std::filesystem::path& images, std::optional<std::size_t> limit) {
  std::size_t count = 0;
  return parse_images(read_all(images), images, limit, count);
}

Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                 std::size_t num_classes, std::optional<std::size_t> limit) {
  const std::string img = read_all(images);
  const std::string lab = read_all(labels);

  const std::uint32_t lab_magic = be32(lab, 0);
  if (lab_magic != 0x00000801u) throw FormatError("labels file " + labels.string() + " has bad magic", 0);
  std::size_t count = 0;
  std::vector<Tensor> pixels = parse_images(img, images, limit, count);
  const std::size_t label_count = be32(lab, 4);
  if (count != label_count) {
    throw FormatError("image count " + std::to_string(count) + " does not match label count " +
                          std::to_string(label_count),
                      4);
  }
  if (lab.size() < 8 + count) throw FormatError("labels file truncated", lab.size());

  const std::size_t dim = be32(img, 8) * be32(img, 12);
  std::vector<Example> examples;
  examples.reserve(pixels.size());
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    const std::size_t label = static_cast<std::uint8_t>(lab[8 + i]);
    if (label >= num_classes) throw FormatError("label " + std::to_string(label) + " out of range", 8 + i);
    examples.push_back(Example{std::move(pixels[i]), label});
  }
  return Dataset(images.stem().string(), num_classes, dim, std::move(examples));
}

void write_idx(const Dataset& data, const std::filesystem::path& images, const std::filesystem::path& labels,
               IdxPixelType type) {
  const std::size_t dim = data.input_dim();
  auto side = static_cast<std::size_t>(std::lround(std::sqrt(static_cast<double>(dim))));
  const bool square = side * side == dim;

  std::string img;
  put_be32(img, 0x00000800u | static_cast<std::uint32_t>(type) << 8 | 3u);
  put_be32(img, static_cast<std::uint32_t>(data.size()));
  put_be32(img, static_cast<std::uint32_t>(square ? side : 1));
  put_be32(img, static_cast<std::uint32_t>(square ? side : dim));
  for (const Example& e : data) {
    for (double v : e.pixels.values()) {
      if (type == IdxPixelType::UnsignedByte) {
        img.push_back(static_cast<char>(static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0))));
      } else {
        const auto bits = std::bit_cast<std::uint64_t>(v);
        for (int k = 7; k >= 0; --k) img.push_back(static_cast<char>((bits >> (8 * k)) & 0xFF));
      }
    }
  }
  std::string lab;
  put_be32(lab, 0x00000801u);
  put_be32(lab, static_cast<std::uint32_t>(data.size()));
  for (const Example& e : data) lab.push_back(static_cast<char>(static_cast<std::uint8_t>(e.label)));

  write_file(images, img);
  write_file(labels, lab);
}

std::pair<Dataset, Dataset> split(const Dataset& data, std::size_t train_n, std::size_t test_n,
                                  std::uint64_t seed) {
  if (train_n + test_n > data.size()) {
    throw InvalidInput("cannot split " + std::to_string(data.size()) + " examples into " +
                       std::to_string(train_n) + " + " + std::to_string(test_n));
  }
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const std::span<const std::size_t> all(order);
  return {data.subset(all.subspan(0, train_n), data.name() + "-train"),
          data.subset(all.subspan(train_n, test_n), data.name() + "-test")};
}

std::vector<std::vector<double>> blob_centers(std::size_t num_classes, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pos(0.25, 0.75);
  std::vector<std::vector<double>> centers(num_classes, std::vector<double>(dim));
  for (auto& c : centers) {
    for (double& v : c) v = pos(rng);
  }
  return centers;
}

Dataset synthetic_blobs(std::size_t num_classes, std::size_t per_class, std::size_t dim, double spread,
                        std::uint64_t seed) {
  if (num_classes == 0 || per_class == 0 || dim == 0 || !(spread > 0.0)) {
    throw InvalidInput("synthetic_blobs parameters must be positive");
  }
  const auto centers = blob_centers(num_classes, dim, seed);
  std::mt19937_64 rng(seed ^ 0x9E3779B97F4A7C15ull);
  std::normal_distribution<double> noise(0.0, spread);
  std::vector<Example> examples;
  examples.reserve(num_classes * per_class);
  for (std::size_t c = 0; c < num_classes; ++c) {
    for (std::size_t k = 0; k < per_class; ++k) {
      std::vector<double> px(dim);
      for (std::size_t j = 0; j < dim; ++j) px[j] = std::clamp(centers[c][j] + noise(rng), 0.0, 1.0);
      examples.push_back(Example{Tensor::vector(std::move(px)), c});
    }
  }
  return Dataset("blobs", num_classes, dim, std::move(examples));
}

std::filesystem::path resolve_data_dir(const std::optional<std::filesystem::path>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("A2D_DATA_DIR"); env != nullptr && *env != '\0') return env;
  return "data";
}

}  // namespace a2d
