// Model file layout (all integers and reals little-endian):
//   "A2DM" | version u32 | layer count u32
//   per layer: kind u8 | in_dim u32 | out_dim u32 | [Dense: weights f64 x in*out, bias f64 x out]
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "a2d/error.hpp"
#include "a2d/nn.hpp"

namespace a2d {
namespace {

constexpr char kMagic[4] = {'A', '2', 'D', 'M'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64(std::string& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

class Reader {
 public:
  explicit Reader(std::string bytes) : bytes_(std::move(bytes)) {}

  std::size_t offset() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

  void need(std::size_t n, const char* what) const {
    if (remaining() < n) throw FormatError(std::string("model file truncated while reading ") + what, pos_);
  }

  std::uint8_t u8(const char* what) {
    need(1, what);
    return static_cast<std::uint8_t>(bytes_[pos_++]);
  }

  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }

  double f64() {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(bytes_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return std::bit_cast<double>(bits);
  }

  bool magic_matches() {
    need(4, "magic");
    const bool ok = std::memcmp(bytes_.data(), kMagic, 4) == 0;
    pos_ += 4;
    return ok;
  }

 private:
  std::string bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_model(const Model& model, const std::filesystem::path& path) {
  std::string out(kMagic, 4);
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(model.layers().size()));
  for (const Layer& l : model.layers()) {
    out.push_back(static_cast<char>(l.kind));
    put_u32(out, static_cast<std::uint32_t>(l.in_dim));
    put_u32(out, static_cast<std::uint32_t>(l.out_dim));
    if (l.kind == LayerKind::Dense) {
      for (double w : l.weights) put_f64(out, w);
      for (double b : l.bias) put_f64(out, b);
    }
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot open " + path.string() + " for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw Error("failed writing " + path.string());
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw MissingArtifact("cannot open model file " + path.string());
  Reader r(std::string(std::istreambuf_iterator<char>(f), {}));

  if (!r.magic_matches()) throw FormatError("bad magic in model file " + path.string(), 0);
  const std::uint32_t version = r.u32("version");
  if (version != kVersion) {
    throw FormatError("unsupported model format version " + std::to_string(version), r.offset() - 4);
  }
  const std::uint32_t count = r.u32("layer count");
  if (count == 0) throw FormatError("model file declares no layers", r.offset() - 4);

  std::vector<Layer> layers;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::string name = "layer " + std::to_string(i);
    const std::size_t start = r.offset();
    const std::uint8_t tag = r.u8("layer kind");
    Layer l;
    l.in_dim = r.u32("layer dims");
    l.out_dim = r.u32("layer dims");
    if (l.in_dim == 0 || l.out_dim == 0) throw FormatError(name + " has a zero dimension", start);
    if (!layers.empty() && layers.back().out_dim != l.in_dim) {
      throw FormatError(name + " declares " + std::to_string(l.in_dim) + " inputs but layer " +
                            std::to_string(i - 1) + " produces " + std::to_string(layers.back().out_dim),
                        start);
    }
    if (tag == static_cast<std::uint8_t>(LayerKind::Dense)) {
      l.kind = LayerKind::Dense;
      const std::size_t n = l.in_dim * l.out_dim;
      if (n / l.in_dim != l.out_dim || r.remaining() / 8 < n + l.out_dim) {
        throw FormatError(name + " parameters truncated (declared " + std::to_string(l.in_dim) + "x" +
                              std::to_string(l.out_dim) + ")",
                          r.offset());
      }
      l.weights.resize(n);
      for (double& w : l.weights) w = r.f64();
      l.bias.resize(l.out_dim);
      for (double& b : l.bias) b = r.f64();
    } else if (tag == static_cast<std::uint8_t>(LayerKind::ReLU)) {
      l.kind = LayerKind::ReLU;
      if (l.in_dim != l.out_dim) throw FormatError(name + " (ReLU) changes width", start);
    } else {
      throw FormatError(name + " has unknown kind tag " + std::to_string(tag), start);
    }
    layers.push_back(std::move(l));
  }
  if (r.remaining() != 0) throw FormatError("trailing bytes after last layer", r.offset());
  try {
    return Model(std::move(layers));
  } catch (const InvalidInput& e) {
    throw FormatError(e.what(), r.offset());
  }
}

}  // namespace a2d
