#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "a2d/attacks.hpp"
#include "a2d/data.hpp"
#include "a2d/nn.hpp"

namespace a2d {

// An attack run by the defender to measure how hard an input is to flip.
struct DefenseAttack {
  std::string name;
  AttackConfig config;
};

inline constexpr const char* kBenign = "benign";

struct Fingerprint {
  std::size_t example_id = 0;
  std::string origin = kBenign;  // "benign" or the generating attack's name
  std::vector<std::uint64_t> costs;
  std::size_t queries = 0;

  bool adversarial() const { return origin != kBenign; }
  friend bool operator==(const Fingerprint&, const Fingerprint&) = default;
};

// Attack-cost vector of x, one entry per defense in order. A failed defense
// attack records its max_iter. Each example gets its own RNG stream derived
// from (config seed, example_id).
Fingerprint fingerprint_one(const Model& model, const Tensor& x, std::span<const DefenseAttack> defenses,
                            std::size_t example_id = 0, std::string origin = kBenign,
                            const Dataset* pool = nullptr);

struct FingerprintBatch {
  std::vector<Fingerprint> fingerprints;
  std::size_t total_queries = 0;
};

// Example i of `data` gets id first_id + i. Output order follows the input
// regardless of `workers`.
FingerprintBatch fingerprint_batch(const Model& model, const Dataset& data, std::span<const DefenseAttack> defenses,
                                   std::size_t workers, const std::string& origin = kBenign,
                                   std::size_t first_id = 0, const Dataset* pool = nullptr);

struct FingerprintGroup {
  std::string name;
  std::vector<Fingerprint> members;
};

struct DistanceMatrix {
  std::vector<std::string> names;
  std::vector<double> values;  // row-major names.size() squared

  double at(std::size_t i, std::size_t j) const { return values[i * names.size() + j]; }
};

// Off-diagonal: Euclidean distance between group mean cost vectors.
// Diagonal: the same distance between the two halves of a seeded split
// (zero for a singleton group).
DistanceMatrix set_distance_matrix(std::span<const FingerprintGroup> groups, std::uint64_t seed = 0);

std::vector<double> mean_costs(std::span<const Fingerprint> fps);

// CSV columns: example_id, origin, cost_<defense>..., queries.
void write_fingerprints_csv(const std::filesystem::path& path, std::span<const Fingerprint> fps,
                            std::span<const std::string> defense_names);
std::string fingerprints_csv(std::span<const Fingerprint> fps, std::span<const std::string> defense_names);

struct FingerprintTable {
  std::vector<std::string> defense_names;
  std::vector<Fingerprint> fingerprints;
};
FingerprintTable read_fingerprints_csv(const std::filesystem::path& path);

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace a2d
