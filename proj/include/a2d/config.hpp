#pragma once

// Strict INI-style run configuration:
//
//   seed = 1            # global keys come before any section
//   out = runs/mnist
//   [data] [model] [detector] [sweep] [attack.<name>] [defense.<name>]
//
// Unknown sections or keys, duplicates and malformed values are errors that
// carry the offending line number.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "a2d/attacks.hpp"
#include "a2d/fingerprint.hpp"
#include "a2d/hardening.hpp"
#include "a2d/train.hpp"

namespace a2d {

struct DataSection {
  std::optional<std::filesystem::path> dir;
  std::string train_images = "train-images-idx3-ubyte";
  std::string train_labels = "train-labels-idx1-ubyte";
  std::string test_images = "t10k-images-idx3-ubyte";
  std::string test_labels = "t10k-labels-idx1-ubyte";
  std::size_t train_limit = 60000;
  std::size_t benign_count = 1000;  // benign test inputs to fingerprint
  std::size_t adv_count = 500;      // attack sources per adversarial corpus
  bool synthetic = false;           // Gaussian blobs instead of IDX files
  std::size_t synthetic_dim = 64;
};

struct ModelSection {
  std::vector<std::size_t> hidden{256, 128};
  TrainConfig train{0.1, 10, 32, 1, 1.0};
};

struct DetectorSection {
  std::string defense;  // single-attack z-score detector; empty = first defense
  std::size_t defense_line = 0;
  double h = kDefaultZThreshold;
  std::size_t vote_k = 2;
  std::size_t k = 100;
  double fit_fraction = 0.5;
};

struct SweepSection {
  std::vector<double> kappas{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20};
  double l2_cap = kMnistL2Cap;
  std::size_t count = 100;      // inputs crafted per kappa
  std::size_t benign_fit = 500; // benign inputs used to fit the cost rule
  AttackConfig cw = generation_defaults(AttackKind::CW_L2);
  double ae_fpr = kDefaultAeFpr;
  std::size_t ae_bottleneck = 32;
  std::size_t ae_hidden = 128;
  TrainConfig ae_train{5.0, 40, 32, 1, 1.0};  // MSE averages over outputs, hence the large step
  bool adversarial_training = false;
  AttackConfig pgd;
  TrainConfig at_train{0.1, 10, 32, 1, 1.0};
  std::size_t at_train_limit = 20000;

  SweepSection();
};

struct RunConfig {
  std::uint64_t seed = 1;
  std::filesystem::path out = "a2d-out";
  std::size_t workers = 1;
  DataSection data;
  ModelSection model;
  std::vector<DefenseAttack> attacks;   // [attack.<name>], file order
  std::vector<DefenseAttack> defenses;  // [defense.<name>], file order
  DetectorSection detector;
  SweepSection sweep;
  std::string source_text;

  // Defense index used by the single z-score detector.
  std::size_t primary_defense() const;
};

// Command-line flags; each one replaces the file value.
struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  std::optional<std::size_t> workers;
  std::optional<std::filesystem::path> data_dir;
};

RunConfig parse_config(std::string_view text, const ConfigOverrides& overrides = {});
RunConfig load_config(const std::filesystem::path& path, const ConfigOverrides& overrides = {});

// SHA-256 over the config text and the applied overrides.
std::string config_hash(const RunConfig& cfg, const ConfigOverrides& overrides);

}  // namespace a2d
