#pragma once

// Decision rules over attack-cost fingerprints. Lower cost means the input
// was easier to attack, which points toward an adversarial input.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "a2d/fingerprint.hpp"

namespace a2d {

enum class Verdict { Benign, Adversarial };
std::string_view to_string(Verdict v);

inline constexpr double kDefaultZThreshold = -1.281552;

// Keeps only the listed cost columns, in the listed order.
std::vector<Fingerprint> select_columns(std::span<const Fingerprint> fps, std::span<const std::size_t> columns);

class KnnDetector {
 public:
  // Throws InvalidInput when k is 0 or exceeds the reference count, or when
  // reference lengths differ.
  KnnDetector(std::vector<Fingerprint> references, std::size_t k);

  std::size_t k() const noexcept { return k_; }
  std::size_t dims() const noexcept { return dims_; }
  std::span<const Fingerprint> references() const noexcept { return refs_; }

  // Reference indices of the k nearest neighbours, nearest first. Equal
  // distances are ordered by example_id, then by reference position.
  std::vector<std::size_t> neighbors(std::span<const double> costs) const;

  // Adversarial iff strictly more adversarial than benign neighbours.
  Verdict classify(std::span<const double> costs) const;
  Verdict classify(const Fingerprint& fp) const;

 private:
  std::vector<Fingerprint> refs_;
  std::vector<double> matrix_;  // refs x dims
  std::size_t k_;
  std::size_t dims_;
};

KnnDetector knn_fit(std::vector<Fingerprint> references, std::size_t k = 100);

struct BoxCox {
  double lambda = 1.0;
  double offset = 1.0;

  double apply(double cost) const;
};

// Box-Cox of a positive value; log at lambda == 0.
double boxcox(double y, double lambda);

// Profile log-likelihood of lambda for the shifted costs:
//   -n/2 log(sigma^2_mle) + (lambda - 1) sum log(cost + offset)
double boxcox_log_likelihood(std::span<const double> costs, double lambda, double offset = 1.0);

// Lambda on the grid -5, -4.99, ..., 5 maximising the log-likelihood (the
// lowest lambda wins ties). Needs at least 30 non-negative, non-constant
// costs; constant costs raise FitError.
BoxCox boxcox_fit(std::span<const double> benign_costs);

inline constexpr std::size_t kMinFitCosts = 30;

class ZScoreDetector {
 public:
  ZScoreDetector(BoxCox transform, double mu, double sigma, double h);

  const BoxCox& transform() const noexcept { return transform_; }
  double mu() const noexcept { return mu_; }
  double sigma() const noexcept { return sigma_; }
  double threshold() const noexcept { return h_; }

  double z(double cost) const;
  // Adversarial iff z(cost) < h.
  Verdict classify(double cost) const;

 private:
  BoxCox transform_;
  double mu_;
  double sigma_;
  double h_;
};

// Fits Box-Cox (or the identity with offset 1 when `use_boxcox` is false),
// then the sample mean and standard deviation (n - 1) of the transformed
// benign costs.
ZScoreDetector zscore_fit(std::span<const double> benign_costs, double h = kDefaultZThreshold,
                          bool use_boxcox = true);

class EnsembleZ {
 public:
  EnsembleZ(std::vector<ZScoreDetector> members, std::size_t vote_k);

  std::span<const ZScoreDetector> members() const noexcept { return members_; }
  std::size_t vote_k() const noexcept { return vote_k_; }

  // Benign iff at least vote_k members say benign.
  Verdict classify(std::span<const double> costs) const;
  Verdict classify(const Fingerprint& fp) const;
  std::size_t benign_votes(std::span<const double> costs) const;

 private:
  std::vector<ZScoreDetector> members_;
  std::size_t vote_k_;
};

// One Z-score member per cost column, fitted on the benign fingerprints.
EnsembleZ ensemble_z_fit(std::span<const Fingerprint> benign, std::size_t vote_k = 2, double h = kDefaultZThreshold);

// Area under the ROC curve with adversarial as the positive class and lower
// cost as the stronger positive signal; ties count one half.
double auroc(std::span<const double> benign_costs, std::span<const double> adv_costs);

struct RocPoint {
  double threshold = 0.0;  // flag adversarial when cost <= threshold
  double fpr = 0.0;
  double tpr = 0.0;
};
// Starts at (0, 0) and ends at (1, 1), one point per distinct cost.
std::vector<RocPoint> roc_curve(std::span<const double> benign_costs, std::span<const double> adv_costs);

struct DetectionReport {
  std::size_t true_positive = 0;   // adversarial flagged
  std::size_t false_negative = 0;  // adversarial passed
  std::size_t true_negative = 0;   // benign passed
  std::size_t false_positive = 0;  // benign flagged
  double accuracy_benign = 0.0;
  double accuracy_adv = 0.0;
  double accuracy = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
  std::optional<double> auroc;
  double mean_queries_benign = 0.0;
  double mean_queries_adv = 0.0;
};

using FingerprintRule = std::function<Verdict(const Fingerprint&)>;
using FingerprintScore = std::function<double(const Fingerprint&)>;

// Needs both origins in the corpus. When `score` is given, the report also
// carries its AUROC (lower score means more adversarial).
DetectionReport evaluate(const FingerprintRule& rule, std::span<const Fingerprint> corpus,
                         const FingerprintScore& score = nullptr);

std::vector<double> column(std::span<const Fingerprint> fps, std::size_t j, bool adversarial);

}  // namespace a2d
