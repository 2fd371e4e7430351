#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "a2d/detectors.hpp"
#include "a2d/error.hpp"

namespace a2d {
namespace {

void check_costs(std::span<const double> costs) {
  if (costs.size() < kMinFitCosts) {
    throw FitError("need at least " + std::to_string(kMinFitCosts) + " benign costs, got " +
                   std::to_string(costs.size()));
  }
  for (double c : costs) {
    if (!(c >= 0.0) || !std::isfinite(c)) throw InvalidInput("costs must be finite and non-negative");
  }
  if (std::all_of(costs.begin(), costs.end(), [&](double c) { return c == costs.front(); })) {
    throw FitError("benign costs are all equal to " + std::to_string(costs.front()) +
                   "; this defense attack cannot separate inputs, choose a different one");
  }
}

// Sample mean and (n - 1) standard deviation, two-pass.
std::pair<double, double> mean_sd(std::span<const double> v) {
  double mean = 0.0;
  for (double e : v) mean += e;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double e : v) ss += (e - mean) * (e - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

}  // namespace

double boxcox(double y, double lambda) {
  if (lambda == 0.0) return std::log(y);
  return (std::pow(y, lambda) - 1.0) / lambda;
}

double BoxCox::apply(double cost) const { return boxcox(cost + offset, lambda); }

double boxcox_log_likelihood(std::span<const double> costs, double lambda, double offset) {
  const double n = static_cast<double>(costs.size());
  double mean = 0.0;
  double log_sum = 0.0;
  for (double c : costs) {
    mean += boxcox(c + offset, lambda);
    log_sum += std::log(c + offset);
  }
  mean /= n;
  double ss = 0.0;
  for (double c : costs) {
    const double d = boxcox(c + offset, lambda) - mean;
    ss += d * d;
  }
  const double var = ss / n;
  if (!(var > 0.0) || !std::isfinite(var)) return -std::numeric_limits<double>::infinity();
  return -n / 2.0 * std::log(var) + (lambda - 1.0) * log_sum;
}

BoxCox boxcox_fit(std::span<const double> benign_costs) {
  check_costs(benign_costs);
  BoxCox best;
  double best_ll = -std::numeric_limits<double>::infinity();
  for (int i = -500; i <= 500; ++i) {
    const double lambda = i / 100.0;
    const double ll = boxcox_log_likelihood(benign_costs, lambda, best.offset);
    if (ll > best_ll) {
      best_ll = ll;
      best.lambda = lambda;
    }
  }
  if (!std::isfinite(best_ll)) throw FitError("Box-Cox log-likelihood is not finite anywhere on the grid");
  return best;
}

ZScoreDetector::ZScoreDetector(BoxCox transform, double mu, double sigma, double h)
    : transform_(transform), mu_(mu), sigma_(sigma), h_(h) {
  if (!(sigma_ > 0.0) || !std::isfinite(sigma_)) throw FitError("z-score sigma must be positive");
  if (!std::isfinite(mu_) || !std::isfinite(h_)) throw InvalidInput("z-score parameters must be finite");
  if (!(transform_.offset > 0.0)) throw InvalidInput("Box-Cox offset must be positive");
}

double ZScoreDetector::z(double cost) const { return (transform_.apply(cost) - mu_) / sigma_; }

Verdict ZScoreDetector::classify(double cost) const { return z(cost) < h_ ? Verdict::Adversarial : Verdict::Benign; }

ZScoreDetector zscore_fit(std::span<const double> benign_costs, double h, bool use_boxcox) {
  check_costs(benign_costs);
  const BoxCox t = use_boxcox ? boxcox_fit(benign_costs) : BoxCox{1.0, 1.0};
  std::vector<double> transformed;
  transformed.reserve(benign_costs.size());
  for (double c : benign_costs) transformed.push_back(t.apply(c));
  const auto [mu, sigma] = mean_sd(transformed);
  if (!(sigma > 0.0)) throw FitError("transformed benign costs have zero spread; choose a different defense attack");
  return ZScoreDetector(t, mu, sigma, h);
}

EnsembleZ::EnsembleZ(std::vector<ZScoreDetector> members, std::size_t vote_k)
    : members_(std::move(members)), vote_k_(vote_k) {
  if (members_.empty()) throw InvalidInput("ensemble needs at least one member");
  if (vote_k_ < 1 || vote_k_ > members_.size()) {
    throw InvalidInput("vote_k must lie in [1, " + std::to_string(members_.size()) + "]");
  }
}

std::size_t EnsembleZ::benign_votes(std::span<const double> costs) const {
  if (costs.size() != members_.size()) {
    throw InvalidInput("fingerprint has " + std::to_string(costs.size()) + " costs, ensemble has " +
                       std::to_string(members_.size()) + " members");
  }
  std::size_t votes = 0;
  for (std::size_t j = 0; j < members_.size(); ++j) {
    if (members_[j].classify(costs[j]) == Verdict::Benign) ++votes;
  }
  return votes;
}

Verdict EnsembleZ::classify(std::span<const double> costs) const {
  return benign_votes(costs) >= vote_k_ ? Verdict::Benign : Verdict::Adversarial;
}

Verdict EnsembleZ::classify(const Fingerprint& fp) const {
  std::vector<double> c(fp.costs.begin(), fp.costs.end());
  return classify(c);
}

std::vector<double> column(std::span<const Fingerprint> fps, std::size_t j, bool adversarial) {
  std::vector<double> out;
  for (const Fingerprint& fp : fps) {
    if (fp.adversarial() != adversarial) continue;
    if (j >= fp.costs.size()) throw InvalidInput("cost column out of range");
    out.push_back(static_cast<double>(fp.costs[j]));
  }
  return out;
}

EnsembleZ ensemble_z_fit(std::span<const Fingerprint> benign, std::size_t vote_k, double h) {
  if (benign.empty()) throw FitError("no benign fingerprints to fit");
  std::vector<ZScoreDetector> members;
  const std::size_t n = benign.front().costs.size();
  for (std::size_t j = 0; j < n; ++j) members.push_back(zscore_fit(column(benign, j, false), h));
  return EnsembleZ(std::move(members), vote_k);
}

}  // namespace a2d
