#include <algorithm>
#include <cmath>

#include "a2d/detectors.hpp"
#include "a2d/error.hpp"

namespace a2d {
namespace {

void check_classes(std::span<const double> benign, std::span<const double> adv) {
  if (benign.empty() || adv.empty()) throw InvalidInput("AUROC needs at least one benign and one adversarial cost");
}

}  // namespace

double auroc(std::span<const double> benign_costs, std::span<const double> adv_costs) {
  check_classes(benign_costs, adv_costs);
  // Mann-Whitney: rank all costs descending (highest cost gets rank 1) with
  // midranks for ties, then U of the adversarial sample.
  struct Item {
    double cost;
    bool adv;
  };
  std::vector<Item> all;
  all.reserve(benign_costs.size() + adv_costs.size());
  for (double c : benign_costs) all.push_back({c, false});
  for (double c : adv_costs) all.push_back({c, true});
  std::sort(all.begin(), all.end(), [](const Item& a, const Item& b) { return a.cost > b.cost; });

  double rank_sum = 0.0;  // doubled midranks keep the sum integral
  for (std::size_t i = 0; i < all.size();) {
    std::size_t j = i;
    while (j < all.size() && all[j].cost == all[i].cost) ++j;
    const double twice_mid = static_cast<double>(i + 1 + j);  // 2 * mean of ranks i+1..j
    for (std::size_t k = i; k < j; ++k) {
      if (all[k].adv) rank_sum += twice_mid;
    }
    i = j;
  }
  const double m = static_cast<double>(adv_costs.size());
  const double n = static_cast<double>(benign_costs.size());
  const double u = rank_sum / 2.0 - m * (m + 1.0) / 2.0;
  return u / (m * n);
}

std::vector<RocPoint> roc_curve(std::span<const double> benign_costs, std::span<const double> adv_costs) {
  check_classes(benign_costs, adv_costs);
  std::vector<double> b(benign_costs.begin(), benign_costs.end());
  std::vector<double> a(adv_costs.begin(), adv_costs.end());
  std::sort(b.begin(), b.end());
  std::sort(a.begin(), a.end());
  std::vector<double> thresholds;
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(thresholds));
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  std::vector<RocPoint> curve;
  curve.push_back({-INFINITY, 0.0, 0.0});
  std::size_t ib = 0, ia = 0;
  for (double t : thresholds) {
    while (ib < b.size() && b[ib] <= t) ++ib;
    while (ia < a.size() && a[ia] <= t) ++ia;
    curve.push_back({t, static_cast<double>(ib) / static_cast<double>(b.size()),
                     static_cast<double>(ia) / static_cast<double>(a.size())});
  }
  return curve;
}

}  // namespace a2d
