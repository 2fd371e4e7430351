#include <algorithm>
#include <numeric>
#include <string>

#include "a2d/detectors.hpp"
#include "a2d/error.hpp"
#include "a2d/simd/kernels.hpp"

namespace a2d {

std::string_view to_string(Verdict v) { return v == Verdict::Benign ? "benign" : "adversarial"; }

std::vector<Fingerprint> select_columns(std::span<const Fingerprint> fps, std::span<const std::size_t> columns) {
  std::vector<Fingerprint> out;
  out.reserve(fps.size());
  for (const Fingerprint& fp : fps) {
    Fingerprint p = fp;
    p.costs.clear();
    for (std::size_t c : columns) {
      if (c >= fp.costs.size()) throw InvalidInput("cost column " + std::to_string(c) + " out of range");
      p.costs.push_back(fp.costs[c]);
    }
    out.push_back(std::move(p));
  }
  return out;
}

KnnDetector::KnnDetector(std::vector<Fingerprint> references, std::size_t k) : refs_(std::move(references)), k_(k) {
  if (refs_.empty()) throw InvalidInput("K-NN needs reference fingerprints");
  if (k_ == 0) throw InvalidInput("K must be positive");
  if (k_ > refs_.size()) {
    throw InvalidInput("K=" + std::to_string(k_) + " exceeds the " + std::to_string(refs_.size()) + " references");
  }
  dims_ = refs_.front().costs.size();
  if (dims_ == 0) throw InvalidInput("reference fingerprints carry no costs");
  matrix_.reserve(refs_.size() * dims_);
  for (const Fingerprint& fp : refs_) {
    if (fp.costs.size() != dims_) throw InvalidInput("reference fingerprints have different lengths");
    for (std::uint64_t c : fp.costs) matrix_.push_back(static_cast<double>(c));
  }
}

std::vector<std::size_t> KnnDetector::neighbors(std::span<const double> costs) const {
  if (costs.size() != dims_) {
    throw InvalidInput("fingerprint has " + std::to_string(costs.size()) + " costs, detector expects " +
                       std::to_string(dims_));
  }
  const auto& kern = simd::active();
  std::vector<double> dist(refs_.size());
  for (std::size_t r = 0; r < refs_.size(); ++r) {
    dist[r] = kern.squared_distance(matrix_.data() + r * dims_, costs.data(), dims_);
  }
  std::vector<std::size_t> idx(refs_.size());
  std::iota(idx.begin(), idx.end(), 0);
  const auto closer = [&](std::size_t a, std::size_t b) {
    if (dist[a] != dist[b]) return dist[a] < dist[b];
    if (refs_[a].example_id != refs_[b].example_id) return refs_[a].example_id < refs_[b].example_id;
    return a < b;
  };
  std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k_ - 1), idx.end(), closer);
  idx.resize(k_);
  std::sort(idx.begin(), idx.end(), closer);
  return idx;
}

Verdict KnnDetector::classify(std::span<const double> costs) const {
  std::size_t adv = 0;
  for (std::size_t r : neighbors(costs)) adv += refs_[r].adversarial() ? 1 : 0;
  return adv > k_ - adv ? Verdict::Adversarial : Verdict::Benign;
}

Verdict KnnDetector::classify(const Fingerprint& fp) const {
  std::vector<double> c(fp.costs.begin(), fp.costs.end());
  return classify(c);
}

KnnDetector knn_fit(std::vector<Fingerprint> references, std::size_t k) { return KnnDetector(std::move(references), k); }

}  // namespace a2d
